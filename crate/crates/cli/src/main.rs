//! `solun` — solve, generalize, verify and export unification problems.
//!
//! Exit codes: 0 = a verdict was computed (including `no_information` and
//! empty complete sets), 1 = input error, 2 = internal invariant violation.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use solun_core::general::general_solve;
use solun_core::oracle::verify_solution;
use solun_core::problem::{is_linear, Problem};
use solun_core::report::{general_report, linear_report, verify_report, RunReport};
use solun_core::solver::export::{export_tree, ExportFormat};
use solun_core::solver::{canonical_instance, finalize_node, solve_linear, FinalizedResult};
use solun_core::syntax::{parse_problem, parse_substitution};
use solun_core::term::Name;

#[derive(Parser)]
#[command(name = "solun", version, about = "Second-order linear unification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a linear problem, reporting every pre-unifier/unifier.
    Solve {
        /// Problem file.
        file: PathBuf,
        /// Write the unification tree to a `.dot` or `.json` file.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Re-verify every emitted solution; abort on mismatch.
        #[arg(long)]
        paranoid: bool,
    },
    /// Run the general procedure: a complete set of unifiers or an
    /// explicit no-information verdict.
    General {
        /// Problem file.
        file: PathBuf,
        /// Re-verify every emitted solution; abort on mismatch.
        #[arg(long)]
        paranoid: bool,
    },
    /// Check a substitution file against a problem.
    Verify {
        /// Problem file.
        file: PathBuf,
        /// Substitution file (`IDENT = term .` bindings).
        #[arg(long)]
        subst: PathBuf,
    },
}

enum RunError {
    Input(String),
    Internal(String),
}

fn input_err(e: impl std::fmt::Display) -> RunError {
    RunError::Input(e.to_string())
}

fn read_problem(path: &PathBuf) -> Result<Problem, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text).map_err(input_err)
}

fn run() -> Result<RunReport, RunError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            file,
            tree,
            paranoid,
        } => {
            let problem = read_problem(&file)?;
            let original_vars: BTreeSet<Name> = problem.variables.keys().cloned().collect();
            let (superficial, _trace) =
                solun_core::superficialize::superficialize(&problem).map_err(input_err)?;
            if !is_linear(&superficial) {
                return Err(RunError::Input(
                    "problem is not linear; use `solun general` instead".to_string(),
                ));
            }
            let solution = solve_linear(&superficial).map_err(input_err)?;
            let finalized: Vec<FinalizedResult> =
                solution.successes.iter().map(finalize_node).collect();

            if let Some(out) = tree {
                let format = match out.extension().and_then(|e| e.to_str()) {
                    Some("dot") => ExportFormat::Dot,
                    Some("json") => ExportFormat::Json,
                    _ => {
                        return Err(RunError::Input(
                            "tree output must end in .dot or .json".to_string(),
                        ))
                    }
                };
                let rendered = export_tree(&solution.tree, format);
                std::fs::write(&out, rendered).map_err(|e| {
                    RunError::Input(format!("cannot write {}: {e}", out.display()))
                })?;
            }

            if paranoid {
                for f in &finalized {
                    let instance = canonical_instance(f);
                    if !verify_solution(&instance, &superficial) {
                        return Err(RunError::Internal(format!(
                            "emitted solution {} fails re-verification",
                            f.unifier()
                        )));
                    }
                    if !verify_solution(&instance.restricted(&original_vars), &problem)
                        && !verify_solution(&instance, &problem)
                    {
                        return Err(RunError::Internal(format!(
                            "emitted solution {} does not solve the input problem",
                            f.unifier()
                        )));
                    }
                }
            }

            Ok(linear_report(&solution, &finalized, &original_vars))
        }
        Command::General { file, paranoid } => {
            let problem = read_problem(&file)?;
            let outcome = match general_solve(&problem) {
                Ok(o) => o,
                Err(solun_core::general::GeneralError::Invalid(e)) => return Err(input_err(e)),
                Err(solun_core::general::GeneralError::Internal(e)) => {
                    return Err(RunError::Internal(e))
                }
            };
            if paranoid {
                if let solun_core::general::GeneralResult::CompleteSet(answers) = &outcome.result {
                    for answer in answers {
                        if !verify_solution(answer, &problem) {
                            return Err(RunError::Internal(format!(
                                "emitted answer {answer} fails re-verification"
                            )));
                        }
                    }
                }
            }
            Ok(general_report(&outcome))
        }
        Command::Verify { file, subst } => {
            let problem = read_problem(&file)?;
            let text = std::fs::read_to_string(&subst)
                .map_err(|e| RunError::Input(format!("cannot read {}: {e}", subst.display())))?;
            let substitution = parse_substitution(&text, &problem).map_err(input_err)?;
            let failing = problem.equations.iter().find(|eq| {
                !solun_core::term::beta_eta_equal(
                    &substitution.apply(&eq.left),
                    &substitution.apply(&eq.right),
                )
                .unwrap_or(false)
            });
            let verified = failing.is_none();
            Ok(verify_report(&substitution, verified, failing))
        }
    }
}

fn main() -> ExitCode {
    match std::panic::catch_unwind(run) {
        Ok(Ok(report)) => {
            println!("{}", report.to_json());
            ExitCode::from(0)
        }
        Ok(Err(RunError::Input(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(RunError::Internal(msg))) => {
            eprintln!("internal invariant violation: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("internal invariant violation: unexpected panic");
            ExitCode::from(2)
        }
    }
}

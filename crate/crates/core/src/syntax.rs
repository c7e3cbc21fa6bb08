//! The concrete syntax for problem files, terms and substitution files.
//!
//! ```text
//! file      := (decl | equation)*
//! decl      := "type" IDENT "." | "const" IDENT ":" type "." | "var" IDENT ":" type "."
//! type      := IDENT | type "->" type          -- right-associative
//! equation  := "eq" term "=" term "."
//! term      := IDENT | "(" term ")" | term term | "\" IDENT ":" type "." term
//! IDENT     := [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! `--` starts a comment running to the end of the line. Names starting
//! with `#` are reserved for generated symbols and rejected in user input;
//! the lenient term parser used to reparse engine output additionally
//! accepts annotated atoms like `(#h1 : i -> i)` for such names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::problem::{Problem, ValidateError};
use crate::subst::Substitution;
use crate::term::{Name, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid problem: {0}")]
    Invalid(#[from] ValidateError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Lambda,
    LParen,
    RParen,
    Colon,
    Dot,
    Equals,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Lambda => write!(f, "`\\`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Arrow => write!(f, "`->`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> char {
        let c = self.chars.next().unwrap();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        c
    }
}

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(&c) = lx.chars.peek() {
        let (line, column) = (lx.line, lx.column);
        let mut push = |tok: Tok| out.push(Token { tok, line, column });
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                lx.bump();
            }
            '-' => {
                lx.bump();
                match lx.chars.peek() {
                    Some('-') => {
                        while let Some(&c) = lx.chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            lx.bump();
                        }
                    }
                    Some('>') => {
                        lx.bump();
                        push(Tok::Arrow);
                    }
                    _ => {
                        return Err(SyntaxError {
                            line,
                            column,
                            message: "expected `--` comment or `->`".into(),
                        })
                    }
                }
            }
            '\\' => {
                lx.bump();
                push(Tok::Lambda);
            }
            '(' => {
                lx.bump();
                push(Tok::LParen);
            }
            ')' => {
                lx.bump();
                push(Tok::RParen);
            }
            ':' => {
                lx.bump();
                push(Tok::Colon);
            }
            '.' => {
                lx.bump();
                push(Tok::Dot);
            }
            '=' => {
                lx.bump();
                push(Tok::Equals);
            }
            c if c.is_ascii_alphabetic() || c == '#' => {
                let mut ident = String::new();
                ident.push(lx.bump());
                while let Some(&c) = lx.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(lx.bump());
                    } else {
                        break;
                    }
                }
                push(Tok::Ident(ident));
            }
            other => {
                return Err(SyntaxError {
                    line,
                    column,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Whether `#`-prefixed identifiers are accepted. Only internal callers
/// reparsing engine output use [`Mode::Lenient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Lenient,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    mode: Mode,
    sorts: BTreeSet<Name>,
    constants: BTreeMap<Name, Type>,
    variables: BTreeMap<Name, Type>,
}

impl Parser {
    fn for_problem(tokens: Vec<Token>, problem: &Problem, mode: Mode) -> Parser {
        Parser {
            tokens,
            pos: 0,
            mode,
            sorts: problem.sorts.clone(),
            constants: problem.constants.clone(),
            variables: problem.variables.clone(),
        }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> SyntaxError {
        match self.tokens.get(pos) {
            Some(t) => SyntaxError {
                line: t.line,
                column: t.column,
                message: message.into(),
            },
            None => {
                let (line, column) = self
                    .tokens
                    .last()
                    .map(|t| (t.line, t.column + 1))
                    .unwrap_or((1, 1));
                SyntaxError {
                    line,
                    column,
                    message: message.into(),
                }
            }
        }
    }

    fn error_here(&self, message: impl Into<String>) -> SyntaxError {
        self.error_at(self.pos, message)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.tok)
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error_here(format!("expected {tok}, found {t}"))),
            None => Err(self.error_here(format!("expected {tok}, found end of input"))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize), SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                let at = self.pos;
                self.pos += 1;
                Ok((s, at))
            }
            Some(t) => Err(self.error_here(format!("expected identifier, found {t}"))),
            None => Err(self.error_here("expected identifier, found end of input")),
        }
    }

    fn check_user_name(&self, name: &str, at: usize) -> Result<(), SyntaxError> {
        if self.mode == Mode::Strict && name.starts_with('#') {
            return Err(self.error_at(
                at,
                format!("name `{name}` uses the reserved `#` namespace for generated symbols"),
            ));
        }
        Ok(())
    }

    fn parse_type(&mut self) -> Result<Type, SyntaxError> {
        let lhs = match self.peek() {
            Some(Tok::Ident(_)) => {
                let (name, at) = self.expect_ident()?;
                if !self.sorts.contains(&Name::new(name.as_str())) {
                    return Err(self.error_at(at, format!("`{name}` is not a declared sort")));
                }
                Type::base(name.as_str())
            }
            Some(Tok::LParen) => {
                self.expect(Tok::LParen)?;
                let t = self.parse_type()?;
                self.expect(Tok::RParen)?;
                t
            }
            _ => return Err(self.error_here("expected a type")),
        };
        if self.peek() == Some(&Tok::Arrow) {
            self.expect(Tok::Arrow)?;
            let rhs = self.parse_type()?;
            Ok(Type::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_term(&mut self, binders: &mut Vec<(String, Type)>) -> Result<Term, SyntaxError> {
        if self.peek() == Some(&Tok::Lambda) {
            self.expect(Tok::Lambda)?;
            let (name, at) = self.expect_ident()?;
            self.check_user_name(&name, at)?;
            self.expect(Tok::Colon)?;
            let ty = self.parse_type()?;
            self.expect(Tok::Dot)?;
            binders.push((name, ty.clone()));
            let body = self.parse_term(binders)?;
            binders.pop();
            return Ok(Term::abs(ty, body));
        }
        let mut term = self.parse_atom(binders)?;
        while matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen)) {
            let arg = self.parse_atom(binders)?;
            term = Term::app(term, arg);
        }
        Ok(term)
    }

    fn parse_atom(&mut self, binders: &mut Vec<(String, Type)>) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.expect(Tok::LParen)?;
                // Lenient mode accepts `(name : type)` annotated atoms for
                // generated symbols.
                if self.mode == Mode::Lenient {
                    if let (Some(Tok::Ident(name)), Some(Tok::Colon)) = (self.peek(), self.peek2())
                    {
                        let name = name.clone();
                        self.pos += 2;
                        let ty = self.parse_type()?;
                        self.expect(Tok::RParen)?;
                        return Ok(Term::var(name.as_str(), ty));
                    }
                }
                let t = self.parse_term(binders)?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(_)) => {
                let (name, at) = self.expect_ident()?;
                self.check_user_name(&name, at)?;
                if let Some(i) = binders.iter().rev().position(|(n, _)| *n == name) {
                    return Ok(Term::Bound(i));
                }
                let n = Name::new(name.as_str());
                if let Some(ty) = self.constants.get(&n) {
                    Ok(Term::constant(n, ty.clone()))
                } else if let Some(ty) = self.variables.get(&n) {
                    Ok(Term::var(n, ty.clone()))
                } else {
                    Err(self.error_at(at, format!("symbol `{name}` is not declared")))
                }
            }
            _ => Err(self.error_here("expected a term")),
        }
    }
}

/// Parses a problem file: declarations and equations in any interleaving,
/// every symbol declared before use.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        mode: Mode::Strict,
        sorts: BTreeSet::new(),
        constants: BTreeMap::new(),
        variables: BTreeMap::new(),
    };
    let mut raw_equations: Vec<(Term, Term)> = Vec::new();

    while !parser.at_end() {
        let (keyword, kw_at) = parser.expect_ident()?;
        match keyword.as_str() {
            "type" => {
                let (name, at) = parser.expect_ident()?;
                parser.check_user_name(&name, at)?;
                parser.expect(Tok::Dot)?;
                parser.sorts.insert(Name::new(name.as_str()));
            }
            "const" | "var" => {
                let (name, at) = parser.expect_ident()?;
                parser.check_user_name(&name, at)?;
                parser.expect(Tok::Colon)?;
                let ty = parser.parse_type()?;
                parser.expect(Tok::Dot)?;
                let n = Name::new(name.as_str());
                if parser.constants.contains_key(&n) || parser.variables.contains_key(&n) {
                    return Err(parser
                        .error_at(at, format!("symbol `{name}` is declared twice"))
                        .into());
                }
                if keyword == "const" {
                    parser.constants.insert(n, ty);
                } else {
                    parser.variables.insert(n, ty);
                }
            }
            "eq" => {
                let mut binders = Vec::new();
                let left = parser.parse_term(&mut binders)?;
                parser.expect(Tok::Equals)?;
                let right = parser.parse_term(&mut binders)?;
                parser.expect(Tok::Dot)?;
                raw_equations.push((left, right));
            }
            other => {
                return Err(parser
                    .error_at(
                        kw_at,
                        format!("expected `type`, `const`, `var` or `eq`, found `{other}`"),
                    )
                    .into());
            }
        }
    }

    let Parser {
        sorts,
        constants,
        variables,
        ..
    } = parser;
    Ok(Problem::new(sorts, constants, variables, raw_equations)?)
}

/// Parses a single term against a problem's declarations.
pub fn parse_term(text: &str, problem: &Problem, mode: Mode) -> Result<Term, SyntaxError> {
    let tokens = lex(text)?;
    let mut parser = Parser::for_problem(tokens, problem, mode);
    let mut binders = Vec::new();
    let term = parser.parse_term(&mut binders)?;
    if !parser.at_end() {
        return Err(parser.error_here("trailing input after term"));
    }
    Ok(term)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstFileError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("`{0}` is not a declared variable of the problem")]
    UnknownVariable(Name),
    #[error("binding for {var}: {detail}")]
    IllTyped { var: Name, detail: String },
}

/// Parses a substitution file: a sequence of `IDENT = term .` bindings over
/// the problem's declared variables.
pub fn parse_substitution(text: &str, problem: &Problem) -> Result<Substitution, SubstFileError> {
    let tokens = lex(text)?;
    let mut parser = Parser::for_problem(tokens, problem, Mode::Strict);
    let mut subst = Substitution::new();
    while !parser.at_end() {
        let (name, at) = parser.expect_ident()?;
        parser.check_user_name(&name, at)?;
        let var = Name::new(name.as_str());
        let ty = problem
            .variables
            .get(&var)
            .cloned()
            .ok_or_else(|| SubstFileError::UnknownVariable(var.clone()))?;
        parser.expect(Tok::Equals)?;
        let mut binders = Vec::new();
        let image = parser.parse_term(&mut binders)?;
        parser.expect(Tok::Dot)?;
        subst
            .insert(var.clone(), &ty, image)
            .map_err(|e| SubstFileError::IllTyped {
                var,
                detail: e.to_string(),
            })?;
    }
    Ok(subst)
}

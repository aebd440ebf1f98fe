//! Mission problem language: lexing, parsing, validation and printing.
//!
//! A problem file has four blocks in fixed order:
//!
//! ```text
//! world    { loc <id> (<x>, <y>)   |  dist <id> <id> <n> }
//! tasks    { atomic <id> needs <n> |  compound <id> [ordered] { <id>, ... } }
//! robots   { robot <id> at <loc> velocity <v> { can <task> time <n> prob <p> } }
//! mission  { do <task> at <loc> | time <n> | boundary <robot|all> (x, y) (x, y)
//!          | maxidle <robot|all> <n> }
//! ```
//!
//! Statements end at a newline or `;`, and `//` starts a comment.

pub mod ast;
mod lexer;
mod parser;
mod print;
mod validate;

use std::fmt;

pub use ast::*;
pub use parser::parse_problem;
pub use print::pretty_print;
pub use validate::{ceil_euclidean, validate_problem, TaskRef, ValidatedProblem};

/// Parse failure at a source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: expected {}, found {found}", expected_list(.expected))]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub expected: Vec<String>,
    pub found: String,
}

impl SyntaxError {
    pub(crate) fn new(span: Span, mut expected: Vec<String>, found: String) -> Self {
        expected.sort();
        expected.dedup();
        SyntaxError { line: span.line, col: span.col, expected, found }
    }
}

fn expected_list(e: &[String]) -> String {
    match e {
        [one] => one.clone(),
        many => format!("one of {}", many.join(", ")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Every invariant violation found in one problem, in check order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ValidationError(pub Vec<Violation>);

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} problem(s):", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Parses and validates in one step.
pub fn load_problem(src: &str) -> Result<ValidatedProblem, crate::Error> {
    Ok(validate_problem(parse_problem(src)?)?)
}

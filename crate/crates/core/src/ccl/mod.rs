//! Declaration language: thorn manifests and run configurations.

mod config;
mod lexer;
mod manifest;
mod parser;
mod printer;
mod validate;

pub use config::{parse_run_config, Assignment, RawValue, RunConfig};
pub use lexer::Pos;
pub use manifest::*;
pub use parser::{parse_manifest, MAX_GHOST};
pub(crate) use parser::parse_bool;
pub use printer::print_manifest;
pub use validate::{validate_closure, ValidationIssue, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateName,
    BadRange,
    BadValue,
    DuplicateAssignment,
}

impl ParseErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "SyntaxError",
            ParseErrorKind::DuplicateName => "DuplicateName",
            ParseErrorKind::BadRange => "BadRange",
            ParseErrorKind::BadValue => "BadValue",
            ParseErrorKind::DuplicateAssignment => "DuplicateAssignment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {}: {message}", kind.name())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

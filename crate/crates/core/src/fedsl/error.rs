use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    ParseError,
    UnknownColumn,
    TypeError,
    ArityError,
    RuntimeError,
    DuplicateFeature,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::ParseError => "ParseError",
            ErrorKind::UnknownColumn => "UnknownColumn",
            ErrorKind::TypeError => "TypeError",
            ErrorKind::ArityError => "ArityError",
            ErrorKind::RuntimeError => "RuntimeError",
            ErrorKind::DuplicateFeature => "DuplicateFeature",
        };
        f.write_str(s)
    }
}

/// Error raised by any stage of the language. The rendered text is sent back
/// to the model verbatim, so messages are fixed templates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecError {
    pub kind: ErrorKind,
    pub message: String,
    pub location: Option<Span>,
}

impl ExecError {
    pub fn new(kind: ErrorKind, message: impl Into<String>, location: Option<Span>) -> Self {
        ExecError { kind, message: message.into(), location }
    }

    pub fn at(kind: ErrorKind, span: Span, message: impl Into<String>) -> Self {
        Self::new(kind, message, Some(span))
    }
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some(span) => write!(f, "{} at {}: {}", self.kind, span, self.message),
            None => write!(f, "{}: {}", self.kind, self.message),
        }
    }
}

impl std::error::Error for ExecError {}

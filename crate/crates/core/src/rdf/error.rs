use std::io;

use thiserror::Error;

use super::term::TermError;

/// Failure while reading N-Triples or Turtle.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared prefix '{prefix}:'")]
    UndeclaredPrefix {
        line: usize,
        column: usize,
        prefix: String,
    },
    #[error("line {line}, column {column}: unsupported construct: {construct}")]
    Unsupported {
        line: usize,
        column: usize,
        construct: &'static str,
    },
    #[error("line {line}, column {column}: {source}")]
    Term {
        line: usize,
        column: usize,
        source: TermError,
    },
    #[error("unsupported RDF file extension: {0}")]
    UnknownFormat(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<ParseError>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ParseError {
    /// Line number of a positioned error.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UndeclaredPrefix { line, .. }
            | ParseError::Unsupported { line, .. }
            | ParseError::Term { line, .. } => Some(*line),
            ParseError::File { source, .. } => source.line(),
            _ => None,
        }
    }
}

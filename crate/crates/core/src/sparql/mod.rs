//! A bounded SPARQL subset: basic graph patterns, FILTER, OPTIONAL (two
//! levels), DISTINCT, ORDER BY, LIMIT/OFFSET, ASK and COUNT.

mod ast;
mod eval;
mod parser;
mod results;

pub use ast::*;
pub use eval::{evaluate, evaluate_with, order_terms, EvalError, EvalOptions, QueryResult, ResultTable};
pub use parser::{parse_query, MAX_OPTIONAL_DEPTH};
pub use results::{table_to_tsv, to_tsv};

use std::path::Path;

use thiserror::Error;

use crate::rdf::{Graph, ParseError};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Reads and parses an `.rq` file.
pub fn load_query(path: &Path) -> Result<Query, QueryError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| QueryError::Io { path: p.clone(), source })?;
    parse_query(&text).map_err(|source| QueryError::Parse { path: p, source })
}

/// Parses and evaluates in one step.
pub fn run_query(text: &str, g: &Graph) -> Result<QueryResult, QueryError> {
    let q = parse_query(text).map_err(|source| QueryError::Parse {
        path: "<query>".into(),
        source,
    })?;
    Ok(evaluate(&q, g)?)
}

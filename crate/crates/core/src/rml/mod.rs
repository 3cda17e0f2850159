//! RML mapping documents and their execution.

mod exec;
mod model;
mod parse;
mod serialize;
mod source;
mod template;
mod validate;

pub use exec::{
    blank_label, execute_join, execute_triples_map, expand_term_map, iri_safe_encode, row_triples, run_mapping,
    run_mapping_into, CountingSink, ExecError, ExecFailure, ExecOptions, ExecutionReport, JoinTable, MapReport,
    NTriplesSink, TermGenError, TripleSink,
};
pub use model::*;
pub use parse::{load_mapping, parse_mapping, LoadMappingError, ql, rml as rml_ns, rr, MappingError};
pub use serialize::mapping_to_graph;
pub use source::{
    iter_rows, CsvDialect, FileResolver, Header, Row, RowReader, SourceError, SourceResolver, UnknownColumn, CACHE_ENV,
};
pub use template::{parse_template, Template, TemplateError, TemplatePart};
pub use validate::{validate_mapping, Diagnostic, JoinSide};

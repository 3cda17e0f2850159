//! RDF value model, indexed graph, parsers and serializers.

mod error;
pub mod graph;
pub mod io;
pub mod iso;
mod lex;
pub mod ntriples;
mod prefix;
mod term;
pub mod turtle;
pub mod vocab;

pub use error::ParseError;
pub use graph::{Graph, TermId, TripleRef};
pub use io::{load_graph, RdfFormat};
pub use iso::{isomorphic, isomorphic_with_budget, SearchBudgetExceeded};
pub use ntriples::{parse_ntriples, parse_term, read_ntriples, serialize_canonical, write_canonical, NTriplesReader};
pub use prefix::PrefixMap;
pub use term::{has_scheme, Literal, Term, TermError, Triple};
pub use turtle::{parse_turtle, parse_turtle_with, write_turtle, TurtleOptions};

pub(crate) use lex::Cursor;

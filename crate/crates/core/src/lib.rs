//! Knowledge-graph construction toolkit: RDF graphs, an RML mapping engine,
//! a SPARQL subset, competency-question tests, SKOS vocabularies, dataset
//! statistics and a per-provider build pipeline.

#![allow(clippy::result_large_err)]

pub mod rdf;
pub mod rml;
pub mod sparql;
pub mod cq;
pub mod vocab;
pub mod stats;
pub mod pipeline;

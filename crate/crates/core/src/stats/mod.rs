//! Dataset statistics, ontology metrics and DCAT publication metadata.

mod dcat;
mod graph;
mod ontology;

pub use dcat::{emit_dcat, parse_dcat, DatasetDescriptor, DcatError, Distribution, DEFAULT_DATASET_BASE, MEDIA_TYPE_BASE};
pub use graph::{compute_stats, namespace_of, GraphStats};
pub use ontology::{compute_ontology_metrics, rdf_list, OntologyMetrics, STANDARD_ANNOTATIONS};

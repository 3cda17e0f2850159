//! Multi-provider builds driven by a TOML manifest (see `docs/manifest.md`).
//!
//! Each provider is mapped, checked against its namespace, dumped as
//! canonical N-Triples and tested; `federation.json` indexes the results.

mod build;
mod manifest;

pub use build::{
    build_all, build_provider, mapping_base, namespace_violations, sha256_file, BuildError, FederationEntry,
    FederationManifest, ProviderBuild, ProviderFailure, SuiteSummary,
};
pub use manifest::{
    load_manifest, validate, validate_provider, BuildOptions, DatasetSpec, ManifestError, PipelineManifest,
    ProviderSpec, SourceFormat, VocabularySpec,
};

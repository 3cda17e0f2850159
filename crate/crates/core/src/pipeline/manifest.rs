use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::rdf::has_scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    #[serde(alias = "nt", alias = "n-triples")]
    Ntriples,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub id: String,
    /// Logical-source name in the mapping → file to read.
    pub sources: BTreeMap<String, PathBuf>,
    /// Single source file, bound to whatever source name the mapping uses.
    pub source: Option<PathBuf>,
    pub format: SourceFormat,
    pub mapping: PathBuf,
    pub use_case: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabularySpec {
    pub policy: PathBuf,
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderSpec {
    pub name: String,
    pub base_namespace: String,
    pub license: String,
    pub datasets: Vec<DatasetSpec>,
    pub vocabularies: Vec<VocabularySpec>,
    pub test_suites: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub strict: bool,
    /// When false, mapped triples stream straight into the dump in
    /// generation order, duplicates included, and no stats are computed.
    pub dedup: bool,
    /// Providers built concurrently.
    pub jobs: usize,
    /// Triples maps executed concurrently inside one dataset.
    pub map_jobs: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            strict: false,
            dedup: true,
            jobs: 1,
            map_jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineManifest {
    /// Directory of the manifest file; relative paths were resolved from it.
    pub root: PathBuf,
    pub output_dir: PathBuf,
    pub options: BuildOptions,
    pub providers: Vec<ProviderSpec>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("manifest declares no providers")]
    NoProviders,
    #[error("duplicate provider {0:?}")]
    DuplicateProvider(String),
    #[error("provider {provider}: duplicate dataset id {id:?}")]
    DuplicateDataset { provider: String, id: String },
    #[error("provider {provider}: {message}")]
    Invalid { provider: String, message: String },
    #[error("provider {provider}: namespace {namespace:?} must be an absolute IRI ending in '/' or '#'")]
    BadNamespace { provider: String, namespace: String },
    #[error("provider {provider}: {what} {path} does not exist")]
    MissingFile { provider: String, what: &'static str, path: PathBuf },
}

// Raw TOML shapes; see docs/manifest.md.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    output_dir: Option<PathBuf>,
    #[serde(default)]
    options: RawOptions,
    #[serde(default, rename = "provider")]
    providers: Vec<RawProvider>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    strict: Option<bool>,
    dedup: Option<bool>,
    jobs: Option<usize>,
    map_jobs: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProvider {
    name: String,
    base_namespace: String,
    license: String,
    #[serde(default, rename = "dataset")]
    datasets: Vec<RawDataset>,
    #[serde(default, rename = "vocabulary")]
    vocabularies: Vec<RawVocabulary>,
    #[serde(default)]
    test_suites: Vec<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    id: String,
    source: Option<PathBuf>,
    #[serde(default)]
    sources: BTreeMap<String, PathBuf>,
    format: SourceFormat,
    mapping: PathBuf,
    use_case: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVocabulary {
    policy: PathBuf,
    input: PathBuf,
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

/// Reads and validates a manifest. Every referenced file is checked here so
/// a broken path fails before any provider is built.
pub fn load_manifest(path: &Path) -> Result<PipelineManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawManifest = toml::from_str(&text).map_err(|e| ManifestError::Syntax {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let root = if root.as_os_str().is_empty() { PathBuf::from(".") } else { root };
    let m = from_raw(raw, &root)?;
    validate(&m)?;
    Ok(m)
}

fn from_raw(raw: RawManifest, root: &Path) -> Result<PipelineManifest, ManifestError> {
    let at = |p: PathBuf| if p.is_absolute() { p } else { root.join(p) };
    let defaults = BuildOptions::default();
    let options = BuildOptions {
        strict: raw.options.strict.unwrap_or(defaults.strict),
        dedup: raw.options.dedup.unwrap_or(defaults.dedup),
        jobs: raw.options.jobs.unwrap_or(defaults.jobs).max(1),
        map_jobs: raw.options.map_jobs.unwrap_or(defaults.map_jobs).max(1),
    };
    let providers = raw
        .providers
        .into_iter()
        .map(|p| ProviderSpec {
            name: p.name,
            base_namespace: p.base_namespace,
            license: p.license,
            datasets: p
                .datasets
                .into_iter()
                .map(|d| DatasetSpec {
                    id: d.id,
                    sources: d.sources.into_iter().map(|(k, v)| (k, at(v))).collect(),
                    source: d.source.map(at),
                    format: d.format,
                    mapping: at(d.mapping),
                    use_case: d.use_case,
                })
                .collect(),
            vocabularies: p
                .vocabularies
                .into_iter()
                .map(|v| VocabularySpec {
                    policy: at(v.policy),
                    input: at(v.input),
                })
                .collect(),
            test_suites: p.test_suites.into_iter().map(at).collect(),
        })
        .collect();
    Ok(PipelineManifest {
        root: root.to_path_buf(),
        output_dir: at(raw.output_dir.unwrap_or_else(|| PathBuf::from("out"))),
        options,
        providers,
    })
}

pub fn validate(m: &PipelineManifest) -> Result<(), ManifestError> {
    if m.providers.is_empty() {
        return Err(ManifestError::NoProviders);
    }
    let mut names = BTreeSet::new();
    for p in &m.providers {
        if !names.insert(p.name.as_str()) {
            return Err(ManifestError::DuplicateProvider(p.name.clone()));
        }
        validate_provider(p)?;
    }
    Ok(())
}

pub fn validate_provider(p: &ProviderSpec) -> Result<(), ManifestError> {
    let invalid = |message: String| ManifestError::Invalid {
        provider: p.name.clone(),
        message,
    };
    if !is_name(&p.name) {
        return Err(invalid(format!(
            "name {:?} must use lowercase letters, digits, '-' or '_'",
            p.name
        )));
    }
    let ns = &p.base_namespace;
    if !has_scheme(ns) || !(ns.ends_with('/') || ns.ends_with('#')) || ns.contains(char::is_whitespace) {
        return Err(ManifestError::BadNamespace {
            provider: p.name.clone(),
            namespace: ns.clone(),
        });
    }
    if !has_scheme(&p.license) {
        return Err(invalid(format!("license {:?} is not an absolute IRI", p.license)));
    }
    let exists = |what: &'static str, path: &Path, dir: bool| {
        let ok = if dir { path.is_dir() } else { path.is_file() };
        if ok {
            Ok(())
        } else {
            Err(ManifestError::MissingFile {
                provider: p.name.clone(),
                what,
                path: path.to_path_buf(),
            })
        }
    };
    let mut ids = BTreeSet::new();
    for d in &p.datasets {
        if !is_name(&d.id) {
            return Err(invalid(format!("dataset id {:?} must use lowercase letters, digits, '-' or '_'", d.id)));
        }
        if !ids.insert(d.id.as_str()) {
            return Err(ManifestError::DuplicateDataset {
                provider: p.name.clone(),
                id: d.id.clone(),
            });
        }
        exists("mapping", &d.mapping, false)?;
        if let Some(s) = &d.source {
            exists("source", s, false)?;
        }
        for s in d.sources.values() {
            exists("source", s, false)?;
        }
    }
    for v in &p.vocabularies {
        exists("vocabulary policy", &v.policy, false)?;
        exists("vocabulary input", &v.input, false)?;
    }
    for s in &p.test_suites {
        exists("test suite", s, true)?;
    }
    Ok(())
}

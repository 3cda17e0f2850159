use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use chrono::{SecondsFormat, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cq::{load_suite, run_suite, LoadSuiteError, Mode, TestReport};
use crate::rdf::{load_graph, write_canonical, Graph, Term, Triple};
use crate::rml::{
    load_mapping, run_mapping_into, ExecFailure, ExecOptions, ExecutionReport, FileResolver, LoadMappingError,
    NTriplesSink, ReferenceFormulation, TripleSink,
};
use crate::stats::{compute_stats, GraphStats};
use crate::vocab::{build_vocabulary, read_records, VocabError, VocabularyPolicy};

use super::manifest::{BuildOptions, DatasetSpec, PipelineManifest, ProviderSpec, SourceFormat};

/// Base IRI for mapping documents of a dataset, so map ids never depend on
/// where the checkout lives.
pub fn mapping_base(dataset_id: &str) -> String {
    format!("urn:kg-forge:mapping:{dataset_id}")
}

/// How many offending IRIs a namespace error lists.
const SHOWN_VIOLATIONS: usize = 10;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("dataset {dataset}: {source}")]
    Mapping {
        dataset: String,
        source: LoadMappingError,
    },
    #[error("dataset {dataset}: {message}")]
    Binding { dataset: String, message: String },
    #[error("dataset {dataset}: {failure}")]
    Exec { dataset: String, failure: ExecFailure },
    #[error("vocabulary {path}: {source}")]
    Vocabulary { path: PathBuf, source: VocabError },
    #[error("{count} subject IRIs outside namespace {namespace}: {}", .examples.join(", "))]
    Namespace {
        namespace: String,
        count: usize,
        examples: Vec<String>,
    },
    #[error("test suite: {0}")]
    Suite(#[from] LoadSuiteError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("skipped: strict mode stopped the build after provider {0} failed")]
    Skipped(String),
}

impl BuildError {
    /// Validation problems (exit 1) as opposed to fatal build errors (exit 2).
    pub fn is_validation(&self) -> bool {
        matches!(self, BuildError::Namespace { .. } | BuildError::Suite(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BuildError + '_ {
    move |source| BuildError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProviderBuild {
    pub name: String,
    pub dump: PathBuf,
    pub triple_count: usize,
    pub sha256: String,
    pub built_at: String,
    /// Absent for builds without deduplication.
    pub stats: Option<GraphStats>,
    pub report: ExecutionReport,
    pub tests: Vec<(PathBuf, TestReport)>,
}

fn resolver_for(d: &DatasetSpec, maps: &[crate::rml::TriplesMap]) -> Result<FileResolver, BuildError> {
    let binding = |message: String| BuildError::Binding {
        dataset: d.id.clone(),
        message,
    };
    let base = d.mapping.parent().unwrap_or(Path::new("."));
    let mut r = FileResolver::new(base);
    let names: BTreeSet<&str> = maps.iter().map(|m| m.logical_source.source.as_str()).collect();
    if let Some(src) = &d.source {
        match names.len() {
            0 => {}
            1 => {
                r.bind(*names.first().expect("one name"), src);
            }
            n => {
                return Err(binding(format!(
                    "mapping reads {n} sources; bind them with `sources` instead of `source`"
                )))
            }
        }
    }
    for (name, path) in &d.sources {
        if !names.contains(name.as_str()) {
            return Err(binding(format!("mapping has no logical source named {name:?}")));
        }
        r.bind(name.as_str(), path);
    }
    let want = match d.format {
        SourceFormat::Csv => ReferenceFormulation::Csv,
        SourceFormat::Ntriples => ReferenceFormulation::NTriples,
    };
    for m in maps {
        if m.logical_source.reference_formulation != want {
            return Err(binding(format!(
                "triples map {} reads {:?} but the dataset format is {:?}",
                m.id,
                m.logical_source.reference_formulation,
                d.format
            )));
        }
    }
    Ok(r)
}

/// Maps dataset `d` into `sink`.
fn map_dataset(d: &DatasetSpec, options: &BuildOptions, sink: &mut dyn TripleSink) -> Result<ExecutionReport, BuildError> {
    let maps = load_mapping(&d.mapping, &mapping_base(&d.id)).map_err(|source| BuildError::Mapping {
        dataset: d.id.clone(),
        source,
    })?;
    let resolver = resolver_for(d, &maps)?;
    let exec = ExecOptions {
        strict: options.strict,
        jobs: options.map_jobs,
        ..ExecOptions::default()
    };
    let report = run_mapping_into(&maps, &resolver, &exec, sink).map_err(|failure| BuildError::Exec {
        dataset: d.id.clone(),
        failure,
    })?;
    if report.rows_skipped > 0 {
        warn!("dataset {}: {} rows skipped", d.id, report.rows_skipped);
    }
    Ok(report)
}

/// Streaming target for builds without deduplication. Namespace checking
/// happens on the fly; at most `MAX_TRACKED_VIOLATIONS` offenders are kept.
struct StreamTarget {
    sink: NTriplesSink<BufWriter<File>>,
    namespace: String,
    violations: BTreeSet<String>,
}

const MAX_TRACKED_VIOLATIONS: usize = 10_000;

impl TripleSink for StreamTarget {
    fn accept(&mut self, batch: Vec<Triple>) -> io::Result<()> {
        for t in &batch {
            if let Term::Iri(s) = &t.subject {
                if !s.starts_with(&self.namespace) && self.violations.len() < MAX_TRACKED_VIOLATIONS {
                    self.violations.insert(s.clone());
                }
            }
        }
        self.sink.accept(batch)
    }
}

/// Subject IRIs outside `namespace`, sorted. Blank subjects are exempt.
pub fn namespace_violations(g: &Graph, namespace: &str) -> Vec<String> {
    g.subjects()
        .filter_map(|s| match s {
            Term::Iri(iri) if !iri.starts_with(namespace) => Some(iri.clone()),
            _ => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BuildError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

fn namespace_error(namespace: &str, violations: impl IntoIterator<Item = String>, count: usize) -> BuildError {
    BuildError::Namespace {
        namespace: namespace.to_owned(),
        count,
        examples: violations.into_iter().take(SHOWN_VIOLATIONS).collect(),
    }
}

fn load_vocabularies(spec: &ProviderSpec, sink: &mut dyn TripleSink) -> Result<(), BuildError> {
    for v in &spec.vocabularies {
        let vocab_err = |source| BuildError::Vocabulary {
            path: v.policy.clone(),
            source,
        };
        let policy = VocabularyPolicy::load(&v.policy).map_err(vocab_err)?;
        let records = read_records(&policy, &v.input).map_err(vocab_err)?;
        let vocab = build_vocabulary(&policy, records).map_err(vocab_err)?;
        sink.accept(vocab.graph.to_triples()).map_err(io_err(&v.input))?;
    }
    Ok(())
}

/// Builds one provider into `{out_dir}/{name}/`: the dump `{name}.nt`,
/// `report.json`, `stats.json` (deduplicated builds only) and, when suites
/// are configured, `tests.json`.
///
/// With `options.dedup` the dump is canonical N-Triples; without it, the
/// dump holds triples in generation order and real-mode suites read it back.
pub fn build_provider(spec: &ProviderSpec, options: &BuildOptions, out_dir: &Path) -> Result<ProviderBuild, BuildError> {
    info!("building provider {}", spec.name);
    let dir = out_dir.join(&spec.name);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let dump = dir.join(format!("{}.nt", spec.name));
    let mut report = ExecutionReport::default();

    let (graph, triple_count) = if options.dedup {
        let mut g = Graph::new();
        for d in &spec.datasets {
            report.merge(map_dataset(d, options, &mut g)?);
        }
        load_vocabularies(spec, &mut g)?;
        let violations = namespace_violations(&g, &spec.base_namespace);
        if !violations.is_empty() {
            let n = violations.len();
            return Err(namespace_error(&spec.base_namespace, violations, n));
        }
        let f = File::create(&dump).map_err(io_err(&dump))?;
        let mut w = BufWriter::new(f);
        write_canonical(&g, &mut w).map_err(io_err(&dump))?;
        w.flush().map_err(io_err(&dump))?;
        let n = g.len();
        (Some(g), n)
    } else {
        let f = File::create(&dump).map_err(io_err(&dump))?;
        let mut target = StreamTarget {
            sink: NTriplesSink::new(BufWriter::new(f)),
            namespace: spec.base_namespace.clone(),
            violations: BTreeSet::new(),
        };
        for d in &spec.datasets {
            report.merge(map_dataset(d, options, &mut target)?);
        }
        load_vocabularies(spec, &mut target)?;
        let written = target.sink.written() as usize;
        target.sink.into_inner().flush().map_err(io_err(&dump))?;
        if !target.violations.is_empty() {
            let _ = std::fs::remove_file(&dump);
            let n = target.violations.len();
            return Err(namespace_error(&spec.base_namespace, target.violations, n));
        }
        (None, written)
    };

    let sha256 = sha256_file(&dump).map_err(io_err(&dump))?;
    let stats = graph.as_ref().map(compute_stats);
    if let Some(stats) = &stats {
        write_json(&dir.join("stats.json"), stats)?;
    }
    write_json(&dir.join("report.json"), &report)?;

    let mut tests = Vec::new();
    if !spec.test_suites.is_empty() {
        let reread;
        let g = match &graph {
            Some(g) => g,
            None => {
                reread = load_graph(&dump, "b").map_err(|e| BuildError::Io {
                    path: dump.clone(),
                    source: io::Error::new(io::ErrorKind::InvalidData, e.to_string()),
                })?;
                &reread.0
            }
        };
        for suite_dir in &spec.test_suites {
            let suite = load_suite(suite_dir)?;
            let r = run_suite(&suite, Mode::Real, Some(g), 1).expect("data graph supplied");
            tests.push((suite_dir.clone(), r));
        }
        let json: Vec<_> = tests
            .iter()
            .map(|(p, r)| serde_json::json!({ "suite": p, "report": r }))
            .collect();
        write_json(&dir.join("tests.json"), &json)?;
    }

    Ok(ProviderBuild {
        name: spec.name.clone(),
        triple_count,
        dump,
        sha256,
        built_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        stats,
        report,
        tests,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FederationEntry {
    pub provider: String,
    /// Dump path relative to the output directory.
    pub dump: String,
    pub triple_count: usize,
    pub license: String,
    pub namespace: String,
    pub built_at: String,
    pub sha256: String,
    #[serde(default)]
    pub tests: Vec<SuiteSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderFailure {
    pub provider: String,
    pub validation: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FederationManifest {
    pub generated_at: String,
    pub providers: Vec<FederationEntry>,
    pub failures: Vec<ProviderFailure>,
}

impl FederationManifest {
    /// 0 when everything built and every test passed, 1 for validation or
    /// test failures, 2 when any provider failed fatally.
    pub fn exit_code(&self) -> i32 {
        if self.failures.iter().any(|f| !f.validation) {
            2
        } else if !self.failures.is_empty()
            || self.providers.iter().flat_map(|p| &p.tests).any(|t| t.fail + t.error > 0)
        {
            1
        } else {
            0
        }
    }

    /// The manifest with timestamps blanked, for comparing builds.
    pub fn without_timestamps(&self) -> FederationManifest {
        let mut m = self.clone();
        m.generated_at.clear();
        for p in &mut m.providers {
            p.built_at.clear();
        }
        m
    }
}

fn relative_slash(path: &Path, base: &Path) -> String {
    let rel = path.strip_prefix(base).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Builds every provider (up to `options.jobs` at a time) and writes
/// `{output_dir}/federation.json`. Provider failures are recorded, not
/// propagated; in strict mode the first failure stops providers that have
/// not started yet.
pub fn build_all(m: &PipelineManifest, options: &BuildOptions) -> Result<FederationManifest, BuildError> {
    let out = &m.output_dir;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let failed_first: Mutex<Option<String>> = Mutex::new(None);
    let results: Mutex<Vec<(usize, Result<ProviderBuild, BuildError>)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..options.jobs.clamp(1, m.providers.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(p) = m.providers.get(i) else { break };
                let r = if stop.load(Ordering::SeqCst) {
                    let first = failed_first.lock().expect("poisoned").clone().unwrap_or_default();
                    Err(BuildError::Skipped(first))
                } else {
                    build_provider(p, options, out)
                };
                if let Err(e) = &r {
                    warn!("provider {} failed: {e}", p.name);
                    if options.strict && !matches!(e, BuildError::Skipped(_)) {
                        failed_first.lock().expect("poisoned").get_or_insert_with(|| p.name.clone());
                        stop.store(true, Ordering::SeqCst);
                    }
                }
                results.lock().expect("poisoned").push((i, r));
            });
        }
    });
    let mut results = results.into_inner().expect("poisoned");
    results.sort_by_key(|(i, _)| *i);

    let mut fed = FederationManifest {
        generated_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        providers: Vec::new(),
        failures: Vec::new(),
    };
    for (i, r) in results {
        let spec = &m.providers[i];
        match r {
            Ok(b) => fed.providers.push(FederationEntry {
                provider: b.name,
                dump: relative_slash(&b.dump, out),
                triple_count: b.triple_count,
                license: spec.license.clone(),
                namespace: spec.base_namespace.clone(),
                built_at: b.built_at,
                sha256: b.sha256,
                tests: b
                    .tests
                    .iter()
                    .map(|(p, r)| SuiteSummary {
                        suite: relative_slash(p, &m.root),
                        pass: r.totals.pass,
                        fail: r.totals.fail,
                        error: r.totals.error,
                    })
                    .collect(),
            }),
            Err(e) => fed.failures.push(ProviderFailure {
                provider: spec.name.clone(),
                validation: e.is_validation(),
                message: e.to_string(),
            }),
        }
    }
    write_json(&out.join("federation.json"), &fed)?;
    Ok(fed)
}

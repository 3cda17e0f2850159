use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use kg_forge::cq::{load_suite, run_suite, Mode};
use kg_forge::pipeline::{build_all, load_manifest, mapping_base};
use kg_forge::rdf::{load_graph, write_canonical, write_turtle, Graph, PrefixMap, RdfFormat};
use kg_forge::rml::{load_mapping, run_mapping_into, ExecOptions, FileResolver, NTriplesSink};
use kg_forge::sparql::{evaluate, load_query, to_tsv};
use kg_forge::stats::{compute_ontology_metrics, compute_stats, emit_dcat, DatasetDescriptor, DcatError};
use kg_forge::vocab::{build_vocabulary, read_records, VocabError, VocabularyPolicy};

#[derive(Parser)]
#[command(name = "kg-forge", version, about = "Build, test and describe RDF knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build every provider of a manifest and write federation.json.
    Build(BuildArgs),
    /// Run a competency-question suite.
    Test(TestArgs),
    /// Triple, term and namespace counts for RDF files.
    Stats(StatsArgs),
    /// Ontology metrics (classes, properties, axioms) for RDF files.
    Metrics(MetricsArgs),
    /// Build a SKOS vocabulary from a CSV term list.
    Vocab(VocabArgs),
    /// Emit DCAT metadata for a dataset descriptor.
    Dcat(DcatArgs),
    /// Evaluate a SPARQL query and print TSV.
    Query(QueryArgs),
    /// Run one RML mapping document.
    Map(MapArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Stop after the first failing provider; row-level problems are errors.
    #[arg(long)]
    strict: bool,
    /// Providers built concurrently (defaults to the manifest setting).
    #[arg(long)]
    jobs: Option<usize>,
    /// Stream dumps in generation order, keeping duplicates.
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Toy,
    Real,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_enum, default_value = "toy")]
    mode: ModeArg,
    /// Data graphs for real mode.
    #[arg(long, num_args = 1..)]
    data: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long, required = true, num_args = 1..)]
    ontology: Vec<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VocabArgs {
    #[arg(long)]
    policy: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// `.ttl` for Turtle, anything else for canonical N-Triples; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct DcatArgs {
    #[arg(long)]
    descriptor: PathBuf,
    /// Dump whose triple count fills void:triples.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, required = true, num_args = 1..)]
    data: Vec<PathBuf>,
    #[arg(long)]
    query: PathBuf,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    mapping: PathBuf,
    /// Bind a logical-source name to a file: `NAME=PATH`.
    #[arg(long = "bind", value_parser = parse_binding)]
    bindings: Vec<(String, PathBuf)>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Write triples as they are generated, without deduplication or sorting.
    #[arg(long)]
    no_dedup: bool,
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the execution report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or_else(|| format!("expected NAME=PATH, got {s:?}"))?;
    Ok((name.to_owned(), PathBuf::from(path)))
}

/// A failure that maps to exit code 1 rather than 2.
#[derive(Debug)]
struct ValidationFailure(String);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn output(path: &Path) -> Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn write_graph(path: &Path, g: &Graph, prefixes: &PrefixMap) -> Result<()> {
    let mut w = output(path)?;
    if RdfFormat::from_path(path) == Some(RdfFormat::Turtle) {
        w.write_all(write_turtle(g, prefixes).as_bytes())?;
    } else {
        write_canonical(g, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

/// Union of several files; blank labels are kept apart per file.
fn load_union(paths: &[PathBuf]) -> Result<Graph> {
    let mut g = Graph::new();
    for (i, p) in paths.iter().enumerate() {
        let (part, _) = load_graph(p, &format!("f{i}"))?;
        g.extend_from(&part);
    }
    Ok(g)
}

fn build(args: BuildArgs) -> Result<i32> {
    let manifest = load_manifest(&args.manifest)?;
    let mut options = manifest.options;
    options.strict |= args.strict;
    options.dedup &= !args.no_dedup;
    if let Some(j) = args.jobs {
        options.jobs = j.max(1);
    }
    let fed = build_all(&manifest, &options)?;
    for p in &fed.providers {
        println!("built {}\t{} triples\t{}\tsha256:{}", p.provider, p.triple_count, p.dump, p.sha256);
        for t in &p.tests {
            println!("  tests {}\tpass {} fail {} error {}", t.suite, t.pass, t.fail, t.error);
        }
    }
    for f in &fed.failures {
        let kind = if f.validation { "invalid" } else { "failed" };
        println!("{kind} {}\t{}", f.provider, f.message);
    }
    Ok(fed.exit_code())
}

fn test(args: TestArgs) -> Result<i32> {
    let suite = load_suite(&args.suite)?;
    let data = match args.mode {
        ModeArg::Toy => None,
        ModeArg::Real if args.data.is_empty() => bail!("--mode real needs --data"),
        ModeArg::Real => Some(load_union(&args.data)?),
    };
    let mode = match args.mode {
        ModeArg::Toy => Mode::Toy,
        ModeArg::Real => Mode::Real,
    };
    let report = run_suite(&suite, mode, data.as_ref(), args.jobs)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render());
    }
    Ok(if report.success() { 0 } else { 1 })
}

fn stats(args: StatsArgs) -> Result<i32> {
    let s = compute_stats(&load_union(&args.inputs)?);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&s)?);
    } else {
        print!("{}", s.render());
    }
    Ok(0)
}

fn metrics(args: MetricsArgs) -> Result<i32> {
    let m = compute_ontology_metrics(&load_union(&args.ontology)?);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&m)?);
    } else {
        print!("{}", m.render());
    }
    Ok(0)
}

fn vocab(args: VocabArgs) -> Result<i32> {
    let built = VocabularyPolicy::load(&args.policy)
        .and_then(|p| read_records(&p, &args.input).map(|r| (p, r)))
        .and_then(|(p, r)| build_vocabulary(&p, r).map(|v| (p, v)));
    let (policy, v) = match built {
        Ok(x) => x,
        Err(e @ (VocabError::Io { .. } | VocabError::Policy { .. } | VocabError::Csv { .. })) => return Err(e.into()),
        Err(e) => return Err(ValidationFailure(e.to_string()).into()),
    };
    let mut prefixes = PrefixMap::common();
    prefixes.insert("", format!("{}/", policy.scheme_iri()));
    write_graph(&args.out, &v.graph, &prefixes)?;
    info!("{} concepts, {} triples", v.concepts, v.triple_count());
    Ok(0)
}

fn dcat(args: DcatArgs) -> Result<i32> {
    let mut d = DatasetDescriptor::load(&args.descriptor)?;
    if let Some(data) = &args.data {
        d.triple_count = Some(load_graph(data, "d")?.0.len() as u64);
    }
    let g = match emit_dcat(&d) {
        Ok(g) => g,
        Err(e @ (DcatError::Missing(_) | DcatError::NotIri { .. })) => {
            return Err(ValidationFailure(format!("{}: {e}", args.descriptor.display())).into())
        }
        Err(e) => return Err(e.into()),
    };
    write_graph(&args.out, &g, &PrefixMap::common())?;
    Ok(0)
}

fn query(args: QueryArgs) -> Result<i32> {
    let q = load_query(&args.query)?;
    let g = load_union(&args.data)?;
    let r = evaluate(&q, &g)?;
    let mut out = io::stdout().lock();
    out.write_all(to_tsv(&r).as_bytes())?;
    Ok(0)
}

fn map(args: MapArgs) -> Result<i32> {
    let stem = args.mapping.file_stem().and_then(|s| s.to_str()).unwrap_or("mapping");
    let maps = load_mapping(&args.mapping, &mapping_base(stem))?;
    let mut resolver = FileResolver::new(args.mapping.parent().unwrap_or(Path::new(".")));
    for (name, path) in &args.bindings {
        resolver.bind(name.as_str(), path);
    }
    let exec = ExecOptions {
        strict: args.strict,
        jobs: args.jobs.max(1),
        ..ExecOptions::default()
    };
    let (report, written) = if args.no_dedup {
        let mut sink = NTriplesSink::new(output(&args.out)?);
        let report = run_mapping_into(&maps, &resolver, &exec, &mut sink).map_err(|f| anyhow!("{f}"))?;
        let written = sink.written();
        sink.into_inner().flush()?;
        (report, written)
    } else {
        let mut g = Graph::new();
        let report = run_mapping_into(&maps, &resolver, &exec, &mut g).map_err(|f| anyhow!("{f}"))?;
        write_graph(&args.out, &g, &PrefixMap::new())?;
        (report, g.len() as u64)
    };
    eprintln!(
        "rows read {}, skipped {}, triples emitted {}, written {}",
        report.rows_read, report.rows_skipped, report.triples_emitted, written
    );
    if let Some(p) = &args.report {
        std::fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => build(a),
        Command::Test(a) => test(a),
        Command::Stats(a) => stats(a),
        Command::Metrics(a) => metrics(a),
        Command::Vocab(a) => vocab(a),
        Command::Dcat(a) => dcat(a),
        Command::Query(a) => query(a),
        Command::Map(a) => map(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is::<ValidationFailure>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

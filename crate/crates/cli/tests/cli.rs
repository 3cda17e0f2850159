#[path = "../../core/tests/support/synthetic.rs"]
mod synthetic;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> String {
    root().join(rel).to_str().unwrap().to_owned()
}

fn kg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kg-forge")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_reports_each_provider() {
    let dir = tempfile::tempdir().unwrap();
    let m = synthetic::write_manifest(
        dir.path(),
        "kg.toml",
        &[synthetic::Provider { name: "ispra", namespace: synthetic::ISPRA, rows: 7 }],
    );
    let o = kg(&["build", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert!(line.starts_with(&format!("built ispra\t{} triples\tispra/ispra.nt\tsha256:", synthetic::expected_triples(7))));
}

#[test]
fn build_exit_codes_follow_the_worst_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let providers = [
        synthetic::Provider { name: "ispra", namespace: synthetic::ISPRA, rows: 3 },
        synthetic::Provider { name: "aria", namespace: synthetic::ARIA, rows: 3 },
    ];
    let m = synthetic::write_manifest(dir.path(), "kg.toml", &providers);
    let m = m.to_str().unwrap();

    fs::write(dir.path().join("aria/mapping.ttl"), synthetic::mapping_text(synthetic::ISPRA)).unwrap();
    let o = kg(&["build", "--manifest", m]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("invalid aria"));

    fs::write(dir.path().join("ispra/mapping.ttl"), "<broken").unwrap();
    assert_eq!(kg(&["build", "--manifest", m]).status.code(), Some(2));

    fs::remove_file(dir.path().join("ispra/mapping.ttl")).unwrap();
    let o = kg(&["build", "--manifest", m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ispra/mapping.ttl"));
}

#[test]
fn test_command_real_mode_needs_data() {
    let suite = fixture("fixtures/cq/water-quality");
    let o = kg(&["test", "--suite", &suite, "--mode", "real"]);
    assert_eq!(o.status.code(), Some(2));

    let o = kg(&["test", "--suite", &suite, "--mode", "real", "--data", &fixture("fixtures/cq/water-quality/stations.ttl")]);
    // against the good data the broken-fixture test passes too
    assert_eq!(stdout(&o).lines().last(), Some("5 passed, 1 failed, 0 errors"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn query_prints_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.rq");
    fs::write(
        &q,
        "PREFIX ex: <https://w3id.org/italia/env/onto/>\nSELECT ?s WHERE { ?s ex:region \"Lombardia\" } ORDER BY DESC(?s)",
    )
    .unwrap();
    let o = kg(&["query", "--data", &fixture("fixtures/cq/water-quality/stations.ttl"), "--query", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "?s\n<https://w3id.org/italia/env/ld/station/s3>\n<https://w3id.org/italia/env/ld/station/s1>\n"
    );

    fs::write(&q, "SELECT * WHERE { ?s ?p ?o } GROUP BY ?s").unwrap();
    let o = kg(&["query", "--data", &fixture("fixtures/cq/water-quality/stations.ttl"), "--query", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("GROUP BY"));
}

#[test]
fn map_with_and_without_dedup() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.csv"), "id\n1\n1\n2\n").unwrap();
    fs::write(
        dir.path().join("m.ttl"),
        "@prefix rr: <http://www.w3.org/ns/r2rml#> .\n@prefix rml: <http://semweb.mmlab.be/ns/rml#> .\n\
         <#M> rml:logicalSource [ rml:source \"data\" ] ;\n\
         rr:subjectMap [ rr:template \"http://ex.org/{id}\" ; rr:class <http://ex.org/T> ] .\n",
    )
    .unwrap();
    let m = dir.path().join("m.ttl");
    let bind = format!("data={}", dir.path().join("d.csv").display());
    let o = kg(&["map", "--mapping", m.to_str().unwrap(), "--bind", &bind]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = kg(&["map", "--mapping", m.to_str().unwrap(), "--bind", &bind, "--no-dedup"]);
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = kg(&["map", "--mapping", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dcat_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.ttl");
    let o = kg(&["dcat", "--descriptor", &fixture("fixtures/dcat/water-samples.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (g, _) = kg_forge::rdf::load_graph(&out, "d").unwrap();
    let back = kg_forge::stats::parse_dcat(&g).unwrap();
    let original = kg_forge::stats::DatasetDescriptor::load(&root().join("fixtures/dcat/water-samples.toml")).unwrap();
    assert_eq!(back, original);

    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(root().join("fixtures/dcat/water-samples.toml"))
        .unwrap()
        .replace("license = \"https://creativecommons.org/licenses/by/4.0/\"", "license = \"CC-BY\"");
    fs::write(&bad, text).unwrap();
    assert_eq!(kg(&["dcat", "--descriptor", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn stats_and_metrics_json() {
    let o = kg(&["metrics", "--ontology", &fixture("fixtures/ontology/mini.ttl"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classes"], 4);
    assert_eq!(v["annotation_assertions"], 3);

    let o = kg(&["stats", "--in", &fixture("fixtures/cq/water-quality/stations.ttl"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["triple_count"], 20);
}

mod support;

use std::fs;
use std::path::Path;

use kg_forge::pipeline::{build_all, load_manifest, BuildOptions, FederationManifest, ManifestError};
use kg_forge::rdf::load_graph;

use support::synthetic::{expected_triples, write_manifest, Provider, ARIA, ISPRA};

fn build(path: &Path, options: &BuildOptions) -> FederationManifest {
    let m = load_manifest(path).unwrap();
    build_all(&m, options).unwrap()
}

fn two(rows: usize) -> [Provider<'static>; 2] {
    [
        Provider { name: "ispra", namespace: ISPRA, rows },
        Provider { name: "aria", namespace: ARIA, rows },
    ]
}

#[test]
fn closed_form_counts_nulls() {
    // rows 0..10: label NULL at 3, value NULL at 1 and 6
    assert_eq!(expected_triples(10), 40 - 1 - 2);
    assert_eq!(expected_triples(0), 0);
    assert_eq!(expected_triples(4), 16 - 1 - 1);
}

#[test]
fn two_providers_build_with_expected_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &two(120));
    let fed = build(&path, &BuildOptions { jobs: 2, ..Default::default() });
    assert_eq!(fed.exit_code(), 0, "{:?}", fed.failures);
    assert_eq!(fed.providers.len(), 2);
    for e in &fed.providers {
        assert_eq!(e.triple_count, expected_triples(120));
        let (g, _) = load_graph(&dir.path().join("out").join(&e.dump), "b").unwrap();
        assert_eq!(g.len(), e.triple_count);
        assert!(g.subjects().all(|s| s.value().starts_with(&e.namespace)));
        assert_eq!(e.sha256.len(), 64);
    }
    assert_eq!(fed.providers[0].dump, "ispra/ispra.nt");
    let on_disk: FederationManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/federation.json")).unwrap()).unwrap();
    assert_eq!(on_disk, fed);
    assert!(dir.path().join("out/aria/stats.json").is_file());
    assert!(dir.path().join("out/aria/report.json").is_file());
}

#[test]
fn builds_are_deterministic_and_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let both = write_manifest(dir.path(), "both.toml", &two(200));
    let first = build(&both, &BuildOptions { jobs: 2, ..Default::default() });
    let ispra_dump = fs::read(dir.path().join("out/ispra/ispra.nt")).unwrap();
    let second = build(&both, &BuildOptions::default());
    assert_eq!(first.without_timestamps(), second.without_timestamps());

    let [ispra, _] = two(200);
    let alone = write_manifest(dir.path(), "alone.toml", &[ispra]);
    let third = build(&alone, &BuildOptions::default());
    assert_eq!(third.providers.len(), 1);
    assert_eq!(third.providers[0].sha256, first.providers[0].sha256);
    assert_eq!(fs::read(dir.path().join("out/ispra/ispra.nt")).unwrap(), ispra_dump);
}

#[test]
fn empty_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kg.toml");
    fs::write(&path, "output_dir = \"out\"\n").unwrap();
    assert!(matches!(load_manifest(&path), Err(ManifestError::NoProviders)));
}

#[test]
fn missing_mapping_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &two(3));
    fs::remove_file(dir.path().join("aria/mapping.ttl")).unwrap();
    let err = load_manifest(&path).unwrap_err();
    assert!(matches!(err, ManifestError::MissingFile { what: "mapping", .. }));
    assert!(err.to_string().contains("aria/mapping.ttl"), "{err}");
}

#[test]
fn bad_namespace_is_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &[Provider { name: "x", namespace: "not-an-iri", rows: 1 }]);
    assert!(matches!(load_manifest(&path), Err(ManifestError::BadNamespace { .. })));
}

#[test]
fn provider_without_datasets_builds_empty_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kg.toml");
    fs::write(
        &path,
        "[[provider]]\nname = \"empty\"\nbase_namespace = \"https://ex.org/e/\"\nlicense = \"https://ex.org/l\"\n",
    )
    .unwrap();
    let fed = build(&path, &BuildOptions::default());
    assert_eq!(fed.exit_code(), 0);
    assert_eq!(fed.providers[0].triple_count, 0);
    assert_eq!(fs::read(dir.path().join("out/empty/empty.nt")).unwrap(), b"");
}

#[test]
fn subjects_outside_namespace_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &two(3));
    // point aria's mapping at the ISPRA namespace
    fs::write(dir.path().join("aria/mapping.ttl"), support::synthetic::mapping_text(ISPRA)).unwrap();
    let fed = build(&path, &BuildOptions::default());
    assert_eq!(fed.providers.len(), 1);
    assert_eq!(fed.failures.len(), 1);
    let f = &fed.failures[0];
    assert_eq!(f.provider, "aria");
    assert!(f.validation);
    assert!(f.message.contains("3 subject IRIs outside namespace"), "{}", f.message);
    assert_eq!(fed.exit_code(), 1);
}

#[test]
fn one_failing_provider_does_not_stop_the_other() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &two(5));
    fs::write(dir.path().join("ispra/mapping.ttl"), "this is not turtle").unwrap();
    let fed = build(&path, &BuildOptions::default());
    assert_eq!(fed.exit_code(), 2);
    assert_eq!(fed.failures[0].provider, "ispra");
    assert!(!fed.failures[0].validation);
    assert_eq!(fed.providers.len(), 1);
    assert_eq!(fed.providers[0].provider, "aria");
    assert_eq!(fed.providers[0].triple_count, expected_triples(5));
}

#[test]
fn strict_mode_skips_providers_after_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &two(5));
    fs::write(dir.path().join("ispra/mapping.ttl"), "this is not turtle").unwrap();
    let fed = build(&path, &BuildOptions { strict: true, ..Default::default() });
    assert!(fed.providers.is_empty());
    assert_eq!(fed.failures.len(), 2);
    assert!(fed.failures[1].message.contains("skipped"), "{}", fed.failures[1].message);
}

#[test]
fn real_mode_suites_run_against_the_built_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), "kg.toml", &two(10));
    let suite = dir.path().join("cq");
    fs::create_dir(&suite).unwrap();
    fs::write(suite.join("a.rq"), "ASK { ?s a <http://ex.org/onto/Sample> }").unwrap();
    fs::write(
        suite.join("a.toml"),
        "id = \"has-samples\"\nquestion = \"Are there samples?\"\nquery = \"a.rq\"\n[expect]\nkind = \"boolean\"\nvalue = true\n",
    )
    .unwrap();
    fs::write(suite.join("b.rq"), "SELECT (COUNT(*) AS ?n) WHERE { ?s <http://ex.org/onto/label> ?l }").unwrap();
    fs::write(
        suite.join("b.toml"),
        "id = \"many-labels\"\nquestion = \"At least 50 labels?\"\nquery = \"b.rq\"\n[expect]\nkind = \"min-count\"\ncount = 50\n",
    )
    .unwrap();
    let text = fs::read_to_string(&path)
        .unwrap()
        .replace("name = \"aria\"\n", "name = \"aria\"\ntest_suites = [\"cq\"]\n");
    fs::write(&path, text).unwrap();
    let fed = build(&path, &BuildOptions::default());
    let tests = &fed.providers[1].tests;
    assert_eq!(tests.len(), 1);
    assert_eq!((tests[0].pass, tests[0].fail, tests[0].error), (1, 1, 0));
    assert_eq!(tests[0].suite, "cq");
    assert_eq!(fed.exit_code(), 1);
    assert!(dir.path().join("out/aria/tests.json").is_file());
}

#[test]
fn streaming_build_keeps_generation_order_and_skips_stats() {
    let dir = tempfile::tempdir().unwrap();
    let [ispra, _] = two(50);
    let path = write_manifest(dir.path(), "kg.toml", &[ispra]);
    let canonical = build(&path, &BuildOptions::default());
    let sorted_dump = fs::read_to_string(dir.path().join("out/ispra/ispra.nt")).unwrap();
    fs::remove_dir_all(dir.path().join("out")).unwrap();

    let streamed = build(&path, &BuildOptions { dedup: false, ..Default::default() });
    assert_eq!(streamed.exit_code(), 0);
    assert_eq!(streamed.providers[0].triple_count, canonical.providers[0].triple_count);
    let text = fs::read_to_string(dir.path().join("out/ispra/ispra.nt")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.sort_unstable();
    assert_eq!(lines.join("\n") + "\n", sorted_dump);
    assert!(!dir.path().join("out/ispra/stats.json").exists());
}

#[test]
fn vocabularies_are_merged_into_the_provider_graph() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/vocab");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kg.toml");
    fs::write(
        &path,
        format!(
            "[[provider]]\nname = \"whow\"\nbase_namespace = \"https://w3id.org/whow/\"\nlicense = \"https://ex.org/l\"\n\
             [[provider.vocabulary]]\npolicy = \"{0}/substances.toml\"\ninput = \"{0}/substances.csv\"\n",
            fixtures.display()
        ),
    )
    .unwrap();
    let fed = build(&path, &BuildOptions::default());
    assert_eq!(fed.exit_code(), 0, "{:?}", fed.failures);
    let dump = fs::read_to_string(dir.path().join("out/whow/whow.nt")).unwrap();
    assert!(dump.contains("<https://w3id.org/whow/controlled-vocabulary/chemical-substances/cas-102851-06-9>"));
}

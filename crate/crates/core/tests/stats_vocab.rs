use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use kg_forge::rdf::{load_graph, Graph, Term, Triple};
use kg_forge::stats::{compute_ontology_metrics, compute_stats, namespace_of, OntologyMetrics};
use kg_forge::vocab::{build_vocabulary, normalize_id, ConceptRecord, VocabError, VocabularyPolicy, DEFAULT_BASE};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn hand_built_ontology_matches_manual_tally() {
    let (g, _) = load_graph(&fixtures().join("ontology/mini.ttl"), "b").unwrap();
    assert_eq!(g.len(), 30);
    let expected = OntologyMetrics {
        classes: 4,
        object_properties: 3,
        datatype_properties: 1,
        subclass_axioms: 2,
        subproperty_axioms: 1,
        disjoint_classes: 4,
        disjoint_class_pairs: 2,
        inverse_property_pairs: 1,
        transitive_properties: 1,
        declared_domains: 2,
        declared_ranges: 2,
        property_chains: 1,
        annotation_assertions: 3,
    };
    assert_eq!(compute_ontology_metrics(&g), expected);
}

fn random_graph(rng: &mut StdRng, n: usize) -> Graph {
    let iri = |s: String| Term::Iri(s);
    let mut g = Graph::new();
    for _ in 0..n {
        let ns = ["http://a.org/", "http://b.org/x#", "urn:c:"][rng.gen_range(0..3)];
        let subject = if rng.gen_bool(0.1) {
            Term::BlankNode(format!("b{}", rng.gen_range(0..5)))
        } else {
            iri(format!("{ns}s{}", rng.gen_range(0..40)))
        };
        let predicate = if rng.gen_bool(0.3) {
            iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type".into())
        } else {
            iri(format!("http://a.org/p{}", rng.gen_range(0..6)))
        };
        let object = match rng.gen_range(0..3) {
            0 => Term::string(format!("v{}", rng.gen_range(0..30))),
            _ => iri(format!("http://a.org/C{}", rng.gen_range(0..8))),
        };
        g.insert(Triple { subject, predicate, object });
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stats_agree_with_recount(seed in any::<u64>(), n in 0usize..1000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n);
        let s = compute_stats(&g);
        let triples: Vec<Triple> = g.to_triples();
        prop_assert_eq!(s.triple_count, triples.len());
        let distinct = |f: fn(&Triple) -> &Term| triples.iter().map(f).collect::<HashSet<_>>().len();
        prop_assert_eq!(s.distinct_subjects, distinct(|t| &t.subject));
        prop_assert_eq!(s.distinct_predicates, distinct(|t| &t.predicate));
        prop_assert_eq!(s.distinct_objects, distinct(|t| &t.object));
        let mut classes = BTreeMap::new();
        let mut preds = BTreeMap::new();
        let mut ns = BTreeMap::new();
        for t in &triples {
            if t.predicate.value().ends_with("#type") {
                *classes.entry(t.object.value().to_owned()).or_insert(0usize) += 1;
            }
            *preds.entry(t.predicate.value().to_owned()).or_insert(0usize) += 1;
            *ns.entry(namespace_of(&t.subject)).or_insert(0usize) += 1;
        }
        prop_assert_eq!(&s.classes, &classes);
        prop_assert_eq!(&s.predicates, &preds);
        prop_assert_eq!(&s.namespaces, &ns);
        prop_assert!(s.classes.values().sum::<usize>() <= s.triple_count);
        prop_assert_eq!(s.namespaces.values().sum::<usize>(), s.triple_count);
    }

    #[test]
    fn union_counts_are_subadditive(a in any::<u64>(), b in any::<u64>()) {
        let g1 = random_graph(&mut StdRng::seed_from_u64(a), 200);
        let g2 = random_graph(&mut StdRng::seed_from_u64(b), 200);
        let mut u = g1.clone();
        u.extend_from(&g2);
        let (s1, s2, su) = (compute_stats(&g1).triple_count, compute_stats(&g2).triple_count, compute_stats(&u).triple_count);
        prop_assert!(su <= s1 + s2);
        let disjoint = g1.iter().all(|t| !g2.contains(&t.to_owned()));
        prop_assert_eq!(su == s1 + s2, disjoint);
    }

    #[test]
    fn ontology_metrics_monotone_under_union(a in any::<u64>(), b in any::<u64>()) {
        let g1 = random_ontology(a);
        let g2 = random_ontology(b);
        let mut u = g1.clone();
        u.extend_from(&g2);
        let (m1, mu) = (compute_ontology_metrics(&g1), compute_ontology_metrics(&u));
        for ((name, x), (_, y)) in m1.fields().iter().zip(mu.fields().iter()) {
            prop_assert!(x <= y, "{} decreased: {} -> {}", name, x, y);
        }
    }

    #[test]
    fn normalize_is_idempotent(raw in "\\PC{0,24}") {
        if let Ok(once) = normalize_id(&raw) {
            prop_assert_eq!(normalize_id(&once).unwrap(), once.clone());
            prop_assert!(once.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || "._-%".contains(c)));
        }
    }
}

fn random_ontology(seed: u64) -> Graph {
    let mut rng = StdRng::seed_from_u64(seed);
    let owl = |l: &str| Term::Iri(format!("http://www.w3.org/2002/07/owl#{l}"));
    let rdfs = |l: &str| Term::Iri(format!("http://www.w3.org/2000/01/rdf-schema#{l}"));
    let ex = |i: usize| Term::Iri(format!("http://ex.org/e{i}"));
    let typ = Term::Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type".into());
    let mut g = Graph::new();
    for _ in 0..60 {
        let s = ex(rng.gen_range(0..12));
        let o = ex(rng.gen_range(0..12));
        let (p, o) = match rng.gen_range(0..10) {
            0 => (typ.clone(), owl("Class")),
            1 => (typ.clone(), owl("ObjectProperty")),
            2 => (typ.clone(), owl("AnnotationProperty")),
            3 => (rdfs("subClassOf"), o),
            4 => (rdfs("subPropertyOf"), o),
            5 => (owl("disjointWith"), o),
            6 => (owl("inverseOf"), o),
            7 => (rdfs("domain"), o),
            8 => (rdfs("label"), Term::string("x")),
            _ => (ex(rng.gen_range(0..12)), o),
        };
        g.insert(Triple { subject: s, predicate: p, object: o });
    }
    g
}

fn policy() -> VocabularyPolicy {
    VocabularyPolicy {
        name: "chemical-substances".into(),
        base: DEFAULT_BASE.into(),
        id_column: "id".into(),
        label_columns: [("it".to_owned(), "it".to_owned()), ("en".to_owned(), "en".to_owned())].into_iter().collect(),
        notation_column: None,
        broader_column: None,
    }
}

#[test]
fn normalize_idempotent_over_ten_thousand_random_strings() {
    let mut rng = StdRng::seed_from_u64(7);
    let alphabet: Vec<char> = "aZ09 ._-%/#?éß\tÄ€😀fF".chars().collect();
    let mut checked = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(0..20);
        let raw: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        if let Ok(once) = normalize_id(&raw) {
            assert_eq!(normalize_id(&once).unwrap(), once, "raw {raw:?}");
            checked += 1;
        }
    }
    assert!(checked > 9_000);
}

#[test]
fn every_concept_iri_follows_the_pattern() {
    let mut rng = StdRng::seed_from_u64(11);
    let records: Vec<ConceptRecord> = (0..300)
        .map(|i| ConceptRecord {
            id: format!("CAS {} {}", i, ["x", "Y/z", "é"][rng.gen_range(0..3)]),
            labels: [("en".to_owned(), format!("term {i}"))].into_iter().collect(),
            ..Default::default()
        })
        .collect();
    let p = policy();
    let v = build_vocabulary(&p, records.clone()).unwrap();
    let concept = Term::Iri("http://www.w3.org/2004/02/skos/core#Concept".into());
    let typ = Term::Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type".into());
    let in_scheme = Term::Iri("http://www.w3.org/2004/02/skos/core#inScheme".into());
    let concepts = v.graph.subjects_of(&typ, &concept);
    assert_eq!(concepts.len(), 300);
    let expected: HashSet<String> = records
        .iter()
        .map(|r| format!("{DEFAULT_BASE}chemical-substances/{}", normalize_id(&r.id).unwrap()))
        .collect();
    for c in concepts {
        assert!(expected.contains(c.value()), "{c:?}");
        assert_eq!(v.graph.objects_of(c, &in_scheme).len(), 1);
    }
}

#[test]
fn cas_example_and_cyclic_fixture() {
    let p = policy();
    let rec = |id: &str, broader: Option<&str>| ConceptRecord {
        id: id.into(),
        labels: [("it".to_owned(), id.to_owned())].into_iter().collect(),
        broader: broader.map(str::to_owned),
        ..Default::default()
    };
    let v = build_vocabulary(&p, vec![rec("cas-102851-06-9", None)]).unwrap();
    let iri = Term::Iri("https://w3id.org/whow/controlled-vocabulary/chemical-substances/cas-102851-06-9".into());
    assert!(v.graph.subjects().any(|s| *s == iri));

    let cyclic = vec![rec("a", Some("b")), rec("b", Some("c")), rec("c", Some("a"))];
    match build_vocabulary(&p, cyclic) {
        Err(VocabError::BroaderCycle(path)) => assert_eq!(path.len(), 4),
        other => panic!("expected a cycle error, got {other:?}"),
    }
}

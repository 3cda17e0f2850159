use std::collections::{BTreeSet, HashSet};

use kg_forge::rdf::{
    isomorphic, parse_ntriples, parse_turtle, serialize_canonical, Graph, Term, Triple,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn subject_pool() -> Vec<Term> {
    let mut pool: Vec<Term> = (0..4).map(|i| Term::iri(format!("http://ex.org/s{i}")).unwrap()).collect();
    pool.extend((0..3).map(|i| Term::BlankNode(format!("b{i}"))));
    pool
}

fn object_pool() -> Vec<Term> {
    let mut pool = subject_pool();
    pool.push(Term::string("plain"));
    pool.push(Term::string("quote \" and \\ backslash"));
    pool.push(Term::string("line\nbreak\ttab\u{1}"));
    pool.push(Term::string("caffè ☕"));
    pool.push(Term::lang("ciao", "it").unwrap());
    pool.push(Term::lang("hello", "en-GB").unwrap());
    pool.push(Term::typed("42", "http://www.w3.org/2001/XMLSchema#integer").unwrap());
    pool.push(Term::typed("042", "http://www.w3.org/2001/XMLSchema#integer").unwrap());
    pool
}

fn predicate_pool() -> Vec<Term> {
    (0..3).map(|i| Term::iri(format!("http://ex.org/p{i}")).unwrap()).collect()
}

fn arb_triples(max: usize) -> impl Strategy<Value = Vec<Triple>> {
    let (s, p, o) = (subject_pool(), predicate_pool(), object_pool());
    prop::collection::vec((0..s.len(), 0..p.len(), 0..o.len()), 0..max).prop_map(move |idx| {
        idx.into_iter()
            .map(|(a, b, c)| Triple::new(s[a].clone(), p[b].clone(), o[c].clone()).unwrap())
            .collect()
    })
}

fn relabel(g: &Graph, map: &dyn Fn(&str) -> String) -> Graph {
    let f = |t: &Term| match t {
        Term::BlankNode(b) => Term::BlankNode(map(b)),
        other => other.clone(),
    };
    g.iter()
        .map(|t| Triple::new(f(t.subject), t.predicate.clone(), f(t.object)).unwrap())
        .collect()
}

/// Factorial oracle: tries every bijection between the two blank-node sets.
fn brute_force_isomorphic(g1: &Graph, g2: &Graph) -> bool {
    let blanks = |g: &Graph| -> Vec<String> {
        let set: BTreeSet<String> = g
            .iter()
            .flat_map(|t| [t.subject.clone(), t.object.clone()])
            .filter_map(|t| match t {
                Term::BlankNode(b) => Some(b),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    };
    let (b1, b2) = (blanks(g1), blanks(g2));
    if b1.len() != b2.len() || g1.len() != g2.len() {
        return false;
    }
    let target: HashSet<Triple> = g2.to_triples().into_iter().collect();
    let mut perm: Vec<usize> = (0..b2.len()).collect();
    loop {
        let mapped = relabel(g1, &|b| b2[perm[b1.iter().position(|x| x == b).unwrap()]].clone());
        if mapped.to_triples().into_iter().collect::<HashSet<_>>() == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn canonical_round_trip_is_isomorphic(triples in arb_triples(40)) {
        let g: Graph = triples.into_iter().collect();
        let text = serialize_canonical(&g);
        let back = parse_ntriples(&text).unwrap();
        prop_assert!(isomorphic(&g, &back).unwrap());
        prop_assert_eq!(serialize_canonical(&back), text);
    }

    #[test]
    fn canonical_form_ignores_insertion_order(triples in arb_triples(40), seed in any::<u64>()) {
        let g1: Graph = triples.iter().cloned().collect();
        let mut shuffled = triples.clone();
        shuffled.shuffle(&mut StdRng::seed_from_u64(seed));
        shuffled.extend(triples.iter().take(3).cloned());
        let g2: Graph = shuffled.into_iter().collect();
        prop_assert_eq!(serialize_canonical(&g1), serialize_canonical(&g2));
    }

    #[test]
    fn set_semantics(triples in arb_triples(20)) {
        let mut once = Graph::new();
        let mut twice = Graph::new();
        for t in &triples {
            once.insert(t.clone());
            twice.insert(t.clone());
            twice.insert(t.clone());
        }
        prop_assert_eq!(once.len(), twice.len());
        let distinct: HashSet<&Triple> = triples.iter().collect();
        prop_assert_eq!(once.len(), distinct.len());
    }

    #[test]
    fn match_equals_linear_scan(triples in arb_triples(100), mask in 0u8..8, pick in any::<prop::sample::Index>()) {
        let g: Graph = triples.iter().cloned().collect();
        let all = g.to_triples();
        if all.is_empty() {
            return Ok(());
        }
        let probe = &all[pick.index(all.len())];
        let s = (mask & 1 != 0).then_some(&probe.subject);
        let p = (mask & 2 != 0).then_some(&probe.predicate);
        let o = (mask & 4 != 0).then_some(&probe.object);
        let mut got: Vec<Triple> = g.matching(s, p, o).map(|t| t.to_owned()).collect();
        let mut expected: Vec<Triple> = all
            .iter()
            .filter(|t| s.is_none_or(|x| &t.subject == x) && p.is_none_or(|x| &t.predicate == x) && o.is_none_or(|x| &t.object == x))
            .cloned()
            .collect();
        got.sort();
        expected.sort();
        prop_assert_eq!(got, expected);
    }
}

#[test]
fn isomorphism_agrees_with_factorial_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    let p: Vec<Term> = (0..2).map(|i| Term::iri(format!("http://ex.org/p{i}")).unwrap()).collect();
    let ground: Vec<Term> = (0..3).map(|i| Term::iri(format!("http://ex.org/g{i}")).unwrap()).collect();
    let mut agree_true = 0;
    let mut agree_false = 0;
    for _ in 0..150 {
        let node = |rng: &mut StdRng| -> Term {
            if rng.gen_bool(0.6) {
                Term::BlankNode(format!("n{}", rng.gen_range(0..4)))
            } else {
                ground[rng.gen_range(0..ground.len())].clone()
            }
        };
        let mut g1 = Graph::new();
        while g1.len() < 20 {
            let (s, o) = (node(&mut rng), node(&mut rng));
            g1.insert(Triple::new(s, p[rng.gen_range(0..2)].clone(), o).unwrap());
        }
        // either a relabeled copy (isomorphic) or a copy with one edited triple
        let mut names: Vec<usize> = (0..4).collect();
        names.shuffle(&mut rng);
        let mut g2 = relabel(&g1, &|b| format!("m{}", names[b[1..].parse::<usize>().unwrap()]));
        if rng.gen_bool(0.5) {
            let victim = g2.to_triples()[rng.gen_range(0..g2.len())].clone();
            let mut edited: Vec<Triple> = g2.to_triples().into_iter().filter(|t| t != &victim).collect();
            let replacement = Triple::new(victim.subject.clone(), victim.predicate.clone(), node(&mut rng)).unwrap();
            edited.push(replacement);
            g2 = edited.into_iter().collect();
        }
        let expected = brute_force_isomorphic(&g1, &g2);
        assert_eq!(isomorphic(&g1, &g2).unwrap(), expected);
        if expected {
            agree_true += 1;
        } else {
            agree_false += 1;
        }
    }
    assert!(agree_true > 20 && agree_false > 20, "{agree_true} / {agree_false}");
}

#[test]
fn turtle_and_manual_ntriples_expansion_are_isomorphic() {
    let ttl = r#"
        @prefix ex: <http://ex.org/> .
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
        ex:station a ex:WeatherStation ;
            ex:name "Milano"@it, "Milan"@en ;
            ex:height 122 ;
            ex:located [ ex:lat "45.46"^^xsd:decimal ; ex:long 9.19 ] .
        _:obs ex:madeBy ex:station ; ex:value 1.5e1 .
    "#;
    let nt = r#"
<http://ex.org/station> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/WeatherStation> .
<http://ex.org/station> <http://ex.org/name> "Milano"@it .
<http://ex.org/station> <http://ex.org/name> "Milan"@en .
<http://ex.org/station> <http://ex.org/height> "122"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://ex.org/station> <http://ex.org/located> _:loc .
_:loc <http://ex.org/lat> "45.46"^^<http://www.w3.org/2001/XMLSchema#decimal> .
_:loc <http://ex.org/long> "9.19"^^<http://www.w3.org/2001/XMLSchema#decimal> .
_:o <http://ex.org/madeBy> <http://ex.org/station> .
_:o <http://ex.org/value> "1.5e1"^^<http://www.w3.org/2001/XMLSchema#double> .
"#;
    let (g1, _) = parse_turtle(ttl).unwrap();
    let g2 = parse_ntriples(nt).unwrap();
    assert!(isomorphic(&g1, &g2).unwrap());
}

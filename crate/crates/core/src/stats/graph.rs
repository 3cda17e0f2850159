use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rdf::vocab::rdf;
use crate::rdf::{Graph, Term};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub triple_count: usize,
    pub distinct_subjects: usize,
    pub distinct_predicates: usize,
    pub distinct_objects: usize,
    /// rdf:type object → number of typing triples.
    pub classes: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, usize>,
    /// Subject namespace → triple count; sums to `triple_count`.
    pub namespaces: BTreeMap<String, usize>,
}

/// Namespace part of an IRI: everything up to the last `#`, `/` or `:`.
/// Blank nodes share the key `_:`.
pub fn namespace_of(t: &Term) -> String {
    match t {
        Term::Iri(iri) => match iri.rfind(['#', '/', ':']) {
            Some(i) => iri[..=i].to_owned(),
            None => iri.clone(),
        },
        Term::BlankNode(_) => "_:".to_owned(),
        Term::Literal(_) => String::new(),
    }
}

pub fn compute_stats(g: &Graph) -> GraphStats {
    let mut s = GraphStats {
        triple_count: g.len(),
        distinct_subjects: g.distinct_subjects(),
        distinct_predicates: g.distinct_predicates(),
        distinct_objects: g.distinct_objects(),
        ..GraphStats::default()
    };
    // iteration is grouped by subject, so one cached entry suffices
    let mut last: Option<(&Term, String)> = None;
    for t in g.iter() {
        *s.predicates.entry(t.predicate.value().to_owned()).or_default() += 1;
        if t.predicate.as_iri() == Some(rdf::TYPE) {
            *s.classes.entry(t.object.value().to_owned()).or_default() += 1;
        }
        if last.as_ref().is_none_or(|(subj, _)| *subj != t.subject) {
            last = Some((t.subject, namespace_of(t.subject)));
        }
        let ns = &last.as_ref().expect("set above").1;
        match s.namespaces.get_mut(ns) {
            Some(n) => *n += 1,
            None => {
                s.namespaces.insert(ns.clone(), 1);
            }
        }
    }
    s
}

impl GraphStats {
    pub fn render(&self) -> String {
        let mut out = format!(
            "triples\t{}\nsubjects\t{}\npredicates\t{}\nobjects\t{}\n",
            self.triple_count, self.distinct_subjects, self.distinct_predicates, self.distinct_objects
        );
        let mut section = |title: &str, m: &BTreeMap<String, usize>| {
            out.push_str(&format!("\n# {title}\n"));
            let mut rows: Vec<_> = m.iter().collect();
            rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
            for (k, v) in rows {
                out.push_str(&format!("{v}\t{k}\n"));
            }
        };
        section("classes", &self.classes);
        section("predicates", &self.predicates);
        section("subject namespaces", &self.namespaces);
        out
    }
}

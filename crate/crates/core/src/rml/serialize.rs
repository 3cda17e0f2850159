//! Writes triples maps back as RML in full (non-shortcut) form.

use std::collections::HashSet;

use crate::rdf::vocab::rdf;
use crate::rdf::{Graph, Term, Triple};

use super::model::*;
use super::parse::{ql, rml, rr};

struct Writer {
    graph: Graph,
    next: usize,
    reserved: HashSet<Term>,
}

impl Writer {
    fn fresh(&mut self) -> Term {
        loop {
            self.next += 1;
            let t = Term::BlankNode(format!("n{}", self.next));
            if !self.reserved.contains(&t) {
                return t;
            }
        }
    }

    fn add(&mut self, s: &Term, p: &str, o: Term) {
        self.graph.insert(Triple {
            subject: s.clone(),
            predicate: Term::Iri(p.to_owned()),
            object: o,
        });
    }

    fn term_map(&mut self, tm: &TermMap) -> Term {
        let node = self.fresh();
        match &tm.kind {
            TermMapKind::Constant(t) => self.add(&node, rr::CONSTANT, t.clone()),
            TermMapKind::Reference(c) => self.add(&node, rml::REFERENCE, Term::string(c.as_str())),
            TermMapKind::Template(t) => self.add(&node, rr::TEMPLATE, Term::string(t.to_string())),
        }
        let term_type = match tm.term_type {
            TermType::Iri => rr::IRI,
            TermType::BlankNode => rr::BLANK_NODE,
            TermType::Literal => rr::LITERAL,
        };
        self.add(&node, rr::TERM_TYPE, Term::Iri(term_type.to_owned()));
        if let Some(dt) = &tm.datatype {
            self.add(&node, rr::DATATYPE, Term::Iri(dt.clone()));
        }
        if let Some(lang) = &tm.language {
            self.add(&node, rr::LANGUAGE, Term::string(lang.as_str()));
        }
        node
    }
}

/// RDF form of `maps` using explicit term maps only, so that parsing the
/// result yields the same triples maps.
pub fn mapping_to_graph(maps: &[TriplesMap]) -> Graph {
    let mut w = Writer {
        graph: Graph::new(),
        next: 0,
        reserved: maps.iter().map(|m| m.id.0.clone()).collect(),
    };
    for m in maps {
        let node = m.id.0.clone();
        w.add(&node, rdf::TYPE, Term::Iri(rr::TRIPLES_MAP.to_owned()));

        let ls = w.fresh();
        w.add(&node, rml::LOGICAL_SOURCE, ls.clone());
        w.add(&ls, rml::SOURCE, Term::string(m.logical_source.source.as_str()));
        let formulation = match m.logical_source.reference_formulation {
            ReferenceFormulation::Csv => ql::CSV,
            ReferenceFormulation::NTriples => ql::NTRIPLES,
        };
        w.add(&ls, rml::REFERENCE_FORMULATION, Term::Iri(formulation.to_owned()));
        if let Some(it) = &m.logical_source.iterator {
            w.add(&ls, rml::ITERATOR, Term::string(it.as_str()));
        }

        let sm = w.term_map(&m.subject_map.term_map);
        w.add(&node, rr::SUBJECT_MAP, sm.clone());
        for class in &m.subject_map.classes {
            w.add(&sm, rr::CLASS, Term::Iri(class.clone()));
        }

        for pom in &m.predicate_object_maps {
            let pn = w.fresh();
            w.add(&node, rr::PREDICATE_OBJECT_MAP, pn.clone());
            for p in &pom.predicates {
                let pm = w.term_map(p);
                w.add(&pn, rr::PREDICATE_MAP, pm);
            }
            for o in &pom.objects {
                let om = match o {
                    ObjectMap::Term(tm) => w.term_map(tm),
                    ObjectMap::Ref(rom) => {
                        let om = w.fresh();
                        w.add(&om, rr::PARENT_TRIPLES_MAP, rom.parent.0.clone());
                        for jc in &rom.joins {
                            let j = w.fresh();
                            w.add(&om, rr::JOIN_CONDITION, j.clone());
                            w.add(&j, rr::CHILD, Term::string(jc.child.as_str()));
                            w.add(&j, rr::PARENT, Term::string(jc.parent.as_str()));
                        }
                        om
                    }
                };
                w.add(&pn, rr::OBJECT_MAP, om);
            }
        }
    }
    w.graph
}

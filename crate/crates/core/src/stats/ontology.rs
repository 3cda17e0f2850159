use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::rdf::vocab::{owl, rdf, rdfs};
use crate::rdf::{Graph, Term};

/// Counts read directly off OWL's RDF triple shapes, without inference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyMetrics {
    /// IRIs typed owl:Class.
    pub classes: usize,
    pub object_properties: usize,
    pub datatype_properties: usize,
    /// rdfs:subClassOf triples with an IRI subject (the object may be a
    /// class expression).
    pub subclass_axioms: usize,
    /// rdfs:subPropertyOf triples whose subject is an object property.
    pub subproperty_axioms: usize,
    /// Distinct classes taking part in any disjointness axiom.
    pub disjoint_classes: usize,
    /// Unordered pairs from owl:disjointWith and owl:AllDisjointClasses.
    pub disjoint_class_pairs: usize,
    /// Unordered owl:inverseOf pairs.
    pub inverse_property_pairs: usize,
    pub transitive_properties: usize,
    pub declared_domains: usize,
    pub declared_ranges: usize,
    pub property_chains: usize,
    pub annotation_assertions: usize,
}

/// Predicates always counted as annotations, besides those typed
/// owl:AnnotationProperty.
pub const STANDARD_ANNOTATIONS: [&str; 5] = [
    rdfs::LABEL,
    rdfs::COMMENT,
    rdfs::IS_DEFINED_BY,
    rdfs::SEE_ALSO,
    owl::VERSION_INFO,
];

fn iri(s: &str) -> Term {
    Term::Iri(s.to_owned())
}

fn typed_iris<'g>(g: &'g Graph, class: &str) -> BTreeSet<&'g Term> {
    g.subjects_of(&iri(rdf::TYPE), &iri(class))
        .into_iter()
        .filter(|t| t.is_iri())
        .collect()
}

/// Members of an RDF collection; stops at malformed or cyclic lists.
pub fn rdf_list<'g>(g: &'g Graph, head: &Term) -> Vec<&'g Term> {
    let (first, rest, nil) = (iri(rdf::FIRST), iri(rdf::REST), iri(rdf::NIL));
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut node = g.id_of(head).map(|id| g.term(id));
    while let Some(n) = node {
        if *n == nil || !seen.insert(n) {
            break;
        }
        if let Some(item) = g.objects_of(n, &first).first() {
            out.push(*item);
        }
        node = g.objects_of(n, &rest).first().copied();
    }
    out
}

fn unordered<'a>(a: &'a Term, b: &'a Term) -> (&'a Term, &'a Term) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn compute_ontology_metrics(g: &Graph) -> OntologyMetrics {
    let count = |p: &str| g.predicate_count(&iri(p));
    let object_properties = typed_iris(g, owl::OBJECT_PROPERTY);

    let subclass_axioms = g
        .matching(None, Some(&iri(rdfs::SUB_CLASS_OF)), None)
        .filter(|t| t.subject.is_iri())
        .count();
    let subproperty_axioms = g
        .matching(None, Some(&iri(rdfs::SUB_PROPERTY_OF)), None)
        .filter(|t| object_properties.contains(t.subject))
        .count();

    let mut disjoint_pairs = BTreeSet::new();
    for t in g.matching(None, Some(&iri(owl::DISJOINT_WITH)), None) {
        if t.subject != t.object {
            disjoint_pairs.insert(unordered(t.subject, t.object));
        }
    }
    for node in g.subjects_of(&iri(rdf::TYPE), &iri(owl::ALL_DISJOINT_CLASSES)) {
        for head in g.objects_of(node, &iri(owl::MEMBERS)) {
            let members = rdf_list(g, head);
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    if a != b {
                        disjoint_pairs.insert(unordered(a, b));
                    }
                }
            }
        }
    }
    let disjoint_classes: BTreeSet<&Term> = disjoint_pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();

    let inverse_pairs: BTreeSet<_> = g
        .matching(None, Some(&iri(owl::INVERSE_OF)), None)
        .map(|t| unordered(t.subject, t.object))
        .collect();

    let mut annotation_predicates: HashSet<Term> = STANDARD_ANNOTATIONS.iter().map(|p| iri(p)).collect();
    annotation_predicates.extend(typed_iris(g, owl::ANNOTATION_PROPERTY).into_iter().cloned());
    let annotation_assertions = annotation_predicates.iter().map(|p| g.predicate_count(p)).sum();

    OntologyMetrics {
        classes: typed_iris(g, owl::CLASS).len(),
        object_properties: object_properties.len(),
        datatype_properties: typed_iris(g, owl::DATATYPE_PROPERTY).len(),
        subclass_axioms,
        subproperty_axioms,
        disjoint_classes: disjoint_classes.len(),
        disjoint_class_pairs: disjoint_pairs.len(),
        inverse_property_pairs: inverse_pairs.len(),
        transitive_properties: typed_iris(g, owl::TRANSITIVE_PROPERTY).len(),
        declared_domains: count(rdfs::DOMAIN),
        declared_ranges: count(rdfs::RANGE),
        property_chains: count(owl::PROPERTY_CHAIN_AXIOM),
        annotation_assertions,
    }
}

impl OntologyMetrics {
    /// `(name, value)` for every field, in declaration order.
    pub fn fields(&self) -> [(&'static str, usize); 13] {
        [
            ("classes", self.classes),
            ("object_properties", self.object_properties),
            ("datatype_properties", self.datatype_properties),
            ("subclass_axioms", self.subclass_axioms),
            ("subproperty_axioms", self.subproperty_axioms),
            ("disjoint_classes", self.disjoint_classes),
            ("disjoint_class_pairs", self.disjoint_class_pairs),
            ("inverse_property_pairs", self.inverse_property_pairs),
            ("transitive_properties", self.transitive_properties),
            ("declared_domains", self.declared_domains),
            ("declared_ranges", self.declared_ranges),
            ("property_chains", self.property_chains),
            ("annotation_assertions", self.annotation_assertions),
        ]
    }

    pub fn render(&self) -> String {
        self.fields().iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
    }
}

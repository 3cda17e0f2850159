//! In-memory form of an RML mapping document.

use std::fmt;

use crate::rdf::Term;

use super::template::Template;

/// Identifier of a triples map: the IRI or blank node naming it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MapId(pub Term);

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReferenceFormulation {
    Csv,
    /// Each triple of an N-Triples file is a row with columns
    /// `subject`, `predicate`, `object` holding the term values.
    NTriples,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicalSource {
    pub source: String,
    pub reference_formulation: ReferenceFormulation,
    pub iterator: Option<String>,
}

impl LogicalSource {
    pub fn csv(source: impl Into<String>) -> Self {
        LogicalSource {
            source: source.into(),
            reference_formulation: ReferenceFormulation::Csv,
            iterator: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermType {
    Iri,
    BlankNode,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermMapKind {
    Constant(Term),
    Reference(String),
    Template(Template),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermMap {
    pub kind: TermMapKind,
    pub term_type: TermType,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

impl TermMap {
    pub fn constant(term: Term) -> Self {
        let term_type = match &term {
            Term::Iri(_) => TermType::Iri,
            Term::BlankNode(_) => TermType::BlankNode,
            Term::Literal(_) => TermType::Literal,
        };
        TermMap {
            kind: TermMapKind::Constant(term),
            term_type,
            datatype: None,
            language: None,
        }
    }

    pub fn reference(column: impl Into<String>, term_type: TermType) -> Self {
        TermMap {
            kind: TermMapKind::Reference(column.into()),
            term_type,
            datatype: None,
            language: None,
        }
    }

    pub fn template(template: Template, term_type: TermType) -> Self {
        TermMap {
            kind: TermMapKind::Template(template),
            term_type,
            datatype: None,
            language: None,
        }
    }

    pub fn with_datatype(mut self, datatype: impl Into<String>) -> Self {
        self.datatype = Some(datatype.into());
        self
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    /// Columns this term map reads.
    pub fn columns(&self) -> Vec<&str> {
        match &self.kind {
            TermMapKind::Constant(_) => Vec::new(),
            TermMapKind::Reference(c) => vec![c.as_str()],
            TermMapKind::Template(t) => t.placeholders().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubjectMap {
    pub term_map: TermMap,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JoinCondition {
    pub child: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefObjectMap {
    pub parent: MapId,
    pub joins: Vec<JoinCondition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectMap {
    Term(TermMap),
    Ref(RefObjectMap),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateObjectMap {
    pub predicates: Vec<TermMap>,
    pub objects: Vec<ObjectMap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplesMap {
    pub id: MapId,
    pub logical_source: LogicalSource,
    pub subject_map: SubjectMap,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
}

impl TriplesMap {
    /// Referencing object maps with their position `(pom, object)`.
    pub fn ref_object_maps(&self) -> impl Iterator<Item = ((usize, usize), &RefObjectMap)> {
        self.predicate_object_maps.iter().enumerate().flat_map(|(i, pom)| {
            pom.objects.iter().enumerate().filter_map(move |(j, om)| match om {
                ObjectMap::Ref(r) => Some(((i, j), r)),
                ObjectMap::Term(_) => None,
            })
        })
    }

    /// Sorts every list so structurally equal maps compare equal.
    pub(crate) fn normalize(&mut self) {
        self.subject_map.classes.sort();
        self.subject_map.classes.dedup();
        for pom in &mut self.predicate_object_maps {
            pom.predicates.sort();
            pom.predicates.dedup();
            pom.objects.sort();
            pom.objects.dedup();
            for om in &mut pom.objects {
                if let ObjectMap::Ref(r) = om {
                    r.joins.sort();
                }
            }
        }
        self.predicate_object_maps.sort();
        self.predicate_object_maps.dedup();
    }
}

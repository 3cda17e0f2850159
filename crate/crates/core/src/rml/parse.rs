//! Extraction of triples maps from a graph of RML/R2RML rules.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use log::warn;
use thiserror::Error;

use crate::rdf::io::read_to_string;
use crate::rdf::vocab::rdf;
use crate::rdf::{parse_turtle_with, Graph, ParseError, Term, TurtleOptions};

use super::model::*;
use super::template::{parse_template, TemplateError};

pub mod rr {
    pub const NS: &str = "http://www.w3.org/ns/r2rml#";
    pub const TRIPLES_MAP: &str = "http://www.w3.org/ns/r2rml#TriplesMap";
    pub const LOGICAL_TABLE: &str = "http://www.w3.org/ns/r2rml#logicalTable";
    pub const SUBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#subjectMap";
    pub const SUBJECT: &str = "http://www.w3.org/ns/r2rml#subject";
    pub const PREDICATE_OBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#predicateObjectMap";
    pub const PREDICATE_MAP: &str = "http://www.w3.org/ns/r2rml#predicateMap";
    pub const PREDICATE: &str = "http://www.w3.org/ns/r2rml#predicate";
    pub const OBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#objectMap";
    pub const OBJECT: &str = "http://www.w3.org/ns/r2rml#object";
    pub const CONSTANT: &str = "http://www.w3.org/ns/r2rml#constant";
    pub const COLUMN: &str = "http://www.w3.org/ns/r2rml#column";
    pub const TEMPLATE: &str = "http://www.w3.org/ns/r2rml#template";
    pub const TERM_TYPE: &str = "http://www.w3.org/ns/r2rml#termType";
    pub const IRI: &str = "http://www.w3.org/ns/r2rml#IRI";
    pub const BLANK_NODE: &str = "http://www.w3.org/ns/r2rml#BlankNode";
    pub const LITERAL: &str = "http://www.w3.org/ns/r2rml#Literal";
    pub const DATATYPE: &str = "http://www.w3.org/ns/r2rml#datatype";
    pub const LANGUAGE: &str = "http://www.w3.org/ns/r2rml#language";
    pub const CLASS: &str = "http://www.w3.org/ns/r2rml#class";
    pub const PARENT_TRIPLES_MAP: &str = "http://www.w3.org/ns/r2rml#parentTriplesMap";
    pub const JOIN_CONDITION: &str = "http://www.w3.org/ns/r2rml#joinCondition";
    pub const CHILD: &str = "http://www.w3.org/ns/r2rml#child";
    pub const PARENT: &str = "http://www.w3.org/ns/r2rml#parent";
    pub const GRAPH_MAP: &str = "http://www.w3.org/ns/r2rml#graphMap";
    pub const GRAPH: &str = "http://www.w3.org/ns/r2rml#graph";
}

pub mod rml {
    pub const NS: &str = "http://semweb.mmlab.be/ns/rml#";
    pub const LOGICAL_SOURCE: &str = "http://semweb.mmlab.be/ns/rml#logicalSource";
    pub const SOURCE: &str = "http://semweb.mmlab.be/ns/rml#source";
    pub const REFERENCE_FORMULATION: &str = "http://semweb.mmlab.be/ns/rml#referenceFormulation";
    pub const ITERATOR: &str = "http://semweb.mmlab.be/ns/rml#iterator";
    pub const REFERENCE: &str = "http://semweb.mmlab.be/ns/rml#reference";
    pub const LOGICAL_SOURCE_CLASS: &str = "http://semweb.mmlab.be/ns/rml#LogicalSource";
}

pub mod ql {
    pub const NS: &str = "http://semweb.mmlab.be/ns/ql#";
    pub const CSV: &str = "http://semweb.mmlab.be/ns/ql#CSV";
    pub const NTRIPLES: &str = "http://semweb.mmlab.be/ns/ql#NTriples";
    /// W3C format IRI, also accepted for N-Triples sources.
    pub const NTRIPLES_FORMAT: &str = "http://www.w3.org/ns/formats/N-Triples";
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("triples map {0} has no logical source")]
    MissingLogicalSource(MapId),
    #[error("triples map {0} has more than one logical source")]
    MultipleLogicalSources(MapId),
    #[error("logical source of {0} has no rml:source")]
    MissingSource(MapId),
    #[error("triples map {map}: unsupported reference formulation <{formulation}>")]
    UnsupportedFormulation { map: MapId, formulation: String },
    #[error("triples map {map}: unsupported construct {construct}")]
    Unsupported { map: MapId, construct: &'static str },
    #[error("triples map {0} has no subject map")]
    MissingSubjectMap(MapId),
    #[error("triples map {0} has more than one subject map")]
    MultipleSubjectMaps(MapId),
    #[error("triples map {0}: subject map cannot have term type rr:Literal")]
    LiteralSubject(MapId),
    #[error("triples map {map}: term map {node}: {reason}")]
    InvalidTermMap { map: MapId, node: String, reason: String },
    #[error("triples map {0}: predicate-object map needs at least one predicate and one object")]
    EmptyPredicateObjectMap(MapId),
    #[error("triples map {map}: parent triples map {parent} is not defined in this document")]
    UnresolvedParent { map: MapId, parent: String },
    #[error("triples map {map}: {source}")]
    Template { map: MapId, source: TemplateError },
}

#[derive(Debug, Error)]
pub enum LoadMappingError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Mapping { path: String, source: MappingError },
}

/// Reads a Turtle mapping document. Relative IRIs such as `<#TM>` resolve
/// against `base`, which keeps map ids (and blank node labels derived from
/// them) independent of where the file lives.
pub fn load_mapping(path: &Path, base: &str) -> Result<Vec<TriplesMap>, LoadMappingError> {
    let shown = path.display().to_string();
    let text = read_to_string(path).map_err(|source| LoadMappingError::Io {
        path: shown.clone(),
        source,
    })?;
    let options = TurtleOptions {
        base: Some(base.to_owned()),
        blank_prefix: String::new(),
    };
    let (g, _) = parse_turtle_with(&text, &options).map_err(|e| ParseError::File {
        path: shown.clone(),
        source: Box::new(e),
    })?;
    parse_mapping(&g).map_err(|source| LoadMappingError::Mapping { path: shown, source })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Subject,
    Predicate,
    Object,
}

const MAP_PROPERTIES: &[&str] = &[
    rdf::TYPE,
    rml::LOGICAL_SOURCE,
    rr::LOGICAL_TABLE,
    rr::SUBJECT_MAP,
    rr::SUBJECT,
    rr::PREDICATE_OBJECT_MAP,
    rdfs_label(),
    rdfs_comment(),
];

const TERM_MAP_PROPERTIES: &[&str] = &[
    rdf::TYPE,
    rr::CONSTANT,
    rr::COLUMN,
    rml::REFERENCE,
    rr::TEMPLATE,
    rr::TERM_TYPE,
    rr::DATATYPE,
    rr::LANGUAGE,
    rr::CLASS,
    rr::PARENT_TRIPLES_MAP,
    rr::JOIN_CONDITION,
    rr::GRAPH_MAP,
    rr::GRAPH,
];

const fn rdfs_label() -> &'static str {
    crate::rdf::vocab::rdfs::LABEL
}

const fn rdfs_comment() -> &'static str {
    crate::rdf::vocab::rdfs::COMMENT
}

fn iri(value: &str) -> Term {
    Term::Iri(value.to_owned())
}

/// Every node carrying a logical source, subject map, predicate-object map or
/// `rr:TriplesMap` type becomes a triples map. Shortcut properties are
/// expanded into full term maps, and the result is sorted by map id.
pub fn parse_mapping(g: &Graph) -> Result<Vec<TriplesMap>, MappingError> {
    let mut nodes: BTreeSet<Term> = BTreeSet::new();
    for p in [rml::LOGICAL_SOURCE, rr::LOGICAL_TABLE, rr::SUBJECT_MAP, rr::SUBJECT, rr::PREDICATE_OBJECT_MAP] {
        nodes.extend(g.matching(None, Some(&iri(p)), None).map(|t| t.subject.clone()));
    }
    nodes.extend(g.subjects_of(&iri(rdf::TYPE), &iri(rr::TRIPLES_MAP)).into_iter().cloned());

    let mut maps = Vec::with_capacity(nodes.len());
    for node in &nodes {
        maps.push(parse_triples_map(g, node, &nodes)?);
    }
    maps.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(maps)
}

fn parse_triples_map(g: &Graph, node: &Term, all_maps: &BTreeSet<Term>) -> Result<TriplesMap, MappingError> {
    let id = MapId(node.clone());
    warn_unknown(g, node, MAP_PROPERTIES, &id);

    if !g.objects_of(node, &iri(rr::LOGICAL_TABLE)).is_empty() {
        return Err(MappingError::Unsupported {
            map: id,
            construct: "rr:logicalTable (SQL logical tables)",
        });
    }
    let logical_source = match g.objects_of(node, &iri(rml::LOGICAL_SOURCE)).as_slice() {
        [] => return Err(MappingError::MissingLogicalSource(id)),
        [ls] => parse_logical_source(g, ls, &id)?,
        _ => return Err(MappingError::MultipleLogicalSources(id)),
    };

    let subject_nodes = g.objects_of(node, &iri(rr::SUBJECT_MAP));
    let subject_consts = g.objects_of(node, &iri(rr::SUBJECT));
    let subject_map = match (subject_nodes.as_slice(), subject_consts.as_slice()) {
        ([], []) => return Err(MappingError::MissingSubjectMap(id)),
        ([sm], []) => {
            let term_map = parse_term_map(g, sm, Role::Subject, &id)?;
            let mut classes = Vec::new();
            for class in g.objects_of(sm, &iri(rr::CLASS)) {
                match class {
                    Term::Iri(c) => classes.push(c.clone()),
                    other => {
                        return Err(MappingError::InvalidTermMap {
                            map: id,
                            node: sm.to_string(),
                            reason: format!("rr:class must be an IRI, got {other}"),
                        })
                    }
                }
            }
            SubjectMap { term_map, classes }
        }
        ([], [constant]) => SubjectMap {
            term_map: constant_shortcut(constant, Role::Subject, &id)?,
            classes: Vec::new(),
        },
        _ => return Err(MappingError::MultipleSubjectMaps(id)),
    };
    if subject_map.term_map.term_type == TermType::Literal {
        return Err(MappingError::LiteralSubject(id));
    }

    let mut predicate_object_maps = Vec::new();
    for pom_node in g.objects_of(node, &iri(rr::PREDICATE_OBJECT_MAP)) {
        predicate_object_maps.push(parse_pom(g, pom_node, &id, all_maps)?);
    }

    let mut map = TriplesMap {
        id,
        logical_source,
        subject_map,
        predicate_object_maps,
    };
    map.normalize();
    Ok(map)
}

fn parse_logical_source(g: &Graph, node: &Term, id: &MapId) -> Result<LogicalSource, MappingError> {
    let source = match g.objects_of(node, &iri(rml::SOURCE)).first() {
        Some(t) => t.value().to_owned(),
        None => return Err(MappingError::MissingSource(id.clone())),
    };
    let reference_formulation = match g.objects_of(node, &iri(rml::REFERENCE_FORMULATION)).first() {
        None => ReferenceFormulation::Csv,
        Some(Term::Iri(f)) if f == ql::CSV => ReferenceFormulation::Csv,
        Some(Term::Iri(f)) if f == ql::NTRIPLES || f == ql::NTRIPLES_FORMAT => ReferenceFormulation::NTriples,
        Some(other) => {
            return Err(MappingError::UnsupportedFormulation {
                map: id.clone(),
                formulation: other.value().to_owned(),
            })
        }
    };
    let iterator = g.objects_of(node, &iri(rml::ITERATOR)).first().map(|t| t.value().to_owned());
    Ok(LogicalSource {
        source,
        reference_formulation,
        iterator,
    })
}

fn parse_pom(g: &Graph, node: &Term, id: &MapId, all_maps: &BTreeSet<Term>) -> Result<PredicateObjectMap, MappingError> {
    warn_unknown(
        g,
        node,
        &[rdf::TYPE, rr::PREDICATE, rr::PREDICATE_MAP, rr::OBJECT, rr::OBJECT_MAP, rr::GRAPH_MAP, rr::GRAPH],
        id,
    );
    let mut predicates = Vec::new();
    for p in g.objects_of(node, &iri(rr::PREDICATE)) {
        predicates.push(constant_shortcut(p, Role::Predicate, id)?);
    }
    for pm in g.objects_of(node, &iri(rr::PREDICATE_MAP)) {
        predicates.push(parse_term_map(g, pm, Role::Predicate, id)?);
    }
    let mut objects = Vec::new();
    for o in g.objects_of(node, &iri(rr::OBJECT)) {
        objects.push(ObjectMap::Term(constant_shortcut(o, Role::Object, id)?));
    }
    for om in g.objects_of(node, &iri(rr::OBJECT_MAP)) {
        let parents = g.objects_of(om, &iri(rr::PARENT_TRIPLES_MAP));
        match parents.as_slice() {
            [] => objects.push(ObjectMap::Term(parse_term_map(g, om, Role::Object, id)?)),
            [parent] => {
                if !all_maps.contains(*parent) {
                    return Err(MappingError::UnresolvedParent {
                        map: id.clone(),
                        parent: parent.to_string(),
                    });
                }
                let mut joins = Vec::new();
                for jc in g.objects_of(om, &iri(rr::JOIN_CONDITION)) {
                    let field = |p: &str| g.objects_of(jc, &iri(p)).first().map(|t| t.value().to_owned());
                    match (field(rr::CHILD), field(rr::PARENT)) {
                        (Some(child), Some(parent)) => joins.push(JoinCondition { child, parent }),
                        _ => {
                            return Err(MappingError::InvalidTermMap {
                                map: id.clone(),
                                node: jc.to_string(),
                                reason: "join condition needs rr:child and rr:parent".into(),
                            })
                        }
                    }
                }
                objects.push(ObjectMap::Ref(RefObjectMap {
                    parent: MapId((*parent).clone()),
                    joins,
                }));
            }
            _ => {
                return Err(MappingError::InvalidTermMap {
                    map: id.clone(),
                    node: om.to_string(),
                    reason: "more than one rr:parentTriplesMap".into(),
                })
            }
        }
    }
    if predicates.is_empty() || objects.is_empty() {
        return Err(MappingError::EmptyPredicateObjectMap(id.clone()));
    }
    Ok(PredicateObjectMap { predicates, objects })
}

fn constant_shortcut(term: &Term, role: Role, id: &MapId) -> Result<TermMap, MappingError> {
    let tm = TermMap::constant(term.clone());
    check_role(&tm, role, id, &term.to_string())?;
    Ok(tm)
}

fn parse_term_map(g: &Graph, node: &Term, role: Role, id: &MapId) -> Result<TermMap, MappingError> {
    warn_unknown(g, node, TERM_MAP_PROPERTIES, id);
    let invalid = |reason: String| MappingError::InvalidTermMap {
        map: id.clone(),
        node: node.to_string(),
        reason,
    };
    let constants = g.objects_of(node, &iri(rr::CONSTANT));
    let mut references: Vec<&Term> = g.objects_of(node, &iri(rml::REFERENCE));
    references.extend(g.objects_of(node, &iri(rr::COLUMN)));
    let templates = g.objects_of(node, &iri(rr::TEMPLATE));
    let count = constants.len() + references.len() + templates.len();
    if count != 1 {
        return Err(invalid(format!(
            "expected exactly one of rr:constant, rml:reference/rr:column, rr:template; found {count}"
        )));
    }

    let datatype = match g.objects_of(node, &iri(rr::DATATYPE)).as_slice() {
        [] => None,
        [Term::Iri(dt)] => Some(dt.clone()),
        _ => return Err(invalid("rr:datatype must be a single IRI".into())),
    };
    let language = match g.objects_of(node, &iri(rr::LANGUAGE)).as_slice() {
        [] => None,
        [t] if t.is_literal() => Some(t.value().to_owned()),
        _ => return Err(invalid("rr:language must be a single literal".into())),
    };
    let declared = match g.objects_of(node, &iri(rr::TERM_TYPE)).as_slice() {
        [] => None,
        [Term::Iri(t)] if t == rr::IRI => Some(TermType::Iri),
        [Term::Iri(t)] if t == rr::BLANK_NODE => Some(TermType::BlankNode),
        [Term::Iri(t)] if t == rr::LITERAL => Some(TermType::Literal),
        [other] => return Err(invalid(format!("unknown term type {other}"))),
        _ => return Err(invalid("multiple term types".into())),
    };

    let (kind, default_type) = if let Some(c) = constants.first() {
        let constant = TermMap::constant((*c).clone());
        (constant.kind, constant.term_type)
    } else if let Some(r) = references.first() {
        let default = if role == Role::Object { TermType::Literal } else { TermType::Iri };
        (TermMapKind::Reference(r.value().to_owned()), default)
    } else {
        let text = templates[0].value();
        let template = parse_template(text).map_err(|source| MappingError::Template {
            map: id.clone(),
            source,
        })?;
        (TermMapKind::Template(template), TermType::Iri)
    };
    let implied_literal = (datatype.is_some() || language.is_some()).then_some(TermType::Literal);
    let term_type = declared.or(implied_literal).unwrap_or(default_type);

    let tm = TermMap {
        kind,
        term_type,
        datatype,
        language,
    };
    check_role(&tm, role, id, &node.to_string())?;
    Ok(tm)
}

fn check_role(tm: &TermMap, role: Role, id: &MapId, node: &str) -> Result<(), MappingError> {
    let invalid = |reason: &str| MappingError::InvalidTermMap {
        map: id.clone(),
        node: node.to_owned(),
        reason: reason.to_owned(),
    };
    if tm.datatype.is_some() && tm.language.is_some() {
        return Err(invalid("rr:datatype and rr:language are mutually exclusive"));
    }
    if (tm.datatype.is_some() || tm.language.is_some()) && tm.term_type != TermType::Literal {
        return Err(invalid("rr:datatype and rr:language require term type rr:Literal"));
    }
    if let Some(lang) = &tm.language {
        if crate::rdf::Term::lang("", lang.as_str()).is_err() {
            return Err(invalid("invalid language tag"));
        }
    }
    match role {
        Role::Subject if tm.term_type == TermType::Literal => Err(MappingError::LiteralSubject(id.clone())),
        Role::Predicate if tm.term_type != TermType::Iri => Err(invalid("predicate maps must generate IRIs")),
        _ => Ok(()),
    }
}

fn warn_unknown(g: &Graph, node: &Term, known: &[&str], id: &MapId) {
    let mut seen = HashSet::new();
    for t in g.matching(Some(node), None, None) {
        let p = t.predicate.value();
        if !known.contains(&p) && seen.insert(p.to_owned()) {
            warn!("triples map {id}: ignoring unknown property <{p}> on {node}");
        }
    }
}

//! Static checks over parsed triples maps.

use std::collections::BTreeMap;
use std::fmt;

use super::model::{LogicalSource, MapId, ObjectMap, TermMap, TriplesMap};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    DuplicateId(MapId),
    UnknownColumn { map: MapId, column: String },
    UnknownJoinColumn { map: MapId, parent: MapId, column: String, side: JoinSide },
    UnresolvedParent { map: MapId, parent: MapId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JoinSide {
    Child,
    Parent,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateId(id) => write!(f, "triples map id {id} is used more than once"),
            Diagnostic::UnknownColumn { map, column } => {
                write!(f, "{map}: column {column:?} is not in the source header")
            }
            Diagnostic::UnknownJoinColumn { map, parent, column, side } => {
                let side = match side {
                    JoinSide::Child => "child",
                    JoinSide::Parent => "parent",
                };
                write!(f, "{map}: join with {parent} uses {side} column {column:?} absent from the {side} header")
            }
            Diagnostic::UnresolvedParent { map, parent } => write!(f, "{map}: parent {parent} is not defined"),
        }
    }
}

/// Checks ids, column references and joins. `header_of` returns the header
/// of a source when known; sources without a known header are skipped here
/// and checked during execution.
pub fn validate_mapping<F>(maps: &[TriplesMap], header_of: F) -> Vec<Diagnostic>
where
    F: Fn(&LogicalSource) -> Option<Vec<String>>,
{
    let mut out = Vec::new();
    let mut by_id: BTreeMap<&MapId, Vec<&TriplesMap>> = BTreeMap::new();
    for m in maps {
        by_id.entry(&m.id).or_default().push(m);
    }
    for (id, group) in &by_id {
        if group.len() > 1 {
            out.push(Diagnostic::DuplicateId((*id).clone()));
        }
    }

    let mut headers: BTreeMap<&LogicalSource, Option<Vec<String>>> = BTreeMap::new();
    for m in maps {
        headers.entry(&m.logical_source).or_insert_with(|| header_of(&m.logical_source));
    }

    for m in maps {
        let header = headers[&m.logical_source].as_deref();
        if let Some(header) = header {
            let mut term_maps: Vec<&TermMap> = vec![&m.subject_map.term_map];
            for pom in &m.predicate_object_maps {
                term_maps.extend(&pom.predicates);
                term_maps.extend(pom.objects.iter().filter_map(|o| match o {
                    ObjectMap::Term(tm) => Some(tm),
                    ObjectMap::Ref(_) => None,
                }));
            }
            let mut missing: Vec<&str> = term_maps
                .iter()
                .flat_map(|tm| tm.columns())
                .filter(|c| !header.iter().any(|h| h == c))
                .collect();
            missing.sort();
            missing.dedup();
            out.extend(missing.into_iter().map(|c| Diagnostic::UnknownColumn {
                map: m.id.clone(),
                column: c.to_owned(),
            }));
        }

        for (_, rom) in m.ref_object_maps() {
            let Some(parent) = by_id.get(&rom.parent).and_then(|g| g.first()) else {
                out.push(Diagnostic::UnresolvedParent {
                    map: m.id.clone(),
                    parent: rom.parent.clone(),
                });
                continue;
            };
            let parent_header = headers[&parent.logical_source].as_deref();
            for jc in &rom.joins {
                let checks = [(header, &jc.child, JoinSide::Child), (parent_header, &jc.parent, JoinSide::Parent)];
                for (h, column, side) in checks {
                    if h.is_some_and(|h| !h.iter().any(|x| x == column)) {
                        out.push(Diagnostic::UnknownJoinColumn {
                            map: m.id.clone(),
                            parent: rom.parent.clone(),
                            column: column.clone(),
                            side,
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

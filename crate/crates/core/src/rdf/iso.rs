//! Blank-node-aware graph isomorphism.
//!
//! Ground triples are compared directly. Blank nodes are colored by iterated
//! neighbourhood hashing, and a backtracking search assigns each blank node
//! of the left graph to a same-colored node of the right graph, checking
//! every triple as soon as all of its blank nodes are mapped.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use super::graph::Graph;
use super::term::{Term, Triple};

/// Default cap on search-tree nodes explored.
pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("isomorphism search exceeded its budget of {budget} candidate assignments")]
pub struct SearchBudgetExceeded {
    pub budget: usize,
}

/// True iff some bijection between blank nodes makes the triple sets equal.
pub fn isomorphic(g1: &Graph, g2: &Graph) -> Result<bool, SearchBudgetExceeded> {
    isomorphic_with_budget(g1, g2, DEFAULT_SEARCH_BUDGET)
}

pub fn isomorphic_with_budget(g1: &Graph, g2: &Graph, budget: usize) -> Result<bool, SearchBudgetExceeded> {
    if g1.len() != g2.len() {
        return Ok(false);
    }
    let mut left = Vec::new();
    for t in g1.iter() {
        let t = t.to_owned();
        if t.is_ground() {
            if !g2.contains(&t) {
                return Ok(false);
            }
        } else {
            left.push(t);
        }
    }
    let right: Vec<Triple> = g2.iter().map(|t| t.to_owned()).filter(|t| !t.is_ground()).collect();
    if left.len() != right.len() {
        return Ok(false);
    }
    if left.is_empty() {
        return Ok(true);
    }

    let (colors1, colors2) = refine_colors(&left, &right);
    let histogram = |colors: &HashMap<String, u64>| {
        let mut h: BTreeMap<u64, usize> = BTreeMap::new();
        for c in colors.values() {
            *h.entry(*c).or_default() += 1;
        }
        h
    };
    let classes1 = histogram(&colors1);
    if classes1 != histogram(&colors2) {
        return Ok(false);
    }

    let mut order: Vec<&String> = colors1.keys().collect();
    order.sort_by_key(|b| (classes1[&colors1[*b]], colors1[*b], (*b).clone()));
    let mut candidates: HashMap<u64, Vec<&String>> = HashMap::new();
    for (b, c) in &colors2 {
        candidates.entry(*c).or_default().push(b);
    }
    for list in candidates.values_mut() {
        list.sort();
    }
    let mut incident: HashMap<&str, Vec<&Triple>> = HashMap::new();
    for t in &left {
        for term in [&t.subject, &t.object] {
            if let Term::BlankNode(b) = term {
                let list = incident.entry(b.as_str()).or_default();
                if !list.iter().any(|x| std::ptr::eq(*x, t)) {
                    list.push(t);
                }
            }
        }
    }

    let mut search = Search {
        order,
        colors1: &colors1,
        candidates: &candidates,
        incident: &incident,
        right: right.iter().collect(),
        mapping: HashMap::new(),
        used: HashSet::new(),
        explored: 0,
        budget,
    };
    search.assign(0)
}

struct Search<'a> {
    order: Vec<&'a String>,
    colors1: &'a HashMap<String, u64>,
    candidates: &'a HashMap<u64, Vec<&'a String>>,
    incident: &'a HashMap<&'a str, Vec<&'a Triple>>,
    right: HashSet<&'a Triple>,
    mapping: HashMap<&'a str, &'a str>,
    used: HashSet<&'a str>,
    explored: usize,
    budget: usize,
}

impl<'a> Search<'a> {
    fn assign(&mut self, depth: usize) -> Result<bool, SearchBudgetExceeded> {
        let Some(&node) = self.order.get(depth) else {
            return Ok(true);
        };
        let color = self.colors1[node];
        for &candidate in &self.candidates[&color] {
            if self.used.contains(candidate.as_str()) {
                continue;
            }
            self.explored += 1;
            if self.explored > self.budget {
                return Err(SearchBudgetExceeded { budget: self.budget });
            }
            self.mapping.insert(node, candidate);
            self.used.insert(candidate);
            if self.consistent(node) && self.assign(depth + 1)? {
                return Ok(true);
            }
            self.mapping.remove(node.as_str());
            self.used.remove(candidate.as_str());
        }
        Ok(false)
    }

    /// Every triple touching `node` whose blank nodes are all mapped must
    /// exist on the right.
    fn consistent(&self, node: &str) -> bool {
        self.incident[node].iter().all(|t| {
            let map = |term: &Term| match term {
                Term::BlankNode(b) => self.mapping.get(b.as_str()).map(|m| Term::BlankNode((*m).to_owned())),
                other => Some(other.clone()),
            };
            match (map(&t.subject), map(&t.object)) {
                (Some(s), Some(o)) => self.right.contains(&Triple {
                    subject: s,
                    predicate: t.predicate.clone(),
                    object: o,
                }),
                _ => true,
            }
        })
    }
}

/// Joint color refinement so colors are comparable across both graphs.
fn refine_colors(left: &[Triple], right: &[Triple]) -> (HashMap<String, u64>, HashMap<String, u64>) {
    let mut c1 = initial_colors(left);
    let mut c2 = initial_colors(right);
    let distinct = |a: &HashMap<String, u64>, b: &HashMap<String, u64>| {
        a.values().chain(b.values()).collect::<HashSet<_>>().len()
    };
    let mut classes = distinct(&c1, &c2);
    for _ in 0..(c1.len() + 1) {
        let n1 = refine_step(left, &c1);
        let n2 = refine_step(right, &c2);
        let next = distinct(&n1, &n2);
        c1 = n1;
        c2 = n2;
        if next <= classes {
            break;
        }
        classes = next;
    }
    (c1, c2)
}

fn initial_colors(triples: &[Triple]) -> HashMap<String, u64> {
    let mut colors = HashMap::new();
    for t in triples {
        for term in [&t.subject, &t.object] {
            if let Term::BlankNode(b) = term {
                colors.entry(b.clone()).or_insert(0);
            }
        }
    }
    refine_step(triples, &colors)
}

fn neighbour<'t>(term: &'t Term, colors: &HashMap<String, u64>) -> (u64, Option<&'t Term>) {
    match term {
        Term::BlankNode(b) => (colors[b], None),
        _ => (0, Some(term)),
    }
}

/// (position, predicate, neighbour color, ground neighbour)
type Signature<'a> = (u8, &'a Term, u64, Option<&'a Term>);

fn refine_step(triples: &[Triple], colors: &HashMap<String, u64>) -> HashMap<String, u64> {
    let mut signatures: HashMap<&str, Vec<Signature>> = HashMap::new();
    for t in triples {
        if let Term::BlankNode(b) = &t.subject {
            let (c, g) = neighbour(&t.object, colors);
            signatures.entry(b).or_default().push((0, &t.predicate, c, g));
        }
        if let Term::BlankNode(b) = &t.object {
            let (c, g) = neighbour(&t.subject, colors);
            signatures.entry(b).or_default().push((1, &t.predicate, c, g));
        }
    }
    signatures
        .into_iter()
        .map(|(b, mut sig)| {
            sig.sort();
            let mut h = DefaultHasher::new();
            colors[b].hash(&mut h);
            sig.hash(&mut h);
            (b.to_owned(), h.finish())
        })
        .collect()
}

//! Indexed in-memory triple store.
//!
//! Terms are interned into dense ids. Three ordered indexes (SPO, POS, OSP)
//! answer every bound/unbound pattern with a single range scan. Iteration
//! order is deterministic: by term id, i.e. first-insertion order of terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::term::{Term, Triple};

pub type TermId = u32;

type Index = BTreeMap<TermId, BTreeSet<(TermId, TermId)>>;

/// Borrowed view of a triple stored in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleRef<'a> {
    pub subject: &'a Term,
    pub predicate: &'a Term,
    pub object: &'a Term,
}

impl TripleRef<'_> {
    pub fn to_owned(&self) -> Triple {
        Triple {
            subject: self.subject.clone(),
            predicate: self.predicate.clone(),
            object: self.object.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: Index,
    pos: Index,
    osp: Index,
    len: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts a triple; returns `false` when it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let Triple {
            subject,
            predicate,
            object,
        } = triple;
        let s = self.intern(subject);
        let p = self.intern(predicate);
        let o = self.intern(object);
        self.insert_ids(s, p, o)
    }

    fn insert_ids(&mut self, s: TermId, p: TermId, o: TermId) -> bool {
        if !self.spo.entry(s).or_default().insert((p, o)) {
            return false;
        }
        self.pos.entry(p).or_default().insert((o, s));
        self.osp.entry(o).or_default().insert((s, p));
        self.len += 1;
        true
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = TermId::try_from(self.terms.len()).expect("term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let (Some(s), Some(p), Some(o)) = (
            self.id_of(&triple.subject),
            self.id_of(&triple.predicate),
            self.id_of(&triple.object),
        ) else {
            return false;
        };
        self.spo.get(&s).is_some_and(|set| set.contains(&(p, o)))
    }

    /// Adds every triple of `other`.
    pub fn extend_from(&mut self, other: &Graph) {
        for t in other.iter() {
            self.insert(t.to_owned());
        }
    }

    pub fn id_of(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = TripleRef<'_>> + '_ {
        self.match_ids(None, None, None).map(|ids| self.resolve(ids))
    }

    fn resolve(&self, [s, p, o]: [TermId; 3]) -> TripleRef<'_> {
        TripleRef {
            subject: self.term(s),
            predicate: self.term(p),
            object: self.term(o),
        }
    }

    /// Triples agreeing with every bound position.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&Term>,
        predicate: Option<&Term>,
        object: Option<&Term>,
    ) -> Box<dyn Iterator<Item = TripleRef<'a>> + 'a> {
        let lookup = |t: Option<&Term>| match t {
            None => Ok(None),
            Some(t) => self.id_of(t).map(Some).ok_or(()),
        };
        match (lookup(subject), lookup(predicate), lookup(object)) {
            (Ok(s), Ok(p), Ok(o)) => Box::new(self.match_ids(s, p, o).map(move |ids| self.resolve(ids))),
            _ => Box::new(std::iter::empty()),
        }
    }

    /// Id-level pattern match, picking the index whose key is bound.
    pub fn match_ids(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Box<dyn Iterator<Item = [TermId; 3]> + '_> {
        fn range(index: &Index, key: TermId, second: TermId) -> impl Iterator<Item = TermId> + '_ {
            index
                .get(&key)
                .into_iter()
                .flat_map(move |set| set.range((second, 0)..=(second, TermId::MAX)))
                .map(|&(_, third)| third)
        }
        fn all(index: &Index, key: TermId) -> impl Iterator<Item = (TermId, TermId)> + '_ {
            index.get(&key).into_iter().flat_map(|set| set.iter().copied())
        }
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let hit = self.spo.get(&s).is_some_and(|set| set.contains(&(p, o)));
                Box::new(hit.then_some([s, p, o]).into_iter())
            }
            (Some(s), Some(p), None) => Box::new(range(&self.spo, s, p).map(move |o| [s, p, o])),
            (Some(s), None, Some(o)) => Box::new(range(&self.osp, o, s).map(move |p| [s, p, o])),
            (None, Some(p), Some(o)) => Box::new(range(&self.pos, p, o).map(move |s| [s, p, o])),
            (Some(s), None, None) => Box::new(all(&self.spo, s).map(move |(p, o)| [s, p, o])),
            (None, Some(p), None) => Box::new(all(&self.pos, p).map(move |(o, s)| [s, p, o])),
            (None, None, Some(o)) => Box::new(all(&self.osp, o).map(move |(s, p)| [s, p, o])),
            (None, None, None) => Box::new(
                self.spo
                    .iter()
                    .flat_map(|(&s, set)| set.iter().map(move |&(p, o)| [s, p, o])),
            ),
        }
    }

    /// Upper bound on the number of matches for a pattern, from index sizes.
    pub fn estimate(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> usize {
        let size = |index: &Index, key: TermId| index.get(&key).map_or(0, BTreeSet::len);
        match (s, p, o) {
            (None, None, None) => self.len,
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => {
                self.match_ids(s, p, o).count()
            }
            (Some(s), None, None) => size(&self.spo, s),
            (None, Some(p), None) => size(&self.pos, p),
            (None, None, Some(o)) => size(&self.osp, o),
        }
    }

    pub fn distinct_subjects(&self) -> usize {
        self.spo.len()
    }

    pub fn distinct_predicates(&self) -> usize {
        self.pos.len()
    }

    pub fn distinct_objects(&self) -> usize {
        self.osp.len()
    }

    /// Number of triples with the given predicate.
    pub fn predicate_count(&self, predicate: &Term) -> usize {
        self.id_of(predicate)
            .map_or(0, |p| self.pos.get(&p).map_or(0, BTreeSet::len))
    }

    /// Distinct subjects in index order.
    pub fn subjects(&self) -> impl Iterator<Item = &Term> + '_ {
        self.spo.keys().map(|&id| self.term(id))
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects_of<'a>(&'a self, subject: &Term, predicate: &Term) -> Vec<&'a Term> {
        self.matching(Some(subject), Some(predicate), None)
            .map(|t| t.object)
            .collect()
    }

    /// Subjects of `(?, predicate, object)`.
    pub fn subjects_of<'a>(&'a self, predicate: &Term, object: &Term) -> Vec<&'a Term> {
        self.matching(None, Some(predicate), Some(object))
            .map(|t| t.subject)
            .collect()
    }

    pub fn to_triples(&self) -> Vec<Triple> {
        self.iter().map(|t| t.to_owned()).collect()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl PartialEq for Graph {
    /// Set equality of triples (blank labels compared literally).
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.iter().all(|t| other.contains(&t.to_owned()))
    }
}

impl Eq for Graph {}

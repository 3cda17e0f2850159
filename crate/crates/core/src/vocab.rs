//! SKOS controlled vocabularies built from tabular term lists.
//!
//! Concepts live at `{base}{name}/{id}` where `id` is the normalized record
//! identifier, and all belong to the scheme `{base}{name}`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::rdf::vocab::{rdf, skos};
use crate::rdf::{has_scheme, Graph, Term, TermError, Triple};

pub const DEFAULT_BASE: &str = "https://w3id.org/whow/controlled-vocabulary/";

fn default_base() -> String {
    DEFAULT_BASE.to_owned()
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyPolicy {
    pub name: String,
    #[serde(default = "default_base")]
    pub base: String,
    pub id_column: String,
    /// Language tag → column holding the preferred label in that language.
    pub label_columns: BTreeMap<String, String>,
    pub notation_column: Option<String>,
    pub broader_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConceptRecord {
    pub id: String,
    pub labels: BTreeMap<String, String>,
    pub notation: Option<String>,
    pub broader: Option<String>,
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Policy { path: PathBuf, message: String },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("identifier {0:?} is empty after normalization")]
    EmptyId(String),
    #[error("record {id:?} has no label")]
    NoLabel { id: String },
    #[error("duplicate concept id {id:?} (from {first:?} and {second:?})")]
    DuplicateId { id: String, first: String, second: String },
    #[error("concept {id:?} has broader {broader:?}, which is not in the vocabulary")]
    DanglingBroader { id: String, broader: String },
    #[error("broader cycle: {}", .0.join(" -> "))]
    BroaderCycle(Vec<String>),
    #[error(transparent)]
    Term(#[from] TermError),
}

fn is_slug(s: &str) -> bool {
    !s.is_empty() && s.split('-').all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
}

impl VocabularyPolicy {
    pub fn validate(&self) -> Result<(), VocabError> {
        if !is_slug(&self.name) {
            return Err(VocabError::InvalidPolicy(format!(
                "name {:?} must be a lowercase hyphenated slug",
                self.name
            )));
        }
        if !self.base.ends_with('/') || !has_scheme(&self.base) {
            return Err(VocabError::InvalidPolicy(format!(
                "base {:?} must be an absolute IRI ending in '/'",
                self.base
            )));
        }
        if self.label_columns.is_empty() {
            return Err(VocabError::InvalidPolicy("label_columns is empty".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VocabError> {
        let text = std::fs::read_to_string(path).map_err(|source| VocabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let p: VocabularyPolicy = toml::from_str(&text).map_err(|e| VocabError::Policy {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn scheme_iri(&self) -> String {
        format!("{}{}", self.base, self.name)
    }

    pub fn concept_iri(&self, normalized_id: &str) -> String {
        format!("{}{}/{}", self.base, self.name, normalized_id)
    }
}

fn is_id_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '.' | '_' | '-')
}

/// Lowercases, collapses whitespace runs into one hyphen and percent-encodes
/// everything outside `[a-z0-9._-]`. Existing `%hh` escapes are kept (with
/// lowercase hex) so the function is idempotent.
pub fn normalize_id(raw: &str) -> Result<String, VocabError> {
    let lower = raw.trim().to_lowercase();
    let mut out = String::with_capacity(lower.len());
    let chars: Vec<char> = lower.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            while i < chars.len() && chars[i].is_whitespace() {
                i += 1;
            }
            out.push('-');
            continue;
        }
        if is_id_char(c) {
            out.push(c);
        } else if c == '%' && i + 2 < chars.len() && chars[i + 1].is_ascii_hexdigit() && chars[i + 2].is_ascii_hexdigit()
        {
            out.push('%');
            out.push(chars[i + 1].to_ascii_lowercase());
            out.push(chars[i + 2].to_ascii_lowercase());
            i += 3;
            continue;
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02x}"));
            }
        }
        i += 1;
    }
    if out.is_empty() {
        return Err(VocabError::EmptyId(raw.to_owned()));
    }
    Ok(out)
}

/// Reads concept records from a CSV file with a header row, using the
/// policy's column names. Empty label cells are skipped.
pub fn read_records(policy: &VocabularyPolicy, path: &Path) -> Result<Vec<ConceptRecord>, VocabError> {
    let csv_err = |source| VocabError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| VocabError::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_owned(),
            })
    };
    let id_col = col(&policy.id_column)?;
    let label_cols = policy
        .label_columns
        .iter()
        .map(|(lang, c)| Ok((lang.clone(), col(c)?)))
        .collect::<Result<Vec<_>, VocabError>>()?;
    let notation_col = policy.notation_column.as_deref().map(col).transpose()?;
    let broader_col = policy.broader_column.as_deref().map(col).transpose()?;

    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let cell = |i: usize| rec.get(i).map(str::to_owned).filter(|s| !s.is_empty());
        out.push(ConceptRecord {
            id: rec.get(id_col).unwrap_or_default().to_owned(),
            labels: label_cols
                .iter()
                .filter_map(|(lang, i)| cell(*i).map(|v| (lang.clone(), v)))
                .collect(),
            notation: notation_col.and_then(cell),
            broader: broader_col.and_then(cell),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub scheme: String,
    pub concepts: usize,
    pub graph: Graph,
}

impl Vocabulary {
    pub fn triple_count(&self) -> usize {
        self.graph.len()
    }
}

/// Builds the scheme and its concepts. Ids (and broader references) are
/// normalized first; duplicates, dangling or cyclic broader links fail.
pub fn build_vocabulary(
    policy: &VocabularyPolicy,
    records: impl IntoIterator<Item = ConceptRecord>,
) -> Result<Vocabulary, VocabError> {
    policy.validate()?;
    let mut concepts: BTreeMap<String, (String, ConceptRecord)> = BTreeMap::new();
    for r in records {
        let id = normalize_id(&r.id)?;
        if r.labels.values().all(|l| l.trim().is_empty()) {
            return Err(VocabError::NoLabel { id });
        }
        if let Some((first, _)) = concepts.get(&id) {
            return Err(VocabError::DuplicateId {
                id,
                first: first.clone(),
                second: r.id,
            });
        }
        concepts.insert(id, (r.id.clone(), r));
    }

    let mut broader: HashMap<String, String> = HashMap::new();
    for (id, (_, r)) in &concepts {
        if let Some(b) = &r.broader {
            let b = normalize_id(b)?;
            if !concepts.contains_key(&b) {
                return Err(VocabError::DanglingBroader {
                    id: id.clone(),
                    broader: b,
                });
            }
            broader.insert(id.clone(), b);
        }
    }
    check_acyclic(concepts.keys(), &broader)?;

    let iri = |s: String| Term::iri(s);
    let typ = Term::Iri(rdf::TYPE.to_owned());
    let scheme = iri(policy.scheme_iri())?;
    let mut g = Graph::new();
    g.insert(Triple::new(scheme.clone(), typ.clone(), Term::Iri(skos::CONCEPT_SCHEME.to_owned()))?);
    for (id, (_, r)) in &concepts {
        let c = iri(policy.concept_iri(id))?;
        let mut add = |p: &str, o: Term| -> Result<(), VocabError> {
            g.insert(Triple::new(c.clone(), Term::Iri(p.to_owned()), o)?);
            Ok(())
        };
        add(rdf::TYPE, Term::Iri(skos::CONCEPT.to_owned()))?;
        add(skos::IN_SCHEME, scheme.clone())?;
        for (lang, label) in &r.labels {
            if !label.trim().is_empty() {
                add(skos::PREF_LABEL, Term::lang(label.trim(), lang.as_str())?)?;
            }
        }
        if let Some(n) = &r.notation {
            add(skos::NOTATION, Term::string(n.as_str()))?;
        }
        if let Some(b) = broader.get(id) {
            add(skos::BROADER, iri(policy.concept_iri(b))?)?;
        }
    }
    Ok(Vocabulary {
        scheme: policy.scheme_iri(),
        concepts: concepts.len(),
        graph: g,
    })
}

/// Each concept has at most one broader link, so following the chain from
/// every node finds any cycle (including self-loops).
fn check_acyclic<'a>(ids: impl Iterator<Item = &'a String>, broader: &HashMap<String, String>) -> Result<(), VocabError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    for start in ids {
        let mut path: Vec<&str> = Vec::new();
        let mut cur = Some(start.as_str());
        while let Some(id) = cur {
            match marks.get(id) {
                Some(Mark::Done) => break,
                Some(Mark::Active) => {
                    let from = path.iter().position(|p| *p == id).expect("active node is on the path");
                    let mut cycle: Vec<String> = path[from..].iter().map(|s| s.to_string()).collect();
                    cycle.push(id.to_owned());
                    return Err(VocabError::BroaderCycle(cycle));
                }
                None => {}
            }
            marks.insert(id, Mark::Active);
            path.push(id);
            cur = broader.get(id).map(String::as_str);
        }
        for p in path {
            marks.insert(p, Mark::Done);
        }
    }
    Ok(())
}

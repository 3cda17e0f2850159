use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::vocab::{dcat, dct, rdf, void, xsd};
use crate::rdf::{has_scheme, Graph, Literal, Term, TermError, Triple};

pub const DEFAULT_DATASET_BASE: &str = "urn:kg-forge:dataset:";
pub const MEDIA_TYPE_BASE: &str = "http://www.iana.org/assignments/media-types/";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distribution {
    pub download_url: String,
    /// e.g. `application/n-triples`.
    pub media_type: String,
}

/// Publication metadata for one dataset. Node IRIs are `{base}{id}` for
/// the dataset and `{base}{id}/distribution` for its distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDescriptor {
    pub id: String,
    #[serde(default = "default_base")]
    pub base: String,
    /// Language tag → title.
    pub title: BTreeMap<String, String>,
    #[serde(default)]
    pub description: BTreeMap<String, String>,
    pub license: String,
    pub publisher: String,
    pub distribution: Distribution,
    pub triple_count: Option<u64>,
}

fn default_base() -> String {
    DEFAULT_DATASET_BASE.to_owned()
}

#[derive(Debug, Error)]
pub enum DcatError {
    #[error("missing mandatory field {0}")]
    Missing(&'static str),
    #[error("{field} must be an absolute IRI, got {value:?}")]
    NotIri { field: &'static str, value: String },
    #[error("{path}: {message}")]
    Descriptor { path: String, message: String },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("graph does not describe a single dataset: {0}")]
    Shape(String),
}

impl DatasetDescriptor {
    pub fn load(path: &Path) -> Result<Self, DcatError> {
        let err = |message: String| DcatError::Descriptor {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        toml::from_str(&text).map_err(|e| err(e.to_string()))
    }

    pub fn dataset_iri(&self) -> String {
        format!("{}{}", self.base, self.id)
    }

    pub fn distribution_iri(&self) -> String {
        format!("{}{}/distribution", self.base, self.id)
    }

    pub fn validate(&self) -> Result<(), DcatError> {
        if self.id.trim().is_empty() {
            return Err(DcatError::Missing("id"));
        }
        if self.title.values().all(|t| t.trim().is_empty()) {
            return Err(DcatError::Missing("title"));
        }
        for (field, value) in [
            ("base", &self.base),
            ("license", &self.license),
            ("publisher", &self.publisher),
            ("distribution.download_url", &self.distribution.download_url),
        ] {
            if value.trim().is_empty() {
                return Err(DcatError::Missing(field));
            }
            if !has_scheme(value) {
                return Err(DcatError::NotIri {
                    field,
                    value: value.clone(),
                });
            }
        }
        if self.distribution.media_type.trim().is_empty() {
            return Err(DcatError::Missing("distribution.media_type"));
        }
        Ok(())
    }
}

/// DCAT graph for a descriptor: one dataset node and one distribution node.
pub fn emit_dcat(d: &DatasetDescriptor) -> Result<Graph, DcatError> {
    d.validate()?;
    let ds = Term::iri(d.dataset_iri())?;
    let dist = Term::iri(d.distribution_iri())?;
    let mut g = Graph::new();
    let mut add = |s: &Term, p: &str, o: Term| -> Result<(), DcatError> {
        g.insert(Triple::new(s.clone(), Term::Iri(p.to_owned()), o)?);
        Ok(())
    };
    add(&ds, rdf::TYPE, Term::Iri(dcat::DATASET.to_owned()))?;
    add(&ds, dct::IDENTIFIER, Term::string(d.id.as_str()))?;
    for (lang, title) in &d.title {
        add(&ds, dct::TITLE, Term::lang(title.as_str(), lang.as_str())?)?;
    }
    for (lang, text) in &d.description {
        add(&ds, dct::DESCRIPTION, Term::lang(text.as_str(), lang.as_str())?)?;
    }
    add(&ds, dct::LICENSE, Term::iri(d.license.as_str())?)?;
    add(&ds, dct::PUBLISHER, Term::iri(d.publisher.as_str())?)?;
    add(&ds, dcat::DISTRIBUTION_PROP, dist.clone())?;
    if let Some(n) = d.triple_count {
        add(&ds, void::TRIPLES, Term::typed(n.to_string(), xsd::INTEGER)?)?;
    }
    add(&dist, rdf::TYPE, Term::Iri(dcat::DISTRIBUTION.to_owned()))?;
    add(&dist, dcat::DOWNLOAD_URL, Term::iri(d.distribution.download_url.as_str())?)?;
    add(
        &dist,
        dcat::MEDIA_TYPE,
        Term::iri(format!("{MEDIA_TYPE_BASE}{}", d.distribution.media_type))?,
    )?;
    Ok(g)
}

/// Reads a descriptor back from a graph produced by [`emit_dcat`].
pub fn parse_dcat(g: &Graph) -> Result<DatasetDescriptor, DcatError> {
    let p = |s: &str| Term::Iri(s.to_owned());
    let datasets = g.subjects_of(&p(rdf::TYPE), &p(dcat::DATASET));
    let [ds] = datasets.as_slice() else {
        return Err(DcatError::Shape(format!("{} dataset nodes", datasets.len())));
    };
    let one = |s: &Term, prop: &'static str| -> Result<&Term, DcatError> {
        match g.objects_of(s, &p(prop)).as_slice() {
            [o] => Ok(*o),
            [] => Err(DcatError::Missing(prop)),
            _ => Err(DcatError::Shape(format!("several values for {prop}"))),
        }
    };
    let lang_map = |prop: &str| -> BTreeMap<String, String> {
        g.objects_of(ds, &p(prop))
            .into_iter()
            .filter_map(Term::as_literal)
            .map(|l| (l.language().unwrap_or_default().to_owned(), l.lexical().to_owned()))
            .collect()
    };
    let id = one(ds, dct::IDENTIFIER)?.value().to_owned();
    let ds_iri = ds.value();
    let base = ds_iri
        .strip_suffix(id.as_str())
        .ok_or_else(|| DcatError::Shape(format!("dataset IRI {ds_iri} does not end with its identifier")))?
        .to_owned();
    let dist = one(ds, dcat::DISTRIBUTION_PROP)?;
    let media = one(dist, dcat::MEDIA_TYPE)?.value();
    let triple_count = match g.objects_of(ds, &p(void::TRIPLES)).first() {
        None => None,
        Some(t) => Some(
            t.as_literal()
                .map(Literal::lexical)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| DcatError::Shape("void:triples is not an integer".into()))?,
        ),
    };
    Ok(DatasetDescriptor {
        id,
        base,
        title: lang_map(dct::TITLE),
        description: lang_map(dct::DESCRIPTION),
        license: one(ds, dct::LICENSE)?.value().to_owned(),
        publisher: one(ds, dct::PUBLISHER)?.value().to_owned(),
        distribution: Distribution {
            download_url: one(dist, dcat::DOWNLOAD_URL)?.value().to_owned(),
            media_type: media.strip_prefix(MEDIA_TYPE_BASE).unwrap_or(media).to_owned(),
        },
        triple_count,
    })
}

//! RDF terms and triples.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::vocab::{rdf, xsd};

/// Reasons a term fails to satisfy the RDF abstract-syntax invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("IRI <{0}> is not absolute (no scheme)")]
    RelativeIri(String),
    #[error("IRI <{iri}> contains forbidden character {ch:?}")]
    IriCharacter { iri: String, ch: char },
    #[error("invalid blank node label {0:?}")]
    BlankLabel(String),
    #[error("invalid language tag {0:?}")]
    LanguageTag(String),
    #[error("literal with language tag must have datatype rdf:langString, got <{0}>")]
    LanguageDatatype(String),
    #[error("literal subject is not allowed")]
    LiteralSubject,
    #[error("predicate must be an IRI, got {0}")]
    NonIriPredicate(String),
}

/// A literal value. `language` is set iff `datatype` is `rdf:langString`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: String,
    language: Option<String>,
}

impl Literal {
    /// A plain `xsd:string` literal.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: xsd::STRING.to_owned(),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self, TermError> {
        let datatype = datatype.into();
        check_iri(&datatype)?;
        if datatype == rdf::LANG_STRING {
            return Err(TermError::LanguageDatatype(datatype));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        })
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        if !is_language_tag(&language) {
            return Err(TermError::LanguageTag(language));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: rdf::LANG_STRING.to_owned(),
            language: Some(language),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &str {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// Numeric value when the datatype is one of the XSD numeric types and
    /// the lexical form parses.
    pub fn numeric_value(&self) -> Option<f64> {
        if !xsd::is_numeric(&self.datatype) {
            return None;
        }
        let text = self.lexical.trim();
        match text {
            "INF" | "+INF" => Some(f64::INFINITY),
            "-INF" => Some(f64::NEG_INFINITY),
            "NaN" => Some(f64::NAN),
            _ if text.contains(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') => None,
            _ => text.parse::<f64>().ok(),
        }
    }
}

/// An RDF term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    /// Checked IRI constructor.
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        check_iri(&value)?;
        Ok(Term::Iri(value))
    }

    /// Checked blank node constructor; the label must match `[A-Za-z0-9_]+`.
    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if !is_blank_label(&label) {
            return Err(TermError::BlankLabel(label));
        }
        Ok(Term::BlankNode(label))
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self, TermError> {
        Literal::typed(lexical, datatype).map(Term::Literal)
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        Literal::lang(lexical, language).map(Term::Literal)
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// The "value" of a term: IRI string, blank label or lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(v) | Term::BlankNode(v) => v,
            Term::Literal(l) => &l.lexical,
        }
    }

    /// N-Triples encoding of this term.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        write_term(&mut out, self);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

/// A validated RDF triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        if !predicate.is_iri() {
            return Err(TermError::NonIriPredicate(predicate.to_ntriples()));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn is_ground(&self) -> bool {
        !self.subject.is_blank() && !self.object.is_blank()
    }

    /// One N-Triples line without the trailing newline.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        write_triple(&mut out, &self.subject, &self.predicate, &self.object);
        out
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

pub(crate) fn write_triple(out: &mut String, s: &Term, p: &Term, o: &Term) {
    write_term(out, s);
    out.push(' ');
    write_term(out, p);
    out.push(' ');
    write_term(out, o);
    out.push_str(" .");
}

pub(crate) fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(v) => {
            out.push('<');
            out.push_str(v);
            out.push('>');
        }
        Term::BlankNode(l) => {
            out.push_str("_:");
            out.push_str(l);
        }
        Term::Literal(l) => {
            out.push('"');
            escape_literal(out, &l.lexical);
            out.push('"');
            if let Some(lang) = &l.language {
                out.push('@');
                out.push_str(lang);
            } else if l.datatype != xsd::STRING {
                out.push_str("^^<");
                out.push_str(&l.datatype);
                out.push('>');
            }
        }
    }
}

/// Minimal deterministic escaping: quote, backslash, LF and CR as ECHAR,
/// remaining control characters as `\uXXXX`.
pub(crate) fn escape_literal(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn check_iri(value: &str) -> Result<(), TermError> {
    if let Some(ch) = value.chars().find(|&c| is_forbidden_iri_char(c)) {
        return Err(TermError::IriCharacter {
            iri: value.to_owned(),
            ch,
        });
    }
    if !has_scheme(value) {
        return Err(TermError::RelativeIri(value.to_owned()));
    }
    Ok(())
}

pub(crate) fn is_forbidden_iri_char(c: char) -> bool {
    matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') || c <= ' ' || c == '\u{7f}'
}

/// True if `value` starts with `scheme ":"`.
pub fn has_scheme(value: &str) -> bool {
    let Some(colon) = value.find(':') else {
        return false;
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

pub(crate) fn is_blank_label(label: &str) -> bool {
    !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first = parts.next().unwrap_or("");
    !first.is_empty()
        && first.len() <= 8
        && first.chars().all(|c| c.is_ascii_alphabetic())
        && parts.all(|p| !p.is_empty() && p.len() <= 8 && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_needs_scheme() {
        assert!(Term::iri("http://a").is_ok());
        assert!(Term::iri("urn:x").is_ok());
        assert_eq!(Term::iri("a/b"), Err(TermError::RelativeIri("a/b".into())));
        assert!(matches!(Term::iri("http://a b"), Err(TermError::IriCharacter { ch: ' ', .. })));
        assert!(Term::iri("http://a<").is_err());
    }

    #[test]
    fn language_only_with_lang_string() {
        let l = Literal::lang("ciao", "it").unwrap();
        assert_eq!(l.datatype(), rdf::LANG_STRING);
        assert!(Literal::typed("x", rdf::LANG_STRING).is_err());
        assert!(Literal::lang("x", "not a tag").is_err());
    }

    #[test]
    fn literal_subject_rejected() {
        let err = Triple::new(Term::string("x"), Term::iri("http://p").unwrap(), Term::string("y"));
        assert_eq!(err, Err(TermError::LiteralSubject));
    }

    #[test]
    fn ntriples_encoding() {
        let t = Term::typed("1", xsd::INTEGER).unwrap();
        assert_eq!(t.to_ntriples(), "\"1\"^^<http://www.w3.org/2001/XMLSchema#integer>");
        assert_eq!(Term::string("a\"b\n").to_ntriples(), "\"a\\\"b\\n\"");
        assert_eq!(Term::lang("x", "en").unwrap().to_ntriples(), "\"x\"@en");
        assert_eq!(Term::string("\u{1}").to_ntriples(), "\"\\u0001\"");
    }

    #[test]
    fn numeric_values() {
        assert_eq!(Literal::typed("42", xsd::INTEGER).unwrap().numeric_value(), Some(42.0));
        assert_eq!(Literal::typed("1.5e2", xsd::DOUBLE).unwrap().numeric_value(), Some(150.0));
        assert_eq!(Literal::typed("abc", xsd::INTEGER).unwrap().numeric_value(), None);
        assert_eq!(Literal::string("3").numeric_value(), None);
    }
}

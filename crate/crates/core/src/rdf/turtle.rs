//! Turtle subset reader and writer.
//!
//! Supported: `@prefix`/`@base` (and the SPARQL-style `PREFIX`/`BASE`),
//! `a`, predicate lists, object lists, `[...]` property lists, labeled blank
//! nodes, typed and language-tagged literals, long strings, and the numeric
//! and boolean shorthands. Collections and quoted triples are rejected.

use std::collections::BTreeMap;

use super::error::ParseError;
use super::graph::Graph;
use super::lex::{BlankScope, Cursor};
use super::prefix::PrefixMap;
use super::term::{has_scheme, write_term, Literal, Term, Triple};
use super::vocab::{rdf, xsd};

#[derive(Debug, Clone, Default)]
pub struct TurtleOptions {
    /// Base IRI for resolving relative references before any `@base`.
    pub base: Option<String>,
    /// Namespace for blank labels of this document.
    pub blank_prefix: String,
}

/// Parses a Turtle document without a base IRI.
pub fn parse_turtle(text: &str) -> Result<(Graph, PrefixMap), ParseError> {
    parse_turtle_with(text, &TurtleOptions::default())
}

pub fn parse_turtle_with(text: &str, options: &TurtleOptions) -> Result<(Graph, PrefixMap), ParseError> {
    let mut parser = Parser {
        c: Cursor::new(text),
        prefixes: PrefixMap::new(),
        base: options.base.clone(),
        blanks: BlankScope::new(&options.blank_prefix),
        graph: Graph::new(),
    };
    parser.document()?;
    Ok((parser.graph, parser.prefixes))
}

struct Parser<'a> {
    c: Cursor<'a>,
    prefixes: PrefixMap,
    base: Option<String>,
    blanks: BlankScope,
    graph: Graph,
}

impl Parser<'_> {
    fn document(&mut self) -> Result<(), ParseError> {
        loop {
            self.ws();
            if self.c.is_eof() {
                return Ok(());
            }
            if self.c.starts_with("@prefix") {
                self.c.eat("@prefix");
                self.prefix_decl()?;
                self.ws();
                self.c.expect_char('.')?;
            } else if self.c.starts_with("@base") {
                self.c.eat("@base");
                self.base_decl()?;
                self.ws();
                self.c.expect_char('.')?;
            } else if self.keyword("PREFIX") {
                self.prefix_decl()?;
            } else if self.keyword("BASE") {
                self.base_decl()?;
            } else {
                self.triples()?;
                self.ws();
                self.c.expect_char('.')?;
            }
        }
    }

    fn ws(&mut self) {
        self.c.skip_ws_and_comments();
    }

    /// Case-insensitive keyword followed by whitespace.
    fn keyword(&mut self, kw: &str) -> bool {
        if self.c.starts_with_keyword(kw)
            && self
                .c
                .peek_nth(kw.len())
                .is_some_and(char::is_whitespace)
        {
            for _ in 0..kw.len() {
                self.c.bump();
            }
            true
        } else {
            false
        }
    }

    fn prefix_decl(&mut self) -> Result<(), ParseError> {
        self.ws();
        let prefix = self.pn_prefix();
        self.c.expect_char(':')?;
        self.ws();
        let ns = self.iriref()?;
        self.prefixes.insert(prefix, ns);
        Ok(())
    }

    fn base_decl(&mut self) -> Result<(), ParseError> {
        self.ws();
        let base = self.iriref()?;
        self.base = Some(base);
        Ok(())
    }

    fn pn_prefix(&mut self) -> String {
        self.c.read_pn_prefix()
    }

    /// Absolute IRI from an IRIREF, resolving against the base.
    fn iriref(&mut self) -> Result<String, ParseError> {
        let raw = self.c.read_iriref()?;
        if has_scheme(&raw) {
            return Ok(raw);
        }
        match &self.base {
            Some(base) => Ok(resolve_iri(base, &raw)),
            None => Err(self.c.error(format!("relative IRI <{raw}> without a base"))),
        }
    }

    fn triples(&mut self) -> Result<(), ParseError> {
        if self.c.peek() == Some('[') {
            let subject = self.blank_property_list()?;
            self.ws();
            if self.c.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.ws();
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term, ParseError> {
        match self.c.peek() {
            Some('<') if self.c.starts_with("<<") => Err(self.c.unsupported("quoted triple")),
            Some('<') => self.iri_term(),
            Some('_') if self.c.starts_with("_:") => self.blank_label(),
            Some('(') => Err(self.c.unsupported("RDF collection")),
            Some('{') => Err(self.c.unsupported("formula")),
            Some('"' | '\'') => Err(self.c.error("literal cannot be a subject")),
            _ => self.prefixed_name(),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), ParseError> {
        loop {
            let predicate = self.verb()?;
            self.ws();
            self.object_list(subject, &predicate)?;
            self.ws();
            if !self.c.eat_char(';') {
                return Ok(());
            }
            // repeated or trailing semicolons are allowed
            loop {
                self.ws();
                if !self.c.eat_char(';') {
                    break;
                }
            }
            if matches!(self.c.peek(), Some('.' | ']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Term, ParseError> {
        if self.c.peek() == Some('a')
            && self
                .c
                .peek_nth(1)
                .is_none_or(|n| n.is_whitespace() || matches!(n, '<' | '[' | '"' | '_'))
        {
            self.c.bump();
            return Ok(Term::Iri(rdf::TYPE.to_owned()));
        }
        match self.c.peek() {
            Some('<') => self.iri_term(),
            Some('_') if self.c.starts_with("_:") => Err(self.c.error("blank node cannot be a predicate")),
            Some(_) => self.prefixed_name(),
            None => Err(self.c.unexpected("predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> Result<(), ParseError> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object)?;
            self.ws();
            if !self.c.eat_char(',') {
                return Ok(());
            }
            self.ws();
        }
    }

    fn emit(&mut self, s: Term, p: Term, o: Term) -> Result<(), ParseError> {
        let t = Triple::new(s, p, o).map_err(|e| self.c.term_error(e))?;
        self.graph.insert(t);
        Ok(())
    }

    fn object(&mut self) -> Result<Term, ParseError> {
        match self.c.peek() {
            Some('<') if self.c.starts_with("<<") => Err(self.c.unsupported("quoted triple")),
            Some('<') => self.iri_term(),
            Some('_') if self.c.starts_with("_:") => self.blank_label(),
            Some('[') => self.blank_property_list(),
            Some('(') => Err(self.c.unsupported("RDF collection")),
            Some('{') => Err(self.c.unsupported("formula")),
            Some('"' | '\'') => self.literal(),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => self.number(),
            Some(_) => {
                for (kw, value) in [("true", "true"), ("false", "false")] {
                    if self.c.starts_with(kw)
                        && self
                            .c
                            .peek_nth(kw.len())
                            .is_none_or(|n| !(n.is_alphanumeric() || matches!(n, '_' | ':' | '-')))
                    {
                        self.c.eat(kw);
                        return Ok(Term::Literal(Literal::typed(value, xsd::BOOLEAN).expect("xsd iri")));
                    }
                }
                self.prefixed_name()
            }
            None => Err(self.c.unexpected("object")),
        }
    }

    fn blank_property_list(&mut self) -> Result<Term, ParseError> {
        self.c.expect_char('[')?;
        let node = Term::BlankNode(self.blanks.fresh());
        self.ws();
        if !self.c.eat_char(']') {
            self.predicate_object_list(&node)?;
            self.ws();
            self.c.expect_char(']')?;
        }
        Ok(node)
    }

    fn iri_term(&mut self) -> Result<Term, ParseError> {
        let iri = self.iriref()?;
        Term::iri(iri).map_err(|e| self.c.term_error(e))
    }

    fn blank_label(&mut self) -> Result<Term, ParseError> {
        self.c.eat("_:");
        let label = self.c.read_blank_label()?;
        Ok(Term::BlankNode(self.blanks.labeled(&label)))
    }

    fn prefixed_name(&mut self) -> Result<Term, ParseError> {
        let (line, column) = (self.c.line(), self.c.column());
        let prefix = self.pn_prefix();
        if !self.c.eat_char(':') {
            return Err(self.c.unexpected("IRI, prefixed name or literal"));
        }
        let local = self.pn_local()?;
        let ns = self.prefixes.get(&prefix).ok_or(ParseError::UndeclaredPrefix {
            line,
            column,
            prefix: prefix.clone(),
        })?;
        Term::iri(format!("{ns}{local}")).map_err(|e| self.c.term_error(e))
    }

    fn pn_local(&mut self) -> Result<String, ParseError> {
        self.c.read_pn_local()
    }

    fn literal(&mut self) -> Result<Term, ParseError> {
        let lexical = self.c.read_string()?;
        let literal = if self.c.eat_char('@') {
            let tag = self.c.read_langtag()?;
            Literal::lang(lexical, tag)
        } else if self.c.eat("^^") {
            let dt = match self.c.peek() {
                Some('<') => self.iriref()?,
                _ => match self.prefixed_name()? {
                    Term::Iri(v) => v,
                    _ => unreachable!(),
                },
            };
            Literal::typed(lexical, dt)
        } else {
            Ok(Literal::string(lexical))
        };
        literal.map(Term::Literal).map_err(|e| self.c.term_error(e))
    }

    fn number(&mut self) -> Result<Term, ParseError> {
        self.c.read_number()
    }
}

/// Resolves a relative reference against an absolute base (RFC 3986 reference resolution,
/// without query/fragment subtleties beyond the common cases).
pub fn resolve_iri(base: &str, reference: &str) -> String {
    if has_scheme(reference) {
        return reference.to_owned();
    }
    let without_fragment = base.split('#').next().unwrap_or(base);
    if reference.is_empty() {
        return without_fragment.to_owned();
    }
    if reference.starts_with('#') {
        return format!("{without_fragment}{reference}");
    }
    let scheme_end = base.find(':').map_or(0, |i| i + 1);
    let scheme = &base[..scheme_end];
    if reference.starts_with("//") {
        return format!("{scheme}{reference}");
    }
    let after_scheme = &without_fragment[scheme_end..];
    let (authority, path) = match after_scheme.strip_prefix("//") {
        Some(rest) => {
            let end = rest.find('/').unwrap_or(rest.len());
            (&after_scheme[..end + 2], &rest[end..])
        }
        None => ("", after_scheme),
    };
    let path = path.split('?').next().unwrap_or(path);
    if reference.starts_with('?') {
        return format!("{scheme}{authority}{path}{reference}");
    }
    let merged = if reference.starts_with('/') {
        reference.to_owned()
    } else if let Some(slash) = path.rfind('/') {
        format!("{}{}", &path[..=slash], reference)
    } else if !authority.is_empty() {
        format!("/{reference}")
    } else {
        reference.to_owned()
    };
    format!("{scheme}{authority}{}", remove_dot_segments(&merged))
}

fn remove_dot_segments(path: &str) -> String {
    if !path.contains("./") && !path.ends_with("/.") && !path.ends_with("/..") {
        return path.to_owned();
    }
    let mut out: Vec<&str> = Vec::new();
    let segments: Vec<&str> = path.split('/').collect();
    let last = segments.len() - 1;
    for (i, seg) in segments.iter().enumerate() {
        match *seg {
            "." => {
                if i == last {
                    out.push("");
                }
            }
            ".." => {
                if out.len() > 1 || out.first().is_some_and(|s| !s.is_empty()) {
                    out.pop();
                }
                if i == last {
                    out.push("");
                }
            }
            s => out.push(s),
        }
    }
    out.join("/")
}

/// Writes `g` as Turtle using `prefixes` for compaction. Subjects, predicates
/// and objects appear in canonical (N-Triples string) order.
pub fn write_turtle(g: &Graph, prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    for (p, ns) in prefixes.iter() {
        out.push_str(&format!("@prefix {p}: <{ns}> .\n"));
    }
    let mut grouped: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for t in g.iter() {
        let subject = turtle_term(t.subject, prefixes);
        let predicate = if t.predicate.as_iri() == Some(rdf::TYPE) {
            "a".to_owned()
        } else {
            turtle_term(t.predicate, prefixes)
        };
        grouped
            .entry(subject)
            .or_default()
            .entry(predicate)
            .or_default()
            .push(turtle_term(t.object, prefixes));
    }
    for (subject, predicates) in grouped {
        out.push('\n');
        out.push_str(&subject);
        let count = predicates.len();
        for (i, (predicate, mut objects)) in predicates.into_iter().enumerate() {
            objects.sort();
            out.push_str(if i == 0 { " " } else { "    " });
            out.push_str(&predicate);
            out.push(' ');
            out.push_str(&objects.join(", "));
            out.push_str(if i + 1 == count { " .\n" } else { " ;\n" });
        }
    }
    out
}

fn turtle_term(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Iri(iri) => {
            if let Some((p, local)) = prefixes.shrink(iri) {
                return format!("{p}:{local}");
            }
        }
        Term::Literal(l) if l.language().is_none() && l.datatype() != xsd::STRING => {
            if let Some((p, local)) = prefixes.shrink(l.datatype()) {
                let mut s = String::new();
                write_term(&mut s, &Term::string(l.lexical()));
                return format!("{s}^^{p}:{local}");
            }
        }
        _ => {}
    }
    let mut s = String::new();
    write_term(&mut s, term);
    s
}

//! Streaming N-Triples reader and canonical writer.

use std::io::{self, BufRead, Write};

use super::error::ParseError;
use super::graph::Graph;
use super::lex::{BlankScope, Cursor};
use super::term::{write_triple, Literal, Term, Triple};

/// Line-at-a-time N-Triples reader. Memory use is bounded by the longest
/// line plus the blank-label table.
pub struct NTriplesReader<R> {
    reader: R,
    buf: String,
    line: usize,
    blanks: BlankScope,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(reader: R) -> Self {
        Self::with_blank_prefix(reader, "")
    }

    /// Reader whose blank labels are namespaced by `prefix`.
    pub fn with_blank_prefix(reader: R, prefix: &str) -> Self {
        NTriplesReader {
            reader,
            buf: String::new(),
            line: 0,
            blanks: BlankScope::new(prefix),
        }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim_end_matches(['\n', '\r']);
            match parse_line(text, self.line, &mut self.blanks) {
                Ok(Some(t)) => return Some(Ok(t)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

fn parse_line(text: &str, line: usize, blanks: &mut BlankScope) -> Result<Option<Triple>, ParseError> {
    let mut c = Cursor::at_line(text, line);
    c.skip_inline_ws();
    if c.is_eof() || c.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match c.peek() {
        Some('<') => read_iri(&mut c)?,
        Some('_') => read_blank(&mut c, blanks)?,
        _ => return Err(c.unexpected("subject IRI or blank node")),
    };
    c.skip_inline_ws();
    if c.peek() != Some('<') {
        return Err(c.unexpected("predicate IRI"));
    }
    let predicate = read_iri(&mut c)?;
    c.skip_inline_ws();
    let object = match c.peek() {
        Some('<') => read_iri(&mut c)?,
        Some('_') => read_blank(&mut c, blanks)?,
        Some('"') => read_literal(&mut c)?,
        _ => return Err(c.unexpected("object term")),
    };
    c.skip_inline_ws();
    if !c.eat_char('.') {
        return Err(c.error("missing '.' at end of triple"));
    }
    c.skip_inline_ws();
    if !(c.is_eof() || c.peek() == Some('#')) {
        return Err(c.unexpected("end of line"));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

fn read_iri(c: &mut Cursor<'_>) -> Result<Term, ParseError> {
    let raw = c.read_iriref()?;
    Term::iri(raw).map_err(|e| c.term_error(e))
}

fn read_blank(c: &mut Cursor<'_>, blanks: &mut BlankScope) -> Result<Term, ParseError> {
    if !c.eat("_:") {
        return Err(c.unexpected("'_:'"));
    }
    let label = c.read_blank_label()?;
    Ok(Term::BlankNode(blanks.labeled(&label)))
}

fn read_literal(c: &mut Cursor<'_>) -> Result<Term, ParseError> {
    if c.starts_with("\"\"\"") {
        return Err(c.error("long string literals are not valid N-Triples"));
    }
    let lexical = c.read_string()?;
    let literal = if c.eat_char('@') {
        let tag = c.read_langtag()?;
        Literal::lang(lexical, tag)
    } else if c.eat("^^") {
        let dt = c.read_iriref()?;
        Literal::typed(lexical, dt)
    } else {
        Ok(Literal::string(lexical))
    };
    literal.map(Term::Literal).map_err(|e| c.term_error(e))
}

/// Parses an N-Triples document held in memory.
pub fn parse_ntriples(text: &str) -> Result<Graph, ParseError> {
    read_ntriples(text.as_bytes())
}

/// Parses an N-Triples document from a reader.
pub fn read_ntriples<R: BufRead>(reader: R) -> Result<Graph, ParseError> {
    let mut g = Graph::new();
    for t in NTriplesReader::new(reader) {
        g.insert(t?);
    }
    Ok(g)
}

/// Parses a single term in N-Triples syntax, e.g. `<http://a>` or `"1"^^<...>`.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut c = Cursor::new(text.trim());
    let term = match c.peek() {
        Some('<') => read_iri(&mut c)?,
        Some('_') => {
            c.eat("_:");
            let label = c.read_blank_label()?;
            Term::blank(label).map_err(|e| c.term_error(e))?
        }
        Some('"') => read_literal(&mut c)?,
        _ => return Err(c.unexpected("term")),
    };
    if !c.is_eof() {
        return Err(c.unexpected("end of term"));
    }
    Ok(term)
}

/// Canonical N-Triples: one line per triple, lines sorted bytewise, each
/// terminated by `\n`.
pub fn serialize_canonical(g: &Graph) -> String {
    let lines = canonical_lines(g);
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Writes the canonical serialization to `w`.
pub fn write_canonical<W: Write>(g: &Graph, mut w: W) -> io::Result<()> {
    for line in canonical_lines(g) {
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn canonical_lines(g: &Graph) -> Vec<String> {
    let mut lines: Vec<String> = g
        .iter()
        .map(|t| {
            let mut line = String::new();
            write_triple(&mut line, t.subject, t.predicate, t.object);
            line
        })
        .collect();
    lines.sort_unstable();
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::vocab::xsd;

    #[test]
    fn minimal_line() {
        let g = parse_ntriples("<http://a> <http://p> \"x\" .").unwrap();
        assert_eq!(g.len(), 1);
        let t = g.iter().next().unwrap();
        assert_eq!(t.object, &Term::string("x"));
    }

    #[test]
    fn empty_input() {
        assert!(parse_ntriples("").unwrap().is_empty());
        assert!(parse_ntriples("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_lines_collapse() {
        let text = "<http://a> <http://p> <http://b> .\n<http://a> <http://p> <http://c> .\n<http://a> <http://p> <http://b> .\n";
        let distinct: std::collections::HashSet<&str> = text.lines().collect();
        assert_eq!(parse_ntriples(text).unwrap().len(), distinct.len());
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn literal_forms() {
        let g = parse_ntriples(
            "<http://a> <http://p> \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n\
             <http://a> <http://p> \"ciao\"@it . # trailing comment\n\
             _:x <http://p> \"caf\\u00E9\\n\" .\n",
        )
        .unwrap();
        assert!(g.contains(&Triple::new(
            Term::iri("http://a").unwrap(),
            Term::iri("http://p").unwrap(),
            Term::typed("1", xsd::INTEGER).unwrap()
        )
        .unwrap()));
        assert!(g.iter().any(|t| t.object == &Term::string("café\n")));
        assert!(g.iter().any(|t| t.object == &Term::lang("ciao", "it").unwrap()));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("<http://a> <http://p> <http://b>\n", "missing '.'"),
            ("\n<http://a> <http://p> \"open .\n", "unterminated literal"),
            ("<http://a b> <http://p> <http://b> .", "not allowed in IRI"),
            ("<rel> <http://p> <http://b> .", "not absolute"),
            ("<http://a> <http://p> \"\\u12\" .", "invalid UCHAR"),
        ];
        for (text, needle) in cases {
            let err = parse_ntriples(text).unwrap_err();
            assert!(err.to_string().contains(needle), "{text:?} -> {err}");
        }
        let err = parse_ntriples("\n<http://a> <http://p> \"open .\n").unwrap_err();
        assert_eq!(err.line(), Some(2));
    }

    #[test]
    fn blank_prefix_namespaces_labels() {
        let text = "_:a <http://p> _:b .\n";
        let g: Graph = NTriplesReader::with_blank_prefix(text.as_bytes(), "doc1_")
            .collect::<Result<_, _>>()
            .unwrap();
        let t = g.iter().next().unwrap();
        assert_eq!(t.subject, &Term::BlankNode("doc1_a".into()));
    }

    #[test]
    fn canonical_is_sorted_and_stable() {
        assert_eq!(serialize_canonical(&Graph::new()), "");
        let text = "<http://b> <http://p> \"q\\\"uote\" .\n<http://a> <http://p> <http://x> .\n";
        let g = parse_ntriples(text).unwrap();
        let out = serialize_canonical(&g);
        assert_eq!(
            out,
            "<http://a> <http://p> <http://x> .\n<http://b> <http://p> \"q\\\"uote\" .\n"
        );
        assert_eq!(serialize_canonical(&parse_ntriples(&out).unwrap()), out);
    }

    #[test]
    fn single_terms() {
        assert_eq!(parse_term("<http://a>").unwrap(), Term::iri("http://a").unwrap());
        assert_eq!(parse_term("\"x\"@en").unwrap(), Term::lang("x", "en").unwrap());
        assert!(parse_term("<http://a> junk").is_err());
    }
}

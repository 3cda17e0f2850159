//! Character-level scanning shared by the N-Triples, Turtle and SPARQL readers.

use std::collections::{HashMap, HashSet};

use super::error::ParseError;
use super::term::{is_blank_label, is_forbidden_iri_char, Literal, Term, TermError};
use super::vocab::xsd;

#[derive(Clone)]
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Self::at_line(src, 1)
    }

    pub fn at_line(src: &'a str, line: usize) -> Self {
        Cursor {
            src,
            pos: 0,
            line,
            col: 1,
        }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn column(&self) -> usize {
        self.col
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    pub fn is_eof(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    /// ASCII case-insensitive prefix test.
    pub fn starts_with_keyword(&self, kw: &str) -> bool {
        self.rest()
            .get(..kw.len())
            .is_some_and(|head| head.eq_ignore_ascii_case(kw))
    }

    pub fn eat(&mut self, s: &str) -> bool {
        if self.starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    pub fn eat_char(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_char(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_char(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    /// Skips spaces and tabs only.
    pub fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.bump();
        }
    }

    /// Skips whitespace (including newlines) and `#` comments.
    pub fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    pub fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(c) => self.error(format!("expected {expected}, found {c:?}")),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    pub fn unsupported(&self, construct: &'static str) -> ParseError {
        ParseError::Unsupported {
            line: self.line,
            column: self.col,
            construct,
        }
    }

    pub fn term_error(&self, source: TermError) -> ParseError {
        ParseError::Term {
            line: self.line,
            column: self.col,
            source,
        }
    }

    /// `<...>` with UCHAR decoding; the result may be relative.
    pub fn read_iriref(&mut self) -> Result<String, ParseError> {
        self.expect_char('<')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error("unterminated IRI")),
                Some('>') => return Ok(out),
                Some('\\') => {
                    let c = self.read_uchar()?;
                    if is_forbidden_iri_char(c) {
                        return Err(self.error(format!("escaped character {c:?} not allowed in IRI")));
                    }
                    out.push(c);
                }
                Some(c) if is_forbidden_iri_char(c) => {
                    return Err(self.error(format!("character {c:?} not allowed in IRI")));
                }
                Some(c) => out.push(c),
            }
        }
    }

    /// Reads the part of a `\u`/`\U` escape after the backslash.
    pub fn read_uchar(&mut self) -> Result<char, ParseError> {
        let digits = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid UCHAR escape")),
        };
        let mut value = 0u32;
        for _ in 0..digits {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid UCHAR escape"))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.error(format!("invalid UCHAR escape: U+{value:X} is not a character")))
    }

    /// A quoted string starting at the opening quote. `long` strings use
    /// three quote characters and may span lines.
    pub fn read_string(&mut self) -> Result<String, ParseError> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.unexpected("string")),
        };
        let triple: String = std::iter::repeat_n(quote, 3).collect();
        let long = self.starts_with(&triple);
        if long {
            self.eat(&triple);
        } else {
            self.bump();
        }
        let mut out = String::new();
        loop {
            if long && self.starts_with(&triple) {
                self.eat(&triple);
                return Ok(out);
            }
            match self.bump() {
                None => return Err(self.error("unterminated literal")),
                Some('\n' | '\r') if !long => return Err(self.error("unterminated literal")),
                Some(c) if c == quote && !long => return Ok(out),
                Some('\\') => match self.peek() {
                    Some('u' | 'U') => out.push(self.read_uchar()?),
                    Some(c) => {
                        let decoded = match c {
                            't' => '\t',
                            'b' => '\u{8}',
                            'n' => '\n',
                            'r' => '\r',
                            'f' => '\u{c}',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            _ => return Err(self.error(format!("invalid escape \\{c}"))),
                        };
                        self.bump();
                        out.push(decoded);
                    }
                    None => return Err(self.error("unterminated literal")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    /// Language tag after the `@`.
    pub fn read_langtag(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if super::term::is_language_tag(&out) {
            Ok(out)
        } else {
            Err(self.error(format!("invalid language tag {out:?}")))
        }
    }

    /// Blank node label after `_:`.
    pub fn read_blank_label(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            let ok = c.is_alphanumeric() || c == '_' || c == '-' || (c == '.' && !out.is_empty());
            if !ok {
                break;
            }
            out.push(c);
            self.bump();
        }
        // a trailing '.' terminates the statement, not the label
        while out.ends_with('.') {
            out.pop();
            self.pos -= 1;
            self.col -= 1;
        }
        if out.is_empty() {
            return Err(self.error("empty blank node label"));
        }
        Ok(out)
    }

    pub fn read_pn_prefix(&mut self) -> String {
        let mut out = String::new();
        while let Some(ch) = self.peek() {
            let ok = if out.is_empty() {
                ch.is_alphabetic()
            } else {
                ch.is_alphanumeric() || matches!(ch, '_' | '-' | '.')
            };
            if !ok {
                break;
            }
            out.push(ch);
            self.bump();
        }
        out
    }

    pub fn read_pn_local(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(ch) if "_~.-!$&'()*+,;=/?#@%".contains(ch) => out.push(ch),
                        _ => return Err(self.error("invalid local name escape")),
                    }
                }
                Some('%') => {
                    out.push('%');
                    self.bump();
                    for _ in 0..2 {
                        match self.bump() {
                            Some(h) if h.is_ascii_hexdigit() => out.push(h),
                            _ => return Err(self.error("invalid percent escape in local name")),
                        }
                    }
                }
                Some('.') if !out.is_empty() => {
                    // dots belong to the name only when a name character follows the run
                    let mut n = 0;
                    while self.peek_nth(n) == Some('.') {
                        n += 1;
                    }
                    let next = self.peek_nth(n);
                    if next.is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '%' | '\\')) {
                        for _ in 0..n {
                            out.push('.');
                            self.bump();
                        }
                    } else {
                        break;
                    }
                }
                Some(ch) if ch.is_alphanumeric() || ch == '_' || ch == ':' || (ch == '-' && !out.is_empty()) => {
                    out.push(ch);
                    self.bump();
                }
                _ => break,
            }
        }
        Ok(out)
    }

    /// Integer, decimal or double literal in Turtle/SPARQL syntax.
    pub fn read_number(&mut self) -> Result<Term, ParseError> {
        let mut text = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            text.push(sign);
            self.bump();
        }
        let digits = |p: &mut Self, text: &mut String| {
            let mut n = 0;
            while let Some(d) = p.peek().filter(char::is_ascii_digit) {
                text.push(d);
                p.bump();
                n += 1;
            }
            n
        };
        let int_digits = digits(self, &mut text);
        let mut datatype = xsd::INTEGER;
        if self.peek() == Some('.') && self.peek_nth(1).is_some_and(|d| d.is_ascii_digit()) {
            text.push('.');
            self.bump();
            digits(self, &mut text);
            datatype = xsd::DECIMAL;
        } else if int_digits == 0 {
            return Err(self.unexpected("number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            text.push(e);
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                text.push(sign);
                self.bump();
            }
            if digits(self, &mut text) == 0 {
                return Err(self.error("malformed exponent"));
            }
            datatype = xsd::DOUBLE;
        }
        Ok(Term::Literal(Literal::typed(text, datatype).expect("xsd iri")))
    }
}

/// Maps source blank-node labels to normalized, document-namespaced labels.
///
/// Labels outside `[A-Za-z0-9_]` are rewritten, collisions between distinct
/// source labels are broken with a numeric suffix, and fresh nodes get
/// `b0, b1, ...` skipping anything already taken.
#[derive(Debug, Default)]
pub(crate) struct BlankScope {
    prefix: String,
    assigned: HashMap<String, String>,
    used: HashSet<String>,
    next_fresh: usize,
}

impl BlankScope {
    pub fn new(prefix: &str) -> Self {
        debug_assert!(prefix.is_empty() || is_blank_label(prefix));
        BlankScope {
            prefix: prefix.to_owned(),
            ..Default::default()
        }
    }

    pub fn labeled(&mut self, source: &str) -> String {
        if let Some(label) = self.assigned.get(source) {
            return label.clone();
        }
        let base = sanitize(source);
        let mut local = base.clone();
        let mut k = 1;
        while self.used.contains(&local) {
            local = format!("{base}_{k}");
            k += 1;
        }
        self.used.insert(local.clone());
        let label = format!("{}{local}", self.prefix);
        self.assigned.insert(source.to_owned(), label.clone());
        label
    }

    pub fn fresh(&mut self) -> String {
        loop {
            let local = format!("b{}", self.next_fresh);
            self.next_fresh += 1;
            if self.used.insert(local.clone()) {
                return format!("{}{local}", self.prefix);
            }
        }
    }
}

fn sanitize(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            out.push(c);
        } else {
            out.push_str(&format!("x{:x}", c as u32));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_scope_is_injective() {
        let mut scope = BlankScope::new("");
        let a = scope.labeled("a-b");
        let b = scope.labeled("ax2db");
        assert_ne!(a, b);
        assert_eq!(scope.labeled("a-b"), a);
        assert!(is_blank_label(&a) && is_blank_label(&b));
    }

    #[test]
    fn fresh_labels_skip_taken() {
        let mut scope = BlankScope::new("d_");
        assert_eq!(scope.labeled("b0"), "d_b0");
        assert_eq!(scope.fresh(), "d_b1");
    }

    #[test]
    fn uchar_decoding() {
        let mut c = Cursor::new("<http://a/\\u00E9>");
        assert_eq!(c.read_iriref().unwrap(), "http://a/é");
        let mut c = Cursor::new("<http://a/\\u00G9>");
        assert!(c.read_iriref().is_err());
        let mut c = Cursor::new("\"a\\U0001F600b\"");
        assert_eq!(c.read_string().unwrap(), "a😀b");
    }
}

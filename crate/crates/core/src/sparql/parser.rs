//! Recursive-descent parser for the supported SPARQL subset.

use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{Cursor, Literal, ParseError, PrefixMap, Term};

use super::ast::*;

/// Deepest allowed OPTIONAL nesting.
pub const MAX_OPTIONAL_DEPTH: usize = 2;

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser {
        c: Cursor::new(text),
        prefixes: PrefixMap::new(),
        base: None,
    };
    p.query()
}

struct Parser<'a> {
    c: Cursor<'a>,
    prefixes: PrefixMap,
    base: Option<String>,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl Parser<'_> {
    fn ws(&mut self) {
        self.c.skip_ws_and_comments();
    }

    /// Case-insensitive keyword followed by a non-name character.
    fn at_keyword(&self, kw: &str) -> bool {
        self.c.starts_with_keyword(kw) && !self.c.rest()[kw.len()..].starts_with(is_name_char)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            for _ in 0..kw.len() {
                self.c.bump();
            }
            self.ws();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.c.unexpected(kw))
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.c.expect_char(c)?;
        self.ws();
        Ok(())
    }

    fn check_unsupported(&self, keywords: &[(&str, &'static str)]) -> Result<(), ParseError> {
        for (kw, name) in keywords {
            if self.at_keyword(kw) {
                return Err(self.c.unsupported(name));
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.ws();
        loop {
            if self.eat_keyword("PREFIX") {
                let prefix = self.c.read_pn_prefix();
                self.c.expect_char(':')?;
                self.ws();
                let ns = self.iriref()?;
                self.prefixes.insert(prefix, ns);
                self.ws();
            } else if self.eat_keyword("BASE") {
                let base = self.c.read_iriref()?;
                self.base = Some(base);
                self.ws();
            } else {
                break;
            }
        }
        self.check_unsupported(&[
            ("CONSTRUCT", "CONSTRUCT"),
            ("DESCRIBE", "DESCRIBE"),
            ("INSERT", "SPARQL Update"),
            ("DELETE", "SPARQL Update"),
            ("LOAD", "SPARQL Update"),
            ("CLEAR", "SPARQL Update"),
        ])?;
        let form = if self.eat_keyword("ASK") {
            QueryForm::Ask
        } else if self.eat_keyword("SELECT") {
            self.select_clause()?
        } else {
            return Err(self.c.unexpected("SELECT or ASK"));
        };
        self.check_unsupported(&[("FROM", "FROM / FROM NAMED")])?;
        self.eat_keyword("WHERE");
        let pattern = self.group(0)?;
        let mut query = Query {
            form,
            pattern,
            order_by: Vec::new(),
            limit: None,
            offset: None,
            prefixes: std::mem::take(&mut self.prefixes),
        };
        self.modifiers(&mut query)?;
        if let QueryForm::Ask = query.form {
            if query.has_order_by() || query.limit.is_some() || query.offset.is_some() {
                return Err(self.c.error("solution modifiers are not allowed on ASK"));
            }
        }
        if !self.c.is_eof() {
            self.check_unsupported(&[("VALUES", "VALUES")])?;
            return Err(self.c.unexpected("end of query"));
        }
        Ok(query)
    }

    fn select_clause(&mut self) -> Result<QueryForm, ParseError> {
        let distinct = self.eat_keyword("DISTINCT");
        self.check_unsupported(&[("REDUCED", "REDUCED")])?;
        if self.c.eat_char('*') {
            self.ws();
            return Ok(QueryForm::Select {
                projection: Projection::All,
                distinct,
            });
        }
        let mut vars = Vec::new();
        let mut count = None;
        loop {
            match self.c.peek() {
                Some('?' | '$') => vars.push(self.var()?),
                Some('(') => {
                    if count.is_some() {
                        return Err(self.c.unsupported("more than one aggregate"));
                    }
                    count = Some(self.count_expr()?);
                }
                _ => break,
            }
        }
        match (count, vars.is_empty()) {
            (None, true) => Err(self.c.unexpected("projection")),
            (None, false) => Ok(QueryForm::Select {
                projection: Projection::Vars(vars),
                distinct,
            }),
            (Some((var, count_distinct, alias)), true) => Ok(QueryForm::Count {
                var,
                distinct: count_distinct,
                alias,
            }),
            (Some(_), false) => Err(self.c.unsupported("aggregate alongside plain variables (GROUP BY)")),
        }
    }

    /// `(COUNT([DISTINCT] * | ?v) AS ?alias)`
    fn count_expr(&mut self) -> Result<(Option<String>, bool, String), ParseError> {
        self.expect('(')?;
        if !self.eat_keyword("COUNT") {
            self.check_unsupported(&[
                ("SUM", "aggregate SUM"),
                ("AVG", "aggregate AVG"),
                ("MIN", "aggregate MIN"),
                ("MAX", "aggregate MAX"),
                ("SAMPLE", "aggregate SAMPLE"),
                ("GROUP_CONCAT", "aggregate GROUP_CONCAT"),
            ])?;
            return Err(self.c.unsupported("projection expression"));
        }
        self.expect('(')?;
        let distinct = self.eat_keyword("DISTINCT");
        let var = if self.c.eat_char('*') {
            self.ws();
            None
        } else {
            Some(self.var()?)
        };
        self.expect(')')?;
        self.expect_keyword("AS")?;
        let alias = self.var()?;
        self.expect(')')?;
        Ok((var, distinct, alias))
    }

    fn modifiers(&mut self, q: &mut Query) -> Result<(), ParseError> {
        self.check_unsupported(&[("GROUP", "GROUP BY"), ("HAVING", "HAVING")])?;
        if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            loop {
                let key = if self.eat_keyword("ASC") {
                    self.expect('(')?;
                    let var = self.var()?;
                    self.expect(')')?;
                    OrderKey { var, descending: false }
                } else if self.eat_keyword("DESC") {
                    self.expect('(')?;
                    let var = self.var()?;
                    self.expect(')')?;
                    OrderKey { var, descending: true }
                } else if matches!(self.c.peek(), Some('?' | '$')) {
                    OrderKey {
                        var: self.var()?,
                        descending: false,
                    }
                } else if self.c.peek() == Some('(') {
                    return Err(self.c.unsupported("ORDER BY expression"));
                } else {
                    break;
                };
                q.order_by.push(key);
            }
            if q.order_by.is_empty() {
                return Err(self.c.unexpected("ORDER BY key"));
            }
        }
        for _ in 0..2 {
            if q.limit.is_none() && self.eat_keyword("LIMIT") {
                q.limit = Some(self.count()?);
            } else if q.offset.is_none() && self.eat_keyword("OFFSET") {
                q.offset = Some(self.count()?);
            }
        }
        Ok(())
    }

    fn count(&mut self) -> Result<usize, ParseError> {
        let mut digits = String::new();
        while let Some(d) = self.c.peek().filter(char::is_ascii_digit) {
            digits.push(d);
            self.c.bump();
        }
        let n = digits.parse().map_err(|_| self.c.unexpected("non-negative integer"))?;
        self.ws();
        Ok(n)
    }

    fn var(&mut self) -> Result<String, ParseError> {
        if !matches!(self.c.peek(), Some('?' | '$')) {
            return Err(self.c.unexpected("variable"));
        }
        self.c.bump();
        let mut name = String::new();
        while let Some(ch) = self.c.peek().filter(|c| is_name_char(*c)) {
            name.push(ch);
            self.c.bump();
        }
        if name.is_empty() {
            return Err(self.c.error("empty variable name"));
        }
        self.ws();
        Ok(name)
    }

    fn iriref(&mut self) -> Result<String, ParseError> {
        let raw = self.c.read_iriref()?;
        if crate::rdf::has_scheme(&raw) {
            return Ok(raw);
        }
        match &self.base {
            Some(base) => Ok(crate::rdf::turtle::resolve_iri(base, &raw)),
            None => Err(self.c.term_error(crate::rdf::TermError::RelativeIri(raw))),
        }
    }

    fn prefixed_name(&mut self) -> Result<Term, ParseError> {
        let (line, column) = (self.c.line(), self.c.column());
        let prefix = self.c.read_pn_prefix();
        if !self.c.eat_char(':') {
            return Err(self.c.unexpected("IRI, prefixed name, variable or literal"));
        }
        let local = self.c.read_pn_local()?;
        let ns = self.prefixes.get(&prefix).ok_or(ParseError::UndeclaredPrefix {
            line,
            column,
            prefix: prefix.clone(),
        })?;
        Term::iri(format!("{ns}{local}")).map_err(|e| self.c.term_error(e))
    }

    fn iri(&mut self) -> Result<Term, ParseError> {
        if self.c.peek() == Some('<') {
            let iri = self.iriref()?;
            Term::iri(iri).map_err(|e| self.c.term_error(e))
        } else {
            self.prefixed_name()
        }
    }

    fn literal(&mut self) -> Result<Term, ParseError> {
        let lexical = self.c.read_string()?;
        let lit = if self.c.eat_char('@') {
            Literal::lang(lexical, self.c.read_langtag()?)
        } else if self.c.eat("^^") {
            match self.iri()? {
                Term::Iri(dt) => Literal::typed(lexical, dt),
                _ => unreachable!("iri() yields IRIs"),
            }
        } else {
            Ok(Literal::string(lexical))
        };
        lit.map(Term::Literal).map_err(|e| self.c.term_error(e))
    }

    /// `{ ... }` with triples, FILTERs and OPTIONALs. `depth` counts the
    /// enclosing OPTIONAL blocks.
    fn group(&mut self, depth: usize) -> Result<GroupPattern, ParseError> {
        self.expect('{')?;
        let mut g = GroupPattern::default();
        loop {
            self.ws();
            self.check_unsupported(&[
                ("UNION", "UNION"),
                ("MINUS", "MINUS"),
                ("GRAPH", "GRAPH"),
                ("SERVICE", "SERVICE"),
                ("BIND", "BIND"),
                ("VALUES", "VALUES"),
                ("SELECT", "subquery"),
            ])?;
            match self.c.peek() {
                None => return Err(self.c.unexpected("'}'")),
                Some('}') => {
                    self.c.bump();
                    self.ws();
                    return Ok(g);
                }
                Some('.') => {
                    self.c.bump();
                }
                Some('{') => {
                    // parse the nested group so a following UNION is reported by name
                    self.group(depth)?;
                    self.check_unsupported(&[("UNION", "UNION")])?;
                    return Err(self.c.unsupported("nested group pattern"));
                }
                _ if self.at_keyword("FILTER") => {
                    self.eat_keyword("FILTER");
                    self.check_unsupported(&[("NOT", "NOT EXISTS"), ("EXISTS", "EXISTS")])?;
                    let e = if self.c.peek() == Some('(') {
                        self.bracketed()?
                    } else {
                        self.primary()?
                    };
                    g.filters.push(e);
                }
                _ if self.at_keyword("OPTIONAL") => {
                    self.eat_keyword("OPTIONAL");
                    if depth + 1 > MAX_OPTIONAL_DEPTH {
                        return Err(self.c.unsupported("OPTIONAL nested more than two levels"));
                    }
                    g.optionals.push(self.group(depth + 1)?);
                }
                _ => self.triples_same_subject(&mut g.triples)?,
            }
        }
    }

    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), ParseError> {
        let subject = self.node(true)?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.node(false)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if !self.c.eat_char(',') {
                    break;
                }
                self.ws();
            }
            if !self.c.eat_char(';') {
                break;
            }
            self.ws();
            while self.c.eat_char(';') {
                self.ws();
            }
            if matches!(self.c.peek(), Some('.' | '}')) {
                break;
            }
        }
        Ok(())
    }

    fn verb(&mut self) -> Result<TermPattern, ParseError> {
        match self.c.peek() {
            Some('^' | '!' | '(') => return Err(self.c.unsupported("property path")),
            Some('?' | '$') => return Ok(TermPattern::Var(self.var()?)),
            Some('a') if !self.c.rest()[1..].starts_with(|c: char| is_name_char(c) || c == ':' || c == '-' || c == '.') => {
                self.c.bump();
                self.ws();
                return Ok(TermPattern::Term(Term::Iri(rdf::TYPE.to_owned())));
            }
            _ => {}
        }
        let iri = self.iri()?;
        if matches!(self.c.peek(), Some('/' | '|' | '*' | '+'))
            || (self.c.peek() == Some('?') && !self.c.peek_nth(1).is_some_and(is_name_char))
        {
            return Err(self.c.unsupported("property path"));
        }
        self.ws();
        Ok(TermPattern::Term(iri))
    }

    fn node(&mut self, subject: bool) -> Result<TermPattern, ParseError> {
        let t = match self.c.peek() {
            Some('?' | '$') => return Ok(TermPattern::Var(self.var()?)),
            Some('<') => self.iri()?,
            Some('_') if self.c.starts_with("_:") => {
                self.c.eat("_:");
                let label = self.c.read_blank_label()?;
                self.ws();
                return Ok(TermPattern::Var(format!("_:{label}")));
            }
            Some('[') => return Err(self.c.unsupported("blank node property list")),
            Some('(') => return Err(self.c.unsupported("RDF collection")),
            Some('"' | '\'') if !subject => self.literal()?,
            Some(c) if !subject && (c.is_ascii_digit() || matches!(c, '+' | '-' | '.')) => self.c.read_number()?,
            _ if !subject && (self.at_keyword("true") || self.at_keyword("false")) => {
                let v = if self.eat_keyword("true") { "true" } else { self.eat_keyword("false"); "false" };
                return Ok(TermPattern::Term(Term::typed(v, xsd::BOOLEAN).expect("xsd iri")));
            }
            _ => self.prefixed_name()?,
        };
        self.ws();
        Ok(TermPattern::Term(t))
    }

    fn bracketed(&mut self) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let e = self.or_expr()?;
        self.expect(')')?;
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.c.eat("||") {
            self.ws();
            e = Expr::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        while self.c.eat("&&") {
            self.ws();
            e = Expr::And(Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.c.peek() == Some('!') && self.c.peek_nth(1) != Some('=') {
            self.c.bump();
            self.ws();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        let left = self.primary()?;
        let op = [
            ("!=", CmpOp::Ne),
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("=", CmpOp::Eq),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ]
        .into_iter()
        .find(|(s, _)| self.c.starts_with(s));
        if let Some((s, op)) = op {
            self.c.eat(s);
            self.ws();
            let right = self.primary()?;
            return Ok(Expr::Compare(op, Box::new(left), Box::new(right)));
        }
        if matches!(self.c.peek(), Some('+' | '-' | '*' | '/')) {
            return Err(self.c.unsupported("arithmetic expression"));
        }
        if self.at_keyword("IN") || self.at_keyword("NOT") {
            return Err(self.c.unsupported("IN / NOT IN"));
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.c.peek() {
            Some('(') => return self.bracketed(),
            Some('?' | '$') => return Ok(Expr::Var(self.var()?)),
            Some('<') => {
                let t = self.iri()?;
                self.ws();
                return Ok(Expr::Const(t));
            }
            Some('"' | '\'') => {
                let t = self.literal()?;
                self.ws();
                return Ok(Expr::Const(t));
            }
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => {
                let t = self.c.read_number()?;
                self.ws();
                return Ok(Expr::Const(t));
            }
            _ => {}
        }
        if self.eat_keyword("true") {
            return Ok(Expr::Const(Term::typed("true", xsd::BOOLEAN).expect("xsd iri")));
        }
        if self.eat_keyword("false") {
            return Ok(Expr::Const(Term::typed("false", xsd::BOOLEAN).expect("xsd iri")));
        }
        if self.eat_keyword("BOUND") {
            self.expect('(')?;
            let v = self.var()?;
            self.expect(')')?;
            return Ok(Expr::Bound(v));
        }
        if self.eat_keyword("REGEX") {
            self.expect('(')?;
            let text = self.or_expr()?;
            self.expect(',')?;
            let pattern = self.string_arg()?;
            let flags = if self.c.eat_char(',') {
                self.ws();
                self.string_arg()?
            } else {
                String::new()
            };
            self.expect(')')?;
            let re = RegexPattern::new(&pattern, &flags).map_err(|m| self.c.error(format!("invalid regex: {m}")))?;
            return Ok(Expr::Regex(Box::new(text), re));
        }
        self.check_unsupported(&[("EXISTS", "EXISTS"), ("NOT", "NOT EXISTS")])?;
        // a name followed by '(' is a function call outside the subset
        let rest = self.c.rest();
        let name_len = rest.find(|c: char| !is_name_char(c)).unwrap_or(rest.len());
        if name_len > 0 && rest[name_len..].trim_start().starts_with('(') {
            return Err(self.c.unsupported("built-in function call"));
        }
        let t = self.prefixed_name()?;
        self.ws();
        Ok(Expr::Const(t))
    }

    fn string_arg(&mut self) -> Result<String, ParseError> {
        let s = self.c.read_string()?;
        self.ws();
        Ok(s)
    }
}

use std::fmt;

use crate::rdf::{PrefixMap, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermPattern {
    Var(String),
    Term(Term),
}

impl TermPattern {
    pub fn var(&self) -> Option<&str> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// A compiled `regex(...)` pattern together with its source text.
#[derive(Clone)]
pub struct RegexPattern {
    pub pattern: String,
    pub flags: String,
    pub(crate) compiled: regex::Regex,
}

impl RegexPattern {
    pub fn new(pattern: &str, flags: &str) -> Result<Self, String> {
        if let Some(bad) = flags.chars().find(|c| !"imsx".contains(*c)) {
            return Err(format!("unsupported regex flag {bad:?}"));
        }
        let source = if flags.is_empty() {
            pattern.to_owned()
        } else {
            format!("(?{flags}){pattern}")
        };
        let compiled = regex::Regex::new(&source).map_err(|e| e.to_string())?;
        Ok(RegexPattern {
            pattern: pattern.to_owned(),
            flags: flags.to_owned(),
            compiled,
        })
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.compiled.is_match(text)
    }
}

impl fmt::Debug for RegexPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "regex({:?}, {:?})", self.pattern, self.flags)
    }
}

impl PartialEq for RegexPattern {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern && self.flags == other.flags
    }
}

impl Eq for RegexPattern {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Const(Term),
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Bound(String),
    Regex(Box<Expr>, RegexPattern),
}

impl Expr {
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) | Expr::Bound(v) => out.push(v.clone()),
            Expr::Const(_) => {}
            Expr::Or(a, b) | Expr::And(a, b) | Expr::Compare(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Not(a) | Expr::Regex(a, _) => a.vars(out),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupPattern {
    pub triples: Vec<TriplePattern>,
    pub filters: Vec<Expr>,
    pub optionals: Vec<GroupPattern>,
}

impl GroupPattern {
    /// Variables of triple patterns, including those inside optionals, in
    /// order of first appearance.
    pub fn pattern_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        for t in &self.triples {
            for p in t.positions() {
                if let Some(v) = p.var() {
                    if !out.iter().any(|x| x == v) {
                        out.push(v.to_owned());
                    }
                }
            }
        }
        for o in &self.optionals {
            o.collect_vars(out);
        }
    }

    /// Nesting depth of OPTIONAL blocks below this group.
    pub fn optional_depth(&self) -> usize {
        self.optionals.iter().map(|o| 1 + o.optional_depth()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryForm {
    Select { projection: Projection, distinct: bool },
    Ask,
    /// `SELECT (COUNT([DISTINCT] * | ?var) AS ?alias)`
    Count { var: Option<String>, distinct: bool, alias: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderKey {
    pub var: String,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub form: QueryForm,
    pub pattern: GroupPattern,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
    pub prefixes: PrefixMap,
}

/// Variables blank nodes in patterns turn into; never projected by `*`.
pub(crate) fn is_hidden_var(name: &str) -> bool {
    name.starts_with("_:")
}

impl Query {
    /// Output columns, in order.
    pub fn projected_vars(&self) -> Vec<String> {
        match &self.form {
            QueryForm::Select {
                projection: Projection::Vars(vars),
                ..
            } => vars.clone(),
            QueryForm::Select {
                projection: Projection::All,
                ..
            } => self
                .pattern
                .pattern_vars()
                .into_iter()
                .filter(|v| !is_hidden_var(v))
                .collect(),
            QueryForm::Count { alias, .. } => vec![alias.clone()],
            QueryForm::Ask => Vec::new(),
        }
    }

    /// Warnings about variables that cannot be bound by the WHERE clause.
    pub fn diagnostics(&self) -> Vec<String> {
        let bound = self.pattern.pattern_vars();
        let mut out = Vec::new();
        let mut check = |v: &str, what: &str| {
            if !bound.iter().any(|b| b == v) {
                out.push(format!("{what} variable ?{v} does not appear in the WHERE clause"));
            }
        };
        match &self.form {
            QueryForm::Select {
                projection: Projection::Vars(vars),
                ..
            } => vars.iter().for_each(|v| check(v, "projected")),
            QueryForm::Count { var: Some(v), .. } => check(v, "counted"),
            _ => {}
        }
        for k in &self.order_by {
            check(&k.var, "ORDER BY");
        }
        out
    }

    pub fn has_order_by(&self) -> bool {
        !self.order_by.is_empty()
    }
}

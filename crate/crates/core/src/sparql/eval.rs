//! Query evaluation over an indexed [`Graph`].
//!
//! Solutions are rows of optional term ids, one slot per query variable.
//! Every bound value comes from the graph, so ids are enough until filters
//! and ORDER BY need the terms themselves.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{Graph, Literal, Term, TermId};

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Upper bound on intermediate solutions before evaluation gives up.
    pub max_solutions: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_solutions: 5_000_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("query exceeded the solution cap of {0}")]
    SolutionCap(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultTable {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    /// Value of `var` in row `i`.
    pub fn get(&self, i: usize, var: &str) -> Option<&Term> {
        self.column(var).and_then(|c| self.rows[i][c].as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Boolean(bool),
    Table(ResultTable),
}

impl QueryResult {
    /// Solution count for tables, 0/1 for booleans.
    pub fn len(&self) -> usize {
        match self {
            QueryResult::Boolean(b) => usize::from(*b),
            QueryResult::Table(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_table(&self) -> Option<&ResultTable> {
        match self {
            QueryResult::Table(t) => Some(t),
            QueryResult::Boolean(_) => None,
        }
    }
}

pub fn evaluate(q: &Query, g: &Graph) -> Result<QueryResult, EvalError> {
    evaluate_with(q, g, &EvalOptions::default())
}

type Row = Vec<Option<TermId>>;

struct Vars {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vars {
    fn of(q: &Query) -> Self {
        let mut names = q.pattern.pattern_vars();
        let mut extra = Vec::new();
        collect_filter_vars(&q.pattern, &mut extra);
        extra.extend(q.projected_vars());
        extra.extend(q.order_by.iter().map(|k| k.var.clone()));
        if let QueryForm::Count { var: Some(v), .. } = &q.form {
            extra.push(v.clone());
        }
        for v in extra {
            if !names.contains(&v) {
                names.push(v);
            }
        }
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Vars { names, index }
    }

    fn slot(&self, name: &str) -> usize {
        self.index[name]
    }
}

fn collect_filter_vars(g: &GroupPattern, out: &mut Vec<String>) {
    for f in &g.filters {
        f.vars(out);
    }
    for o in &g.optionals {
        collect_filter_vars(o, out);
    }
}

/// Pattern position after resolving constants against the graph.
#[derive(Clone, Copy)]
enum Slot {
    Var(usize),
    Id(TermId),
}

struct Evaluator<'a> {
    g: &'a Graph,
    vars: Vars,
    cap: usize,
}

pub fn evaluate_with(q: &Query, g: &Graph, options: &EvalOptions) -> Result<QueryResult, EvalError> {
    let ev = Evaluator {
        g,
        vars: Vars::of(q),
        cap: options.max_solutions,
    };
    let mut rows = ev.group(&q.pattern)?;
    rows.retain(|r| q.pattern.filters.iter().all(|f| ev.holds(f, r)));

    match &q.form {
        QueryForm::Ask => Ok(QueryResult::Boolean(!rows.is_empty())),
        QueryForm::Count { var, distinct, alias } => {
            let n = match (var, distinct) {
                (Some(v), false) => {
                    let s = ev.vars.slot(v);
                    rows.iter().filter(|r| r[s].is_some()).count()
                }
                (Some(v), true) => {
                    let s = ev.vars.slot(v);
                    rows.iter().filter_map(|r| r[s]).collect::<HashSet<_>>().len()
                }
                (None, false) => rows.len(),
                (None, true) => {
                    let visible: Vec<usize> = q
                        .pattern
                        .pattern_vars()
                        .iter()
                        .filter(|v| !is_hidden_var(v))
                        .map(|v| ev.vars.slot(v))
                        .collect();
                    rows.iter()
                        .map(|r| visible.iter().map(|&s| r[s]).collect::<Vec<_>>())
                        .collect::<HashSet<_>>()
                        .len()
                }
            };
            let mut out = vec![vec![Some(Term::typed(n.to_string(), xsd::INTEGER).expect("xsd iri"))]];
            slice(&mut out, q.offset, q.limit);
            Ok(QueryResult::Table(ResultTable {
                vars: vec![alias.clone()],
                rows: out,
            }))
        }
        QueryForm::Select { distinct, .. } => {
            if q.has_order_by() {
                let keys: Vec<(usize, bool)> = q
                    .order_by
                    .iter()
                    .map(|k| (ev.vars.slot(&k.var), k.descending))
                    .collect();
                rows.sort_by(|a, b| {
                    for &(s, desc) in &keys {
                        let ord = order_terms(a[s].map(|id| g.term(id)), b[s].map(|id| g.term(id)));
                        let ord = if desc { ord.reverse() } else { ord };
                        if ord != Ordering::Equal {
                            return ord;
                        }
                    }
                    Ordering::Equal
                });
            }
            let vars = q.projected_vars();
            let slots: Vec<usize> = vars.iter().map(|v| ev.vars.slot(v)).collect();
            let mut projected: Vec<Row> = rows.iter().map(|r| slots.iter().map(|&s| r[s]).collect()).collect();
            if *distinct {
                let mut seen = HashSet::new();
                projected.retain(|r| seen.insert(r.clone()));
            }
            slice(&mut projected, q.offset, q.limit);
            let rows = projected
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.map(|id| g.term(id).clone())).collect())
                .collect();
            Ok(QueryResult::Table(ResultTable { vars, rows }))
        }
    }
}

fn slice<T>(rows: &mut Vec<T>, offset: Option<usize>, limit: Option<usize>) {
    let start = offset.unwrap_or(0).min(rows.len());
    rows.drain(..start);
    if let Some(n) = limit {
        rows.truncate(n);
    }
}

impl Evaluator<'_> {
    fn check_cap(&self, n: usize) -> Result<(), EvalError> {
        if n > self.cap {
            Err(EvalError::SolutionCap(self.cap))
        } else {
            Ok(())
        }
    }

    /// Triples, then each OPTIONAL left-joined in order. Filters of `g`
    /// are left to the caller: they are the join condition for an optional
    /// group and a plain restriction at top level.
    fn group(&self, g: &GroupPattern) -> Result<Vec<Row>, EvalError> {
        let mut rows = self.bgp(&g.triples)?;
        for opt in &g.optionals {
            let right = self.group(opt)?;
            rows = self.left_join(rows, right, &opt.filters)?;
        }
        Ok(rows)
    }

    fn bgp(&self, triples: &[TriplePattern]) -> Result<Vec<Row>, EvalError> {
        let width = self.vars.names.len();
        let mut patterns = Vec::with_capacity(triples.len());
        for t in triples {
            let mut slots = [Slot::Id(0); 3];
            for (slot, pos) in slots.iter_mut().zip(t.positions()) {
                *slot = match pos {
                    TermPattern::Var(v) => Slot::Var(self.vars.slot(v)),
                    TermPattern::Term(term) => match self.g.id_of(term) {
                        Some(id) => Slot::Id(id),
                        None => return Ok(Vec::new()),
                    },
                };
            }
            patterns.push(slots);
        }

        let mut rows: Vec<Row> = vec![vec![None; width]];
        let mut bound = vec![false; width];
        while !patterns.is_empty() {
            let next = self.pick(&patterns, &bound);
            let pattern = patterns.swap_remove(next);
            let mut out = Vec::new();
            for row in &rows {
                let ask = pattern.map(|s| match s {
                    Slot::Id(id) => Some(id),
                    Slot::Var(v) => row[v],
                });
                for ids in self.g.match_ids(ask[0], ask[1], ask[2]) {
                    let mut r = row.clone();
                    let ok = pattern.iter().zip(ids).all(|(s, id)| match *s {
                        Slot::Id(_) => true,
                        Slot::Var(v) => match r[v] {
                            Some(existing) => existing == id,
                            None => {
                                r[v] = Some(id);
                                true
                            }
                        },
                    });
                    if ok {
                        out.push(r);
                    }
                }
                self.check_cap(out.len())?;
            }
            for s in pattern {
                if let Slot::Var(v) = s {
                    bound[v] = true;
                }
            }
            rows = out;
            if rows.is_empty() {
                break;
            }
        }
        Ok(rows)
    }

    /// Most selective remaining pattern: most bound positions, then the
    /// smallest index range for its constants.
    fn pick(&self, patterns: &[[Slot; 3]], bound: &[bool]) -> usize {
        let key = |p: &[Slot; 3]| {
            let n_bound = p
                .iter()
                .filter(|s| match s {
                    Slot::Id(_) => true,
                    Slot::Var(v) => bound[*v],
                })
                .count();
            let c = p.map(|s| match s {
                Slot::Id(id) => Some(id),
                Slot::Var(_) => None,
            });
            (std::cmp::Reverse(n_bound), self.g.estimate(c[0], c[1], c[2]))
        };
        (0..patterns.len())
            .min_by_key(|&i| key(&patterns[i]))
            .expect("non-empty")
    }

    fn left_join(&self, left: Vec<Row>, right: Vec<Row>, cond: &[Expr]) -> Result<Vec<Row>, EvalError> {
        let width = self.vars.names.len();
        let always = |rows: &[Row]| -> Vec<bool> {
            (0..width).map(|v| !rows.is_empty() && rows.iter().all(|r| r[v].is_some())).collect()
        };
        let (la, ra) = (always(&left), always(&right));
        let key_slots: Vec<usize> = (0..width).filter(|&v| la[v] && ra[v]).collect();

        let mut table: HashMap<Vec<TermId>, Vec<usize>> = HashMap::new();
        for (i, r) in right.iter().enumerate() {
            let key = key_slots.iter().map(|&v| r[v].expect("always bound")).collect();
            table.entry(key).or_default().push(i);
        }

        let mut out = Vec::with_capacity(left.len());
        for l in left {
            let key: Vec<TermId> = key_slots.iter().map(|&v| l[v].expect("always bound")).collect();
            let mut matched = false;
            for &i in table.get(&key).map(Vec::as_slice).unwrap_or_default() {
                let r = &right[i];
                let compatible = (0..width).all(|v| match (l[v], r[v]) {
                    (Some(a), Some(b)) => a == b,
                    _ => true,
                });
                if !compatible {
                    continue;
                }
                let merged: Row = l.iter().zip(r).map(|(a, b)| a.or(*b)).collect();
                if cond.iter().all(|f| self.holds(f, &merged)) {
                    out.push(merged);
                    matched = true;
                }
            }
            if !matched {
                out.push(l);
            }
            self.check_cap(out.len())?;
        }
        Ok(out)
    }

    fn holds(&self, e: &Expr, row: &Row) -> bool {
        matches!(self.truth(e, row), Ok(true))
    }

    fn truth(&self, e: &Expr, row: &Row) -> Result<bool, ()> {
        self.value(e, row)?.ebv()
    }

    fn value<'t>(&'t self, e: &'t Expr, row: &Row) -> Result<Value<'t>, ()> {
        Ok(match e {
            Expr::Var(v) => Value::Term(self.g.term(row[self.vars.slot(v)].ok_or(())?)),
            Expr::Const(t) => Value::Term(t),
            Expr::Bound(v) => Value::Bool(row[self.vars.slot(v)].is_some()),
            Expr::Not(a) => Value::Bool(!self.truth(a, row)?),
            Expr::And(a, b) => Value::Bool(match (self.truth(a, row), self.truth(b, row)) {
                (Ok(false), _) | (_, Ok(false)) => false,
                (Ok(true), Ok(true)) => true,
                _ => return Err(()),
            }),
            Expr::Or(a, b) => Value::Bool(match (self.truth(a, row), self.truth(b, row)) {
                (Ok(true), _) | (_, Ok(true)) => true,
                (Ok(false), Ok(false)) => false,
                _ => return Err(()),
            }),
            Expr::Compare(op, a, b) => {
                let (a, b) = (self.value(a, row)?.term()?, self.value(b, row)?.term()?);
                Value::Bool(compare(*op, a, b)?)
            }
            Expr::Regex(a, re) => {
                let t = self.value(a, row)?.term()?;
                match t.as_literal() {
                    Some(lit) if is_string_literal(lit) => Value::Bool(re.is_match(lit.lexical())),
                    _ => return Err(()),
                }
            }
        })
    }
}

enum Value<'a> {
    Term(&'a Term),
    Bool(bool),
}

impl<'a> Value<'a> {
    fn term(self) -> Result<&'a Term, ()> {
        match self {
            Value::Term(t) => Ok(t),
            Value::Bool(_) => Err(()),
        }
    }

    /// Effective boolean value; `Err` is a type error.
    fn ebv(&self) -> Result<bool, ()> {
        let t = match self {
            Value::Bool(b) => return Ok(*b),
            Value::Term(t) => t,
        };
        let lit = t.as_literal().ok_or(())?;
        if lit.datatype() == xsd::BOOLEAN {
            return match lit.lexical() {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                _ => Err(()),
            };
        }
        if xsd::is_numeric(lit.datatype()) {
            let n = lit.numeric_value().ok_or(())?;
            return Ok(n != 0.0 && !n.is_nan());
        }
        if is_string_literal(lit) {
            return Ok(!lit.lexical().is_empty());
        }
        Err(())
    }
}

fn is_string_literal(lit: &Literal) -> bool {
    lit.datatype() == xsd::STRING || lit.datatype() == rdf::LANG_STRING
}

/// Numeric comparison when both sides are numeric literals, otherwise term
/// equality for `=`/`!=` and lexical order for the ordering operators on
/// literals. Ordering anything but literals is a type error.
pub(crate) fn compare(op: CmpOp, a: &Term, b: &Term) -> Result<bool, ()> {
    let num = |t: &Term| t.as_literal().and_then(Literal::numeric_value);
    if let (Some(x), Some(y)) = (num(a), num(b)) {
        return Ok(match op {
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
        });
    }
    match op {
        CmpOp::Eq => return Ok(a == b),
        CmpOp::Ne => return Ok(a != b),
        _ => {}
    }
    let (Some(x), Some(y)) = (a.as_literal(), b.as_literal()) else {
        return Err(());
    };
    let ord = x.lexical().cmp(y.lexical());
    Ok(match op {
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
        CmpOp::Eq | CmpOp::Ne => unreachable!(),
    })
}

/// ORDER BY ordering: unbound, blank nodes, IRIs, then literals. Numeric
/// literals come first among literals and sort by value.
pub fn order_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(Term::Literal(l)) if l.numeric_value().is_some() => 3,
            Some(Term::Literal(_)) => 4,
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Some(Term::Literal(x)), Some(Term::Literal(y))) => {
            let numeric = match (x.numeric_value(), y.numeric_value()) {
                (Some(p), Some(q)) => p.total_cmp(&q),
                _ => Ordering::Equal,
            };
            numeric
                .then_with(|| x.lexical().cmp(y.lexical()))
                .then_with(|| x.datatype().cmp(y.datatype()))
                .then_with(|| x.language().cmp(&y.language()))
        }
        (Some(x), Some(y)) => x.value().cmp(y.value()),
        _ => Ordering::Equal,
    })
}

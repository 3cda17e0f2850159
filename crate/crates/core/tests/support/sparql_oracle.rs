//! Random graphs and subset queries, checked against exhaustive assignment
//! enumeration. Shared by the core test suite and the acceptance run.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use kg_forge::rdf::{Graph, Term, Triple};
use kg_forge::sparql::{evaluate, parse_query, QueryResult};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const EX: &str = "http://ex.org/";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone)]
pub enum Pos {
    Var(&'static str),
    Const(Term),
}

#[derive(Debug, Clone)]
pub enum Filter {
    Cmp(&'static str, Pos, Pos),
    Bound(&'static str),
    Regex(&'static str, &'static str),
    And(Box<Filter>, Box<Filter>),
    Or(Box<Filter>, Box<Filter>),
    Not(Box<Filter>),
}

#[derive(Debug, Clone, Default)]
pub struct Group {
    pub triples: Vec<[Pos; 3]>,
    pub filters: Vec<Filter>,
    pub optionals: Vec<Group>,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub graph: Vec<Triple>,
    pub group: Group,
    /// `None` is `SELECT *`.
    pub select: Option<Vec<&'static str>>,
    pub distinct: bool,
}

const VARS: [&str; 4] = ["a", "b", "c", "d"];

fn iri(local: &str) -> Term {
    Term::Iri(format!("{EX}{local}"))
}

fn subjects() -> Vec<Term> {
    (0..4).map(|i| iri(&format!("s{i}"))).collect()
}

fn predicates() -> Vec<Term> {
    (0..3).map(|i| iri(&format!("p{i}"))).collect()
}

fn objects() -> Vec<Term> {
    let mut v = subjects();
    v.push(Term::string("apple"));
    v.push(Term::string("Berry"));
    v.push(Term::typed("2", format!("{XSD}integer")).unwrap());
    v.push(Term::typed("10", format!("{XSD}integer")).unwrap());
    v.push(Term::typed("2.0", format!("{XSD}decimal")).unwrap());
    v.push(Term::lang("apfel", "de").unwrap());
    v
}

fn pick<T: Clone>(rng: &mut StdRng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())].clone()
}

fn random_pos(rng: &mut StdRng, pool: &[Term], vars: &[&'static str], p_var: f64) -> Pos {
    if rng.gen_bool(p_var) {
        Pos::Var(pick(rng, vars))
    } else {
        Pos::Const(pick(rng, pool))
    }
}

fn random_filter(rng: &mut StdRng, vars: &[&'static str], depth: u32) -> Filter {
    let choice = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match choice {
        0 => {
            let op = pick(rng, &["=", "!=", "<", "<=", ">", ">="]);
            let left = Pos::Var(pick(rng, vars));
            let right = if rng.gen_bool(0.3) {
                Pos::Var(pick(rng, vars))
            } else {
                Pos::Const(pick(rng, &objects()))
            };
            Filter::Cmp(op, left, right)
        }
        1 => Filter::Bound(pick(rng, vars)),
        2 => Filter::Regex(pick(rng, vars), pick(rng, &["^a", "rr", "^B", "e$"])),
        3 => Filter::And(
            Box::new(random_filter(rng, vars, depth - 1)),
            Box::new(random_filter(rng, vars, depth - 1)),
        ),
        4 => Filter::Or(
            Box::new(random_filter(rng, vars, depth - 1)),
            Box::new(random_filter(rng, vars, depth - 1)),
        ),
        _ => Filter::Not(Box::new(random_filter(rng, vars, depth - 1))),
    }
}

fn random_triple(rng: &mut StdRng, vars: &[&'static str]) -> [Pos; 3] {
    [
        random_pos(rng, &subjects(), vars, 0.8),
        random_pos(rng, &predicates(), vars, 0.15),
        random_pos(rng, &objects(), vars, 0.8),
    ]
}

pub fn random_case(seed: u64) -> Case {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = if rng.gen_bool(0.1) { rng.gen_range(0..5) } else { rng.gen_range(10..=50) };
    let mut graph = Vec::new();
    for _ in 0..n {
        graph.push(Triple {
            subject: pick(&mut rng, &subjects()),
            predicate: pick(&mut rng, &predicates()),
            object: pick(&mut rng, &objects()),
        });
    }

    let total = rng.gen_range(1..=3);
    let required = if total == 1 { 1 } else { rng.gen_range(1..total) };
    let mut group = Group::default();
    for _ in 0..required {
        group.triples.push(random_triple(&mut rng, &VARS[..3]));
    }
    let mut remaining = total - required;
    let mut opt_parent: Option<usize> = None;
    while remaining > 0 {
        let mut opt = Group::default();
        opt.triples.push(random_triple(&mut rng, &VARS));
        if rng.gen_bool(0.3) {
            opt.filters.push(random_filter(&mut rng, &VARS, 1));
        }
        remaining -= 1;
        // occasionally nest the next optional inside this one
        match opt_parent {
            Some(i) if rng.gen_bool(0.5) => group.optionals[i].optionals.push(opt),
            _ => {
                group.optionals.push(opt);
                opt_parent = Some(group.optionals.len() - 1);
            }
        }
    }
    for _ in 0..[0, 0, 0, 1, 1, 2][rng.gen_range(0..6)] {
        group.filters.push(random_filter(&mut rng, &VARS, 2));
    }

    let select = if rng.gen_bool(0.3) {
        None
    } else {
        let mut vs: Vec<&'static str> = VARS.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        if vs.is_empty() {
            vs.push(VARS[0]);
        }
        Some(vs)
    };
    Case {
        graph,
        group,
        select,
        distinct: rng.gen_bool(0.4),
    }
}

fn render_pos(p: &Pos) -> String {
    match p {
        Pos::Var(v) => format!("?{v}"),
        Pos::Const(t) => t.to_ntriples(),
    }
}

fn render_filter(f: &Filter) -> String {
    match f {
        Filter::Cmp(op, a, b) => format!("({} {op} {})", render_pos(a), render_pos(b)),
        Filter::Bound(v) => format!("bound(?{v})"),
        Filter::Regex(v, p) => format!("regex(?{v}, \"{p}\")"),
        Filter::And(a, b) => format!("({} && {})", render_filter(a), render_filter(b)),
        Filter::Or(a, b) => format!("({} || {})", render_filter(a), render_filter(b)),
        Filter::Not(a) => format!("!{}", render_filter(a)),
    }
}

fn render_group(g: &Group) -> String {
    let mut s = String::from("{ ");
    for t in &g.triples {
        s += &format!("{} {} {} . ", render_pos(&t[0]), render_pos(&t[1]), render_pos(&t[2]));
    }
    for o in &g.optionals {
        s += &format!("OPTIONAL {} ", render_group(o));
    }
    for f in &g.filters {
        s += &format!("FILTER ({}) ", render_filter(f));
    }
    s + "}"
}

pub fn render_query(c: &Case) -> String {
    let head = match &c.select {
        None => "*".to_owned(),
        Some(vs) => vs.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" "),
    };
    let distinct = if c.distinct { "DISTINCT " } else { "" };
    format!("SELECT {distinct}{head} WHERE {}", render_group(&c.group))
}

// ---- oracle -------------------------------------------------------------

type Mu = BTreeMap<&'static str, Term>;

fn group_vars(g: &Group, out: &mut Vec<&'static str>) {
    for t in &g.triples {
        for p in t {
            if let Pos::Var(v) = p {
                if !out.contains(v) {
                    out.push(v);
                }
            }
        }
    }
    for o in &g.optionals {
        group_vars(o, out);
    }
}

fn triple_vars(g: &Group) -> Vec<&'static str> {
    let mut out = Vec::new();
    for t in &g.triples {
        for p in t {
            if let Pos::Var(v) = p {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        }
    }
    out
}

struct Oracle {
    domain: Vec<Term>,
    facts: HashSet<(Term, Term, Term)>,
}

impl Oracle {
    /// Every assignment of the group's triple variables to active-domain
    /// terms that makes all its triples facts.
    fn bgp(&self, g: &Group) -> Vec<Mu> {
        let vars = triple_vars(g);
        let mut out = Vec::new();
        let k = vars.len();
        let n = self.domain.len();
        if n == 0 && k > 0 {
            return out;
        }
        let total = n.pow(k as u32);
        for code in 0..total {
            let mut mu = Mu::new();
            let mut c = code;
            for v in &vars {
                mu.insert(v, self.domain[c % n].clone());
                c /= n;
            }
            let inst = |p: &Pos| match p {
                Pos::Var(v) => mu[v].clone(),
                Pos::Const(t) => t.clone(),
            };
            if g.triples
                .iter()
                .all(|t| self.facts.contains(&(inst(&t[0]), inst(&t[1]), inst(&t[2]))))
            {
                out.push(mu);
            }
        }
        out
    }

    fn group(&self, g: &Group) -> Vec<Mu> {
        let mut left = self.bgp(g);
        for opt in &g.optionals {
            let right = self.group(opt);
            let mut next = Vec::new();
            for l in &left {
                let mut any = false;
                for r in &right {
                    if l.iter().any(|(k, v)| r.get(k).is_some_and(|w| w != v)) {
                        continue;
                    }
                    let mut m = l.clone();
                    m.extend(r.iter().map(|(k, v)| (*k, v.clone())));
                    if opt.filters.iter().all(|f| truth(f, &m) == Some(true)) {
                        next.push(m);
                        any = true;
                    }
                }
                if !any {
                    next.push(l.clone());
                }
            }
            left = next;
        }
        left
    }
}

fn numeric(t: &Term) -> Option<f64> {
    match t {
        Term::Literal(l) if l.datatype() == format!("{XSD}integer") || l.datatype() == format!("{XSD}decimal") => {
            l.lexical().parse().ok()
        }
        _ => None,
    }
}

fn value(p: &Pos, mu: &Mu) -> Option<Term> {
    match p {
        Pos::Var(v) => mu.get(v).cloned(),
        Pos::Const(t) => Some(t.clone()),
    }
}

/// Three-valued: `None` is an evaluation error.
fn truth(f: &Filter, mu: &Mu) -> Option<bool> {
    match f {
        Filter::Bound(v) => Some(mu.contains_key(v)),
        Filter::Regex(v, pat) => {
            let t = mu.get(v)?;
            let Term::Literal(l) = t else { return None };
            let stringy = l.datatype().ends_with("#string") || l.language().is_some();
            if !stringy {
                return None;
            }
            let s = l.lexical();
            Some(match *pat {
                "^a" => s.starts_with('a'),
                "^B" => s.starts_with('B'),
                "rr" => s.contains("rr"),
                "e$" => s.ends_with('e'),
                _ => unreachable!(),
            })
        }
        Filter::Cmp(op, a, b) => {
            let (x, y) = (value(a, mu)?, value(b, mu)?);
            if let (Some(p), Some(q)) = (numeric(&x), numeric(&y)) {
                return Some(match *op {
                    "=" => p == q,
                    "!=" => p != q,
                    "<" => p < q,
                    "<=" => p <= q,
                    ">" => p > q,
                    _ => p >= q,
                });
            }
            match *op {
                "=" => Some(x == y),
                "!=" => Some(x != y),
                _ => {
                    let (Term::Literal(l), Term::Literal(r)) = (&x, &y) else { return None };
                    let o = l.lexical().cmp(r.lexical());
                    Some(match *op {
                        "<" => o.is_lt(),
                        "<=" => o.is_le(),
                        ">" => o.is_gt(),
                        _ => o.is_ge(),
                    })
                }
            }
        }
        Filter::Not(a) => truth(a, mu).map(|b| !b),
        Filter::And(a, b) => match (truth(a, mu), truth(b, mu)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Filter::Or(a, b) => match (truth(a, mu), truth(b, mu)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
    }
}

type Table = Vec<Vec<Option<Term>>>;

/// Oracle answer, projected onto `vars`, sorted.
pub fn oracle(c: &Case, vars: &[String]) -> Table {
    let mut domain: Vec<Term> = Vec::new();
    let mut facts = HashSet::new();
    for t in &c.graph {
        for x in [&t.subject, &t.predicate, &t.object] {
            if !domain.contains(x) {
                domain.push(x.clone());
            }
        }
        facts.insert((t.subject.clone(), t.predicate.clone(), t.object.clone()));
    }
    let o = Oracle { domain, facts };
    let sols: Vec<Mu> = o
        .group(&c.group)
        .into_iter()
        .filter(|mu| c.group.filters.iter().all(|f| truth(f, mu) == Some(true)))
        .collect();
    let mut rows: Table = sols
        .iter()
        .map(|mu| vars.iter().map(|v| mu.get(v.as_str()).cloned()).collect())
        .collect();
    if c.distinct {
        let mut seen = HashSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    rows.sort();
    rows
}

pub fn expected_vars(c: &Case) -> Vec<String> {
    match &c.select {
        Some(vs) => vs.iter().map(|v| v.to_string()).collect(),
        None => {
            let mut out = Vec::new();
            group_vars(&c.group, &mut out);
            out.into_iter().map(str::to_owned).collect()
        }
    }
}

pub fn graph_of(c: &Case) -> Graph {
    let mut g = Graph::new();
    for t in &c.graph {
        g.insert(t.clone());
    }
    g
}

/// Runs one seeded case; `Err` describes the mismatch.
pub fn check_case(seed: u64) -> Result<(), String> {
    let case = random_case(seed);
    let text = render_query(&case);
    let q = parse_query(&text).map_err(|e| format!("seed {seed}: parse error {e} in {text}"))?;
    let g = graph_of(&case);
    let result = evaluate(&q, &g).map_err(|e| format!("seed {seed}: {e}"))?;
    let QueryResult::Table(table) = result else {
        return Err(format!("seed {seed}: expected a table"));
    };
    let vars = expected_vars(&case);
    if table.vars != vars {
        return Err(format!("seed {seed}: vars {:?} != {:?}", table.vars, vars));
    }
    let mut got = table.rows;
    got.sort();
    let want = oracle(&case, &vars);
    if got != want {
        return Err(format!(
            "seed {seed}: {text}\n engine {} rows, oracle {} rows",
            got.len(),
            want.len()
        ));
    }
    Ok(())
}

/// Counts of (cases run, cases failing), plus the first failure.
pub fn run_cases(seeds: std::ops::Range<u64>) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let mut n = 0;
    for seed in seeds {
        n += 1;
        if let Err(e) = check_case(seed) {
            failures.push(e);
        }
    }
    (n, failures)
}

/// Fraction of cases whose oracle answer is non-empty.
pub fn nonempty_share(seeds: std::ops::Range<u64>) -> f64 {
    let total = seeds.end.saturating_sub(seeds.start).max(1);
    let non_empty = seeds
        .filter(|&seed| {
            let case = random_case(seed);
            !oracle(&case, &expected_vars(&case)).is_empty()
        })
        .count();
    non_empty as f64 / total as f64
}

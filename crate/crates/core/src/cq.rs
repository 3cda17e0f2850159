//! Competency-question tests: SPARQL queries with expected outcomes, run
//! either against small per-test fixtures or against a built graph.
//!
//! A suite is a directory of TOML descriptors, one per test:
//!
//! ```toml
//! id = "cq-03"
//! question = "Which stations measure nitrates?"
//! query = "cq-03.rq"
//! fixture = "cq-03.ttl"     # optional; required in toy mode
//!
//! [expect]
//! kind = "exact"            # boolean | non-empty | exact | min-count
//! table = """
//! ?station
//! <https://example.org/station/1>
//! """
//! ```
//!
//! `boolean` takes `value = true|false` and needs an ASK query. `min-count`
//! takes `count = n` and checks the COUNT value for COUNT queries, the row
//! count otherwise. `exact` takes `table` (or `table_file`) in the same
//! tab-separated layout the query command prints.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{load_graph, parse_term, Graph, Term};
use crate::sparql::{evaluate, parse_query, table_to_tsv, Query, QueryForm, QueryResult, ResultTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Boolean(bool),
    NonEmpty,
    ExactBindings(ResultTable),
    MinCount(usize),
}

#[derive(Debug, Clone)]
pub struct CqTest {
    pub id: String,
    pub question: String,
    pub query_text: String,
    pub query: Query,
    pub fixture: Option<PathBuf>,
    pub expectation: Expectation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Toy,
    Real,
}

#[derive(Debug, Error)]
pub enum LoadSuiteError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: invalid descriptor: {message}")]
    Descriptor { path: PathBuf, message: String },
    #[error("duplicate test id {id:?} in {first} and {second}")]
    DuplicateId { id: String, first: PathBuf, second: PathBuf },
    #[error("test {id}: query file {path} not found")]
    MissingQuery { id: String, path: PathBuf },
    #[error("test {id}: query syntax: {source}")]
    QuerySyntax { id: String, source: crate::rdf::ParseError },
    #[error("test {id}: malformed expectation: {message}")]
    Expectation { id: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Descriptor {
    id: String,
    #[serde(default)]
    question: String,
    query: PathBuf,
    fixture: Option<PathBuf>,
    expect: ExpectSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectSpec {
    kind: String,
    value: Option<bool>,
    count: Option<usize>,
    table: Option<String>,
    table_file: Option<PathBuf>,
}

/// Parses the tab-separated table layout: a `?var` header line, then one
/// line per solution with N-Triples terms; empty cells are unbound.
pub fn parse_bindings(text: &str) -> Result<ResultTable, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("missing header line")?;
    let vars = header
        .split('\t')
        .map(|h| {
            let h = h.trim();
            h.strip_prefix('?')
                .filter(|v| !v.is_empty())
                .map(str::to_owned)
                .ok_or_else(|| format!("header cell {h:?} is not a ?variable"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != vars.len() {
            return Err(format!("row {} has {} cells, header has {}", i + 1, cells.len(), vars.len()));
        }
        let row = cells
            .iter()
            .map(|c| {
                let c = c.trim();
                if c.is_empty() {
                    Ok(None)
                } else {
                    parse_term(c).map(Some).map_err(|e| format!("row {}: {e}", i + 1))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(ResultTable { vars, rows })
}

fn load_test(path: &Path) -> Result<CqTest, LoadSuiteError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |source| LoadSuiteError::Io {
        path: path.to_path_buf(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(io)?;
    let d: Descriptor = toml::from_str(&text).map_err(|e| LoadSuiteError::Descriptor {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if d.id.trim().is_empty() {
        return Err(LoadSuiteError::Descriptor {
            path: path.to_path_buf(),
            message: "empty id".into(),
        });
    }
    let id = d.id;
    let query_path = dir.join(&d.query);
    let query_text = std::fs::read_to_string(&query_path).map_err(|_| LoadSuiteError::MissingQuery {
        id: id.clone(),
        path: query_path.clone(),
    })?;
    let query = parse_query(&query_text).map_err(|source| LoadSuiteError::QuerySyntax { id: id.clone(), source })?;

    let bad = |message: String| LoadSuiteError::Expectation { id: id.clone(), message };
    let e = d.expect;
    let expectation = match e.kind.as_str() {
        "boolean" => {
            let v = e.value.ok_or_else(|| bad("boolean expectation needs `value`".into()))?;
            if query.form != QueryForm::Ask {
                return Err(bad("boolean expectation requires an ASK query".into()));
            }
            Expectation::Boolean(v)
        }
        "non-empty" => Expectation::NonEmpty,
        "min-count" => Expectation::MinCount(e.count.ok_or_else(|| bad("min-count expectation needs `count`".into()))?),
        "exact" => {
            let text = match (e.table, e.table_file) {
                (Some(t), None) => t,
                (None, Some(f)) => std::fs::read_to_string(dir.join(&f))
                    .map_err(|err| bad(format!("table file {}: {err}", f.display())))?,
                _ => return Err(bad("exact expectation needs exactly one of `table`, `table_file`".into())),
            };
            if query.form == QueryForm::Ask {
                return Err(bad("exact expectation requires a SELECT query".into()));
            }
            let table = parse_bindings(&text).map_err(bad)?;
            let mut want: Vec<&String> = table.vars.iter().collect();
            let mut have = query.projected_vars();
            want.sort();
            have.sort();
            if want.into_iter().ne(have.iter()) {
                return Err(bad(format!(
                    "table columns {:?} differ from projected variables {:?}",
                    table.vars,
                    query.projected_vars()
                )));
            }
            Expectation::ExactBindings(table)
        }
        other => return Err(bad(format!("unknown kind {other:?}"))),
    };
    Ok(CqTest {
        id,
        question: d.question,
        query_text,
        query,
        fixture: d.fixture.map(|f| dir.join(f)),
        expectation,
    })
}

/// Loads every `*.toml` descriptor in `dir`, sorted by test id.
pub fn load_suite(dir: &Path) -> Result<Vec<CqTest>, LoadSuiteError> {
    let io = |source| LoadSuiteError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "toml") && p.is_file());
    paths.sort();

    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut tests = Vec::new();
    for p in paths {
        let t = load_test(&p)?;
        if let Some(first) = seen.insert(t.id.clone(), p.clone()) {
            return Err(LoadSuiteError::DuplicateId {
                id: t.id,
                first,
                second: p,
            });
        }
        tests.push(t);
    }
    tests.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(tests)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestOutcome {
    pub id: String,
    pub question: String,
    pub status: Status,
    pub message: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub mode: Mode,
    pub tests: Vec<TestOutcome>,
    pub totals: Totals,
}

impl TestReport {
    pub fn success(&self) -> bool {
        self.totals.fail == 0 && self.totals.error == 0
    }

    /// One line per test plus a totals line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.tests {
            out.push_str(&format!("{:<5} {}", t.status.to_string(), t.id));
            if !t.message.is_empty() {
                out.push_str(&format!(": {}", t.message.trim_end().replace('\n', "\n      ")));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{} passed, {} failed, {} errors\n",
            self.totals.pass, self.totals.fail, self.totals.error
        ));
        out
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("real mode needs a data graph")]
    MissingData,
}

fn sorted_rows(t: &ResultTable, order: &[usize]) -> Vec<Vec<Option<Term>>> {
    let mut rows: Vec<Vec<Option<Term>>> = t
        .rows
        .iter()
        .map(|r| order.iter().map(|&i| r[i].clone()).collect())
        .collect();
    rows.sort();
    rows
}

/// Difference between an expected and observed table, or `None` if equal.
/// Rows are compared as multisets unless `ordered`.
fn table_diff(want: &ResultTable, got: &ResultTable, ordered: bool) -> Option<String> {
    let order: Option<Vec<usize>> = want.vars.iter().map(|v| got.column(v)).collect();
    let Some(order) = order else {
        return Some(format!("columns {:?} vs expected {:?}", got.vars, want.vars));
    };
    let aligned = ResultTable {
        vars: want.vars.clone(),
        rows: got
            .rows
            .iter()
            .map(|r| order.iter().map(|&i| r[i].clone()).collect())
            .collect(),
    };
    let identity: Vec<usize> = (0..want.vars.len()).collect();
    let equal = if ordered {
        aligned.rows == want.rows
    } else {
        sorted_rows(&aligned, &identity) == sorted_rows(want, &identity)
    };
    if equal {
        return None;
    }
    let mut msg = format!(
        "expected {} rows, observed {}{}",
        want.len(),
        aligned.len(),
        if ordered { " (ordered)" } else { "" }
    );
    if !ordered {
        let mut remaining = sorted_rows(want, &identity);
        let mut extra = Vec::new();
        for r in sorted_rows(&aligned, &identity) {
            match remaining.iter().position(|w| *w == r) {
                Some(i) => {
                    remaining.remove(i);
                }
                None => extra.push(r),
            }
        }
        let fmt_rows = |rows: &[Vec<Option<Term>>]| {
            let t = ResultTable {
                vars: want.vars.clone(),
                rows: rows.to_vec(),
            };
            table_to_tsv(&t).lines().skip(1).map(|l| format!("\n  {l}")).collect::<String>()
        };
        if !remaining.is_empty() {
            msg.push_str(&format!("\nmissing:{}", fmt_rows(&remaining)));
        }
        if !extra.is_empty() {
            msg.push_str(&format!("\nunexpected:{}", fmt_rows(&extra)));
        }
    } else {
        msg.push_str(&format!("\nobserved:\n{}", table_to_tsv(&aligned)));
    }
    Some(msg)
}

/// Checks one result against its expectation; `Err` carries the failure message.
pub fn check(expectation: &Expectation, query: &Query, result: &QueryResult) -> Result<(), String> {
    match (expectation, result) {
        (Expectation::Boolean(want), QueryResult::Boolean(got)) => {
            if want == got {
                Ok(())
            } else {
                Err(format!("expected {want}, observed {got}"))
            }
        }
        (Expectation::NonEmpty, r) => {
            if r.is_empty() {
                Err("query returned zero rows".into())
            } else {
                Ok(())
            }
        }
        (Expectation::MinCount(n), QueryResult::Table(t)) => {
            let observed = match &query.form {
                QueryForm::Count { .. } => t
                    .rows
                    .first()
                    .and_then(|r| r[0].as_ref())
                    .and_then(|c| c.as_literal())
                    .and_then(|l| l.lexical().parse::<usize>().ok())
                    .unwrap_or(0),
                _ => t.len(),
            };
            if observed >= *n {
                Ok(())
            } else {
                Err(format!("expected at least {n}, observed {observed}"))
            }
        }
        (Expectation::ExactBindings(want), QueryResult::Table(got)) => match table_diff(want, got, query.has_order_by()) {
            None => Ok(()),
            Some(d) => Err(d),
        },
        (e, r) => Err(format!("expectation {e:?} does not apply to result {r:?}")),
    }
}

fn run_one(t: &CqTest, mode: Mode, data: Option<&Graph>) -> TestOutcome {
    let start = Instant::now();
    let fixture;
    let graph = match mode {
        Mode::Real => data,
        Mode::Toy => match &t.fixture {
            None => None,
            Some(p) => match load_graph(p, "f") {
                Ok((g, _)) => {
                    fixture = g;
                    Some(&fixture)
                }
                Err(e) => return outcome(t, Status::Error, format!("fixture: {e}"), start),
            },
        },
    };
    let Some(g) = graph else {
        return outcome(t, Status::Error, "no fixture for toy mode".into(), start);
    };
    match evaluate(&t.query, g) {
        Err(e) => outcome(t, Status::Error, e.to_string(), start),
        Ok(result) => match check(&t.expectation, &t.query, &result) {
            Ok(()) => outcome(t, Status::Pass, String::new(), start),
            Err(m) => outcome(t, Status::Fail, m, start),
        },
    }
}

fn outcome(t: &CqTest, status: Status, message: String, start: Instant) -> TestOutcome {
    TestOutcome {
        id: t.id.clone(),
        question: t.question.clone(),
        status,
        message,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
    }
}

/// Runs a suite on up to `jobs` threads. The report is ordered by test id.
pub fn run_suite(suite: &[CqTest], mode: Mode, data: Option<&Graph>, jobs: usize) -> Result<TestReport, RunError> {
    if mode == Mode::Real && data.is_none() {
        return Err(RunError::MissingData);
    }
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(suite.len()));
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, suite.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(t) = suite.get(i) else { break };
                let o = run_one(t, mode, data);
                results.lock().expect("poisoned").push(o);
            });
        }
    });
    let mut tests = results.into_inner().expect("poisoned");
    tests.sort_by(|a, b| a.id.cmp(&b.id));
    let mut totals = Totals::default();
    for t in &tests {
        match t.status {
            Status::Pass => totals.pass += 1,
            Status::Fail => totals.fail += 1,
            Status::Error => totals.error += 1,
        }
    }
    Ok(TestReport { mode, tests, totals })
}

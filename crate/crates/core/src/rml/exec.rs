//! Execution of triples maps over row streams.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};

use log::{debug, info};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::vocab::rdf;
use crate::rdf::{Graph, Term, TermError, Triple};

use super::model::*;
use super::source::{iter_rows, Row, SourceError, SourceResolver, UnknownColumn};
use super::template::TemplatePart;

const BATCH: usize = 4096;

/// Percent-encodes every character outside the RFC 3987 `iunreserved` set,
/// byte by byte over its UTF-8 form, with uppercase hex digits.
pub fn iri_safe_encode(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        if is_iunreserved(c) {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push('%');
                out.push_str(&format!("{b:02X}"));
            }
        }
    }
    out
}

fn is_iunreserved(c: char) -> bool {
    if c.is_ascii() {
        return c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_' | '~');
    }
    let u = c as u32;
    matches!(u,
        0xA0..=0xD7FF | 0xF900..=0xFDCF | 0xFDF0..=0xFFEF
        | 0x10000..=0x1FFFD | 0x20000..=0x2FFFD | 0x30000..=0x3FFFD
        | 0x40000..=0x4FFFD | 0x50000..=0x5FFFD | 0x60000..=0x6FFFD
        | 0x70000..=0x7FFFD | 0x80000..=0x8FFFD | 0x90000..=0x9FFFD
        | 0xA0000..=0xAFFFD | 0xB0000..=0xBFFFD | 0xC0000..=0xCFFFD
        | 0xD0000..=0xDFFFD | 0xE1000..=0xEFFFD)
}

/// Failure to generate a term from a row.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermGenError {
    #[error(transparent)]
    UnknownColumn(#[from] UnknownColumn),
    #[error(transparent)]
    Invalid(#[from] TermError),
}

impl TermGenError {
    /// True when the error comes from a data value rather than the mapping.
    pub fn is_data_error(&self) -> bool {
        matches!(self, TermGenError::Invalid(_))
    }

    fn reason(&self) -> &'static str {
        match self {
            TermGenError::UnknownColumn(_) => "unknown-column",
            TermGenError::Invalid(TermError::RelativeIri(_)) => "relative-iri",
            TermGenError::Invalid(_) => "invalid-term",
        }
    }
}

/// Deterministic blank node label for a generated value within a map.
pub fn blank_label(map: &MapId, value: &str) -> String {
    let mut h = Sha256::new();
    h.update(map.to_string().as_bytes());
    h.update([0u8]);
    h.update(value.as_bytes());
    format!("b{}", hex::encode(&h.finalize()[..8]))
}

/// Generates the term for one row; `None` when a referenced value is NULL.
pub fn expand_term_map(tm: &TermMap, row: &Row, map: &MapId) -> Result<Option<Term>, TermGenError> {
    let value = match &tm.kind {
        TermMapKind::Constant(t) => return Ok(Some(t.clone())),
        TermMapKind::Reference(column) => match row.get(column)? {
            Some(v) => v.to_owned(),
            None => return Ok(None),
        },
        TermMapKind::Template(t) => {
            let mut values = Vec::new();
            for column in t.placeholders() {
                values.push(row.get(column)?);
            }
            if values.iter().any(Option::is_none) {
                return Ok(None);
            }
            let mut values = values.into_iter().flatten();
            let mut out = String::new();
            for part in t.parts() {
                match part {
                    TemplatePart::Literal(s) => out.push_str(s),
                    TemplatePart::Placeholder(_) => {
                        let v = values.next().unwrap_or_default();
                        if tm.term_type == TermType::Iri {
                            out.push_str(&iri_safe_encode(v));
                        } else {
                            out.push_str(v);
                        }
                    }
                }
            }
            out
        }
    };
    let term = match tm.term_type {
        TermType::Iri => Term::iri(value)?,
        TermType::BlankNode => Term::BlankNode(blank_label(map, &value)),
        TermType::Literal => match (&tm.language, &tm.datatype) {
            (Some(lang), _) => Term::lang(value, lang.as_str())?,
            (None, Some(dt)) => Term::typed(value, dt.as_str())?,
            (None, None) => Term::string(value),
        },
    };
    Ok(Some(term))
}

fn expand_all(tms: &[TermMap], row: &Row, map: &MapId) -> Result<Vec<Term>, TermGenError> {
    let mut out = Vec::with_capacity(tms.len());
    for tm in tms {
        out.extend(expand_term_map(tm, row, map)?);
    }
    Ok(out)
}

/// Subject, class and non-referencing object triples of one row. `None`
/// when the subject is NULL.
pub fn row_triples(tm: &TriplesMap, row: &Row) -> Result<Option<(Term, Vec<Triple>)>, TermGenError> {
    let Some(subject) = expand_term_map(&tm.subject_map.term_map, row, &tm.id)? else {
        return Ok(None);
    };
    let mut out = Vec::new();
    let rdf_type = Term::Iri(rdf::TYPE.to_owned());
    for class in &tm.subject_map.classes {
        out.push(Triple {
            subject: subject.clone(),
            predicate: rdf_type.clone(),
            object: Term::Iri(class.clone()),
        });
    }
    for pom in &tm.predicate_object_maps {
        let term_maps: Vec<&TermMap> = pom
            .objects
            .iter()
            .filter_map(|o| match o {
                ObjectMap::Term(t) => Some(t),
                ObjectMap::Ref(_) => None,
            })
            .collect();
        if term_maps.is_empty() {
            continue;
        }
        let predicates = expand_all(&pom.predicates, row, &tm.id)?;
        let mut objects = Vec::with_capacity(term_maps.len());
        for om in term_maps {
            objects.extend(expand_term_map(om, row, &tm.id)?);
        }
        for p in &predicates {
            for o in &objects {
                out.push(Triple {
                    subject: subject.clone(),
                    predicate: p.clone(),
                    object: o.clone(),
                });
            }
        }
    }
    Ok(Some((subject, out)))
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("{map}: {source}")]
    Source { map: MapId, source: SourceError },
    #[error("{map}, row {ordinal}: {source}")]
    Term { map: MapId, ordinal: u64, source: TermGenError },
    #[error("{map}: join with {parent}: {source}")]
    JoinColumn { map: MapId, parent: MapId, source: UnknownColumn },
    #[error("{map}: parent triples map {parent} is not defined")]
    UnknownParent { map: MapId, parent: MapId },
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

/// Triples of `tm` for each row, without referencing object maps.
pub fn execute_triples_map<'a, I>(tm: &'a TriplesMap, rows: I) -> impl Iterator<Item = Result<Triple, ExecError>> + 'a
where
    I: IntoIterator<Item = Row>,
    I::IntoIter: 'a,
{
    rows.into_iter().flat_map(move |row| match row_triples(tm, &row) {
        Ok(Some((_, triples))) => triples.into_iter().map(Ok).collect::<Vec<_>>(),
        Ok(None) => Vec::new(),
        Err(source) => vec![Err(ExecError::Term {
            map: tm.id.clone(),
            ordinal: row.ordinal(),
            source,
        })],
    })
}

/// Parent subjects keyed by their join-column values.
#[derive(Debug, Default)]
pub struct JoinTable {
    entries: HashMap<Vec<String>, Vec<Term>>,
}

impl JoinTable {
    /// Rows with a NULL subject or a NULL join value are left out, since
    /// NULL never matches. Rows whose subject cannot be generated are left
    /// out as well; the parent map's own run reports them.
    pub fn build<I>(parent: &TriplesMap, columns: &[String], rows: I) -> Result<Self, ExecError>
    where
        I: IntoIterator<Item = Row>,
    {
        let mut entries: HashMap<Vec<String>, Vec<Term>> = HashMap::new();
        for row in rows {
            let key = match join_key(&row, columns) {
                Ok(Some(k)) => k,
                Ok(None) => continue,
                Err(source) => {
                    return Err(ExecError::JoinColumn {
                        map: parent.id.clone(),
                        parent: parent.id.clone(),
                        source,
                    })
                }
            };
            match expand_term_map(&parent.subject_map.term_map, &row, &parent.id) {
                Ok(Some(subject)) => entries.entry(key).or_default().push(subject),
                Ok(None) => {}
                Err(e) if e.is_data_error() => {}
                Err(source) => {
                    return Err(ExecError::Term {
                        map: parent.id.clone(),
                        ordinal: row.ordinal(),
                        source,
                    })
                }
            }
        }
        Ok(JoinTable { entries })
    }

    pub fn probe(&self, key: &[String]) -> &[Term] {
        self.entries.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Join-column values of a row; `None` if any is NULL.
fn join_key(row: &Row, columns: &[String]) -> Result<Option<Vec<String>>, UnknownColumn> {
    let mut key = Vec::with_capacity(columns.len());
    for c in columns {
        match row.get(c)? {
            Some(v) => key.push(v.to_owned()),
            None => return Ok(None),
        }
    }
    Ok(Some(key))
}

fn join_triples(
    child: &TriplesMap,
    subject: &Term,
    predicates: &[Term],
    rom: &RefObjectMap,
    table: &JoinTable,
    row: &Row,
    out: &mut Vec<Triple>,
) -> Result<(), ExecError> {
    let columns: Vec<String> = rom.joins.iter().map(|j| j.child.clone()).collect();
    let key = match join_key(row, &columns) {
        Ok(Some(k)) => k,
        Ok(None) => return Ok(()),
        Err(source) => {
            return Err(ExecError::JoinColumn {
                map: child.id.clone(),
                parent: rom.parent.clone(),
                source,
            })
        }
    };
    for p in predicates {
        for o in table.probe(&key) {
            out.push(Triple {
                subject: subject.clone(),
                predicate: p.clone(),
                object: o.clone(),
            });
        }
    }
    Ok(())
}

/// Triples linking child subjects to parent subjects for one referencing
/// object map of `pom`. An empty join list links every child row to every
/// parent row.
pub fn execute_join<C, P>(
    child: &TriplesMap,
    pom: &PredicateObjectMap,
    rom: &RefObjectMap,
    child_rows: C,
    parent: &TriplesMap,
    parent_rows: P,
) -> Result<Vec<Triple>, ExecError>
where
    C: IntoIterator<Item = Row>,
    P: IntoIterator<Item = Row>,
{
    let parent_columns: Vec<String> = rom.joins.iter().map(|j| j.parent.clone()).collect();
    let table = JoinTable::build(parent, &parent_columns, parent_rows).map_err(|e| match e {
        ExecError::JoinColumn { source, .. } => ExecError::JoinColumn {
            map: child.id.clone(),
            parent: parent.id.clone(),
            source,
        },
        other => other,
    })?;
    let mut out = Vec::new();
    for row in child_rows {
        let term_error = |source| ExecError::Term {
            map: child.id.clone(),
            ordinal: row.ordinal(),
            source,
        };
        let Some(subject) = expand_term_map(&child.subject_map.term_map, &row, &child.id).map_err(term_error)? else {
            continue;
        };
        let predicates = expand_all(&pom.predicates, &row, &child.id).map_err(term_error)?;
        join_triples(child, &subject, &predicates, rom, &table, &row, &mut out)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    /// Row-level problems (ragged rows, bad encodings, invalid generated
    /// terms) become fatal instead of being skipped.
    pub strict: bool,
    /// Stop every map at the first fatal error.
    pub fail_fast: bool,
    /// Number of triples maps executed concurrently.
    pub jobs: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            strict: false,
            fail_fast: true,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MapReport {
    pub rows_read: u64,
    pub triples_emitted: u64,
    pub rows_skipped: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExecutionReport {
    pub rows_read: u64,
    /// Generated triples before deduplication.
    pub triples_emitted: u64,
    pub rows_skipped: u64,
    /// map id → reason → skipped rows
    pub skip_reasons: BTreeMap<String, BTreeMap<String, u64>>,
    pub maps: BTreeMap<String, MapReport>,
}

impl ExecutionReport {
    fn record(&mut self, id: &MapId, map: MapReport, skips: BTreeMap<String, u64>) {
        self.rows_read += map.rows_read;
        self.triples_emitted += map.triples_emitted;
        self.rows_skipped += map.rows_skipped;
        if !skips.is_empty() {
            let entry = self.skip_reasons.entry(id.to_string()).or_default();
            for (reason, n) in skips {
                *entry.entry(reason).or_default() += n;
            }
        }
        let entry = self.maps.entry(id.to_string()).or_default();
        entry.rows_read += map.rows_read;
        entry.triples_emitted += map.triples_emitted;
        entry.rows_skipped += map.rows_skipped;
    }

    pub fn merge(&mut self, other: ExecutionReport) {
        self.rows_read += other.rows_read;
        self.triples_emitted += other.triples_emitted;
        self.rows_skipped += other.rows_skipped;
        for (map, reasons) in other.skip_reasons {
            let entry = self.skip_reasons.entry(map).or_default();
            for (reason, n) in reasons {
                *entry.entry(reason).or_default() += n;
            }
        }
        for (map, r) in other.maps {
            let entry = self.maps.entry(map).or_default();
            entry.rows_read += r.rows_read;
            entry.triples_emitted += r.triples_emitted;
            entry.rows_skipped += r.rows_skipped;
        }
    }
}

/// Fatal errors of a mapping run, with the report accumulated so far.
#[derive(Debug)]
pub struct ExecFailure {
    pub errors: Vec<ExecError>,
    pub report: ExecutionReport,
}

impl std::fmt::Display for ExecFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "mapping failed with {} error(s)", self.errors.len())?;
        for e in &self.errors {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ExecFailure {}

/// Destination for generated triples, fed in batches.
pub trait TripleSink {
    fn accept(&mut self, batch: Vec<Triple>) -> io::Result<()>;
}

impl TripleSink for Graph {
    fn accept(&mut self, batch: Vec<Triple>) -> io::Result<()> {
        self.extend(batch);
        Ok(())
    }
}

/// Writes every triple as an N-Triples line, without deduplication.
pub struct NTriplesSink<W> {
    out: W,
    written: u64,
}

impl<W: Write> NTriplesSink<W> {
    pub fn new(out: W) -> Self {
        NTriplesSink { out, written: 0 }
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TripleSink for NTriplesSink<W> {
    fn accept(&mut self, batch: Vec<Triple>) -> io::Result<()> {
        for t in &batch {
            writeln!(self.out, "{}", t.to_ntriples())?;
        }
        self.written += batch.len() as u64;
        Ok(())
    }
}

/// Discards triples and counts them.
#[derive(Debug, Default)]
pub struct CountingSink {
    pub count: u64,
}

impl TripleSink for CountingSink {
    fn accept(&mut self, batch: Vec<Triple>) -> io::Result<()> {
        self.count += batch.len() as u64;
        Ok(())
    }
}

type JoinKey = (MapId, Vec<String>);

struct Context<'a> {
    maps: HashMap<&'a MapId, &'a TriplesMap>,
    resolver: &'a dyn SourceResolver,
    options: ExecOptions,
    joins: Mutex<HashMap<JoinKey, Arc<JoinTable>>>,
    cancelled: AtomicBool,
}

struct MapRun {
    report: MapReport,
    skips: BTreeMap<String, u64>,
    errors: Vec<ExecError>,
}

impl Context<'_> {
    fn join_table(&self, child: &TriplesMap, rom: &RefObjectMap) -> Result<Arc<JoinTable>, ExecError> {
        let parent = *self.maps.get(&rom.parent).ok_or_else(|| ExecError::UnknownParent {
            map: child.id.clone(),
            parent: rom.parent.clone(),
        })?;
        let columns: Vec<String> = rom.joins.iter().map(|j| j.parent.clone()).collect();
        let key = (rom.parent.clone(), columns);
        let mut cache = self.joins.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = cache.get(&key) {
            return Ok(Arc::clone(t));
        }
        let reader = iter_rows(&parent.logical_source, self.resolver).map_err(|source| ExecError::Source {
            map: parent.id.clone(),
            source,
        })?;
        if let Some(c) = key.1.iter().find(|c| !reader.header().contains(c)) {
            return Err(ExecError::JoinColumn {
                map: child.id.clone(),
                parent: parent.id.clone(),
                source: UnknownColumn(c.clone()),
            });
        }
        let mut fatal = None;
        let rows = reader.filter_map(|r| match r {
            Ok(row) => Some(row),
            Err(e) if e.is_row_level() => None,
            Err(e) => {
                fatal.get_or_insert(e);
                None
            }
        });
        let table = JoinTable::build(parent, &key.1, rows)?;
        if let Some(source) = fatal {
            return Err(ExecError::Source {
                map: parent.id.clone(),
                source,
            });
        }
        debug!("join table for {} on {:?}: {} entries", parent.id, key.1, table.len());
        let table = Arc::new(table);
        cache.insert(key, Arc::clone(&table));
        Ok(table)
    }

    fn run_map(&self, tm: &TriplesMap, emit: &mut dyn FnMut(Vec<Triple>) -> Result<(), ExecError>) -> MapRun {
        let mut run = MapRun {
            report: MapReport::default(),
            skips: BTreeMap::new(),
            errors: Vec::new(),
        };
        if let Err(e) = self.run_map_inner(tm, emit, &mut run) {
            run.errors.push(e);
        }
        run
    }

    fn run_map_inner(
        &self,
        tm: &TriplesMap,
        emit: &mut dyn FnMut(Vec<Triple>) -> Result<(), ExecError>,
        run: &mut MapRun,
    ) -> Result<(), ExecError> {
        let mut tables = Vec::new();
        for ((i, _), rom) in tm.ref_object_maps() {
            tables.push((i, rom, self.join_table(tm, rom)?));
        }
        let reader = iter_rows(&tm.logical_source, self.resolver).map_err(|source| ExecError::Source {
            map: tm.id.clone(),
            source,
        })?;
        for (_, rom, _) in &tables {
            if let Some(jc) = rom.joins.iter().find(|j| !reader.header().contains(&j.child)) {
                return Err(ExecError::JoinColumn {
                    map: tm.id.clone(),
                    parent: rom.parent.clone(),
                    source: UnknownColumn(jc.child.clone()),
                });
            }
        }

        let mut batch = Vec::with_capacity(BATCH);
        for item in reader {
            if self.cancelled.load(Ordering::Relaxed) {
                return Ok(());
            }
            run.report.rows_read += 1;
            let row = match item {
                Ok(row) => row,
                Err(e) if e.is_row_level() && !self.options.strict => {
                    self.skip(run, e.reason());
                    continue;
                }
                Err(source) => {
                    return Err(ExecError::Source {
                        map: tm.id.clone(),
                        source,
                    })
                }
            };
            let term_error = |source: TermGenError| ExecError::Term {
                map: tm.id.clone(),
                ordinal: row.ordinal(),
                source,
            };
            let generated = row_triples(tm, &row).and_then(|r| {
                let Some((subject, mut triples)) = r else {
                    return Ok(None);
                };
                for (i, rom, table) in &tables {
                    let predicates = expand_all(&tm.predicate_object_maps[*i].predicates, &row, &tm.id)?;
                    join_triples(tm, &subject, &predicates, rom, table, &row, &mut triples)
                        .map_err(|e| match e {
                            ExecError::Term { source, .. } => source,
                            ExecError::JoinColumn { source, .. } => TermGenError::UnknownColumn(source),
                            _ => unreachable!("join probing only fails on columns"),
                        })?;
                }
                Ok(Some(triples))
            });
            match generated {
                Ok(Some(triples)) => {
                    run.report.triples_emitted += triples.len() as u64;
                    batch.extend(triples);
                    if batch.len() >= BATCH {
                        emit(std::mem::replace(&mut batch, Vec::with_capacity(BATCH)))?;
                    }
                }
                Ok(None) => self.skip(run, "null-subject"),
                Err(e) if e.is_data_error() && !self.options.strict => self.skip(run, e.reason()),
                Err(e) => return Err(term_error(e)),
            }
        }
        if !batch.is_empty() {
            emit(batch)?;
        }
        Ok(())
    }

    fn skip(&self, run: &mut MapRun, reason: &str) {
        run.report.rows_skipped += 1;
        *run.skips.entry(reason.to_owned()).or_default() += 1;
    }
}

/// Runs every map into `sink`. Maps run concurrently when `options.jobs > 1`;
/// the sink always receives batches on the calling thread.
pub fn run_mapping_into(
    maps: &[TriplesMap],
    resolver: &dyn SourceResolver,
    options: &ExecOptions,
    sink: &mut dyn TripleSink,
) -> Result<ExecutionReport, ExecFailure> {
    let ctx = Context {
        maps: maps.iter().map(|m| (&m.id, m)).collect(),
        resolver,
        options: *options,
        joins: Mutex::new(HashMap::new()),
        cancelled: AtomicBool::new(false),
    };
    let mut report = ExecutionReport::default();
    let mut errors = Vec::new();
    let finish = |tm: &TriplesMap, run: MapRun, report: &mut ExecutionReport, errors: &mut Vec<ExecError>| {
        info!(
            "{}: {} rows, {} triples, {} skipped",
            tm.id, run.report.rows_read, run.report.triples_emitted, run.report.rows_skipped
        );
        report.record(&tm.id, run.report, run.skips);
        if !run.errors.is_empty() && options.fail_fast {
            ctx.cancelled.store(true, Ordering::Relaxed);
        }
        errors.extend(run.errors);
    };

    if options.jobs <= 1 || maps.len() <= 1 {
        for tm in maps {
            if ctx.cancelled.load(Ordering::Relaxed) {
                break;
            }
            let run = ctx.run_map(tm, &mut |batch| sink.accept(batch).map_err(ExecError::from));
            finish(tm, run, &mut report, &mut errors);
        }
    } else {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::sync_channel::<Message>(options.jobs * 2);
        std::thread::scope(|scope| {
            for _ in 0..options.jobs.min(maps.len()) {
                let tx = tx.clone();
                let (ctx, next) = (&ctx, &next);
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= maps.len() || ctx.cancelled.load(Ordering::Relaxed) {
                        break;
                    }
                    let run = ctx.run_map(&maps[i], &mut |batch| {
                        tx.send(Message::Batch(batch)).map_err(|_| {
                            ExecError::Output(io::Error::new(io::ErrorKind::BrokenPipe, "sink closed"))
                        })
                    });
                    if tx.send(Message::Done(i, run)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut done: BTreeMap<usize, MapRun> = BTreeMap::new();
            let mut sink_error = None;
            for msg in rx {
                match msg {
                    Message::Batch(batch) => {
                        if sink_error.is_none() {
                            if let Err(e) = sink.accept(batch) {
                                sink_error = Some(e);
                                ctx.cancelled.store(true, Ordering::Relaxed);
                            }
                        }
                    }
                    Message::Done(i, run) => {
                        done.insert(i, run);
                    }
                }
            }
            for (i, run) in done {
                finish(&maps[i], run, &mut report, &mut errors);
            }
            if let Some(e) = sink_error {
                errors.push(ExecError::Output(e));
            }
        });
    }

    if errors.is_empty() {
        Ok(report)
    } else {
        Err(ExecFailure { errors, report })
    }
}

enum Message {
    Batch(Vec<Triple>),
    Done(usize, MapRun),
}

/// Runs every map and returns the deduplicated union of their output.
pub fn run_mapping(
    maps: &[TriplesMap],
    resolver: &dyn SourceResolver,
    options: &ExecOptions,
) -> Result<(Graph, ExecutionReport), ExecFailure> {
    let mut g = Graph::new();
    let report = run_mapping_into(maps, resolver, options, &mut g)?;
    Ok((g, report))
}

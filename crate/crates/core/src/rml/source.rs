//! Row streams over logical sources.

use std::collections::HashMap;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::rdf::io::open_input;
use crate::rdf::{NTriplesReader, ParseError};

use super::model::{LogicalSource, ReferenceFormulation};

/// Directory consulted for sources that are not found relative to the base.
pub const CACHE_ENV: &str = "KG_FORGE_CACHE";

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("cannot resolve logical source {0:?}")]
    Unresolved(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: missing header row")]
    MissingHeader { path: PathBuf },
    #[error("{path}: CSV error at line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("{path}: row {ordinal} has {found} fields, header has {expected}")]
    Ragged { path: PathBuf, ordinal: u64, expected: usize, found: usize },
    #[error("{path}: row {ordinal} is not valid UTF-8")]
    Encoding { path: PathBuf, ordinal: u64 },
    #[error(transparent)]
    Rdf(#[from] ParseError),
}

impl SourceError {
    /// Errors confined to a single row; the stream can continue past them.
    pub fn is_row_level(&self) -> bool {
        matches!(self, SourceError::Ragged { .. } | SourceError::Encoding { .. })
    }

    /// Short reason key used in skip histograms.
    pub fn reason(&self) -> &'static str {
        match self {
            SourceError::Ragged { .. } => "ragged-row",
            SourceError::Encoding { .. } => "encoding",
            _ => "source-error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvDialect {
    pub delimiter: u8,
    pub quote: u8,
}

impl Default for CsvDialect {
    fn default() -> Self {
        CsvDialect {
            delimiter: b',',
            quote: b'"',
        }
    }
}

/// Column names of a source, shared by all of its rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Header {
    pub fn new(names: Vec<String>) -> Self {
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            index.entry(n.clone()).or_insert(i);
        }
        Header { names, index }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, column: &str) -> Option<usize> {
        self.index.get(column).copied()
    }

    pub fn contains(&self, column: &str) -> bool {
        self.index.contains_key(column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {0:?} is not in the source header")]
pub struct UnknownColumn(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    header: Arc<Header>,
    values: Vec<Option<String>>,
    ordinal: u64,
}

impl Row {
    /// Empty strings are stored as NULL.
    pub fn new(header: Arc<Header>, values: Vec<Option<String>>, ordinal: u64) -> Self {
        let values = values.into_iter().map(|v| v.filter(|s| !s.is_empty())).collect();
        Row { header, values, ordinal }
    }

    /// Convenience constructor from `(column, value)` pairs.
    pub fn from_pairs(pairs: &[(&str, Option<&str>)], ordinal: u64) -> Self {
        let header = Arc::new(Header::new(pairs.iter().map(|(c, _)| (*c).to_owned()).collect()));
        let values = pairs.iter().map(|(_, v)| v.map(str::to_owned)).collect();
        Row::new(header, values, ordinal)
    }

    /// `Ok(None)` for NULL, `Err` when the column does not exist.
    pub fn get(&self, column: &str) -> Result<Option<&str>, UnknownColumn> {
        match self.header.position(column) {
            Some(i) => Ok(self.values.get(i).and_then(|v| v.as_deref())),
            None => Err(UnknownColumn(column.to_owned())),
        }
    }

    pub fn ordinal(&self) -> u64 {
        self.ordinal
    }

    pub fn header(&self) -> &Arc<Header> {
        &self.header
    }
}

/// Maps logical source names to files.
pub trait SourceResolver: Send + Sync {
    fn resolve(&self, source: &LogicalSource) -> Result<PathBuf, SourceError>;

    fn dialect(&self, _source: &LogicalSource) -> CsvDialect {
        CsvDialect::default()
    }
}

/// Resolves explicit bindings first, then paths relative to a base
/// directory, then the `KG_FORGE_CACHE` directory.
#[derive(Debug, Clone, Default)]
pub struct FileResolver {
    base: PathBuf,
    bindings: HashMap<String, PathBuf>,
    dialects: HashMap<String, CsvDialect>,
    cache: Option<PathBuf>,
}

impl FileResolver {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        FileResolver {
            base: base.into(),
            bindings: HashMap::new(),
            dialects: HashMap::new(),
            cache: std::env::var_os(CACHE_ENV).map(PathBuf::from),
        }
    }

    pub fn bind(&mut self, name: impl Into<String>, path: impl Into<PathBuf>) -> &mut Self {
        self.bindings.insert(name.into(), path.into());
        self
    }

    pub fn set_dialect(&mut self, name: impl Into<String>, dialect: CsvDialect) -> &mut Self {
        self.dialects.insert(name.into(), dialect);
        self
    }

    pub fn with_cache(mut self, cache: Option<PathBuf>) -> Self {
        self.cache = cache;
        self
    }
}

impl SourceResolver for FileResolver {
    fn resolve(&self, source: &LogicalSource) -> Result<PathBuf, SourceError> {
        let name = source.source.strip_prefix("file://").unwrap_or(&source.source);
        if let Some(p) = self.bindings.get(name) {
            return Ok(p.clone());
        }
        let direct = Path::new(name);
        let candidates = [
            direct.is_absolute().then(|| direct.to_path_buf()),
            Some(self.base.join(direct)),
            self.cache.as_ref().map(|c| c.join(direct)),
        ];
        candidates
            .into_iter()
            .flatten()
            .find(|p| p.is_file())
            .ok_or_else(|| SourceError::Unresolved(source.source.clone()))
    }

    fn dialect(&self, source: &LogicalSource) -> CsvDialect {
        self.dialects.get(&source.source).copied().unwrap_or_default()
    }
}

/// Streams the rows of a logical source.
pub fn iter_rows(source: &LogicalSource, resolver: &dyn SourceResolver) -> Result<RowReader, SourceError> {
    let path = resolver.resolve(source)?;
    let input = open_input(&path).map_err(|e| SourceError::Io {
        path: path.clone(),
        source: e,
    })?;
    match source.reference_formulation {
        ReferenceFormulation::Csv => CsvRows::new(input, path, resolver.dialect(source)).map(RowReader::Csv),
        ReferenceFormulation::NTriples => Ok(RowReader::NTriples(TripleRows::new(input))),
    }
}

pub enum RowReader {
    Csv(CsvRows),
    NTriples(TripleRows),
}

impl RowReader {
    pub fn header(&self) -> &Arc<Header> {
        match self {
            RowReader::Csv(r) => &r.header,
            RowReader::NTriples(r) => &r.header,
        }
    }
}

impl Iterator for RowReader {
    type Item = Result<Row, SourceError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            RowReader::Csv(r) => r.next(),
            RowReader::NTriples(r) => r.next(),
        }
    }
}

pub struct CsvRows {
    reader: csv::Reader<Box<dyn BufRead + Send>>,
    record: csv::ByteRecord,
    header: Arc<Header>,
    path: PathBuf,
    ordinal: u64,
    failed: bool,
}

impl CsvRows {
    fn new(input: Box<dyn BufRead + Send>, path: PathBuf, dialect: CsvDialect) -> Result<Self, SourceError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(dialect.delimiter)
            .quote(dialect.quote)
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut record = csv::ByteRecord::new();
        let has_header = reader.read_byte_record(&mut record).map_err(|e| csv_error(&path, e))?;
        if !has_header {
            return Err(SourceError::MissingHeader { path });
        }
        let mut names = Vec::with_capacity(record.len());
        for (i, cell) in record.iter().enumerate() {
            let cell = if i == 0 { cell.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(cell) } else { cell };
            let name = std::str::from_utf8(cell).map_err(|_| SourceError::Encoding {
                path: path.clone(),
                ordinal: 0,
            })?;
            names.push(name.trim().to_owned());
        }
        Ok(CsvRows {
            reader,
            record,
            header: Arc::new(Header::new(names)),
            path,
            ordinal: 0,
            failed: false,
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> SourceError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => SourceError::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => SourceError::Csv {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

impl Iterator for CsvRows {
    type Item = Result<Row, SourceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.reader.read_byte_record(&mut self.record) {
            Ok(false) => return None,
            Ok(true) => {}
            Err(e) => {
                self.failed = true;
                return Some(Err(csv_error(&self.path, e)));
            }
        }
        self.ordinal += 1;
        let expected = self.header.names().len();
        if self.record.len() != expected {
            return Some(Err(SourceError::Ragged {
                path: self.path.clone(),
                ordinal: self.ordinal,
                expected,
                found: self.record.len(),
            }));
        }
        let mut values = Vec::with_capacity(expected);
        for cell in self.record.iter() {
            match std::str::from_utf8(cell) {
                Ok(s) => values.push(Some(s.to_owned())),
                Err(_) => {
                    return Some(Err(SourceError::Encoding {
                        path: self.path.clone(),
                        ordinal: self.ordinal,
                    }))
                }
            }
        }
        Some(Ok(Row::new(Arc::clone(&self.header), values, self.ordinal)))
    }
}

pub struct TripleRows {
    triples: NTriplesReader<Box<dyn BufRead + Send>>,
    header: Arc<Header>,
    ordinal: u64,
}

impl TripleRows {
    fn new(input: Box<dyn BufRead + Send>) -> Self {
        TripleRows {
            triples: NTriplesReader::new(input),
            header: Arc::new(Header::new(vec!["subject".into(), "predicate".into(), "object".into()])),
            ordinal: 0,
        }
    }
}

impl Iterator for TripleRows {
    type Item = Result<Row, SourceError>;

    fn next(&mut self) -> Option<Self::Item> {
        let triple = match self.triples.next()? {
            Ok(t) => t,
            Err(e) => return Some(Err(e.into())),
        };
        self.ordinal += 1;
        let values = [&triple.subject, &triple.predicate, &triple.object]
            .map(|t| Some(t.value().to_owned()))
            .to_vec();
        Some(Ok(Row::new(Arc::clone(&self.header), values, self.ordinal)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn rows_of(text: &[u8], name: &str) -> (tempfile::TempDir, Vec<Result<Row, SourceError>>) {
        let dir = tempfile::tempdir().unwrap();
        std::fs::File::create(dir.path().join(name)).unwrap().write_all(text).unwrap();
        let resolver = FileResolver::new(dir.path()).with_cache(None);
        let src = if name.ends_with(".nt") {
            LogicalSource {
                source: name.into(),
                reference_formulation: ReferenceFormulation::NTriples,
                iterator: None,
            }
        } else {
            LogicalSource::csv(name)
        };
        let rows = iter_rows(&src, &resolver).unwrap().collect();
        (dir, rows)
    }

    #[test]
    fn two_line_csv() {
        let (_d, rows) = rows_of(b"a,b\n1,2", "t.csv");
        assert_eq!(rows.len(), 1);
        let row = rows[0].as_ref().unwrap();
        assert_eq!(row.get("a").unwrap(), Some("1"));
        assert_eq!(row.get("b").unwrap(), Some("2"));
        assert_eq!(row.ordinal(), 1);
        assert!(row.get("c").is_err());
    }

    #[test]
    fn quoting_newlines_bom_and_nulls() {
        let (_d, rows) = rows_of("\u{feff} id , v\n1,\"x,y\"\n2,\"multi\nline\"\n3,\n".as_bytes(), "t.csv");
        let rows: Vec<Row> = rows.into_iter().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].get("id").unwrap(), Some("1"));
        assert_eq!(rows[0].get("v").unwrap(), Some("x,y"));
        assert_eq!(rows[1].get("v").unwrap(), Some("multi\nline"));
        assert_eq!(rows[2].get("v").unwrap(), None);
    }

    #[test]
    fn ragged_rows_are_recoverable() {
        let (_d, rows) = rows_of(b"a,b\n1,2\n3\n4,5,6\n7,8\n", "t.csv");
        assert_eq!(rows.len(), 4);
        assert!(matches!(rows[1], Err(SourceError::Ragged { ordinal: 2, expected: 2, found: 1, .. })));
        assert!(rows[2].as_ref().unwrap_err().is_row_level());
        assert_eq!(rows[3].as_ref().unwrap().get("a").unwrap(), Some("7"));
    }

    #[test]
    fn invalid_utf8_is_row_level() {
        let (_d, rows) = rows_of(b"a\n\xff\nok\n", "t.csv");
        assert!(matches!(rows[0], Err(SourceError::Encoding { ordinal: 1, .. })));
        assert_eq!(rows[1].as_ref().unwrap().get("a").unwrap(), Some("ok"));
    }

    #[test]
    fn gzip_csv() {
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(b"a\nx\ny\n").unwrap();
        let (_d, rows) = rows_of(&enc.finish().unwrap(), "t.csv.gz");
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn ntriples_rows() {
        let (_d, rows) = rows_of(b"<http://s> <http://p> \"v\"@en .\n", "t.nt");
        let row = rows[0].as_ref().unwrap();
        assert_eq!(row.get("subject").unwrap(), Some("http://s"));
        assert_eq!(row.get("object").unwrap(), Some("v"));
    }

    #[test]
    fn unresolved_source() {
        let resolver = FileResolver::new("/nonexistent").with_cache(None);
        assert!(matches!(
            iter_rows(&LogicalSource::csv("nope.csv"), &resolver),
            Err(SourceError::Unresolved(_))
        ));
    }
}

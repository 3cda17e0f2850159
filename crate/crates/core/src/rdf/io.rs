//! File access with transparent gzip decompression.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use super::error::ParseError;
use super::graph::Graph;
use super::ntriples::NTriplesReader;
use super::prefix::PrefixMap;
use super::turtle::{parse_turtle_with, TurtleOptions};

/// Opens `path` for buffered reading, decompressing when it ends in `.gz`.
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    if is_gzip(path) {
        Ok(Box::new(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
    }
}

pub fn read_to_string(path: &Path) -> io::Result<String> {
    let mut text = String::new();
    open_input(path)?.read_to_string(&mut text)?;
    Ok(text)
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdfFormat {
    NTriples,
    Turtle,
}

impl RdfFormat {
    /// Format from the file extension, looking through a trailing `.gz`.
    pub fn from_path(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?.to_ascii_lowercase();
        let name = name.strip_suffix(".gz").unwrap_or(&name);
        if name.ends_with(".nt") {
            Some(RdfFormat::NTriples)
        } else if name.ends_with(".ttl") {
            Some(RdfFormat::Turtle)
        } else {
            None
        }
    }
}

/// `file://` IRI for a path, used as the default Turtle base.
pub fn file_iri(path: &Path) -> String {
    let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    let text = abs.to_string_lossy().replace('\\', "/");
    let encoded: String = text
        .chars()
        .map(|c| if c == ' ' { "%20".to_owned() } else { c.to_string() })
        .collect();
    if encoded.starts_with('/') {
        format!("file://{encoded}")
    } else {
        format!("file:///{encoded}")
    }
}

/// Loads an N-Triples or Turtle file (optionally gzipped).
pub fn load_graph(path: &Path, blank_prefix: &str) -> Result<(Graph, PrefixMap), ParseError> {
    let wrap = |e: ParseError| ParseError::File {
        path: path.display().to_string(),
        source: Box::new(e),
    };
    let format = RdfFormat::from_path(path).ok_or_else(|| ParseError::UnknownFormat(path.display().to_string()))?;
    match format {
        RdfFormat::NTriples => {
            let reader = open_input(path).map_err(|e| wrap(e.into()))?;
            let mut g = Graph::new();
            for t in NTriplesReader::with_blank_prefix(reader, blank_prefix) {
                g.insert(t.map_err(wrap)?);
            }
            Ok((g, PrefixMap::new()))
        }
        RdfFormat::Turtle => {
            let text = read_to_string(path).map_err(|e| wrap(e.into()))?;
            let options = TurtleOptions {
                base: Some(file_iri(path)),
                blank_prefix: blank_prefix.to_owned(),
            };
            parse_turtle_with(&text, &options).map_err(wrap)
        }
    }
}

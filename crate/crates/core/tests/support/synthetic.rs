//! Synthetic providers: a generated CSV, a mapping over it and a manifest,
//! with the triple count known in closed form.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Triples a row yields when no column is NULL: type, label, value, station.
pub const TRIPLES_PER_ROW: usize = 4;
/// Row `i` has an empty label when `i % 7 == 3`.
const LABEL_NULL: (usize, usize) = (7, 3);
/// Row `i` has an empty value when `i % 5 == 1`.
const VALUE_NULL: (usize, usize) = (5, 1);

fn residue_count(rows: usize, (m, r): (usize, usize)) -> usize {
    (rows + m - 1 - r) / m
}

/// `rows × triples/row − NULL-suppressed`.
pub fn expected_triples(rows: usize) -> usize {
    rows * TRIPLES_PER_ROW - residue_count(rows, LABEL_NULL) - residue_count(rows, VALUE_NULL)
}

pub fn csv_text(rows: usize) -> String {
    let mut s = String::from("id,label,value,station\n");
    for i in 0..rows {
        let label = if i % LABEL_NULL.0 == LABEL_NULL.1 { String::new() } else { format!("campione {i}") };
        let value = if i % VALUE_NULL.0 == VALUE_NULL.1 { String::new() } else { format!("{}.{}", i / 3, i % 10) };
        writeln!(s, "{i:05},{label},{value},st-{}", i % 17).unwrap();
    }
    s
}

pub fn mapping_text(namespace: &str) -> String {
    format!(
        r#"@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix ex: <http://ex.org/onto/> .

<#Samples> rml:logicalSource [ rml:source "samples.csv" ; rml:referenceFormulation ql:CSV ] ;
    rr:subjectMap [ rr:template "{namespace}sample/{{id}}" ; rr:class ex:Sample ] ;
    rr:predicateObjectMap [ rr:predicate ex:label ; rr:objectMap [ rml:reference "label" ; rr:language "it" ] ] ,
        [ rr:predicate ex:value ; rr:objectMap [ rml:reference "value" ; rr:datatype xsd:decimal ] ] ,
        [ rr:predicate ex:station ; rr:objectMap [ rr:template "{namespace}station/{{station}}" ] ] .
"#
    )
}

pub struct Provider<'a> {
    pub name: &'a str,
    pub namespace: &'a str,
    pub rows: usize,
}

/// Writes `{dir}/{name}/samples.csv` and `mapping.ttl` for each provider and
/// a manifest `{dir}/{file}` over them, building into `{dir}/out`.
pub fn write_manifest(dir: &Path, file: &str, providers: &[Provider]) -> PathBuf {
    let mut manifest = String::from("output_dir = \"out\"\n");
    for p in providers {
        let pdir = dir.join(p.name);
        fs::create_dir_all(&pdir).unwrap();
        fs::write(pdir.join("samples.csv"), csv_text(p.rows)).unwrap();
        fs::write(pdir.join("mapping.ttl"), mapping_text(p.namespace)).unwrap();
        write!(
            manifest,
            r#"
[[provider]]
name = "{name}"
base_namespace = "{ns}"
license = "https://creativecommons.org/licenses/by/4.0/"

[[provider.dataset]]
id = "{name}-samples"
format = "csv"
source = "{name}/samples.csv"
mapping = "{name}/mapping.ttl"
"#,
            name = p.name,
            ns = p.namespace
        )
        .unwrap();
    }
    let path = dir.join(file);
    fs::write(&path, manifest).unwrap();
    path
}

pub const ISPRA: &str = "https://w3id.org/italia/env/ld/";
pub const ARIA: &str = "https://w3id.org/italia/lombardia/data/";

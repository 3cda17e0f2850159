//! Tab-separated result output, one solution per line.

use std::fmt::Write as _;

use super::eval::{QueryResult, ResultTable};

/// `?var` header line, then N-Triples-encoded cells; unbound cells are empty.
pub fn table_to_tsv(t: &ResultTable) -> String {
    let mut out = String::new();
    let header: Vec<String> = t.vars.iter().map(|v| format!("?{v}")).collect();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in &t.rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push('\t');
            }
            if let Some(term) = cell {
                let _ = write!(out, "{}", term.to_ntriples());
            }
        }
        out.push('\n');
    }
    out
}

/// Booleans print as `true` / `false`.
pub fn to_tsv(r: &QueryResult) -> String {
    match r {
        QueryResult::Boolean(b) => format!("{b}\n"),
        QueryResult::Table(t) => table_to_tsv(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Term;

    #[test]
    fn tsv_layout() {
        let t = ResultTable {
            vars: vec!["s".into(), "o".into()],
            rows: vec![
                vec![Some(Term::iri("http://e/a").unwrap()), Some(Term::lang("x", "en").unwrap())],
                vec![Some(Term::iri("http://e/b").unwrap()), None],
            ],
        };
        assert_eq!(table_to_tsv(&t), "?s\t?o\n<http://e/a>\t\"x\"@en\n<http://e/b>\t\n");
        assert_eq!(to_tsv(&QueryResult::Boolean(false)), "false\n");
    }
}

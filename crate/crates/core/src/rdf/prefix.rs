use std::collections::BTreeMap;

/// Prefix → namespace IRI bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    entries: BTreeMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `prefix`, replacing any earlier binding.
    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.entries.insert(prefix.into(), namespace.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    /// `pfx:local` → namespace ⧺ local.
    pub fn expand(&self, prefix: &str, local: &str) -> Option<String> {
        self.get(prefix).map(|ns| format!("{ns}{local}"))
    }

    /// Longest namespace that is a proper prefix of `iri` and leaves a local
    /// name writable without escapes.
    pub fn shrink<'a>(&'a self, iri: &'a str) -> Option<(&'a str, &'a str)> {
        self.entries
            .iter()
            .filter_map(|(p, ns)| iri.strip_prefix(ns.as_str()).map(|local| (p.as_str(), ns.len(), local)))
            .filter(|(_, _, local)| is_plain_local(local))
            .max_by_key(|&(_, len, _)| len)
            .map(|(p, _, local)| (p, local))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, ns)| (p.as_str(), ns.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Commonly used prefixes (rdf, rdfs, xsd, owl, skos, dcat, dct, void).
    pub fn common() -> Self {
        use super::vocab;
        let mut map = PrefixMap::new();
        map.insert("rdf", vocab::rdf::NS);
        map.insert("rdfs", vocab::rdfs::NS);
        map.insert("xsd", vocab::xsd::NS);
        map.insert("owl", vocab::owl::NS);
        map.insert("skos", vocab::skos::NS);
        map.insert("dcat", vocab::dcat::NS);
        map.insert("dct", vocab::dct::NS);
        map.insert("void", vocab::void::NS);
        map
    }
}

fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_and_shrink() {
        let mut m = PrefixMap::new();
        m.insert("ex", "http://e/");
        m.insert("exa", "http://e/a/");
        assert_eq!(m.expand("ex", "s").as_deref(), Some("http://e/s"));
        assert_eq!(m.expand("nope", "s"), None);
        assert_eq!(m.shrink("http://e/a/b"), Some(("exa", "b")));
        assert_eq!(m.shrink("http://e/x.y"), None);
        m.insert("ex", "http://other/");
        assert_eq!(m.len(), 2);
    }
}

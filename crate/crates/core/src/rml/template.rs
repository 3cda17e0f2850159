use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unbalanced brace at offset {0} in template {1:?}")]
    Unbalanced(usize, String),
    #[error("empty placeholder {{}} at offset {0} in template {1:?}")]
    EmptyPlaceholder(usize, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplatePart {
    Literal(String),
    Placeholder(String),
}

/// A string template such as `https://w3id.org/italia/env/ld/{type}/{id}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template {
    parts: Vec<TemplatePart>,
}

impl Template {
    pub fn parts(&self) -> &[TemplatePart] {
        &self.parts
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().filter_map(|p| match p {
            TemplatePart::Placeholder(c) => Some(c.as_str()),
            TemplatePart::Literal(_) => None,
        })
    }

    pub fn from_parts(parts: Vec<TemplatePart>) -> Self {
        let mut t = Template { parts: Vec::new() };
        for p in parts {
            t.push(p);
        }
        t
    }

    fn push(&mut self, part: TemplatePart) {
        match (self.parts.last_mut(), part) {
            (_, TemplatePart::Literal(s)) if s.is_empty() => {}
            (Some(TemplatePart::Literal(prev)), TemplatePart::Literal(s)) => prev.push_str(&s),
            (_, part) => self.parts.push(part),
        }
    }
}

/// Splits a template into literal and placeholder segments. `\{`, `\}` and
/// `\\` denote literal characters.
pub fn parse_template(text: &str) -> Result<Template, TemplateError> {
    let mut template = Template { parts: Vec::new() };
    let mut literal = String::new();
    let mut placeholder: Option<(usize, String)> = None;
    let mut chars = text.char_indices().peekable();
    while let Some((offset, c)) = chars.next() {
        let target = match &mut placeholder {
            Some((_, name)) => name,
            None => &mut literal,
        };
        match c {
            '\\' => match chars.peek() {
                Some(&(_, next @ ('{' | '}' | '\\'))) => {
                    target.push(next);
                    chars.next();
                }
                _ => target.push('\\'),
            },
            '{' => {
                if placeholder.is_some() {
                    return Err(TemplateError::Unbalanced(offset, text.to_owned()));
                }
                template.push(TemplatePart::Literal(std::mem::take(&mut literal)));
                placeholder = Some((offset, String::new()));
            }
            '}' => match placeholder.take() {
                Some((start, name)) => {
                    if name.is_empty() {
                        return Err(TemplateError::EmptyPlaceholder(start, text.to_owned()));
                    }
                    template.push(TemplatePart::Placeholder(name));
                }
                None => return Err(TemplateError::Unbalanced(offset, text.to_owned())),
            },
            c => target.push(c),
        }
    }
    if let Some((start, _)) = placeholder {
        return Err(TemplateError::Unbalanced(start, text.to_owned()));
    }
    template.push(TemplatePart::Literal(literal));
    Ok(template)
}

impl fmt::Display for Template {
    /// Source form, with literal braces and backslashes escaped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let escape = |s: &str| s.replace('\\', "\\\\").replace('{', "\\{").replace('}', "\\}");
        for part in &self.parts {
            match part {
                TemplatePart::Literal(s) => f.write_str(&escape(s))?,
                TemplatePart::Placeholder(c) => write!(f, "{{{}}}", escape(c))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use TemplatePart::{Literal as Lit, Placeholder as Ph};

    #[test]
    fn ispra_uri_pattern() {
        let t = parse_template("https://w3id.org/italia/env/ld/{type}/{id}").unwrap();
        assert_eq!(
            t.parts(),
            &[
                Lit("https://w3id.org/italia/env/ld/".into()),
                Ph("type".into()),
                Lit("/".into()),
                Ph("id".into())
            ]
        );
    }

    #[test]
    fn plain_and_escaped() {
        assert_eq!(parse_template("no-placeholders").unwrap().parts(), &[Lit("no-placeholders".into())]);
        assert_eq!(parse_template(r"a\{b\}c").unwrap().parts(), &[Lit("a{b}c".into())]);
        assert_eq!(parse_template("{a}{b}").unwrap().parts(), &[Ph("a".into()), Ph("b".into())]);
        assert!(parse_template("").unwrap().parts().is_empty());
    }

    #[test]
    fn malformed_templates() {
        assert!(matches!(parse_template("a{b"), Err(TemplateError::Unbalanced(1, _))));
        assert!(matches!(parse_template("a}b"), Err(TemplateError::Unbalanced(1, _))));
        assert!(matches!(parse_template("x{a{b}}"), Err(TemplateError::Unbalanced(3, _))));
        assert!(matches!(parse_template("x{}"), Err(TemplateError::EmptyPlaceholder(1, _))));
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(segments in prop::collection::vec((any::<bool>(), "[a-z{}\\\\/ ]{1,6}"), 0..6)) {
            let parts: Vec<TemplatePart> = segments
                .into_iter()
                .map(|(ph, s)| if ph { Ph(s) } else { Lit(s) })
                .collect();
            let t = Template::from_parts(parts);
            let text = t.to_string();
            prop_assert_eq!(parse_template(&text).unwrap(), t);
        }
    }
}

//! The shared structured-text format used by metric-definition files and
//! machine-readable reports: nested `key { ... }` blocks over plain lines,
//! with `#` comments. Parsing is stable; printing is canonical (two-space
//! indent, no comments), so parse∘print is the identity on documents.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    /// A single non-block line, stored trimmed.
    Line(String),
    Block { key: String, items: Vec<Item> },
}

impl Item {
    pub fn line(text: impl Into<String>) -> Item {
        Item::Line(text.into())
    }

    pub fn field(key: &str, value: impl std::fmt::Display) -> Item {
        Item::Line(format!("{key} {value}"))
    }

    pub fn block(key: &str, items: Vec<Item>) -> Item {
        Item::Block {
            key: key.to_string(),
            items,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub items: Vec<Item>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("line {0}: block opener has no key")]
    MissingBlockKey(usize),
    #[error("line {0}: unmatched '}}'")]
    UnmatchedClose(usize),
    #[error("unterminated block '{0}'")]
    Unterminated(String),
}

/// Splits a line into its key (first token) and the remainder.
pub fn split_key(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((k, rest)) => (k, rest.trim()),
        None => (line, ""),
    }
}

impl Document {
    pub fn parse(src: &str) -> Result<Document, TextError> {
        let mut stack: Vec<(String, Vec<Item>)> = Vec::new();
        let mut top: Vec<Item> = Vec::new();
        for (lineno, raw) in src.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "}" {
                let (key, items) = stack
                    .pop()
                    .ok_or(TextError::UnmatchedClose(lineno))?;
                let block = Item::Block { key, items };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(block),
                    None => top.push(block),
                }
            } else if let Some(head) = line.strip_suffix('{') {
                let key = head.trim();
                if key.is_empty() {
                    return Err(TextError::MissingBlockKey(lineno));
                }
                stack.push((key.to_string(), Vec::new()));
            } else {
                let item = Item::Line(line.to_string());
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(item),
                    None => top.push(item),
                }
            }
        }
        if let Some((key, _)) = stack.pop() {
            return Err(TextError::Unterminated(key));
        }
        Ok(Document { items: top })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_items(&mut out, &self.items, 0);
        out
    }

    /// Value part of the first top-level line whose key matches.
    pub fn get(&self, key: &str) -> Option<&str> {
        get_in(&self.items, key)
    }

    /// Items of the first top-level block whose key matches.
    pub fn block(&self, key: &str) -> Option<&[Item]> {
        block_in(&self.items, key)
    }
}

pub fn get_in<'a>(items: &'a [Item], key: &str) -> Option<&'a str> {
    items.iter().find_map(|it| match it {
        Item::Line(line) => {
            let (k, v) = split_key(line);
            (k == key).then_some(v)
        }
        _ => None,
    })
}

pub fn block_in<'a>(items: &'a [Item], key: &str) -> Option<&'a [Item]> {
    items.iter().find_map(|it| match it {
        Item::Block { key: k, items } if k == key => Some(items.as_slice()),
        _ => None,
    })
}

/// All plain lines directly inside an item list.
pub fn lines_of(items: &[Item]) -> impl Iterator<Item = &str> {
    items.iter().filter_map(|it| match it {
        Item::Line(line) => Some(line.as_str()),
        _ => None,
    })
}

fn write_items(out: &mut String, items: &[Item], depth: usize) {
    for item in items {
        for _ in 0..depth {
            out.push_str("  ");
        }
        match item {
            Item::Line(line) => {
                let _ = writeln!(out, "{line}");
            }
            Item::Block { key, items } => {
                let _ = writeln!(out, "{key} {{");
                write_items(out, items, depth + 1);
                for _ in 0..depth {
                    out.push_str("  ");
                }
                out.push_str("}\n");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_blocks() {
        let src = "\n# header comment\nname demo\nouter {\n  a 1\n  inner {\n    b 2\n  }\n}\n";
        let doc = Document::parse(src).unwrap();
        assert_eq!(doc.get("name"), Some("demo"));
        let outer = doc.block("outer").unwrap();
        assert_eq!(get_in(outer, "a"), Some("1"));
        let inner = block_in(outer, "inner").unwrap();
        assert_eq!(get_in(inner, "b"), Some("2"));
    }

    #[test]
    fn print_then_parse_is_identity() {
        let doc = Document {
            items: vec![
                Item::field("version", 3),
                Item::block(
                    "results",
                    vec![
                        Item::line("entry 1 2 : holds"),
                        Item::block("nested", vec![Item::line("x y")]),
                    ],
                ),
            ],
        };
        let text = doc.to_text();
        let back = Document::parse(&text).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            Document::parse("a 1\n}\n"),
            Err(TextError::UnmatchedClose(2))
        );
        assert_eq!(
            Document::parse("block {\n a 1\n"),
            Err(TextError::Unterminated("block".to_string()))
        );
        assert_eq!(Document::parse("{\n}\n"), Err(TextError::MissingBlockKey(1)));
    }
}

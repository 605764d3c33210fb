//! Restricted `key: value` configuration dialect.
//!
//! Shared by dataset config files and augmentation pipeline files. Supported
//! syntax:
//!
//! ```text
//! # comment
//! key: value            # scalar
//! block:                # opens an indented block, either a map ...
//!   0: cone
//!   1: barrier
//! steps:                # ... or a list
//!   - brightness gain=0.4
//! ```
//!
//! Values may be wrapped in single or double quotes. Deeper nesting, tabs
//! and flow collections spanning lines are rejected.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(String),
    Map(Vec<MapEntry>),
    List(Vec<ListItem>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListItem {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: Value,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub entries: Vec<Entry>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        // Index of the entry whose block is currently open.
        let mut open: Option<usize> = None;
        let mut block_indent: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            if raw.contains('\t') {
                return Err(Error::Config(format!("tab character, line {line_no}")));
            }
            let content = strip_comment(raw).trim_end();
            if content.trim().is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            let body = content.trim_start();

            if indent == 0 {
                let (key, value) = split_key(body)
                    .ok_or_else(|| Error::Config(format!("expected `key: value`, line {line_no}")))?;
                if entries.iter().any(|e| e.key == key) {
                    return Err(Error::Config(format!("duplicate key `{key}`, line {line_no}")));
                }
                if value.is_empty() {
                    entries.push(Entry {
                        key,
                        value: Value::Map(Vec::new()),
                        line: line_no,
                    });
                    open = Some(entries.len() - 1);
                } else {
                    entries.push(Entry {
                        key,
                        value: Value::Scalar(unquote(&value)),
                        line: line_no,
                    });
                    open = None;
                }
                block_indent = None;
                continue;
            }

            let Some(owner) = open else {
                return Err(Error::Config(format!("unexpected indentation, line {line_no}")));
            };
            match block_indent {
                None => block_indent = Some(indent),
                Some(i) if i != indent => {
                    return Err(Error::Config(format!("inconsistent indentation, line {line_no}")));
                }
                Some(_) => {}
            }

            let entry = &mut entries[owner];
            if let Some(item) = body.strip_prefix('-').filter(|_| body == "-" || body.starts_with("- ")) {
                let item = ListItem {
                    value: unquote(item.trim()),
                    line: line_no,
                };
                match &mut entry.value {
                    Value::Map(m) if m.is_empty() => entry.value = Value::List(vec![item]),
                    Value::List(l) => l.push(item),
                    _ => {
                        return Err(Error::Config(format!(
                            "mixed list and map entries under `{}`, line {line_no}",
                            entry.key
                        )))
                    }
                }
            } else {
                let (key, value) = split_key(body)
                    .ok_or_else(|| Error::Config(format!("expected `key: value`, line {line_no}")))?;
                if value.is_empty() {
                    return Err(Error::Config(format!("nested blocks are not supported, line {line_no}")));
                }
                match &mut entry.value {
                    Value::Map(m) => m.push(MapEntry {
                        key,
                        value: unquote(&value),
                        line: line_no,
                    }),
                    _ => {
                        return Err(Error::Config(format!(
                            "mixed list and map entries under `{}`, line {line_no}",
                            entry.key
                        )))
                    }
                }
            }
        }
        Ok(Document { entries })
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn scalar(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Entry {
                value: Value::Scalar(s),
                ..
            }) => Ok(Some(s)),
            Some(e) => Err(Error::Config(format!("`{key}` must be a scalar, line {}", e.line))),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quote: Option<char> = None;
    for (i, c) in line.char_indices() {
        match (quote, c) {
            (None, '"' | '\'') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            (None, '#') => return &line[..i],
            _ => {}
        }
    }
    line
}

fn split_key(body: &str) -> Option<(String, String)> {
    let (k, v) = body.split_once(':')?;
    let k = unquote(k.trim());
    if k.is_empty() {
        return None;
    }
    Some((k, v.trim().to_string()))
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    for q in ['"', '\''] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return s[1..s.len() - 1].to_string();
        }
    }
    s.to_string()
}

//! Flat `key = value` text files.
//!
//! One entry per line; blank lines and lines starting with `#` are ignored.
//! Keys are case-sensitive and may appear once.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, KvError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(KvError::Syntax { line })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(KvError::Syntax { line });
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(KvError::Duplicate { line, key: key.to_string() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let m = parse("# header\n\n a = 1 \nb=two words\n").unwrap();
        assert_eq!(m["a"], "1");
        assert_eq!(m["b"], "two words");
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(parse("a = 1\nnonsense\n"), Err(KvError::Syntax { line: 2 }));
        assert_eq!(parse(" = 3"), Err(KvError::Syntax { line: 1 }));
        assert!(matches!(parse("a=1\na=2"), Err(KvError::Duplicate { line: 2, .. })));
    }
}

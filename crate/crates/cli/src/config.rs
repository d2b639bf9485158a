//! Flat `key = value` configuration with dotted section names.
//!
//! ```text
//! # comment
//! grid.points = 256
//! hamiltonian.variant = power
//! checks = conservation, uniqueness
//! ```
//!
//! Every lookup records the key, so unused keys can be reported.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
    /// 1-based column where the value starts.
    pub column: usize,
}

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    used: RefCell<BTreeSet<String>>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(CliError::Parse {
                    line,
                    column: col,
                    message: "expected `key = value`".into(),
                });
            };
            let key = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            if !valid_key(key) {
                return Err(CliError::Parse {
                    line,
                    column: key_col,
                    message: format!("invalid key `{key}`"),
                });
            }
            let rest = &content[eq + 1..];
            let value = rest.trim();
            let column = eq + 2 + (rest.len() - rest.trim_start().len());
            if value.is_empty() {
                return Err(CliError::Parse {
                    line,
                    column,
                    message: format!("missing value for `{key}`"),
                });
            }
            let entry = Entry {
                value: value.to_string(),
                line,
                column,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(CliError::Parse {
                    line,
                    column: key_col,
                    message: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
        }
        Ok(Config {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.get(key);
        if e.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        e
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn bad(e: &Entry, key: &str, what: &str) -> CliError {
        CliError::Parse {
            line: e.line,
            column: e.column,
            message: format!("`{key}`: expected {what}, got `{}`", e.value),
        }
    }

    /// Diagnostic anchored at `anchor` (or at the top of the file when absent).
    pub fn missing(&self, key: &str, anchor: Option<&str>, reason: &str) -> CliError {
        let (line, column) = anchor
            .and_then(|a| self.entries.get(a))
            .map(|e| (e.line, e.column))
            .unwrap_or((1, 1));
        CliError::Parse {
            line,
            column,
            message: format!("missing key `{key}`: {reason}"),
        }
    }

    pub fn str_opt(&self, key: &str) -> Option<String> {
        self.entry(key).map(|e| e.value.clone())
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<f64>().map(Some).map_err(|_| Self::bad(e, key, "a number")),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_req(&self, key: &str, anchor: Option<&str>, reason: &str) -> Result<f64, CliError> {
        self.f64_opt(key)?.ok_or_else(|| self.missing(key, anchor, reason))
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Self::bad(e, key, "a nonnegative integer")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Self::bad(e, key, "a nonnegative integer")),
        }
    }

    /// Comma-separated list; empty when the key is absent.
    pub fn list(&self, key: &str) -> Vec<String> {
        match self.entry(key) {
            None => Vec::new(),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| Self::bad(e, key, "a comma-separated list of numbers")),
        }
    }

    /// Keys never looked up, in sorted order.
    pub fn unused(&self) -> Vec<(String, usize)> {
        let used = self.used.borrow();
        self.entries
            .iter()
            .filter(|(k, _)| !used.contains(*k))
            .map(|(k, e)| (k.clone(), e.line))
            .collect()
    }

    /// Canonical text (sorted `key = value` lines), the input of the config hash.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, e) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&e.value);
            s.push('\n');
        }
        s
    }

    pub fn parse_error(&self, key: &str, message: String) -> CliError {
        let (line, column) = self.entries.get(key).map(|e| (e.line, e.column)).unwrap_or((1, 1));
        CliError::Parse { line, column, message }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_comments() {
        let c = Config::parse("# x\ngrid.points = 64  # trailing\nchecks = a, b\n\n").unwrap();
        assert_eq!(c.usize_or("grid.points", 0).unwrap(), 64);
        assert_eq!(c.list("checks"), vec!["a", "b"]);
        assert!(c.unused().is_empty());
    }

    #[test]
    fn reports_line_and_column() {
        let err = Config::parse("a = 1\nbroken line\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, column: 1, .. }), "{err}");
        let c = Config::parse("x.y =   abc\n").unwrap();
        let err = c.f64_opt("x.y").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, column: 9, .. }), "{err}");
    }

    #[test]
    fn rejects_duplicates_and_empty_values() {
        assert!(Config::parse("a = 1\na = 2\n").is_err());
        assert!(Config::parse("a =\n").is_err());
        assert!(Config::parse("a..b = 1\n").is_err());
    }
}

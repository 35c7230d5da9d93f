//! `key = value` settings files and the merged option set.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

pub const KEYS: [&str; 12] = [
    "kernel",
    "variant",
    "k",
    "m",
    "n-angular",
    "n-radial",
    "s",
    "points",
    "mesh",
    "levels",
    "out",
    "formulation",
];

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Raw option values by key. Later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options {
    values: BTreeMap<String, String>,
}

impl Options {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, source: &Path) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected `key = value`", source.display(), i + 1))?;
            let key = normalize(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("{}:{}: unknown key `{key}`", source.display(), i + 1));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Options { values })
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Options::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: Option<&String>) {
        if let Some(v) = value {
            self.values.insert(normalize(key), v.trim().to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("--{key} `{v}`: {e}")))
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, String>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| item.parse::<T>().map_err(|e| format!("--{key} `{item}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_normalizes_keys() {
        let o = Options::parse(
            "# study\nn_angular = 4, 8 ,16\nK=2.0  # wavenumber\n\n",
            Path::new("c.cfg"),
        )
        .unwrap();
        assert_eq!(o.list::<usize>("n-angular").unwrap(), Some(vec![4, 8, 16]));
        assert_eq!(o.get::<f64>("k").unwrap(), Some(2.0));
        assert_eq!(o.get::<f64>("m").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let err = Options::parse("speed = 3", Path::new("c.cfg")).unwrap_err();
        assert!(err.contains("c.cfg:1") && err.contains("speed"));
        assert!(Options::parse("k 3", Path::new("c.cfg")).is_err());
    }

    #[test]
    fn later_values_override() {
        let mut o = Options::parse("k = 1", Path::new("c.cfg")).unwrap();
        o.set("k", Some(&"3".to_string()));
        o.set("m", None);
        assert_eq!(o.get::<f64>("k").unwrap(), Some(3.0));
        assert!(o.get::<f64>("k").is_ok());
        o.set("levels", Some(&"two".to_string()));
        assert!(o.get::<u32>("levels").unwrap_err().contains("--levels"));
    }
}

//! Flat `key = value` configuration files. `#` starts a comment; blank lines
//! are ignored; later keys override earlier ones.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value, got {raw:?}", i + 1)))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("config line {}: empty key", i + 1)));
            }
            map.insert(key.replace('-', "_"), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| Error::Parse(format!("config key {key}: cannot parse {v:?}"))))
            .transpose()
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("config key {key}: cannot parse item {item:?}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let kv = KeyValues::parse("# comment\nn = 100\n\nd-grid=1000, 3000 # trailing\nn=200\n").unwrap();
        assert_eq!(kv.get::<usize>("n").unwrap(), Some(200));
        assert_eq!(kv.get_list::<usize>("d_grid").unwrap(), Some(vec![1000, 3000]));
        assert_eq!(kv.get::<usize>("runs").unwrap(), None);
        assert!(kv.get::<usize>("d_grid").is_err());
        assert!(KeyValues::parse("novalue\n").is_err());
    }
}

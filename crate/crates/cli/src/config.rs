//! `key = value` configuration files. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", idx + 1))?;
            let key = key.trim().replace('_', "-");
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key {key:?}", idx + 1));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| format!("config key {key}: cannot parse {v:?}")))
            .transpose()
    }

    /// Fails on keys outside `known`, so typos do not pass silently.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), String> {
        match self.entries.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(format!("unknown config key {k:?}")),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let c = ConfigFile::parse("# grid\nmodel = spike\nomega=10 # strong\n\nalphas = 1,2\n").unwrap();
        assert_eq!(c.raw("model"), Some("spike"));
        assert_eq!(c.get::<f64>("omega").unwrap(), Some(10.0));
        assert_eq!(c.raw("alphas"), Some("1,2"));
        assert_eq!(c.get::<f64>("p").unwrap(), None);
    }

    #[test]
    fn rejects_malformed() {
        assert!(ConfigFile::parse("model spike").unwrap_err().contains("line 1"));
        assert!(ConfigFile::parse("p=1\np=2").is_err());
        assert!(ConfigFile::parse("p=x").unwrap().get::<usize>("p").is_err());
        assert!(ConfigFile::parse("pp=1").unwrap().check_keys(&["p"]).is_err());
    }
}

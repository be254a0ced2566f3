//! Flat `key = value` run configuration.
//!
//! Every subcommand reads the keys it needs through a [`Keys`] view, which
//! records the resolved value of each key (defaults included) for the
//! config echo and rejects keys the subcommand never asked for.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("{source}:{}: expected `key = value`", k + 1)));
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Config(format!("{source}:{}: bad key `{key}`", k + 1)));
            }
            if cfg.entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("{source}:{}: `{key}` set twice", k + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        RunConfig::parse(&text, &path.display().to_string())
    }

    /// Overrides (or adds) one key.
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    /// Applies a `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{pair}` is not key=value")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Comma-separated list of numbers, echoed the same way.
#[derive(Clone, Debug, PartialEq)]
pub struct NumList(pub Vec<f64>);

impl FromStr for NumList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", x.trim())))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(NumList)
    }
}

impl Display for NumList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

impl NumList {
    /// A single value broadcasts to `d` components.
    pub fn expand(&self, key: &str, d: usize) -> Result<Vec<f64>> {
        match self.0.len() {
            1 => Ok(vec![self.0[0]; d]),
            n if n == d => Ok(self.0.clone()),
            n => Err(CliError::Config(format!("`{key}` has {n} values, the model has {d} terms"))),
        }
    }
}

/// Read-tracking view of a [`RunConfig`] for one subcommand.
pub struct Keys<'a> {
    cfg: &'a RunConfig,
    echo: RefCell<Vec<(String, String)>>,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Keys<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Keys {
            cfg,
            echo: RefCell::new(Vec::new()),
            used: RefCell::new(BTreeSet::new()),
        }
    }

    fn parse<T: FromStr>(&self, key: &str, raw: &str) -> Result<T>
    where
        T::Err: Display,
    {
        raw.parse::<T>()
            .map_err(|e| CliError::Config(format!("`{key} = {raw}`: {e}")))
    }

    fn record(&self, key: &str, value: String) {
        self.used.borrow_mut().insert(key.to_string());
        let mut echo = self.echo.borrow_mut();
        if !echo.iter().any(|(k, _)| k == key) {
            echo.push((key.to_string(), value));
        }
    }

    pub fn value<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match self.cfg.get(key) {
            Some(raw) => self.parse(key, raw)?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.used.borrow_mut().insert(key.to_string());
        match self.cfg.get(key) {
            Some(raw) => {
                let v: T = self.parse(key, raw)?;
                self.record(key, v.to_string());
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn required<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.optional(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    /// Records a value resolved outside the config (e.g. a default model).
    pub fn resolved(&self, key: &str, value: impl Display) {
        self.record(key, value.to_string());
    }

    /// Fails on keys this subcommand did not read; returns the echo.
    pub fn finish(self, command: &str) -> Result<Vec<(String, String)>> {
        let used = self.used.into_inner();
        let unused: Vec<&str> = self
            .cfg
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if !unused.is_empty() {
            return Err(CliError::Config(format!(
                "key(s) not used by `{command}`: {}",
                unused.join(", ")
            )));
        }
        Ok(self.echo.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_junk() {
        let cfg = RunConfig::parse("# run\nseed = 7\n\nmodel = edges + kstar2  # two-star\n", "c").unwrap();
        assert_eq!(cfg.get("seed"), Some("7"));
        assert_eq!(cfg.get("model"), Some("edges + kstar2"));
        assert!(RunConfig::parse("seed 7\n", "c").is_err());
        assert!(RunConfig::parse("a = 1\na = 2\n", "c").is_err());
        assert!(RunConfig::parse("a b = 1\n", "c").is_err());
    }

    #[test]
    fn keys_track_defaults_and_unused_entries() {
        let cfg = RunConfig::parse("seed = 3\nextra = 1\n", "c").unwrap();
        let keys = Keys::new(&cfg);
        assert_eq!(keys.value("seed", 1u64).unwrap(), 3);
        assert_eq!(keys.value("gamma", 0.5f64).unwrap(), 0.5);
        assert_eq!(keys.optional::<u64>("missing").unwrap(), None);
        let err = keys.finish("exchange").unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");

        let cfg = RunConfig::parse("seed = 3\n", "c").unwrap();
        let keys = Keys::new(&cfg);
        keys.value("seed", 1u64).unwrap();
        keys.value("gamma", 0.5f64).unwrap();
        let echo = keys.finish("x").unwrap();
        assert_eq!(echo, vec![("seed".into(), "3".into()), ("gamma".into(), "0.5".into())]);
    }

    #[test]
    fn number_lists_broadcast() {
        let l: NumList = "1, 0.1".parse().unwrap();
        assert_eq!(l.expand("v", 2).unwrap(), vec![1.0, 0.1]);
        assert!(l.expand("v", 3).is_err());
        let one: NumList = "30".parse().unwrap();
        assert_eq!(one.expand("v", 3).unwrap(), vec![30.0; 3]);
        assert_eq!(l.to_string().parse::<NumList>().unwrap(), l);
        assert!("1,x".parse::<NumList>().is_err());
        let cfg = RunConfig::parse("seed = -1\n", "c").unwrap();
        assert!(Keys::new(&cfg).value("seed", 0u64).is_err());
    }
}

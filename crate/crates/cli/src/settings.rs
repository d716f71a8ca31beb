//! Flat `key = value` configuration with flag overrides.
//!
//! Keys are the long flag names. Every resolved value, defaults included,
//! is recorded so the run can be echoed to a manifest that is itself a
//! valid config file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(map)
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> CliResult<T>
where
    T::Err: Display,
{
    raw.trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
}

impl Settings {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::from(e).context(p.display()))?;
                Ok(Self::new(parse_config(&text).map_err(|e| e.context(p.display()))?))
            }
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.optional(key, flag)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let file = self.file.remove(key);
        let v = match (flag, file) {
            (Some(v), _) => Some(v),
            (None, Some(raw)) if raw.is_empty() => None,
            (None, Some(raw)) => Some(parse_value(key, &raw)?),
            (None, None) => None,
        };
        self.record(key, v.as_ref().map(T::to_string).unwrap_or_default());
        Ok(v)
    }

    pub fn list<T>(&mut self, key: &str, flag: Option<Vec<T>>, default: Vec<T>) -> CliResult<Vec<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.optional_list(key, flag)?.unwrap_or(default);
        self.record(key, join(&v));
        Ok(v)
    }

    pub fn optional_list<T>(&mut self, key: &str, flag: Option<Vec<T>>) -> CliResult<Option<Vec<T>>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let file = self.file.remove(key);
        let v = match (flag, file) {
            (Some(v), _) => Some(v),
            (None, Some(raw)) if raw.is_empty() => None,
            (None, Some(raw)) => Some(raw.split(',').map(|x| parse_value(key, x)).collect::<CliResult<_>>()?),
            (None, None) => None,
        };
        self.record(key, v.as_deref().map(join).unwrap_or_default());
        Ok(v)
    }

    /// Reject config keys no parameter consumed.
    pub fn finish(&self) -> CliResult<()> {
        match self.file.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Usage(format!("unknown config key '{k}'"))),
        }
    }

    #[cfg(test)]
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    pub fn manifest(&self, command: &str) -> String {
        let mut out = format!("# isc {} {command}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.resolved {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

pub fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

//! Flag / config-file resolution.
//!
//! A config file holds `key = value` lines using the long flag names
//! (`# comments` and blank lines are ignored). A flag given on the command
//! line always wins over the file. Every resolved value is recorded so it can
//! be written next to the output.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Display};
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Comma-separated list flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|item| !item.is_empty())
            .map(|item| item.parse::<T>().map_err(|e| format!("`{item}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("list is empty; at least one value is required".into());
        }
        Ok(List(items))
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            item.fmt(f)?;
        }
        Ok(())
    }
}

/// Level rule of a delay sweep, written `<base>+sd` (also `<base>+s*d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetRule(pub f64);

impl FromStr for OffsetRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let base = ["+s*d", "+sd", "+s·d"]
            .iter()
            .find_map(|suffix| compact.strip_suffix(suffix))
            .ok_or_else(|| format!("expected `<base>+sd`, got `{s}`"))?;
        base.parse::<f64>()
            .map(OffsetRule)
            .map_err(|e| format!("bad base level `{base}`: {e}"))
    }
}

impl Display for OffsetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+sd", self.0)
    }
}

#[derive(Debug, Default)]
pub struct Resolver {
    file: HashMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut resolver = Self::parse(&text)?;
        resolver
            .resolved
            .insert("config".into(), path.display().to_string());
        Ok(resolver)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Param(format!(
                    "config line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            file.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    /// Flag value, else config-file value, else `None`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value =
            match flag {
                Some(v) => Some(v),
                None => match self.file.get(key) {
                    Some(raw) => Some(raw.parse::<T>().map_err(|e| {
                        CliError::Param(format!("config key `{key}` = `{raw}`: {e}"))
                    })?),
                    None => None,
                },
            };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| CliError::Param(format!("--{key} is required")))
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.get(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Master seed: flag, config file, `FPT_SEED`, then 0.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(seed) = self.get("seed", flag)? {
            return Ok(seed);
        }
        let seed = match std::env::var("FPT_SEED") {
            Ok(raw) => raw
                .trim()
                .parse::<u64>()
                .map_err(|e| CliError::Param(format!("FPT_SEED = `{raw}`: {e}")))?,
            Err(_) => 0,
        };
        self.resolved.insert("seed".into(), seed.to_string());
        Ok(seed)
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

//! Flat `key = value` configuration files.
//!
//! One setting per line, `#` starts a comment, keys use underscores
//! and match the long flag names (`split_day`, `k_star`). Flags override file values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::AppError;

// Config mistakes are usage errors, not data errors.
fn usage(source_name: &str, line: u64, message: String) -> AppError {
    AppError::Usage(format!("{source_name}:{line}: {message}"))
}

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    source_name: String,
    // key -> (value, line)
    entries: BTreeMap<String, (String, u64)>,
}

impl FileConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, AppError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| usage(source_name, line, message);
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            if entries
                .insert(key.clone(), (value.trim().to_string(), line))
                .is_some()
            {
                return Err(err(format!("`{key}` is set twice")));
            }
        }
        Ok(FileConfig {
            source_name: source_name.to_string(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Removes and parses `key`.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>, AppError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((value, line)) = self.entries.remove(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|e| {
            usage(
                &self.source_name,
                line,
                format!("bad value for `{key}`: {e}"),
            )
        })
    }

    /// Fails if any key was never consumed.
    pub fn finish(self) -> Result<(), AppError> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(usage(
                &self.source_name,
                line,
                format!("unknown setting `{key}`"),
            )),
        }
    }
}

/// Comma-separated list, e.g. `0.2,0.4,0.6`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let text = "# run\nsplit_day = 98\nks=1, 5,10 # grid\n\npenalty = 0.6\n";
        let mut c = FileConfig::parse(text, "run.conf").unwrap();
        assert_eq!(c.take::<u32>("split_day").unwrap(), Some(98));
        assert_eq!(
            c.take::<List<usize>>("ks").unwrap(),
            Some(List(vec![1, 5, 10]))
        );
        assert_eq!(c.take::<f64>("penalty").unwrap(), Some(0.6));
        assert_eq!(c.take::<f64>("missing").unwrap(), None);
        c.finish().unwrap();
    }

    #[test]
    fn reports_line_numbers() {
        let err = FileConfig::parse("a = 1\nnonsense\n", "x.conf").unwrap_err();
        assert_eq!(
            err.to_string(),
            "x.conf:2: expected `key = value`, got `nonsense`"
        );
        let mut c = FileConfig::parse("\nsplit_day = soon\n", "x.conf").unwrap();
        assert!(c
            .take::<u32>("split_day")
            .unwrap_err()
            .to_string()
            .starts_with("x.conf:2:"));
        let c = FileConfig::parse("bogus = 1\n", "x.conf").unwrap();
        assert_eq!(
            c.finish().unwrap_err().to_string(),
            "x.conf:1: unknown setting `bogus`"
        );
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        assert!(FileConfig::parse("seed = 1\nseed = 2\n", "x").is_err());
    }
}

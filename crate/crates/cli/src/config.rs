//! TOML run configuration with flag overrides.
//!
//! A config file holds optional top-level `out` and `jobs` keys and one
//! table per subcommand (`[spectrum]`, `[jrate]`, ...). Flags given on the
//! command line replace the matching keys of that table.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Default)]
pub struct ConfigFile {
    table: Map<String, Value>,
    /// Directory that relative paths inside the file are resolved against.
    base: PathBuf,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let parsed: toml::Table =
            toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        let table = match serde_json::to_value(parsed) {
            Ok(Value::Object(m)) => m,
            _ => return Err(usage(format!("config {} is not a table", path.display()))),
        };
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(ConfigFile { table, base })
    }

    fn top(&self, key: &str) -> Option<&Value> {
        self.table.get(key).filter(|v| !v.is_object())
    }

    pub fn out(&self) -> CliResult<Option<PathBuf>> {
        match self.top("out") {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(self.base.join(s))),
            Some(v) => Err(usage(format!("config key 'out' must be a string, got {v}"))),
        }
    }

    pub fn jobs(&self) -> CliResult<Option<usize>> {
        match self.top("jobs") {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| usage(format!("config key 'jobs' must be a positive integer, got {v}"))),
        }
    }

    /// The `[section]` table merged with `flags`; flags win. String values
    /// of the keys in `path_keys` are resolved relative to the config file.
    pub fn merged<A, P>(&self, section: &str, flags: &A, path_keys: &[&str]) -> CliResult<P>
    where
        A: Serialize,
        P: DeserializeOwned,
    {
        let mut merged = match self.table.get(section) {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(v) => return Err(usage(format!("config section [{section}] must be a table, got {v}"))),
        };
        for key in path_keys {
            if let Some(Value::String(s)) = merged.get(*key) {
                let resolved = self.base.join(s).to_string_lossy().into_owned();
                merged.insert(key.to_string(), Value::String(resolved));
            }
        }
        let flags = serde_json::to_value(flags).map_err(|e| usage(e.to_string()))?;
        if let Value::Object(f) = flags {
            for (k, v) in f {
                if !v.is_null() {
                    merged.insert(k, v);
                }
            }
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("[{section}] {e}")))
    }
}

pub fn required<T>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| {
        usage(format!(
            "missing required field '{key}' (flag --{} or config key {key})",
            key.replace('_', "-")
        ))
    })
}

/// Fails with a usage error unless `path` names a readable file.
pub fn readable(path: &Path) -> CliResult<()> {
    std::fs::File::open(path)
        .map(|_| ())
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

pub fn input_error(path: &Path) -> impl FnOnce(zcoupling::Error) -> CliError + '_ {
    move |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    }
}

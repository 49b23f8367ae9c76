//! Optional TOML configuration file, merged under command-line flags.
//!
//! The file holds one table per subcommand; keys match the long flag names
//! (e.g. `nu-max = 3` under `[bounds]`). A flag given on the command line
//! always overrides the corresponding file value. Unknown keys are ignored.

use std::path::Path;

use crate::CliError;

pub struct Section {
    name: String,
    table: toml::Table,
}

impl Section {
    /// Load the named subcommand table from `path`, or an empty table when
    /// no config file was given or the file lacks that section.
    pub fn load(path: Option<&Path>, name: &str) -> Result<Self, CliError> {
        let table = match path {
            None => toml::Table::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|err| {
                    CliError::Usage(format!("cannot read config {}: {err}", path.display()))
                })?;
                let root: toml::Table = text.parse().map_err(|err| {
                    CliError::Usage(format!("cannot parse config {}: {err}", path.display()))
                })?;
                match root.get(name) {
                    None => toml::Table::new(),
                    Some(toml::Value::Table(table)) => table.clone(),
                    Some(other) => {
                        return Err(CliError::Usage(format!(
                            "config section `{name}` must be a table, found a {}",
                            other.type_str()
                        )))
                    }
                }
            }
        };
        Ok(Self {
            name: name.to_string(),
            table,
        })
    }

    fn type_error(&self, key: &str, want: &str, found: &toml::Value) -> CliError {
        CliError::Usage(format!(
            "config key `{key}` in [{}] must be {want}, found a {}",
            self.name,
            found.type_str()
        ))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(found) => Err(self.type_error(key, "a nonnegative integer", found)),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as u64)),
            Some(found) => Err(self.type_error(key, "a nonnegative integer", found)),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(found) => Err(self.type_error(key, "a number", found)),
        }
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(v)) => Ok(Some(*v)),
            Some(found) => Err(self.type_error(key, "a boolean", found)),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(v)) => Ok(Some(v.clone())),
            Some(found) => Err(self.type_error(key, "a string", found)),
        }
    }
}

//! Flat `key = value` configuration files and the output manifest.
//!
//! Every long flag has a config key of the same name (minus the leading
//! dashes); command-line flags override config values. Each invocation
//! writes `manifest_<subcommand>.txt` into the output directory, recording
//! the effective settings plus the subcommand and artifact version — and a
//! manifest is itself a valid `--config` file, so any invocation can be
//! reproduced from its manifest alone.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::errors::CliError;

/// Parsed configuration file: ordered `key = value` pairs. Later
/// occurrences of a key override earlier ones.
#[derive(Default)]
pub struct Settings {
    entries: Vec<(String, String)>,
}

impl Settings {
    pub fn empty() -> Settings {
        Settings::default()
    }

    /// Loads a config file. Blank lines and lines starting with `#` are
    /// skipped; everything else must be `key = value`. A `subcommand` key,
    /// if present, must match the subcommand being run (so a manifest can
    /// only reproduce its own kind of invocation); a `version` key is
    /// ignored.
    pub fn load(path: &Path, subcommand: &str) -> Result<Settings, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::data(path.display(), e))?;
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Data(format!(
                    "{}:{}: expected 'key = value', found '{line}'",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key == "subcommand" {
                if value != subcommand {
                    return Err(CliError::Data(format!(
                        "{}: config is for subcommand '{value}', not '{subcommand}'",
                        path.display()
                    )));
                }
                continue;
            }
            if key == "version" {
                continue;
            }
            entries.push((key, value));
        }
        Ok(Settings { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// All distinct keys, in first-appearance order (for typo detection).
    pub fn keys(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for (k, _) in &self.entries {
            if !seen.contains(&k.as_str()) {
                seen.push(k);
            }
        }
        seen
    }
}

/// Effective string setting: the flag if given, else the config value.
pub fn merged_str(flag: &Option<String>, cfg: &Settings, key: &str) -> Option<String> {
    flag.clone().or_else(|| cfg.get(key).map(str::to_string))
}

/// Effective parsed setting: the flag if given, else the config value
/// parsed as `T` (a malformed config value is a data error).
pub fn merged<T: FromStr>(
    flag: Option<T>,
    cfg: &Settings,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| CliError::Data(format!("config key '{key}': {e}"))),
    }
}

/// Unwraps a setting that must be present after merging, as a usage error
/// naming both the flag and the config key.
pub fn require<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{key} (or '{key}' in --config)")))
}

/// Effective settings of one invocation, written as the manifest.
pub struct Manifest {
    subcommand: String,
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Manifest {
        Manifest { subcommand: subcommand.to_string(), lines: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl Display>) -> &mut Self {
        if let Some(v) = value {
            self.set(key, v);
        }
        self
    }

    /// Writes `manifest_<subcommand>.txt` under `out_dir`.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, CliError> {
        let mut text = String::new();
        text.push_str(&format!("subcommand = {}\n", self.subcommand));
        text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        for (key, value) in &self.lines {
            text.push_str(&format!("{key} = {value}\n"));
        }
        let path = out_dir.join(format!("manifest_{}.txt", self.subcommand));
        fs::write(&path, text).map_err(|e| CliError::data(path.display(), e))?;
        Ok(path)
    }
}

/// Creates the output directory (and parents) if needed.
pub fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(dir.display(), e))
}

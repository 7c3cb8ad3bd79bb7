//! Flag resolution: flags > config file section > config file top level >
//! `SCRAMBLAB_SEED` (seed only) > built-in defaults.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "SCRAMBLAB_SEED";

/// Keys that apply to the whole invocation rather than one subcommand.
pub const GLOBAL_KEYS: [&str; 2] = ["threads", "out-dir"];

/// Parsed TOML configuration: top-level scalars plus one table per subcommand.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    top: Map<String, Value>,
    sections: Map<String, Value>,
}

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::config(format!("config file: {e}")))?;
        let json = serde_json::to_value(table).map_err(|e| CliError::config(e.to_string()))?;
        let Value::Object(obj) = json else {
            return Err(CliError::config("config file must be a table"));
        };
        let mut cfg = ConfigFile::default();
        for (k, v) in obj {
            match v {
                Value::Object(inner) => {
                    let inner: Map<String, Value> = inner.into_iter().map(|(k, v)| (normalize(&k), v)).collect();
                    cfg.sections.insert(normalize(&k), Value::Object(inner));
                }
                other => {
                    cfg.top.insert(normalize(&k), other);
                }
            }
        }
        Ok(cfg)
    }

    /// Top-level value for `key`.
    pub fn global(&self, key: &str) -> Option<&Value> {
        self.top.get(key)
    }

    fn section(&self, cmd: &str) -> Option<&Map<String, Value>> {
        self.sections.get(cmd).and_then(Value::as_object)
    }

    /// Errors on sections or top-level keys that no subcommand understands.
    pub fn check_known(&self, known: &[(&str, Vec<String>)]) -> CliResult<()> {
        for name in self.sections.keys() {
            if !known.iter().any(|(c, _)| c == name) {
                return Err(CliError::config(format!("config file: unknown section [{name}]")));
            }
        }
        for key in self.top.keys() {
            let ok = GLOBAL_KEYS.contains(&key.as_str())
                || known.iter().any(|(_, keys)| keys.iter().any(|k| k == key));
            if !ok {
                return Err(CliError::config(format!("config file: unknown key '{key}'")));
            }
        }
        Ok(())
    }
}

/// Field names of an all-`Option` flag struct.
pub fn field_names<A: Serialize + Default>() -> Vec<String> {
    match serde_json::to_value(A::default()) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Fills unset flags from the config file and the seed environment variable.
pub fn resolve<A>(flags: &A, cmd: &str, cfg: Option<&ConfigFile>) -> CliResult<A>
where
    A: Serialize + DeserializeOwned,
{
    let Value::Object(mut merged) = serde_json::to_value(flags).map_err(|e| CliError::config(e.to_string()))? else {
        return Err(CliError::config("flag struct must serialize to an object"));
    };
    if let Some(section) = cfg.and_then(|c| c.section(cmd)) {
        for k in section.keys() {
            if !merged.contains_key(k) {
                return Err(CliError::config(format!("config file: [{cmd}] has no key '{k}'")));
            }
        }
    }
    for (key, slot) in merged.iter_mut() {
        if !slot.is_null() {
            continue;
        }
        let from_cfg = cfg.and_then(|c| c.section(cmd).and_then(|s| s.get(key)).or_else(|| c.global(key)));
        if let Some(v) = from_cfg {
            *slot = v.clone();
        } else if key == "seed" {
            if let Ok(raw) = std::env::var(SEED_ENV) {
                let seed: u64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("{SEED_ENV} must be an unsigned integer, got '{raw}'")))?;
                *slot = Value::from(seed);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("{cmd}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    struct Flags {
        n: Option<usize>,
        sample_count: Option<usize>,
        seed: Option<u64>,
    }

    #[test]
    fn precedence() {
        let cfg = ConfigFile::parse("seed = 5\nsample_count = 9\n[demo]\nn = 3\n").unwrap();
        let flags = Flags {
            n: Some(7),
            ..Default::default()
        };
        let r = resolve(&flags, "demo", Some(&cfg)).unwrap();
        assert_eq!(r, Flags { n: Some(7), sample_count: Some(9), seed: Some(5) });
        let r = resolve(&Flags::default(), "demo", Some(&cfg)).unwrap();
        assert_eq!(r.n, Some(3));
        let r = resolve(&Flags::default(), "other", Some(&cfg)).unwrap();
        assert_eq!(r.n, None);
    }

    #[test]
    fn unknown_keys_rejected() {
        let cfg = ConfigFile::parse("[demo]\nbogus = 1\n").unwrap();
        assert!(resolve(&Flags::default(), "demo", Some(&cfg)).is_err());
        let cfg = ConfigFile::parse("bogus = 1\n").unwrap();
        let known = vec![("demo", field_names::<Flags>())];
        assert!(cfg.check_known(&known).is_err());
        let cfg = ConfigFile::parse("threads = 2\n[demo]\nn = 1\n").unwrap();
        assert!(cfg.check_known(&known).is_ok());
        assert!(ConfigFile::parse("not toml [").is_err());
    }

    #[test]
    fn type_errors_are_config_errors() {
        let cfg = ConfigFile::parse("[demo]\nn = \"x\"\n").unwrap();
        let err = resolve(&Flags::default(), "demo", Some(&cfg)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SEED_ENV: &str = "MINIMT_SEED";

/// Every recognized key with its built-in default. An empty default means
/// the value depends on the system being trained.
const KEYS: &[(&str, &str)] = &[
    ("seed", "0"),
    ("max_len", "80"),
    ("ibm1_iterations", "10"),
    ("max_phrase_len", "7"),
    ("lm_order", "3"),
    ("beam_size", "100"),
    ("distortion_limit", "6"),
    ("ttable_limit", "20"),
    ("w_tm", "1,1,1,1"),
    ("w_lm", "1"),
    ("w_distortion", "0.6"),
    ("w_word_penalty", "-1"),
    ("oov_penalty", "-10"),
    ("lr", ""),
    ("epochs", ""),
    ("batch_size", ""),
    ("hidden", ""),
    ("embed", ""),
    ("attention", ""),
    ("optimizer", ""),
    ("nmt_max_len", ""),
    ("clip_norm", ""),
    ("init_scale", ""),
    ("min_count", ""),
    ("teacher_forcing", ""),
    ("ffnn_lr", "0.001"),
    ("ffnn_epochs", "100"),
    ("ffnn_batch", "128"),
    ("ffnn_max_len", "40"),
    ("translate_max_len", "80"),
    ("eval", "test"),
    ("test_ratio", "0.1"),
    ("systems", "smt,cnmt,wnmt-na,wnmt-a"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Origin {
    Default,
    File,
    Flag,
}

/// Layered configuration: built-in defaults, then a `key=value` file, then
/// command-line overrides.
#[derive(Clone, Debug)]
pub struct Settings {
    values: BTreeMap<String, (String, Origin)>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { values: KEYS.iter().map(|(k, v)| (k.to_string(), (v.to_string(), Origin::Default))).collect() }
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        let valid: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
        Err(Error::Config(format!("unknown setting `{key}` (valid: {})", valid.join(", "))))
    }
}

impl Settings {
    pub fn layered(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            s.apply_text(&text, &path.display().to_string())?;
        }
        for (k, v) in overrides {
            s.set(k, v)?;
        }
        Ok(s)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, path: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(path, i + 1, "expected key=value"))?;
            let k = k.trim();
            check_key(k).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            self.values.insert(k.to_string(), (v.trim().to_string(), Origin::File));
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> Result<()> {
        check_key(key)?;
        self.values.insert(key.to_string(), (value.to_string(), Origin::Flag));
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map_or("", |(v, _)| v.as_str())
    }

    /// Parsed value, or `None` when the key is left to the system default.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        debug_assert!(check_key(key).is_ok(), "{key}");
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse().map(Some).map_err(|e| Error::Config(format!("setting `{key}` = `{raw}`: {e}")))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list_f64(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Config(format!("setting `{key}`: {e}"))))
            .collect()
    }

    /// Non-empty values, for manifests.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.values.iter().filter(|(_, (v, _))| !v.is_empty()).map(|(k, (v, _))| (k.clone(), v.clone())).collect()
    }

    fn seed_is_default(&self) -> bool {
        self.values.get("seed").is_none_or(|(_, o)| *o == Origin::Default)
    }
}

/// Seed from flags or config file; otherwise `MINIMT_SEED`; otherwise 0.
pub fn resolve_seed(settings: &mut Settings) -> Result<u64> {
    if settings.seed_is_default() {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed: u64 = v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}=`{v}` is not an integer")))?;
            settings.values.insert("seed".into(), (seed.to_string(), Origin::Default));
            return Ok(seed);
        }
    }
    settings.get_or("seed", 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_apply_in_order() {
        let mut s = Settings::default();
        assert_eq!(s.get::<usize>("beam_size").unwrap(), Some(100));
        s.apply_text("beam_size = 10 # small\n\nlr=0.01\n", "cfg").unwrap();
        s.set("beam_size", 5).unwrap();
        assert_eq!(s.get::<usize>("beam_size").unwrap(), Some(5));
        assert_eq!(s.get::<f64>("lr").unwrap(), Some(0.01));
        assert_eq!(s.get::<usize>("epochs").unwrap(), None);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let mut s = Settings::default();
        assert!(matches!(s.set("beam", 3), Err(Error::Config(_))));
        assert!(matches!(s.apply_text("nope=1", "cfg"), Err(Error::Parse { line: 1, .. })));
        s.set("beam_size", "many").unwrap();
        assert!(s.get::<usize>("beam_size").is_err());
    }

    #[test]
    fn explicit_seed_wins() {
        let mut s = Settings::default();
        s.set("seed", 42).unwrap();
        assert_eq!(resolve_seed(&mut s).unwrap(), 42);
    }
}

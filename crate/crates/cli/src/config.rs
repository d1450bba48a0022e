//! Flat `key = value` configuration with command-line overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

/// A problem with one configuration key.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{source_name}:{line}: {message}")]
    Syntax { source_name: String, line: usize, message: String },
    #[error("invalid configuration:{}", render(.0))]
    Fields(Vec<FieldError>),
}

fn render(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("\n  field `{}`: {}", e.field, e.message)).collect()
}

/// Experiment name, raw parameters, output path and seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed: u64,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_flat(text: &str, source_name: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax {
            source_name: source_name.to_string(),
            line: idx + 1,
            message,
        };
        let (k, v) = split_pair(line).map_err(syntax)?;
        if map.insert(k.clone(), v).is_some() {
            return Err(syntax(format!("duplicate key `{k}`")));
        }
    }
    Ok(map)
}

fn split_pair(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected `key = value`, got `{s}`"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("invalid key `{k}`"));
    }
    if v.is_empty() {
        return Err(format!("missing value for `{k}`"));
    }
    Ok((k.to_string(), v.to_string()))
}

impl ExperimentConfig {
    /// Reads the optional config file, then applies `key=value` overrides, which win.
    pub fn load(experiment: &str, file: Option<&Path>, overrides: &[String], out: PathBuf) -> Result<Self, ConfigError> {
        let mut params = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })?;
                parse_flat(&text, &path.display().to_string())?
            }
            None => BTreeMap::new(),
        };
        for (i, o) in overrides.iter().enumerate() {
            let (k, v) = split_pair(o).map_err(|message| ConfigError::Syntax {
                source_name: "--set".into(),
                line: i + 1,
                message,
            })?;
            params.insert(k, v);
        }
        let seed = match params.remove("seed") {
            None => 0,
            Some(s) => s.parse::<u64>().map_err(|_| {
                ConfigError::Fields(vec![FieldError {
                    field: "seed".into(),
                    message: format!("expected a non-negative integer, got `{s}`"),
                }])
            })?,
        };
        Ok(Self {
            experiment: experiment.to_string(),
            params,
            out,
            seed,
        })
    }
}

/// Real number, also accepting multiples of π such as `pi/3`, `2*pi/5` or `-pi`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let value = if let Some(idx) = t.find("pi") {
        let coef = t[..idx].trim().trim_end_matches('*').trim();
        let coef = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| format!("cannot parse `{s}` as a number"))?,
        };
        let rest = t[idx + 2..].trim();
        let den = match rest.strip_prefix('/') {
            None if rest.is_empty() => 1.0,
            Some(d) => d.trim().parse::<f64>().map_err(|_| format!("cannot parse `{s}` as a number"))?,
            None => return Err(format!("cannot parse `{s}` as a number")),
        };
        coef * std::f64::consts::PI / den
    } else {
        t.parse::<f64>().map_err(|_| format!("cannot parse `{s}` as a number"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|x| x.is_empty()) {
        return Err(format!("empty entry in list `{s}`"));
    }
    items.into_iter().map(item).collect()
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

/// Typed access to the parameter map, collecting every field error before failing.
pub struct Params<'a> {
    raw: &'a BTreeMap<String, String>,
    used: BTreeSet<String>,
    errors: Vec<FieldError>,
    resolved: BTreeMap<String, Value>,
}

impl<'a> Params<'a> {
    pub fn new(raw: &'a BTreeMap<String, String>) -> Self {
        Self {
            raw,
            used: BTreeSet::new(),
            errors: vec![],
            resolved: BTreeMap::new(),
        }
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        if !self.errors.iter().any(|e| e.field == key) {
            self.errors.push(FieldError {
                field: key.to_string(),
                message: message.into(),
            });
        }
    }

    fn get<T: Clone>(
        &mut self,
        key: &str,
        default: Option<T>,
        parse: impl Fn(&str) -> Result<T, String>,
        echo: impl Fn(&T) -> Value,
    ) -> Option<T> {
        self.used.insert(key.to_string());
        let value = match self.raw.get(key) {
            Some(s) => match parse(s) {
                Ok(v) => Some(v),
                Err(m) => {
                    self.fail(key, m);
                    None
                }
            },
            None => {
                if default.is_none() {
                    self.fail(key, "required key is missing");
                }
                default
            }
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), echo(v));
        }
        value
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    pub fn real(&mut self, key: &str, default: Option<f64>) -> f64 {
        self.get(key, default, parse_real, |v| json!(v)).unwrap_or(f64::NAN)
    }

    pub fn reals(&mut self, key: &str, default: Option<&[f64]>) -> Vec<f64> {
        self.get(key, default.map(<[f64]>::to_vec), |s| parse_list(s, parse_real), |v| json!(v))
            .unwrap_or_default()
    }

    pub fn int(&mut self, key: &str, default: Option<usize>) -> usize {
        self.get(key, default, parse_int, |v| json!(v)).unwrap_or(0)
    }

    pub fn ints(&mut self, key: &str, default: Option<&[usize]>) -> Vec<usize> {
        self.get(key, default.map(<[usize]>::to_vec), |s| parse_list(s, parse_int), |v| json!(v))
            .unwrap_or_default()
    }

    pub fn boolean(&mut self, key: &str, default: Option<bool>) -> bool {
        let parse = |s: &str| match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(format!("expected true or false, got `{s}`")),
        };
        self.get(key, default, parse, |v| json!(v)).unwrap_or(false)
    }

    pub fn choice(&mut self, key: &str, options: &[&str], default: Option<&str>) -> String {
        let parse = |s: &str| {
            let t = s.trim().to_ascii_lowercase();
            if options.contains(&t.as_str()) {
                Ok(t)
            } else {
                Err(format!("expected one of {}, got `{s}`", options.join(", ")))
            }
        };
        self.get(key, default.map(str::to_string), parse, |v| json!(v)).unwrap_or_default()
    }

    pub fn path(&mut self, key: &str) -> PathBuf {
        self.get(key, None, |s| Ok(PathBuf::from(s)), |v| json!(v.display().to_string()))
            .unwrap_or_default()
    }

    /// Records `message` against `key` when `ok` is false and the key has no earlier error.
    pub fn check(&mut self, key: &str, ok: bool, message: impl Into<String>) {
        if !ok {
            self.fail(key, message);
        }
    }

    /// Reports unknown keys and all collected errors; returns the resolved parameters.
    pub fn finish(mut self) -> Result<BTreeMap<String, Value>, ConfigError> {
        let unknown: Vec<String> = self.raw.keys().filter(|k| !self.used.contains(*k)).cloned().collect();
        for k in unknown {
            self.fail(&k, "unknown key for this experiment");
        }
        if self.errors.is_empty() {
            Ok(self.resolved)
        } else {
            Err(ConfigError::Fields(self.errors))
        }
    }
}

//! Experiment spec files.
//!
//! A spec file is TOML with one table per experiment. Keys inside a table are
//! flat dotted names (`ppp.rate_lambda = 1`); nested tables are flattened to
//! the same names. Every key must be consumed by the experiment kind, so
//! misspelled or irrelevant keys are rejected.

use std::cell::RefCell;
use std::collections::BTreeSet;

use crate::error::Error;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Survival,
    Fg,
    Asymptotic,
    BoundScan,
    Repulsion,
    Continuity,
    Monotonicity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Survival,
        ExperimentKind::Fg,
        ExperimentKind::Asymptotic,
        ExperimentKind::BoundScan,
        ExperimentKind::Repulsion,
        ExperimentKind::Continuity,
        ExperimentKind::Monotonicity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Survival => "survival",
            ExperimentKind::Fg => "fg",
            ExperimentKind::Asymptotic => "asymptotic",
            ExperimentKind::BoundScan => "bound_scan",
            ExperimentKind::Repulsion => "repulsion",
            ExperimentKind::Continuity => "continuity",
            ExperimentKind::Monotonicity => "monotonicity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Flattened key/value parameters of one experiment, with use tracking.
#[derive(Debug, Clone)]
pub struct Params {
    values: Vec<(String, toml::Value)>,
    used: RefCell<BTreeSet<String>>,
}

fn cfg(field: &str, message: impl Into<String>) -> CliError {
    CliError::from(Error::Config {
        field: field.to_string(),
        message: message.into(),
    })
}

impl Params {
    fn get(&self, key: &str) -> Option<&toml::Value> {
        let v = self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v);
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.iter().any(|(k, _)| k == key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(cfg(key, format!("expected a number, got {}", other.type_str()))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.opt_f64(key)?
            .ok_or_else(|| cfg(key, "required key is missing"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(toml::Value::Float(f)) if *f >= 0.0 && f.fract() == 0.0 && *f < 1.8e19 => {
                Ok(Some(*f as u64))
            }
            Some(other) => Err(cfg(key, format!("expected a non-negative integer, got {other}"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.opt_u64(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(cfg(key, format!("expected a boolean, got {}", other.type_str()))),
        }
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(cfg(key, format!("expected a string, got {}", other.type_str()))),
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> Result<String, CliError> {
        Ok(self.opt_str(key)?.unwrap_or_else(|| default.to_string()))
    }

    pub fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(f) => Ok(*f),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    other => Err(cfg(key, format!("expected numbers, got {}", other.type_str()))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(other) => Err(cfg(key, format!("expected a list, got {}", other.type_str()))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        match self.opt_f64_list(key)? {
            Some(v) if !v.is_empty() => Ok(v),
            Some(_) => Err(cfg(key, "list must not be empty")),
            None => Err(cfg(key, "required key is missing")),
        }
    }

    /// Fails on the first key that no accessor asked for.
    pub fn finish(&self, kind: ExperimentKind) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.values.iter().find(|(k, _)| !used.contains(k)) {
            None => Ok(()),
            Some((k, _)) => Err(cfg(k, format!("key not used by kind `{}`", kind.as_str()))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub params: Params,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

/// Parses a spec file into experiments, in file order.
pub fn parse_spec(text: &str) -> Result<Vec<ExperimentSpec>, CliError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        CliError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut specs = Vec::new();
    for (name, value) in &doc {
        let toml::Value::Table(table) = value else {
            return Err(cfg(name, "top-level keys must be experiment tables"));
        };
        let mut values = Vec::new();
        flatten("", table, &mut values);
        let params = Params {
            values,
            used: RefCell::new(BTreeSet::new()),
        };
        let kind_str = params
            .opt_str("kind")?
            .ok_or_else(|| cfg("kind", format!("experiment `{name}` has no kind")))?;
        let kind = ExperimentKind::parse(&kind_str)
            .ok_or_else(|| cfg("kind", format!("unknown experiment kind `{kind_str}`")))?;
        specs.push(ExperimentSpec {
            name: name.clone(),
            kind,
            params,
        });
    }
    if specs.is_empty() {
        return Err(cfg("kind", "spec file defines no experiments"));
    }
    Ok(specs)
}

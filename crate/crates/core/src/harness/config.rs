//! `key = value` configuration files.
//!
//! One pair per line; `#` starts a comment; keys are case-sensitive and
//! `_` is read as `-`, so `base_seed` and `base-seed` are the same key.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::{ExperimentConfig, ExperimentKind, Relaxation};
use crate::error::{Error, Result};
use crate::graph::ModelParams;
use crate::sdp::SolverOptions;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn parse_key_values(text: &str) -> Result<ConfigMap> {
    let mut entries = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = normalize(key);
        if key.is_empty() {
            return Err(Error::Parse {
                line: k + 1,
                msg: "empty key".into(),
            });
        }
        if entries.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(ConfigMap { entries })
}

impl ConfigMap {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::invalid(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::invalid(format!("config key '{key}' is required")))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize(key), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        ExperimentConfig::from_map(&parse_key_values(text)?)
    }
}

const EXPERIMENT_KEYS: &[&str] = &[
    "kind", "n", "alpha1", "alpha2", "beta", "trials", "seed", "relaxation", "delta",
    "epsilon", "tol", "tol-psd", "max-iter", "rho", "anderson", "lambda-grid", "cert-tol",
    "out-dir",
];

impl ExperimentConfig {
    /// Keys: `kind n alpha1 alpha2 beta trials seed relaxation delta epsilon
    /// tol tol-psd max-iter rho anderson lambda-grid cert-tol out-dir`.
    /// `lambda-grid` is `auto` or a comma-separated list.
    pub fn from_map(m: &ConfigMap) -> Result<Self> {
        if let Some(k) = m.keys().find(|k| !EXPERIMENT_KEYS.contains(k)) {
            return Err(Error::invalid(format!("unknown config key '{k}'")));
        }
        let kind: ExperimentKind = m.require("kind")?;
        let params = ModelParams::new(
            m.require("n")?,
            m.require("alpha1")?,
            m.require("alpha2")?,
            m.require("beta")?,
        )?;
        let mut cfg = ExperimentConfig::new(
            kind,
            params,
            m.get("trials")?.unwrap_or(20),
            m.get("seed")?.unwrap_or(0),
        );
        if let Some(r) = m.get::<Relaxation>("relaxation")? {
            cfg.relaxation = r;
        }
        match (m.get::<f64>("delta")?, m.get::<f64>("epsilon")?) {
            (Some(d), Some(e)) => cfg.events = Some((d, e)),
            (None, None) => {}
            _ => return Err(Error::invalid("delta and epsilon go together")),
        }
        let mut solver = SolverOptions::for_order(params.n);
        let mut custom = false;
        if let Some(t) = m.get("tol")? {
            solver.tol_feas = t;
            custom = true;
        }
        if let Some(t) = m.get("tol-psd")? {
            solver.tol_psd = t;
            custom = true;
        }
        if let Some(t) = m.get("max-iter")? {
            solver.max_iter = t;
            custom = true;
        }
        if let Some(r) = m.get("rho")? {
            solver.rho = Some(r);
            custom = true;
        }
        if let Some(a) = m.get("anderson")? {
            solver.anderson_memory = a;
            custom = true;
        }
        if custom {
            cfg.solver = Some(solver);
        }
        if let Some(g) = m.raw("lambda-grid") {
            cfg.lambda_grid = parse_grid(g)?;
        }
        if let Some(t) = m.get("cert-tol")? {
            cfg.certificate_tol = t;
        }
        if let Some(p) = m.raw("out-dir") {
            cfg.output = Some(p.into());
        }
        Ok(cfg)
    }
}

/// `auto` or comma-separated reals.
pub fn parse_grid(s: &str) -> Result<Option<Vec<f64>>> {
    if s.trim() == "auto" {
        return Ok(None);
    }
    let grid = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad lambda grid entry '{v}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    Ok(Some(grid))
}

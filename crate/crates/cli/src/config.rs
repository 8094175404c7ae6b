//! Scenario configuration files.
//!
//! Parameter keys ending in `_hz` are linear frequencies and are converted
//! to angular units on access; keys ending in `_s` are times in seconds.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Scalar(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Sweep {
    pub fn linear(parameter: &str, start: f64, stop: f64, points: usize) -> Self {
        Self { parameter: parameter.into(), start, stop, points, log: false }
    }

    pub fn logarithmic(parameter: &str, start: f64, stop: f64, points: usize) -> Self {
        Self { log: true, ..Self::linear(parameter, start, stop, points) }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::validation(format!("sweep `{}`: {msg}", self.parameter)));
        if self.points == 0 {
            return bad("empty range (points = 0)".into());
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return bad("non-finite bounds".into());
        }
        if self.points > 1 && self.start == self.stop {
            return bad(format!("empty range [{}, {}] with {} points", self.start, self.stop, self.points));
        }
        if self.log && (self.start <= 0.0 || self.stop <= 0.0) {
            return bad("logarithmic sweep needs positive bounds".into());
        }
        Ok(())
    }

    /// Grid values in config units.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / n;
                if self.log {
                    (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub dims: BTreeMap<String, usize>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ScenarioConfig {
    pub fn named(scenario: &str) -> Self {
        Self {
            scenario: scenario.into(),
            params: BTreeMap::new(),
            sweep: None,
            dims: BTreeMap::new(),
            tolerances: None,
            seed: None,
            outputs: Outputs::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A config merged over its preset's defaults and validated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub scenario: String,
    pub params: BTreeMap<String, Param>,
    pub sweep: Option<Sweep>,
    pub dims: BTreeMap<String, usize>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Resolved {
    /// Merges `user` over `defaults`; keys absent from the defaults are rejected.
    pub fn merge(defaults: &ScenarioConfig, user: &ScenarioConfig) -> Result<Self, CliError> {
        let mut params = defaults.params.clone();
        for (k, v) in &user.params {
            match params.get(k) {
                None => {
                    let known: Vec<&str> = defaults.params.keys().map(String::as_str).collect();
                    return Err(CliError::validation(format!(
                        "unknown parameter `{k}` for scenario {} (known: {})",
                        defaults.scenario,
                        known.join(", ")
                    )));
                }
                Some(Param::Scalar(_)) if matches!(v, Param::List(_)) => {
                    return Err(CliError::validation(format!("parameter `{k}` must be a scalar")));
                }
                _ => {
                    params.insert(k.clone(), v.clone());
                }
            }
        }
        for (k, v) in &params {
            let finite = match v {
                Param::Scalar(x) => x.is_finite(),
                Param::List(xs) => !xs.is_empty() && xs.iter().all(|x| x.is_finite()),
            };
            if !finite {
                return Err(CliError::validation(format!("parameter `{k}` must be finite and nonempty")));
            }
        }
        let mut dims = defaults.dims.clone();
        for (k, &v) in &user.dims {
            if !dims.contains_key(k) {
                return Err(CliError::validation(format!("unknown dimension `{k}` for scenario {}", defaults.scenario)));
            }
            if v == 0 {
                return Err(CliError::validation(format!("dimension `{k}` must be positive")));
            }
            dims.insert(k.clone(), v);
        }
        let sweep = match (&defaults.sweep, &user.sweep) {
            (_, None) => defaults.sweep.clone(),
            (Some(d), Some(u)) if d.parameter == u.parameter => Some(u.clone()),
            (Some(d), Some(u)) => {
                return Err(CliError::validation(format!(
                    "scenario {} sweeps `{}`, not `{}`",
                    defaults.scenario, d.parameter, u.parameter
                )))
            }
            (None, Some(u)) => {
                return Err(CliError::validation(format!(
                    "scenario {} has no sweep axis (got `{}`)",
                    defaults.scenario, u.parameter
                )))
            }
        };
        if let Some(s) = &sweep {
            s.validate()?;
        }
        let tolerances = user.tolerances.or(defaults.tolerances).unwrap_or_default();
        if !(tolerances.rtol > 0.0 && tolerances.atol > 0.0) {
            return Err(CliError::validation("tolerances must be positive"));
        }
        Ok(Self {
            scenario: defaults.scenario.clone(),
            params,
            sweep,
            dims,
            tolerances,
            seed: user.seed.or(defaults.seed).unwrap_or(0),
        })
    }

    fn raw(&self, key: &str) -> Result<&Param, CliError> {
        self.params.get(key).ok_or_else(|| CliError::validation(format!("missing parameter `{key}`")))
    }

    /// Scalar in config units.
    pub fn value(&self, key: &str) -> Result<f64, CliError> {
        match self.raw(key)? {
            Param::Scalar(x) => Ok(*x),
            Param::List(_) => Err(CliError::validation(format!("parameter `{key}` must be a scalar"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        Ok(match self.raw(key)? {
            Param::Scalar(x) => vec![*x],
            Param::List(xs) => xs.clone(),
        })
    }

    /// Angular frequency from a `_hz` key.
    pub fn omega(&self, key: &str) -> Result<f64, CliError> {
        Ok(2.0 * PI * self.value(key)?)
    }

    pub fn omegas(&self, key: &str) -> Result<Vec<f64>, CliError> {
        Ok(self.list(key)?.into_iter().map(|f| 2.0 * PI * f).collect())
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.value(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::validation(format!("parameter `{key}` must be > 0, got {v}")))
        }
    }

    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        let v = self.value(key)?;
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::validation(format!("parameter `{key}` must be a positive integer, got {v}")))
        }
    }

    pub fn dim(&self, key: &str) -> Result<usize, CliError> {
        self.dims.get(key).copied().ok_or_else(|| CliError::validation(format!("missing dimension `{key}`")))
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>, CliError> {
        self.sweep
            .as_ref()
            .map(Sweep::values)
            .ok_or_else(|| CliError::validation(format!("scenario {} has no sweep", self.scenario)))
    }

    /// Canonical JSON used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("resolved config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> ScenarioConfig {
        let mut d = ScenarioConfig::named("demo");
        d.params.insert("omega_hz".into(), Param::Scalar(1.0));
        d.params.insert("ratios".into(), Param::List(vec![1.0, 2.0]));
        d.dims.insert("fock".into(), 10);
        d.sweep = Some(Sweep::linear("x", 0.0, 1.0, 11));
        d
    }

    #[test]
    fn merge_overrides_and_rejects_unknown_keys() {
        let mut u = ScenarioConfig::named("demo");
        u.params.insert("omega_hz".into(), Param::Scalar(2.0));
        let r = Resolved::merge(&defaults(), &u).unwrap();
        assert_eq!(r.omega("omega_hz").unwrap(), 4.0 * PI);
        assert_eq!(r.list("ratios").unwrap(), vec![1.0, 2.0]);
        u.params.insert("nope".into(), Param::Scalar(1.0));
        assert!(Resolved::merge(&defaults(), &u).is_err());
    }

    #[test]
    fn empty_and_mismatched_sweeps_are_rejected() {
        let mut u = ScenarioConfig::named("demo");
        u.sweep = Some(Sweep::linear("x", 1.0, 1.0, 5));
        assert!(Resolved::merge(&defaults(), &u).is_err());
        u.sweep = Some(Sweep::linear("x", 0.0, 1.0, 0));
        assert!(Resolved::merge(&defaults(), &u).is_err());
        u.sweep = Some(Sweep::linear("y", 0.0, 1.0, 3));
        assert!(Resolved::merge(&defaults(), &u).is_err());
        u.sweep = Some(Sweep::linear("x", 0.0, 2.0, 3));
        assert_eq!(Resolved::merge(&defaults(), &u).unwrap().sweep_values().unwrap(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn log_sweep_endpoints() {
        let v = Sweep::logarithmic("k", 1e-3, 1e-1, 3).values();
        assert!((v[1] - 1e-2).abs() < 1e-15 && (v[2] - 1e-1).abs() < 1e-15);
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"scenario":"demo","params":{"omega_hz":3,"ratios":[1,5]},"seed":4}"#;
        let c = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.params["ratios"], Param::List(vec![1.0, 5.0]));
        assert!(ScenarioConfig::from_json(r#"{"scenario":"demo","bogus":1}"#).is_err());
    }
}

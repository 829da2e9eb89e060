//! Per-command experiment configs. A config file is a JSON object whose keys
//! override the command's defaults; `--seed` and `--tol` override both.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use varlorentz::{BallDomain, ExponentField, RadialProfile};

use crate::error::{as_config, CliError};

/// Radial profile shapes accepted in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `1 - r / radius`.
    Tent,
    /// Piecewise linear through `(radii[i], values[i])`, zero past the last knot.
    Knots { radii: Vec<f64>, values: Vec<f64> },
    /// `values[i]` on the shell between the balls of measure `measures[i - 1]`
    /// and `measures[i]`, zero outside the last ball.
    Steps { measures: Vec<f64>, values: Vec<f64> },
    /// `value` on `lo <= r < hi`.
    Annulus { lo: f64, hi: f64, value: f64 },
    /// Plateau-tent bump compressed to support radius `1 / n`.
    Bump { n: f64, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub dim: usize,
    pub radius: f64,
    pub shape: Shape,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { dim: 2, radius: 1.0, shape: Shape::Tent }
    }
}

impl ProfileConfig {
    pub fn build(&self) -> Result<RadialProfile, CliError> {
        let domain = BallDomain::new(self.dim, self.radius).map_err(as_config)?;
        let profile = match &self.shape {
            Shape::Tent => Ok(RadialProfile::tent(domain)),
            Shape::Knots { radii, values } => RadialProfile::supported(domain, radii.clone(), values.clone()),
            Shape::Steps { measures, values } => return steps(domain, measures, values),
            Shape::Annulus { lo, hi, value } => RadialProfile::annulus_indicator(domain, *lo, *hi, *value),
            Shape::Bump { n, p } => RadialProfile::scaled_bump(domain, *n, *p),
        };
        profile.map_err(as_config)
    }
}

fn steps(domain: BallDomain, measures: &[f64], values: &[f64]) -> Result<RadialProfile, CliError> {
    if measures.is_empty() || measures.len() != values.len() {
        return Err(CliError::Config("steps need matching non-empty measures and values".into()));
    }
    let total = domain.measure();
    if measures[0] <= 0.0 || measures.windows(2).any(|w| w[1] <= w[0]) || measures[measures.len() - 1] > total {
        return Err(CliError::Config(format!("step measures must increase within (0, {total}]")));
    }
    let a = domain.radius;
    let mut radii = vec![0.0];
    let mut knot_values = vec![values[0]];
    for (i, &m) in measures.iter().enumerate() {
        let r = if m == total { a } else { domain.radius_of_measure(m).min(a) };
        radii.push(r);
        knot_values.push(values[i]);
        if let Some(&next) = values.get(i + 1) {
            radii.push(r);
            knot_values.push(next);
        }
    }
    RadialProfile::supported(domain, radii, knot_values).map_err(as_config)
}

/// Rejects exponent fields a config may not name and re-runs the library's
/// constructors on the rest.
pub fn validate_exponent(q: &ExponentField) -> Result<(), CliError> {
    match q {
        ExponentField::Constant { q } => ExponentField::constant(*q).map(|_| ()).map_err(as_config),
        ExponentField::LogSingular(ls) => ls.validate().map_err(as_config),
        ExponentField::Conjugate { .. } => {
            Err(CliError::Config("conjugate exponents are not accepted in configs".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangeConfig {
    pub profile: ProfileConfig,
    /// Uniform sample count for the level and measure grids.
    pub samples: usize,
    /// Extra levels at which to report `d_f`.
    pub levels: Vec<f64>,
}

impl Default for RearrangeConfig {
    fn default() -> Self {
        Self { profile: ProfileConfig::default(), samples: 201, levels: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormConfig {
    pub profile: ProfileConfig,
    pub exponent: ExponentField,
    pub second_index: f64,
    /// Levels in the level-set norm table.
    pub level_samples: usize,
    pub tol: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            profile: ProfileConfig::default(),
            exponent: ExponentField::Constant { q: 2.0 },
            second_index: 1.0,
            level_samples: 101,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaConfig {
    pub p: f64,
    pub dim: usize,
    pub c0: f64,
    pub ell: f64,
    pub eta0: f64,
    /// Decreasing support radii.
    pub radii: Vec<f64>,
    pub knots: usize,
    pub restarts: usize,
    pub budget: usize,
    pub seed: u64,
    /// Allowed shortfall below the analytic floor.
    pub tol: f64,
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            dim: 2,
            c0: 1.0,
            ell: 1.0,
            eta0: 0.1,
            radii: vec![0.05, 0.025, 0.0125],
            knots: 17,
            restarts: 8,
            budget: 5000,
            seed: 42,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinConfig {
    pub p: f64,
    pub dim: usize,
    pub c0: f64,
    pub eta0: f64,
    pub eps: f64,
    /// Number of levels `N`; the bound is sampled over all of them.
    pub levels: usize,
    pub samples: usize,
    pub seed: u64,
    pub knots: usize,
    pub restarts: usize,
    pub budget: usize,
    /// Allowed shortfall of the sampled infimum below the analytic bound.
    pub tol: f64,
}

impl Default for BernsteinConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            dim: 2,
            c0: 1.0,
            eta0: 0.1,
            eps: 0.01,
            levels: 6,
            samples: 500,
            seed: 42,
            knots: 17,
            restarts: 8,
            budget: 5000,
            tol: 1e-9,
        }
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

pub fn read_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `defaults`, overlaid with `file`, overlaid with the flags.
pub fn resolve<T: Serialize + DeserializeOwned>(
    defaults: &T,
    file: Option<Value>,
    overrides: &Overrides,
) -> Result<T, CliError> {
    let mut merged = serde_json::to_value(defaults).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(file) = file {
        if !file.is_object() {
            return Err(CliError::Config("config must be a JSON object".into()));
        }
        merge(&mut merged, file, "")?;
    }
    let top = merged.as_object_mut().expect("configs serialize to objects");
    for (key, value) in [("seed", overrides.seed.map(Value::from)), ("tol", overrides.tol.map(Value::from))] {
        if let Some(value) = value {
            if !top.contains_key(key) {
                return Err(CliError::Config(format!("this command takes no --{key}")));
            }
            top.insert(key.into(), value);
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))
}

/// Merges `patch` into `base` key by key. Objects carrying a `kind` tag are
/// replaced whole; keys absent from `base` are rejected.
fn merge(base: &mut Value, patch: Value, path: &str) -> Result<(), CliError> {
    let tagged = |m: &Map<String, Value>| m.contains_key("kind");
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) if !tagged(b) && !tagged(&p) => {
            for (key, value) in p {
                let here = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value, &here)?,
                    None => return Err(CliError::Config(format!("unknown field `{here}`"))),
                }
            }
            Ok(())
        }
        (slot, value) => {
            *slot = value;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = json!({ "seed": 7, "eps": 0.02 });
        let cfg: BernsteinConfig =
            resolve(&BernsteinConfig::default(), Some(file), &Overrides { seed: Some(9), tol: None }).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.eps, 0.02);
        assert_eq!(cfg.levels, 6);
    }

    #[test]
    fn nested_objects_merge_and_tagged_ones_replace() {
        let file =
            json!({ "profile": { "radius": 2.0, "shape": { "kind": "annulus", "lo": 0.5, "hi": 1.0, "value": 3.0 } } });
        let cfg: RearrangeConfig = resolve(&RearrangeConfig::default(), Some(file), &Overrides::default()).unwrap();
        assert_eq!(cfg.profile.dim, 2);
        assert_eq!(cfg.profile.radius, 2.0);
        assert_eq!(cfg.profile.shape, Shape::Annulus { lo: 0.5, hi: 1.0, value: 3.0 });
    }

    #[test]
    fn unknown_keys_and_misplaced_flags_are_rejected() {
        let err =
            resolve(&RearrangeConfig::default(), Some(json!({ "profile": { "dimm": 3 } })), &Overrides::default());
        assert!(matches!(err, Err(CliError::Config(m)) if m.contains("profile.dimm")));
        let err = resolve(&RearrangeConfig::default(), None, &Overrides { seed: Some(1), tol: None });
        assert!(matches!(err, Err(CliError::Config(_))));
    }

    #[test]
    fn step_shells_sit_at_the_requested_measures() {
        let cfg = ProfileConfig {
            dim: 3,
            radius: 1.0,
            shape: Shape::Steps { measures: vec![0.1, 0.3], values: vec![2.0, 1.0] },
        };
        let f = cfg.build().unwrap();
        let r1 = f.radii[1];
        assert!((f.domain.ball_measure(r1) - 0.1).abs() < 1e-15);
        assert_eq!(f.eval(0.5 * r1), 2.0);
        assert_eq!(f.eval(f.radius()), 0.0);
    }
}

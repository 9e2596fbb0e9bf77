//! JSON experiment configuration shared by every subcommand.
//!
//! One strict schema (unknown keys rejected) describes the manifold, the
//! weight potential, the curvature query or graph schedule, run sizes and
//! output destination. All numeric constraints are validated at load time
//! with the violated constraint named in the error.

use serde::Deserialize;
use wricci_core::manifold::{ModelManifold, Point, Potential, TangentVector};
use wricci_core::rgg::GraphSchedule;

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "config io error: {m}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub query: QueryConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    /// Fraction of the injectivity radius admitted for ball operations.
    #[serde(default)]
    pub ball_safety: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: Option<String>,
    pub a: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
    pub scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QueryConfig {
    pub x0: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub schedule: Option<ScheduleConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub c_delta: Option<f64>,
    #[serde(default)]
    pub c_epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub cloud_size: Option<usize>,
    pub samples: Option<usize>,
    pub repeats: Option<u32>,
    pub n_values: Option<Vec<u64>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<String>,
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{path}: {e}")))?;
        text.parse()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.manifold()?;
        if let Some(fmt) = &self.output.format {
            if fmt != "csv" && fmt != "json" {
                return Err(invalid(format!("output.format must be csv or json, got {fmt}")));
            }
        }
        Ok(())
    }

    pub fn manifold(&self) -> Result<ModelManifold, ConfigError> {
        let mc = &self.manifold;
        if mc.dim < 2 {
            return Err(invalid("manifold.dim must be at least 2"));
        }
        let m = match mc.kind.as_str() {
            "euclidean" => ModelManifold::euclidean(mc.dim),
            "sphere" => {
                let r = mc.radius.or(mc.scale).unwrap_or(1.0);
                if !r.is_finite() || r <= 0.0 {
                    return Err(invalid("manifold.radius must be positive"));
                }
                ModelManifold::sphere(mc.dim, r)
            }
            "hyperbolic" => {
                let s = mc.scale.or(mc.radius).unwrap_or(1.0);
                if !s.is_finite() || s <= 0.0 {
                    return Err(invalid("manifold.scale must be positive"));
                }
                ModelManifold::hyperbolic(mc.dim, s)
            }
            other => {
                return Err(invalid(format!(
                    "manifold.kind must be euclidean, sphere or hyperbolic, got {other}"
                )))
            }
        }
        .map_err(|e| invalid(format!("manifold: {e}")))?;
        match self.manifold.ball_safety {
            None => Ok(m),
            Some(f) => m
                .with_ball_safety(f)
                .map_err(|_| invalid("manifold.ball_safety must lie strictly between 0 and 1")),
        }
    }

    pub fn potential(&self, m: &ModelManifold) -> Result<Potential, ConfigError> {
        let pc = &self.potential;
        let ad = m.ambient_dim();
        match pc.kind.as_deref().unwrap_or("zero") {
            "zero" => Ok(Potential::Zero),
            "linear" => {
                let a = pc
                    .a
                    .clone()
                    .ok_or_else(|| invalid("potential.a required for kind = linear"))?;
                if a.len() != ad {
                    return Err(invalid(format!(
                        "potential.a must have {ad} ambient coordinates"
                    )));
                }
                Ok(Potential::Linear { a })
            }
            "quadratic" => {
                let center = pc.center.clone().unwrap_or_else(|| vec![0.0; ad]);
                if center.len() != ad {
                    return Err(invalid(format!(
                        "potential.center must have {ad} ambient coordinates"
                    )));
                }
                let scale = pc.scale.unwrap_or(1.0);
                if !scale.is_finite() {
                    return Err(invalid("potential.scale must be finite"));
                }
                Ok(Potential::Quadratic { center, scale })
            }
            other => Err(invalid(format!(
                "potential.kind must be zero, linear or quadratic, got {other}"
            ))),
        }
    }

    /// Short label for output tables.
    pub fn potential_label(&self) -> String {
        self.potential.kind.clone().unwrap_or_else(|| "zero".into())
    }

    /// Base point (default: the canonical origin) and unit direction
    /// (default: the first tangent frame vector).
    pub fn base_and_direction(
        &self,
        m: &ModelManifold,
    ) -> Result<(Point, TangentVector), ConfigError> {
        let x0 = match &self.query.x0 {
            None => m.origin(),
            Some(coords) => m
                .point(coords)
                .map_err(|e| invalid(format!("query.x0: {e}")))?,
        };
        let v = match &self.query.v {
            None => m.tangent_frame(&x0).into_iter().next().unwrap(),
            Some(comps) => {
                let raw = m
                    .tangent(&x0, comps)
                    .map_err(|e| invalid(format!("query.v: {e}")))?;
                let n = m.norm(&raw);
                if n <= 0.0 {
                    return Err(invalid("query.v must be nonzero"));
                }
                m.scale_vec(&raw, 1.0 / n)
            }
        };
        Ok((x0, v))
    }

    pub fn delta_epsilon(&self) -> Result<(f64, f64), ConfigError> {
        let d = self.query.delta.ok_or_else(|| invalid("query.delta is required"))?;
        let e = self.query.epsilon.ok_or_else(|| invalid("query.epsilon is required"))?;
        if !d.is_finite() || !e.is_finite() || d <= 0.0 || e <= 0.0 {
            return Err(invalid("query.delta and query.epsilon must be positive"));
        }
        Ok((d, e))
    }

    pub fn schedule(&self, dim: usize) -> Result<GraphSchedule, ConfigError> {
        let sc = self
            .query
            .schedule
            .as_ref()
            .ok_or_else(|| invalid("query.schedule is required for this subcommand"))?;
        let mut sched = GraphSchedule::new(sc.alpha, sc.beta, sc.a, sc.b);
        sched.c_delta = sc.c_delta.unwrap_or(1.0);
        sched.c_epsilon = sc.c_epsilon.unwrap_or(1.0);
        if !(sched.c_delta.is_finite() && sched.c_epsilon.is_finite())
            || sched.c_delta <= 0.0
            || sched.c_epsilon <= 0.0
        {
            return Err(invalid("schedule constants must be positive"));
        }
        sched
            .validate(dim)
            .map_err(|e| invalid(format!("query.schedule: {e}")))?;
        Ok(sched)
    }

    pub fn n_values(&self) -> Result<Vec<u64>, ConfigError> {
        let ns = self
            .run
            .n_values
            .clone()
            .ok_or_else(|| invalid("run.n_values is required for this subcommand"))?;
        if ns.is_empty() || ns.iter().any(|&n| n < 3) {
            return Err(invalid("run.n_values must be nonempty with entries >= 3"));
        }
        Ok(ns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "manifold": {"kind": "sphere", "dim": 2, "radius": 1.0, "ball_safety": 0.25},
        "potential": {"kind": "quadratic", "scale": 1.0},
        "query": {"delta": 0.2, "epsilon": 0.2},
        "run": {"cloud_size": 100, "repeats": 2, "seed": 7},
        "output": {"path": "out.csv", "format": "csv"}
    }"#;

    #[test]
    fn parses_valid_config() {
        let cfg: ExperimentConfig = GOOD.parse().unwrap();
        let m = cfg.manifold().unwrap();
        assert_eq!(m.dim(), 2);
        let pot = cfg.potential(&m).unwrap();
        let (x0, v) = cfg.base_and_direction(&m).unwrap();
        assert!((m.norm(&v) - 1.0).abs() < 1e-12);
        assert_eq!(pot.value(&m, &x0), 0.5 * 2.0 * 1.0 / 2.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = GOOD.replace("\"run\"", "\"runs\"");
        assert!(matches!(bad.parse::<ExperimentConfig>(), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn names_violated_constraint() {
        let bad = GOOD.replace("\"dim\": 2", "\"dim\": 1");
        let err = bad.parse::<ExperimentConfig>().unwrap_err();
        assert!(err.to_string().contains("dim must be at least 2"), "{err}");
    }

    #[test]
    fn schedule_constraints_checked_at_load() {
        let cfg: ExperimentConfig = r#"{
            "manifold": {"kind": "euclidean", "dim": 2},
            "query": {"schedule": {"alpha": 0.25, "beta": 0.25, "a": 1.0, "b": 1.0}},
            "run": {"n_values": [100]}
        }"#
        .parse()
        .unwrap();
        let err = cfg.schedule(2).unwrap_err();
        assert!(err.to_string().contains("alpha + 2 beta"), "{err}");
    }
}

//! Subcommand runners: each returns the output text it produced so the
//! reproducibility checks can compare byte-for-byte.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use wricci_core::coarse::CurvatureQuery;
use wricci_core::ot::{solve_w1, CostMatrix};
use wricci_core::rgg::{convergence_job, ConvergenceRow};

use crate::config::{ConfigError, ExperimentConfig};
use crate::csvio::{self, CurvatureRecord};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Csv(crate::csvio::CsvError),
    Runtime(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Csv(e) => write!(f, "{e}"),
            RunError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<crate::csvio::CsvError> for RunError {
    fn from(e: crate::csvio::CsvError) -> Self {
        RunError::Csv(e)
    }
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

/// Worker count: the WRICCI_WORKERS environment variable, default 1.
/// Results are independent of the worker count; jobs derive their own seed
/// streams and rows are sorted before emission.
pub fn worker_count() -> usize {
    std::env::var("WRICCI_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// `curvature`: run the coarse-curvature estimate described by the config
/// and return the result table as CSV text.
pub fn run_curvature(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<String, RunError> {
    let m = cfg.manifold()?;
    let pot = cfg.potential(&m)?;
    let (x0, v) = cfg.base_and_direction(&m)?;
    let (delta, epsilon) = cfg.delta_epsilon()?;
    let cloud_size = cfg.run.cloud_size.unwrap_or(400);
    let repeats = cfg.run.repeats.unwrap_or(8);
    let seed = seed_override.or(cfg.run.seed).unwrap_or(42);
    eprintln!("seed: {seed}");
    let q = CurvatureQuery::new(m.clone(), x0.clone(), v.clone(), delta, epsilon, pot)
        .map_err(runtime)?;
    let est = q.estimate_coarse_curvature(cloud_size, repeats as usize, seed).map_err(runtime)?;
    let oracle = q.oracle().map_err(runtime)?;
    let rec = CurvatureRecord {
        manifold: cfg.manifold.kind.clone(),
        dim: m.dim(),
        potential: cfg.potential_label(),
        delta,
        epsilon,
        cloud_size,
        repeats,
        seed,
        w1_mean: est.w1_hat,
        w1_std: est.w1_std,
        upper: est.bounds.upper,
        lower: est.bounds.lower,
        kappa: est.kappa_hat,
        scaled_kappa: est.scaled_kappa,
        oracle,
    };
    Ok(csvio::curvature_csv(&rec))
}

/// `rgg converge`: the convergence table over run.n_values, executed by a
/// bounded worker pool.
pub fn run_converge(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<String, RunError> {
    let m = cfg.manifold()?;
    let pot = cfg.potential(&m)?;
    let (x0, v) = cfg.base_and_direction(&m)?;
    let sched = cfg.schedule(m.dim())?;
    let mut n_values = cfg.n_values()?;
    n_values.sort_unstable();
    let repeats = cfg.run.repeats.unwrap_or(10);
    let seed = seed_override.or(cfg.run.seed).unwrap_or(42);
    eprintln!("seed: {seed}");

    let jobs: Vec<(usize, u64, u32)> = n_values
        .iter()
        .enumerate()
        .flat_map(|(ni, &n)| (0..repeats).map(move |r| (ni, n, r)))
        .collect();
    let workers = worker_count().min(jobs.len().max(1));
    let rows = if workers <= 1 {
        let mut rows = Vec::with_capacity(jobs.len());
        for &(ni, n, rep) in &jobs {
            rows.push(
                convergence_job(&m, &pot, &x0, &v, &sched, n, ni, rep, seed).map_err(runtime)?,
            );
        }
        rows
    } else {
        let next = AtomicUsize::new(0);
        let out: Mutex<Vec<ConvergenceRow>> = Mutex::new(Vec::with_capacity(jobs.len()));
        let err: Mutex<Option<String>> = Mutex::new(None);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(ni, n, rep)) = jobs.get(idx) else { break };
                    match convergence_job(&m, &pot, &x0, &v, &sched, n, ni, rep, seed) {
                        Ok(row) => out.lock().unwrap().push(row),
                        Err(e) => {
                            *err.lock().unwrap() = Some(e.to_string());
                            break;
                        }
                    }
                });
            }
        });
        if let Some(msg) = err.into_inner().unwrap() {
            return Err(RunError::Runtime(msg));
        }
        let mut rows = out.into_inner().unwrap();
        rows.sort_by_key(|r| (r.n, r.repeat));
        rows
    };
    Ok(csvio::convergence_csv(&rows))
}

/// `ot solve`: exact W1 between two cloud CSVs; the cost defaults to the
/// Euclidean distance of atom coordinates. Returns one JSON line.
pub fn run_ot_solve(
    source_path: &str,
    target_path: &str,
    cost_path: Option<&str>,
) -> Result<String, RunError> {
    let (coords_a, raw_a) = csvio::read_cloud(source_path)?;
    let (coords_b, raw_b) = csvio::read_cloud(target_path)?;
    let norm = |w: &[f64]| -> Result<Vec<f64>, RunError> {
        let s: f64 = w.iter().sum();
        if !s.is_finite() || s <= 0.0 {
            return Err(RunError::Runtime("weights must have positive sum".into()));
        }
        Ok(w.iter().map(|x| x / s).collect())
    };
    let a = norm(&raw_a)?;
    let b = norm(&raw_b)?;
    let cost = match cost_path {
        Some(path) => csvio::read_cost_matrix(path, a.len(), b.len())?,
        None => {
            if coords_a[0].len() != coords_b[0].len() {
                return Err(RunError::Runtime(
                    "source and target atoms have different dimensions".into(),
                ));
            }
            CostMatrix::from_fn(a.len(), b.len(), |i, j| {
                let mut s = 0.0;
                for (x, y) in coords_a[i].iter().zip(&coords_b[j]) {
                    s += (x - y) * (x - y);
                }
                s.sqrt()
            })
            .map_err(runtime)?
        }
    };
    let plan = solve_w1(&a, &b, &cost).map_err(runtime)?;
    let gap = plan.cost - plan.dual_value(&a, &b);
    let w1 = serde_json::Number::from_f64(plan.cost).ok_or_else(|| runtime("non-finite w1"))?;
    let gap = serde_json::Number::from_f64(gap).ok_or_else(|| runtime("non-finite gap"))?;
    Ok(format!("{{\"w1\": {w1}, \"gap\": {gap}}}\n"))
}

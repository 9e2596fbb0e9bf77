//! `wricci` — coarse Ricci curvature experiments on weighted model
//! manifolds.
//!
//! Subcommands:
//!   curvature --config exp.json [--out results.csv] [--seed N]
//!   rgg converge --config exp.json [--out table.csv] [--seed N]
//!   ot solve --source a.csv --target b.csv [--cost c.csv]
//!   validate <lemma> [--samples N] [--seed N]
//!
//! Exit codes: 0 success, 1 runtime or check failure, 2 configuration error.

use std::process::ExitCode;

use wricci_cli::checks;
use wricci_cli::config::ExperimentConfig;
use wricci_cli::run::{run_converge, run_curvature, run_ot_solve, RunError};

const USAGE: &str = "\
wricci — coarse Ricci curvature experiments on weighted model manifolds

USAGE:
  wricci curvature --config exp.json [--out results.csv] [--seed N]
  wricci rgg converge --config exp.json [--out table.csv] [--seed N]
  wricci ot solve --source a.csv --target b.csv [--cost c.csv]
  wricci validate <lemma> [--manifold KIND] [--dim N] [--radius X]
                  [--epsilon X] [--samples N] [--seed N]

Lemmas for validate:
  ricci-sphere | ricci-ball | triangle | density-bar | density-nu |
  jacobian | lipschitz | sandwich

Environment:
  WRICCI_WORKERS   worker count for rgg converge (default 1); results are
                   identical for any worker count.

The config file is a single JSON document; see README.md for the schema and
runnable examples.
";

struct Flags {
    config: Option<String>,
    out: Option<String>,
    seed: Option<u64>,
    samples: Option<usize>,
    source: Option<String>,
    target: Option<String>,
    cost: Option<String>,
    manifold: Option<String>,
    dim: Option<usize>,
    radius: Option<f64>,
    epsilon: Option<f64>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        out: None,
        seed: None,
        samples: None,
        source: None,
        target: None,
        cost: None,
        manifold: None,
        dim: None,
        radius: None,
        epsilon: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut grab = |name: &str| -> Result<String, String> {
            it.next().cloned().ok_or_else(|| format!("flag {name} needs a value"))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(grab("--config")?),
            "--out" => flags.out = Some(grab("--out")?),
            "--seed" => {
                flags.seed = Some(grab("--seed")?.parse().map_err(|e| format!("--seed: {e}"))?)
            }
            "--samples" => {
                flags.samples =
                    Some(grab("--samples")?.parse().map_err(|e| format!("--samples: {e}"))?)
            }
            "--source" => flags.source = Some(grab("--source")?),
            "--target" => flags.target = Some(grab("--target")?),
            "--cost" => flags.cost = Some(grab("--cost")?),
            "--manifold" => flags.manifold = Some(grab("--manifold")?),
            "--dim" => {
                flags.dim = Some(grab("--dim")?.parse().map_err(|e| format!("--dim: {e}"))?)
            }
            "--radius" | "--scale" => {
                flags.radius =
                    Some(grab(arg)?.parse().map_err(|e| format!("{arg}: {e}"))?)
            }
            "--epsilon" => {
                flags.epsilon =
                    Some(grab("--epsilon")?.parse().map_err(|e| format!("--epsilon: {e}"))?)
            }
            other => return Err(format!("unknown flag {other}")),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<ExperimentConfig, String> {
    let path = flags.config.as_deref().ok_or("--config <file.json> is required")?;
    ExperimentConfig::from_path(path).map_err(|e| e.to_string())
}

fn emit(flags: &Flags, default_path: Option<&str>, text: &str) -> Result<(), String> {
    let path = flags.out.as_deref().or(default_path);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{p}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config_exit(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn runtime_exit(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn run_with_config(
    flags: &Flags,
    runner: impl Fn(&ExperimentConfig, Option<u64>) -> Result<String, RunError>,
) -> ExitCode {
    let cfg = match load_config(flags) {
        Ok(c) => c,
        Err(m) => return config_exit(&m),
    };
    if flags.seed.is_some() && cfg.run.seed.is_some() {
        eprintln!("note: --seed overrides config run.seed");
    }
    match runner(&cfg, flags.seed) {
        Ok(text) => {
            let default = cfg.output.path.clone();
            match emit(flags, default.as_deref(), &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(m) => runtime_exit(&m),
            }
        }
        Err(RunError::Config(e)) => config_exit(&e.to_string()),
        Err(e) => runtime_exit(&e.to_string()),
    }
}

/// The curved model families the Ricci-average lemmas run on; --manifold
/// and --dim restrict the selection.
fn ricci_models(flags: &Flags) -> Result<Vec<wricci_core::ModelManifold>, String> {
    let dim = flags.dim.unwrap_or(2);
    let scale = flags.radius.unwrap_or(1.0);
    let make = |kind: &str| -> Result<wricci_core::ModelManifold, String> {
        match kind {
            "sphere" => wricci_core::ModelManifold::sphere(dim, scale)
                .map_err(|e| format!("--manifold sphere: {e}")),
            "hyperbolic" => wricci_core::ModelManifold::hyperbolic(dim, scale)
                .map_err(|e| format!("--manifold hyperbolic: {e}")),
            "euclidean" => wricci_core::ModelManifold::euclidean(dim)
                .map_err(|e| format!("--manifold euclidean: {e}")),
            other => Err(format!("unknown manifold {other}")),
        }
    };
    match flags.manifold.as_deref() {
        Some(kind) => Ok(vec![make(kind)?]),
        None => Ok(vec![make("sphere")?, make("hyperbolic")?]),
    }
}

fn validate(lemma: &str, flags: &Flags) -> ExitCode {
    let seed = flags.seed.unwrap_or(1);
    let samples = flags.samples.unwrap_or(1_000_000);
    let eps = flags.epsilon.unwrap_or(0.3);
    eprintln!("seed: {seed}");
    let reports = match lemma {
        "ricci-sphere" => match ricci_models(flags) {
            Ok(models) => models
                .iter()
                .map(|m| checks::check_ricci_sphere_average(m, eps, samples, seed))
                .collect(),
            Err(m) => return config_exit(&m),
        },
        "ricci-ball" => match ricci_models(flags) {
            Ok(models) => models
                .iter()
                .map(|m| checks::check_ricci_ball_average(m, eps, samples, seed))
                .collect(),
            Err(m) => return config_exit(&m),
        },
        "triangle" => vec![checks::check_triangle_expansion()],
        "density-bar" => vec![checks::check_density_bar()],
        "density-nu" => vec![checks::check_density_nu()],
        "jacobian" => vec![checks::check_jacobian()],
        "lipschitz" => vec![checks::check_lipschitz(10_000, seed)],
        "sandwich" => vec![checks::check_sandwich(samples, seed)],
        other => {
            return config_exit(&format!(
                "unknown lemma {other}; expected one of ricci-sphere, ricci-ball, triangle, \
                 density-bar, density-nu, jacobian, lipschitz, sandwich"
            ))
        }
    };
    let mut all_pass = true;
    for rep in &reports {
        print!("{}", rep.render());
        all_pass &= rep.pass;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(cmd) = args.first() else {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    };
    match cmd.as_str() {
        "curvature" => {
            let flags = match parse_flags(&args[1..]) {
                Ok(f) => f,
                Err(m) => return config_exit(&m),
            };
            run_with_config(&flags, run_curvature)
        }
        "rgg" => {
            if args.get(1).map(String::as_str) != Some("converge") {
                return config_exit("usage: wricci rgg converge --config exp.json [--out table.csv]");
            }
            let flags = match parse_flags(&args[2..]) {
                Ok(f) => f,
                Err(m) => return config_exit(&m),
            };
            run_with_config(&flags, run_converge)
        }
        "ot" => {
            if args.get(1).map(String::as_str) != Some("solve") {
                return config_exit(
                    "usage: wricci ot solve --source a.csv --target b.csv [--cost c.csv]",
                );
            }
            let flags = match parse_flags(&args[2..]) {
                Ok(f) => f,
                Err(m) => return config_exit(&m),
            };
            let (Some(source), Some(target)) = (flags.source.as_deref(), flags.target.as_deref())
            else {
                return config_exit("ot solve requires --source and --target");
            };
            match run_ot_solve(source, target, flags.cost.as_deref()) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(RunError::Csv(e)) => config_exit(&e.to_string()),
                Err(e) => runtime_exit(&e.to_string()),
            }
        }
        "validate" => {
            let Some(lemma) = args.get(1) else {
                return config_exit("usage: wricci validate <lemma> [--samples N] [--seed N]");
            };
            let flags = match parse_flags(&args[2..]) {
                Ok(f) => f,
                Err(m) => return config_exit(&m),
            };
            validate(lemma, &flags)
        }
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            ExitCode::SUCCESS
        }
        other => config_exit(&format!("unknown subcommand {other}\n\n{USAGE}")),
    }
}

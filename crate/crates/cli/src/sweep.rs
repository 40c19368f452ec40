use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use rayon::prelude::*;
use spatial_qubits::measurement::{simulate_counts, standard_settings};
use spatial_qubits::states::fidelity;
use spatial_qubits::Method;

use crate::config::{self, Loaded};
use crate::error::{CliError, CliResult};
use crate::reconstruct::reconstruct;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variable {
    /// Expected counts per setting; `R0·time = 4N`.
    #[value(name = "counts", alias = "counts_per_setting")]
    Counts,
    /// Base seed; each point runs its own block of trials.
    #[value(name = "seeds", alias = "seed-trials")]
    Seeds,
}

pub struct Args {
    pub config: PathBuf,
    pub var: Variable,
    pub range: String,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> CliResult<T> {
    s.trim().parse().map_err(|_| CliError::Usage(format!("range: cannot parse {what} '{s}'")))
}

/// `N` or `a:b:n`, `n` points spaced logarithmically from `a` to `b` and
/// rounded to whole counts.
pub fn count_points(range: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = range.split(':').collect();
    let points = match parts.as_slice() {
        [v] => vec![parse_num::<f64>(v, "count")?],
        [a, b, n] => {
            let (a, b): (f64, f64) = (parse_num(a, "start")?, parse_num(b, "end")?);
            let n: usize = parse_num(n, "point count")?;
            if n == 0 {
                return Err(CliError::Usage("range: point count must be at least 1".into()));
            }
            if n == 1 {
                vec![a]
            } else {
                let (la, lb) = (a.ln(), b.ln());
                (0..n).map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp().round()).collect()
            }
        }
        _ => return Err(CliError::Usage(format!("range '{range}': expected N or start:end:points"))),
    };
    if points.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::Usage(format!("range '{range}': counts must be positive")));
    }
    Ok(points)
}

/// `s` or `a:b`, inclusive.
pub fn seed_points(range: &str) -> CliResult<Vec<u64>> {
    let parts: Vec<&str> = range.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![parse_num(v, "seed")?]),
        [a, b] => {
            let (a, b): (u64, u64) = (parse_num(a, "start")?, parse_num(b, "end")?);
            if a > b {
                return Err(CliError::Usage(format!("range '{range}' is empty")));
            }
            Ok((a..=b).collect())
        }
        _ => Err(CliError::Usage(format!("range '{range}': expected S or start:end"))),
    }
}

/// One point of the sweep: counts per setting and the seed of its first trial.
struct Point {
    label: String,
    time_s: f64,
    first_seed: u64,
}

fn short_name(m: Method) -> &'static str {
    match m {
        Method::ExactLinear => "exact",
        Method::PaperForm => "paper",
        Method::Mle => "mle",
    }
}

struct Stats {
    mean: f64,
    min: f64,
    max: f64,
    std: f64,
}

fn stats(v: &[f64]) -> Stats {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Stats {
        mean,
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        std: var.sqrt(),
    }
}

fn trial(cfg: &Loaded, methods: &[Method], time_s: f64, seed: u64) -> CliResult<Vec<f64>> {
    let truth = cfg.true_state()?;
    let r0 = cfg.config.calibration.r0_hz;
    let record = simulate_counts(&truth, &standard_settings(&cfg.geometry), &cfg.geometry, r0, time_s, seed, false)?;
    methods.iter().map(|&m| Ok(fidelity(&reconstruct(&record, m, cfg)?.rho_hat, &truth))).collect()
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = config::load(&args.config)?;
    let out = cfg.output(args.out, |o| &o.sweep, "sweep")?;
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let methods = cfg.config.sweep.methods.clone();
    if methods.is_empty() {
        return Err(CliError::Usage("sweep.methods is empty".into()));
    }
    let cal = cfg.config.calibration;
    let base = cfg.config.noise.seed;
    let t = args.trials as u64;
    let points: Vec<Point> = match args.var {
        Variable::Counts => count_points(&args.range)?
            .into_iter()
            .enumerate()
            .map(|(k, n)| Point { label: format!("{n}"), time_s: 4.0 * n / cal.r0_hz, first_seed: base + k as u64 * t })
            .collect(),
        Variable::Seeds => seed_points(&args.range)?
            .into_iter()
            .map(|s| Point { label: format!("{s}"), time_s: cal.time_s, first_seed: s })
            .collect(),
    };

    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|p| (0..t).map(move |k| (p, k))).collect();
    let work = || -> Vec<CliResult<Vec<f64>>> {
        jobs.par_iter().map(|&(p, k)| trial(&cfg, &methods, points[p].time_s, points[p].first_seed + k)).collect()
    };
    let results = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?
            .install(work),
        None => work(),
    };
    let results: Vec<Vec<f64>> = results.into_iter().collect::<CliResult<_>>()?;

    let var_name = match args.var {
        Variable::Counts => "counts_per_setting",
        Variable::Seeds => "base_seed",
    };
    let mut header = vec![var_name.to_string(), "trials".to_string()];
    for &m in &methods {
        for stat in ["mean", "min", "max", "std"] {
            header.push(format!("{}_{stat}", short_name(m)));
        }
    }
    let mut w = csv::Writer::from_path(&out)?;
    w.write_record(&header)?;
    println!("{}", header.join("  "));
    for (p, point) in points.iter().enumerate() {
        let block = &results[p * args.trials..(p + 1) * args.trials];
        let mut row = vec![point.label.clone(), args.trials.to_string()];
        for j in 0..methods.len() {
            let f: Vec<f64> = block.iter().map(|r| r[j]).collect();
            let s = stats(&f);
            row.extend([s.mean, s.min, s.max, s.std].iter().map(|v| format!("{v}")));
        }
        println!("{}", row.join("  "));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(&out, e))
}

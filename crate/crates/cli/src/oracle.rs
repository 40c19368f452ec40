use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spatial_qubits::io::from_json;
use spatial_qubits::propagation::{i_integral_closed, i_integral_quadrature, stationary_phase_scale, Sign};
use spatial_qubits::DerivedGeometry;

use crate::config::{self, read_text};
use crate::error::{CliError, CliResult};

/// Largest accepted relative error of the closed form.
pub const BOUND: f64 = 0.05;
const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    x_mm: Vec<f64>,
    q_per_mm: Vec<f64>,
    /// Relative quadrature tolerance.
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct Row {
    x_mm: f64,
    q_per_mm: f64,
    sign: &'static str,
    re_closed: f64,
    im_closed: f64,
    re_quad: f64,
    im_quad: f64,
    rel_err: f64,
}

pub struct Args {
    pub config: PathBuf,
    pub grid: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// `x ∈ {0, ±x1, ±2x1}`, `q ∈ {0, ±π/4b}`, in mm and 1/mm.
fn default_grid(g: &DerivedGeometry) -> GridFile {
    let x1 = g.x1 * 1e3;
    let q = PI / (4.0 * g.geometry.b * 1e3);
    GridFile { x_mm: vec![-2.0 * x1, -x1, 0.0, x1, 2.0 * x1], q_per_mm: vec![-q, 0.0, q], tol: None }
}

fn read_grid(path: &Path) -> CliResult<GridFile> {
    let grid: GridFile = from_json(&read_text(path)?).map_err(|e| CliError::in_file(path, e))?;
    if grid.x_mm.is_empty() || grid.q_per_mm.is_empty() {
        return Err(CliError::Usage(format!("{}: grid has no points", path.display())));
    }
    if grid.x_mm.iter().chain(&grid.q_per_mm).any(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("{}: grid values must be finite", path.display())));
    }
    if let Some(t) = grid.tol {
        if !(t.is_finite() && t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("{}: tol must lie in (0, 1)", path.display())));
        }
    }
    Ok(grid)
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = config::load(&args.config)?;
    let out = cfg.output(args.out, |o| &o.oracle, "oracle")?;
    let grid = match &args.grid {
        Some(p) => read_grid(p)?,
        None => default_grid(&cfg.geometry),
    };
    let tol = grid.tol.unwrap_or(DEFAULT_TOL);
    let optics = cfg.geometry.optics();
    let scale = stationary_phase_scale(&optics);

    let mut rows = Vec::new();
    for &x_mm in &grid.x_mm {
        for &q_per_mm in &grid.q_per_mm {
            for sign in Sign::BOTH {
                let (x, q) = (x_mm * 1e-3, q_per_mm * 1e3);
                let quad = i_integral_quadrature(x, sign, q, &optics, tol)?;
                let closed = i_integral_closed(x, sign, q, &optics) * scale;
                rows.push(Row {
                    x_mm,
                    q_per_mm,
                    sign: if sign == Sign::Plus { "+" } else { "-" },
                    re_closed: closed.re,
                    im_closed: closed.im,
                    re_quad: quad.re,
                    im_quad: quad.im,
                    rel_err: (closed - quad).norm() / quad.norm(),
                });
            }
        }
    }

    let mut w = csv::Writer::from_path(&out)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(&out, e))?;

    println!("{:>10}  {:>10}  {:>4}  {:>10}", "x (mm)", "q (1/mm)", "sign", "rel err");
    for r in &rows {
        println!("{:>10.5}  {:>10.4}  {:>4}  {:>9.3}%", r.x_mm, r.q_per_mm, r.sign, 100.0 * r.rel_err);
    }
    let failing: Vec<&Row> = rows.iter().filter(|r| r.rel_err.is_nan() || r.rel_err > BOUND).collect();
    for r in &failing {
        eprintln!(
            "x = {} mm, q = {} /mm, sign {}: relative error {:.3}% exceeds {}%",
            r.x_mm,
            r.q_per_mm,
            r.sign,
            100.0 * r.rel_err,
            100.0 * BOUND
        );
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Bound(format!("{} of {} grid points exceed {}%", failing.len(), rows.len(), 100.0 * BOUND)))
    }
}

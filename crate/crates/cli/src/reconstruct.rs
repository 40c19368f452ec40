use std::path::PathBuf;

use spatial_qubits::io::{parse_count_record, to_json_pretty, ReconstructionJson};
use spatial_qubits::states::metrics;
use spatial_qubits::tomography::{invert_exact, invert_paper, mle};
use spatial_qubits::{CountRecord, DensityMatrix, Method, ReconstructionResult};

use crate::config::{self, read_text, write_text, Loaded};
use crate::error::{CliError, CliResult};

pub struct Args {
    pub counts: PathBuf,
    pub method: Method,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub reference: Option<String>,
}

/// Runs one reconstruction with the options from the config. Only linear
/// inversion is projected; the closed form is reported as computed.
pub fn reconstruct(record: &CountRecord, method: Method, cfg: &Loaded) -> CliResult<ReconstructionResult> {
    let project = cfg.config.reconstruct.project_physical;
    Ok(match method {
        Method::ExactLinear => invert_exact(record, &cfg.geometry, project)?,
        Method::PaperForm => invert_paper(record, &cfg.geometry)?,
        Method::Mle => mle(record, &cfg.geometry, &cfg.config.mle)?,
    })
}

pub fn print_matrix(rho: &DensityMatrix) {
    for r in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|c| {
                let z = rho.get(r, c);
                format!("{:+.5}{:+.5}i", z.re, z.im)
            })
            .collect();
        println!("  {}", row.join("  "));
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = config::load(&args.config)?;
    let out = cfg.output(args.out, |o| &o.result, "result")?;
    let record = parse_count_record(&read_text(&args.counts)?).map_err(|e| CliError::in_file(&args.counts, e))?;
    let reference = cfg.reference(args.reference.as_deref())?;
    let res = reconstruct(&record, args.method, &cfg)?;
    write_text(&out, &to_json_pretty(&ReconstructionJson::from(&res)))?;

    let m = metrics(&res.rho_hat, reference.as_ref());
    println!("method: {}", res.method);
    println!("rho (basis ++, +-, -+, --):");
    print_matrix(&res.rho_hat);
    println!("residual: {:.6e}", res.residual);
    println!("physical: {}", res.rho_hat.is_physical());
    println!("projection applied: {}", res.physical_projection_applied);
    println!("purity: {:.12}", m.purity);
    println!("concurrence: {:.12}", m.concurrence);
    println!("min eigenvalue: {:.6e}", m.min_eigenvalue);
    if let (Some(f), Some(d)) = (m.fidelity, m.trace_distance) {
        println!("fidelity: {f:.12}");
        println!("trace distance: {d:.12}");
    }
    if let Some(ll) = res.log_likelihood {
        println!("log-likelihood: {ll:.9e}");
    }
    if res.converged == Some(false) {
        return Err(CliError::Numerical(format!(
            "optimizer stopped after {} iterations without converging; best estimate written to {}",
            res.iterations.unwrap_or_default(),
            out.display()
        )));
    }
    Ok(())
}

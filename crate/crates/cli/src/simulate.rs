use std::path::{Path, PathBuf};

use serde::Serialize;
use spatial_qubits::io::{to_json_pretty, CountRecordJson};
use spatial_qubits::measurement::{simulate_counts, standard_settings};
use spatial_qubits::{Arm, CountRecord};

use crate::config::{self, write_text};
use crate::error::CliResult;

pub struct Args {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub noiseless: bool,
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct CsvRow {
    id: usize,
    arm_s: String,
    arm_i: String,
    counts: u64,
    time_s: f64,
    exact_rate_hz: Option<f64>,
}

/// `+`/`-` for a slit arm, the position in mm for a detection arm.
pub fn arm_label(a: Arm) -> String {
    match a {
        Arm::Slit(s) => s.symbol().to_string(),
        Arm::Detection(x) => format!("{}", x * 1e3),
    }
}

pub fn write_csv(path: &Path, record: &CountRecord) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in &record.entries {
        w.serialize(CsvRow {
            id: e.setting.id,
            arm_s: arm_label(e.setting.arm_s),
            arm_i: arm_label(e.setting.arm_i),
            counts: e.counts,
            time_s: e.time_s,
            exact_rate_hz: e.exact_rate,
        })?;
    }
    w.flush().map_err(|e| crate::error::CliError::io(path, e))
}

fn print_table(record: &CountRecord) {
    println!("{:>3}  {:>14}  {:>14}  {:>14}  {:>12}  {:>10}", "id", "arm s", "arm i", "rate (Hz)", "time (s)", "counts");
    for e in &record.entries {
        println!(
            "{:>3}  {:>14}  {:>14}  {:>14.6e}  {:>12.4}  {:>10}",
            e.setting.id,
            e.setting.arm_s.to_string(),
            e.setting.arm_i.to_string(),
            e.counts as f64 / e.time_s,
            e.time_s,
            e.counts
        );
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = config::load(&args.config)?;
    let out = cfg.output(args.out, |o| &o.counts, "counts")?;
    let csv = args.csv.or_else(|| cfg.config.output.counts_csv.as_ref().map(|p| cfg.base_dir.join(p)));
    let noiseless = args.noiseless || cfg.config.noise.noiseless;
    let seed = args.seed.unwrap_or(cfg.config.noise.seed);
    let cal = cfg.config.calibration;
    let rho = cfg.true_state()?;
    let record =
        simulate_counts(&rho, &standard_settings(&cfg.geometry), &cfg.geometry, cal.r0_hz, cal.time_s, seed, noiseless)?;
    print_table(&record);
    write_text(&out, &to_json_pretty(&CountRecordJson::from(&record)))?;
    if let Some(path) = csv {
        write_csv(&path, &record)?;
    }
    Ok(())
}

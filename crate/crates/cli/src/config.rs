//! The run configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spatial_qubits::io::{from_json, parse_state, GeometryConfig, PumpConfig};
use spatial_qubits::states::build_state;
use spatial_qubits::{DensityMatrix, DerivedGeometry, Error, Method, MleConfig, PumpProfile};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub pump: PumpConfig,
    pub calibration: Calibration,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub mle: MleConfig,
    #[serde(default)]
    pub reconstruct: ReconstructOptions,
    /// Reference state for reported fidelities: `"pump"` or a state file.
    #[serde(default)]
    pub reference: Option<String>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub sweep: SweepOptions,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    #[serde(rename = "R0_hz")]
    pub r0_hz: f64,
    /// Base integration time; propagated arms integrate `χ^n` times longer.
    pub time_s: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    pub seed: u64,
    pub noiseless: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructOptions {
    /// Clip the exact-linear estimate onto the state space.
    pub project_physical: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { project_physical: true }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub counts: Option<PathBuf>,
    pub counts_csv: Option<PathBuf>,
    pub result: Option<PathBuf>,
    pub oracle: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub methods: Vec<Method>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { methods: vec![Method::ExactLinear, Method::PaperForm] }
    }
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub geometry: DerivedGeometry,
    pub pump: PumpProfile,
    /// Directory of the config file; relative paths inside it resolve here.
    pub base_dir: PathBuf,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Lib(Error::Format(format!("at `{name}`: must be finite and > 0, got {v}"))))
    }
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let config: RunConfig = from_json(&read_text(path)?).map_err(|e| CliError::in_file(path, e))?;
    let geometry = config.geometry.to_geometry().derive()?;
    let pump = config.pump.to_profile();
    pump.validate()?;
    positive("calibration.R0_hz", config.calibration.r0_hz)?;
    positive("calibration.time_s", config.calibration.time_s)?;
    config.mle.validate()?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, geometry, pump, base_dir })
}

impl Loaded {
    pub fn true_state(&self) -> CliResult<DensityMatrix> {
        Ok(build_state(&self.pump, &self.geometry)?.to_density())
    }

    /// Resolves a reference given on the command line, falling back to the
    /// config. Command-line paths are taken relative to the working
    /// directory, config paths relative to the config file.
    pub fn reference(&self, cli: Option<&str>) -> CliResult<Option<DensityMatrix>> {
        let (source, base) = match (cli, &self.config.reference) {
            (Some(r), _) => (r, None),
            (None, Some(r)) => (r.as_str(), Some(&self.base_dir)),
            (None, None) => return Ok(None),
        };
        if source == "pump" {
            return self.true_state().map(Some);
        }
        let path = base.map_or_else(|| PathBuf::from(source), |b| b.join(source));
        read_state(&path).map(Some)
    }

    /// `--out` if given, else the config's output entry.
    pub fn output(&self, cli: Option<PathBuf>, pick: fn(&OutputPaths) -> &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
        cli.or_else(|| pick(&self.config.output).as_ref().map(|p| self.base_dir.join(p)))
            .ok_or_else(|| CliError::Usage(format!("no output path: pass --out or set output.{what} in the config")))
    }
}

pub fn read_state(path: &Path) -> CliResult<DensityMatrix> {
    parse_state(&read_text(path)?).map_err(|e| CliError::in_file(path, e))
}

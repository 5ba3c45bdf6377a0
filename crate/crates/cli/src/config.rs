//! TOML run configuration. Every block rejects unknown keys and the whole
//! file is validated before anything runs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fch_core::{Boundary, Grid, InitialSpec, PotentialParams, SolverConfig, TruncationLevel};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dim: usize,
    pub counts: Vec<usize>,
    pub lengths: Vec<f64>,
    pub bc: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub lambda: f64,
    pub eta: f64,
    #[serde(default)]
    pub truncation: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    /// File name of the ledger CSV inside the output directory.
    pub ledger: String,
    /// Write a snapshot every this many accepted steps; 0 disables.
    pub snapshot_every: u64,
    pub snapshot_dir: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { ledger: "ledger.csv".into(), snapshot_every: 0, snapshot_dir: "snapshots".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionBlock {
    pub modes: Vec<u32>,
    pub amplitude: f64,
}

impl Default for DispersionBlock {
    fn default() -> Self {
        Self { modes: (1..=8).collect(), amplitude: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdepBlock {
    /// Amplitude of the `cos(2π mode x₀ / L₀)` perturbation of the second state.
    pub amplitude: f64,
    pub mode: u32,
    /// Defaults to `run.t_end`.
    pub t_end: Option<f64>,
    /// Fixed step for the pair; otherwise the adaptive solver settings apply.
    pub dt: Option<f64>,
}

impl Default for CdepBlock {
    fn default() -> Self {
        Self { amplitude: 1e-6, mode: 3, t_end: None, dt: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub lambdas: Vec<f64>,
    pub etas: Vec<f64>,
    /// Truncation levels; an empty list runs the exact potential only.
    #[serde(default)]
    pub levels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridBlock,
    pub potential: PotentialBlock,
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub dispersion: DispersionBlock,
    #[serde(default)]
    pub cdep: CdepBlock,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

/// A parsed and validated configuration together with the objects it
/// describes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub grid: Arc<Grid>,
    pub params: PotentialParams,
    /// Solver settings with the potential's truncation level folded in.
    pub solver: SolverConfig,
    /// SHA-256 of the file as read, hex encoded.
    pub hash: String,
    pub path: PathBuf,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn grid(&self) -> Result<Arc<Grid>, CliError> {
        let g = &self.grid;
        if !(1..=3).contains(&g.dim) || g.counts.len() != g.dim || g.lengths.len() != g.dim {
            return Err(invalid(format!(
                "grid: dim = {} needs {0} counts and {0} lengths (got {} and {})",
                g.dim,
                g.counts.len(),
                g.lengths.len()
            )));
        }
        Grid::new(&g.lengths, &g.counts, g.bc).map_err(|e| invalid(format!("grid: {e}")))
    }

    pub fn params(&self) -> Result<PotentialParams, CliError> {
        PotentialParams::new(self.potential.lambda, self.potential.eta)
            .map_err(|e| invalid(format!("potential: {e}")))
    }

    /// Solver block with `potential.truncation` applied.
    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let mut s = self.solver;
        if let Some(n) = self.potential.truncation {
            if s.truncation.is_some() {
                return Err(invalid("truncation given in both [potential] and [solver]"));
            }
            s.truncation = Some(TruncationLevel::new(n).map_err(|e| invalid(format!("potential: {e}")))?);
        }
        s.validate().map_err(|e| invalid(format!("solver: {e}")))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(Arc<Grid>, PotentialParams, SolverConfig), CliError> {
        let grid = self.grid()?;
        let params = self.params()?;
        let solver = self.solver()?;
        // the mean condition is the one most worth a precise message
        if !(self.initial.mean.is_finite() && self.initial.mean.abs() < 1.0) {
            return Err(invalid(format!(
                "initial: mean {} violates the mean condition -1 < m < 1",
                self.initial.mean
            )));
        }
        self.initial.validate().map_err(|e| invalid(format!("initial: {e}")))?;
        if !(self.run.t_end.is_finite() && self.run.t_end > 0.0) {
            return Err(invalid(format!("run: t_end must be positive, got {}", self.run.t_end)));
        }
        if self.output.ledger.is_empty() || self.output.snapshot_dir.is_empty() {
            return Err(invalid("output: ledger and snapshot_dir must be nonempty"));
        }
        let d = &self.dispersion;
        if d.modes.is_empty() || d.modes.contains(&0) || !(d.amplitude > 0.0 && d.amplitude < 0.5) {
            return Err(invalid("dispersion: modes must be positive and amplitude in (0, 0.5)"));
        }
        let c = &self.cdep;
        if c.mode == 0 || !(c.amplitude.is_finite() && c.amplitude > 0.0) {
            return Err(invalid("cdep: mode and amplitude must be positive"));
        }
        if c.t_end.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(invalid("cdep: t_end must be positive"));
        }
        if c.dt.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(invalid("cdep: dt must be positive"));
        }
        if let Some(s) = &self.sweep {
            if s.lambdas.is_empty() || s.etas.is_empty() {
                return Err(invalid("sweep: lambdas and etas must be nonempty"));
            }
            for &n in &s.levels {
                TruncationLevel::new(n).map_err(|e| invalid(format!("sweep: {e}")))?;
            }
        }
        Ok((grid, params, solver))
    }
}

pub fn hash_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let config = RunConfig::parse(&text)?;
    let (grid, params, solver) = config.validate()?;
    Ok(Loaded { config, grid, params, solver, hash: hash_hex(text.as_bytes()), path: path.to_path_buf() })
}

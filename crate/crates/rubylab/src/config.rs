//! Experiment configuration: one JSON file per run.
//!
//! All energies are in units of the Rabi frequency, all lengths in units of
//! the intra-triangle spacing; the config stores dimensionless ratios only.

use crate::codesim::PatchSpec;
use crate::geometry::{BoundaryY, LatticeSpec, PunctureSpec};
use crate::operators::ModelParams;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    pub detuning_over_rabi: f64,
    pub phase: f64,
    pub blockade_over_spacing: f64,
    pub trunc_over_spacing: f64,
    /// Detuning multiplier on e-condensing puncture boundaries.
    pub e_detuning_scale: f64,
}

impl ModelConfig {
    pub fn to_params(&self, spacing: f64) -> ModelParams {
        ModelParams {
            rabi: 1.0,
            detuning: self.detuning_over_rabi,
            phase: self.phase,
            blockade_radius: self.blockade_over_spacing * spacing,
            trunc_radius: self.trunc_over_spacing * spacing,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of lowest eigenpairs.
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StringPlan {
    /// Cell columns carrying closed loops; at least two make a family. Open
    /// strings are the same paths truncated by one cell.
    pub loop_columns: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BraidConfig {
    pub n_logical: usize,
    /// e.g. "R2 R2" or "R1^-1 R2 R1^-1".
    pub word: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodesimConfig {
    pub patch: PatchSpec,
    /// Seeded repetitions of the two-puncture prep protocol.
    pub prep_runs: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub punctures: Vec<PunctureSpec>,
    pub model: ModelConfig,
    pub solver: SolverConfig,
    /// Detuning ratios visited by the sweep stage.
    pub sweep_detunings: Vec<f64>,
    pub strings: StringPlan,
    pub braid: BraidConfig,
    pub codesim: CodesimConfig,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lattice.cells_x == 0 || self.lattice.cells_y == 0 {
            return Err(invalid("lattice", "needs at least one cell in each direction"));
        }
        if !(self.lattice.spacing > 0.0) {
            return Err(invalid("lattice.spacing", "must be positive"));
        }
        let m = &self.model;
        for (field, v) in [
            ("model.blockade_over_spacing", m.blockade_over_spacing),
            ("model.trunc_over_spacing", m.trunc_over_spacing),
            ("model.e_detuning_scale", m.e_detuning_scale),
        ] {
            if !(v > 0.0) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        if !m.detuning_over_rabi.is_finite() || !m.phase.is_finite() {
            return Err(invalid("model", "detuning and phase must be finite"));
        }
        if self.solver.k == 0 {
            return Err(invalid("solver.k", "must request at least one eigenpair"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(invalid("solver.tol", "must be positive"));
        }
        for &c in &self.strings.loop_columns {
            if c >= self.lattice.cells_x {
                return Err(invalid(
                    "strings.loop_columns",
                    format!("column {c} outside the {}-column lattice", self.lattice.cells_x),
                ));
            }
        }
        for &d in &self.sweep_detunings {
            if !d.is_finite() {
                return Err(invalid("sweep_detunings", "entries must be finite"));
            }
        }
        if self.braid.n_logical == 0 {
            return Err(invalid("braid.n_logical", "must be at least 1"));
        }
        if self.codesim.prep_runs == 0 {
            return Err(invalid("codesim.prep_runs", "must be at least 1"));
        }
        Ok(())
    }

    /// The dual-evolution parameter set used for X-string rotations; only
    /// the blockade/truncation radii come from the evolution column.
    pub fn evolution_params(&self) -> ModelParams {
        ModelParams::dual_evolution(self.lattice.spacing)
    }

    /// Canonical JSON used for hashing; serialization is field-ordered so
    /// identical configs hash identically.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Working-point defaults: QSL parameters on a small periodic cylinder.
pub fn default_config() -> ExperimentConfig {
    ExperimentConfig {
        lattice: LatticeSpec {
            cells_x: 2,
            cells_y: 2,
            boundary_y: BoundaryY::Periodic,
            spacing: 1.0,
        },
        punctures: Vec::new(),
        model: ModelConfig {
            detuning_over_rabi: 3.5,
            phase: 0.0,
            blockade_over_spacing: 2.4,
            trunc_over_spacing: 7f64.sqrt(),
            e_detuning_scale: 0.48,
        },
        solver: SolverConfig { k: 2, tol: 1e-10, seed: 7 },
        sweep_detunings: vec![1.0, 1.75, 3.5, 5.25],
        strings: StringPlan { loop_columns: vec![0, 1] },
        braid: BraidConfig { n_logical: 2, word: "R2 R2".into() },
        codesim: CodesimConfig { patch: PatchSpec::default_two_puncture(), prep_runs: 1000 },
    }
}

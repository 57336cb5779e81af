//! Stage runner: geometry -> Hamiltonian -> solve -> measure -> classify,
//! plus the braid and puncture-code stages. Every stage writes its artifacts
//! into the output directory and a manifest listing each file with a
//! checksum; reruns with the same config and seeds are byte-identical.

use crate::anyons::{compile_braid, controlled_z_decomposition, AnyonError, BraidWord};
use crate::codesim::{
    build_patch, measure_table1_signature, run_protocol, two_puncture_prep_script, CodesimError,
    Step,
};
use crate::config::{ConfigError, ExperimentConfig};
use crate::geometry::{
    apply_puncture, build_ruby_lattice, GeometryError, Lattice, StringKind, StringPath, Topology,
};
use crate::observables::{
    classify_phase, expect_x_string, expect_z_string, normalized_expectation,
    normalized_x_expectation, ObservableError, PhaseLabel, PhaseThresholds, StringMeasurement,
};
use crate::operators::{build_hamiltonian, ModelParams, OccupationBasis, OperatorError};
use crate::spectra::{ground_states, SpectraError, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Anyon(#[from] AnyonError),
    #[error(transparent)]
    Codesim(#[from] CodesimError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    /// 1 for validation problems, 2 for numerical/runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Gs,
    Sweep,
    Strings,
    Braid,
    Codesim,
    Validate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: Stage,
    pub version: String,
    pub config_sha256: String,
    pub wall_seconds: f64,
    pub files: Vec<FileRecord>,
    pub summary: serde_json::Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

struct Emitter {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Emitter {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileRecord {
            name: name.into(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }
}

pub fn run(
    cfg: &ExperimentConfig,
    stage: Stage,
    out_dir: &Path,
) -> Result<RunManifest, PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = std::time::Instant::now();
    let mut em = Emitter { dir: out_dir.to_path_buf(), files: Vec::new() };
    em.write("config.json", cfg.canonical_json().as_bytes())?;
    let summary = match stage {
        Stage::Gs => run_gs(cfg, &mut em)?,
        Stage::Sweep => run_sweep(cfg, &mut em)?,
        Stage::Strings => run_strings(cfg, &mut em)?,
        Stage::Braid => run_braid(cfg, &mut em)?,
        Stage::Codesim => run_codesim(cfg, &mut em)?,
        Stage::Validate => run_validate(cfg)?,
    };
    let manifest = RunManifest {
        stage,
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(cfg.canonical_json().as_bytes()),
        wall_seconds: started.elapsed().as_secs_f64(),
        files: em.files,
        summary,
    };
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Re-hash every file listed in a run's manifest.
pub fn verify_manifest(out_dir: &Path) -> Result<RunManifest, PipelineError> {
    let text = std::fs::read_to_string(out_dir.join("manifest.json"))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    for f in &manifest.files {
        let bytes = std::fs::read(out_dir.join(&f.name))?;
        if sha256_hex(&bytes) != f.sha256 {
            return Err(PipelineError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("checksum mismatch for {}", f.name),
            )));
        }
    }
    Ok(manifest)
}

fn build_lattice(cfg: &ExperimentConfig) -> Result<Lattice, PipelineError> {
    let lattice = build_ruby_lattice(&cfg.lattice)?;
    if cfg.punctures.is_empty() {
        return Ok(lattice);
    }
    let mut punctures = cfg.punctures.clone();
    for p in &mut punctures {
        p.e_detuning_scale = cfg.model.e_detuning_scale;
    }
    Ok(apply_puncture(&lattice, &punctures)?)
}

fn solve_ground(
    cfg: &ExperimentConfig,
    lattice: &Lattice,
    params: &ModelParams,
    k: usize,
) -> Result<(Arc<OccupationBasis>, crate::spectra::EigenResult), PipelineError> {
    let basis = Arc::new(OccupationBasis::triangle_restricted(lattice)?);
    let h = build_hamiltonian(lattice, params, &basis)?;
    let res = ground_states(&h, &basis, k, cfg.solver.tol, cfg.solver.seed)?;
    Ok((basis, res))
}

fn run_gs(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<serde_json::Value, PipelineError> {
    let lattice = build_lattice(cfg)?;
    let params = cfg.model.to_params(cfg.lattice.spacing);
    let basis = Arc::new(OccupationBasis::triangle_restricted(&lattice)?);
    let h = build_hamiltonian(&lattice, &params, &basis)?;
    let mut coo = Vec::new();
    h.export_coo(&mut coo)?;
    em.write("hamiltonian.coo", &coo)?;
    let res = ground_states(&h, &basis, cfg.solver.k, cfg.solver.tol, cfg.solver.seed)?;
    let mut amps = Vec::with_capacity(res.eigenvectors.len() * basis.len() * 16);
    for v in &res.eigenvectors {
        for a in &v.amps {
            amps.extend_from_slice(&a.re.to_le_bytes());
            amps.extend_from_slice(&a.im.to_le_bytes());
        }
    }
    em.write("gs_amplitudes.bin", &amps)?;
    let summary = serde_json::json!({
        "n_sites": lattice.n_sites(),
        "basis_dim": basis.len(),
        "params": params,
        "seed": cfg.solver.seed,
        "eigenvalues": res.eigenvalues,
        "residuals": res.residuals,
        "matvecs": res.iterations,
        "converged": res.converged,
    });
    em.write("gs_summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

/// Loop paths at the configured columns plus their open truncations (the
/// same path with the last cell's sites dropped).
fn string_families(
    cfg: &ExperimentConfig,
    lattice: &Lattice,
) -> Result<[Vec<StringPath>; 4], PipelineError> {
    let mut closed_z = Vec::new();
    let mut closed_x = Vec::new();
    let mut open_z = Vec::new();
    let mut open_x = Vec::new();
    for &c in &cfg.strings.loop_columns {
        for (kind, closed, open, per_cell) in [
            (StringKind::Z, &mut closed_z, &mut open_z, 2usize),
            (StringKind::XDual, &mut closed_x, &mut open_x, 1usize),
        ] {
            let full = lattice.loop_path(c, kind)?;
            let mut cut = full.clone();
            cut.topology = Topology::Open;
            cut.sites.truncate(full.sites.len() - per_cell);
            closed.push(full);
            open.push(cut);
        }
    }
    Ok([closed_z, closed_x, open_z, open_x])
}

struct PhasePoint {
    closed_z: StringMeasurement,
    closed_x: StringMeasurement,
    open_z: StringMeasurement,
    open_x: StringMeasurement,
    label: PhaseLabel,
}

fn measure_phase_point(
    cfg: &ExperimentConfig,
    lattice: &Lattice,
    psi: &StateVector,
) -> Result<PhasePoint, PipelineError> {
    let evo = cfg.evolution_params();
    let [closed_z, closed_x, open_z, open_x] = string_families(cfg, lattice)?;
    let mean = |vals: &[f64]| vals.iter().sum::<f64>() / vals.len() as f64;
    let cz = if closed_z.len() >= 2 {
        normalized_expectation(psi, &closed_z, "closed-z")?
    } else {
        StringMeasurement::single("closed-z", expect_z_string(psi, &closed_z[0])?)
    };
    let cx = if closed_x.len() >= 2 {
        normalized_x_expectation(psi, &closed_x, lattice, &evo, "closed-x")?
    } else {
        StringMeasurement::single("closed-x", expect_x_string(psi, &closed_x[0], lattice, &evo)?)
    };
    let oz: Vec<f64> =
        open_z.iter().map(|s| expect_z_string(psi, s)).collect::<Result<_, _>>()?;
    let ox: Vec<f64> = open_x
        .iter()
        .map(|s| expect_x_string(psi, s, lattice, &evo))
        .collect::<Result<_, _>>()?;
    let open_z = StringMeasurement::single("open-z", mean(&oz));
    let open_x = StringMeasurement::single("open-x", mean(&ox));
    let label = classify_phase(&cz, &cx, &open_z, &open_x, &PhaseThresholds::default());
    Ok(PhasePoint { closed_z: cz, closed_x: cx, open_z, open_x, label })
}

fn run_sweep(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<serde_json::Value, PipelineError> {
    let lattice = build_lattice(cfg)?;
    let mut csv = String::from(
        "detuning_over_rabi,closed_z,closed_x,open_z,open_x,label\n",
    );
    let mut points = Vec::new();
    for &d in &cfg.sweep_detunings {
        let params = ModelParams { detuning: d, ..cfg.model.to_params(cfg.lattice.spacing) };
        let (_, res) = solve_ground(cfg, &lattice, &params, 1)?;
        let point = measure_phase_point(cfg, &lattice, &res.eigenvectors[0])?;
        let label = serde_json::to_value(point.label)?;
        csv.push_str(&format!(
            "{d},{:.12},{:.12},{:.12},{:.12},{}\n",
            point.closed_z.value(),
            point.closed_x.value(),
            point.open_z.value(),
            point.open_x.value(),
            label.as_str().unwrap(),
        ));
        points.push(serde_json::json!({
            "detuning_over_rabi": d,
            "energy": res.eigenvalues[0],
            "closed_z": point.closed_z,
            "closed_x": point.closed_x,
            "open_z": point.open_z,
            "open_x": point.open_x,
            "label": point.label,
        }));
    }
    em.write("sweep.csv", csv.as_bytes())?;
    let summary = serde_json::json!({ "points": points });
    em.write("sweep.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

fn csv_row(state: usize, m: &StringMeasurement, kind: &str) -> String {
    let normalized = m.normalized.map_or(String::new(), |v| format!("{v:.12}"));
    format!(
        "{state},{},{kind},{:.12},{normalized},{:.12}\n",
        m.path_label, m.raw, m.stderr
    )
}

fn run_strings(
    cfg: &ExperimentConfig,
    em: &mut Emitter,
) -> Result<serde_json::Value, PipelineError> {
    let lattice = build_lattice(cfg)?;
    let params = cfg.model.to_params(cfg.lattice.spacing);
    let (_, res) = solve_ground(cfg, &lattice, &params, cfg.solver.k)?;
    let mut csv =
        String::from("state_id,path_id,kind,raw,normalized,stderr\n");
    let mut states = Vec::new();
    for (state, psi) in res.eigenvectors.iter().enumerate() {
        let point = measure_phase_point(cfg, &lattice, psi)?;
        csv.push_str(&csv_row(state, &point.closed_z, "z_loop"));
        csv.push_str(&csv_row(state, &point.closed_x, "x_loop"));
        csv.push_str(&csv_row(state, &point.open_z, "z_open"));
        csv.push_str(&csv_row(state, &point.open_x, "x_open"));
        states.push(serde_json::json!({
            "state_id": state,
            "energy": res.eigenvalues[state],
            "closed_z": point.closed_z,
            "closed_x": point.closed_x,
            "open_z": point.open_z,
            "open_x": point.open_x,
            "label": point.label,
        }));
    }
    em.write("measurements.csv", csv.as_bytes())?;
    let geometry = lattice.to_json(&[] as &[(&str, &StringPath)]);
    em.write("lattice.json", serde_json::to_string_pretty(&geometry)?.as_bytes())?;
    let summary = serde_json::json!({ "states": states });
    em.write("strings.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

fn matrix_json(m: &DMatrix<Complex64>) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    serde_json::json!(rows)
}

fn run_braid(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<serde_json::Value, PipelineError> {
    let word = BraidWord::parse(&cfg.braid.word)?;
    let braid = compile_braid(&word, cfg.braid.n_logical)?;
    let mut summary = serde_json::json!({
        "word": word.to_string(),
        "n_logical": cfg.braid.n_logical,
        "logical": matrix_json(&braid.logical),
        "canonical_logical": matrix_json(&braid.canonical_logical()),
        "global_phase": braid.global_phase,
        "lattice_action": matrix_json(&braid.lattice_action),
        "leakage": braid.leakage,
    });
    if cfg.braid.n_logical == 2 {
        let report = controlled_z_decomposition()?;
        summary["controlled_z"] = serde_json::json!({
            "r56": matrix_json(&report.r56),
            "r34": matrix_json(&report.r34),
            "r56_block_error": report.r56_block_error,
            "r56_literal_error": report.r56_literal_error,
            "r34_single_qubit_error": report.r34_single_qubit_error,
            "r12_squared_is_z": report.r12_squared_is_z,
            "pass": report.pass,
        });
    }
    em.write("braid.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

fn run_codesim(
    cfg: &ExperimentConfig,
    em: &mut Emitter,
) -> Result<serde_json::Value, PipelineError> {
    let spec = &cfg.codesim.patch;
    // the six reference rows: four by direct string application, two via
    // the prep protocol steered by a loop correction
    let mut table = Vec::new();
    let direct: [(&str, &[Step]); 4] = [
        ("identity", &[]),
        ("e", &[Step::ApplyXString]),
        ("m", &[Step::ApplyZString]),
        ("epsilon", &[Step::ApplyXString, Step::ApplyZString]),
    ];
    for (name, script) in direct {
        let (patch, mut t) = build_patch(spec, cfg.solver.seed)?;
        run_protocol(script, &patch, &mut t)?;
        let sig = measure_table1_signature(&patch, &t)?;
        table.push(serde_json::json!({ "prepared": name, "classified": sig }));
    }
    for want in [1i8, -1] {
        let (patch, mut t) = build_patch(spec, cfg.solver.seed)?;
        let log = run_protocol(&two_puncture_prep_script(), &patch, &mut t)?;
        if log[0].outcome != Some(want) {
            t.apply_pauli(&patch.z_loop(0, 0)?);
        }
        let sig = measure_table1_signature(&patch, &t)?;
        let name = if want > 0 { "plus" } else { "minus" };
        table.push(serde_json::json!({ "prepared": name, "classified": sig }));
    }
    em.write(
        "table1.json",
        serde_json::to_string_pretty(&serde_json::json!({ "rows": table }))?.as_bytes(),
    )?;
    // seeded repetitions of the prep protocol, logged as JSON lines
    let mut jsonl = String::new();
    let mut plus = 0usize;
    for run in 0..cfg.codesim.prep_runs {
        let (patch, mut t) = build_patch(spec, cfg.solver.seed.wrapping_add(run as u64))?;
        let log = run_protocol(&two_puncture_prep_script(), &patch, &mut t)?;
        if log[0].outcome == Some(1) {
            plus += 1;
        }
        for rec in &log {
            let mut line = serde_json::to_value(rec)?;
            line["run"] = serde_json::json!(run);
            jsonl.push_str(&serde_json::to_string(&line)?);
            jsonl.push('\n');
        }
    }
    em.write("prep_outcomes.jsonl", jsonl.as_bytes())?;
    let summary = serde_json::json!({
        "table1": table,
        "prep_runs": cfg.codesim.prep_runs,
        "plus_fraction": plus as f64 / cfg.codesim.prep_runs as f64,
    });
    em.write("codesim_summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

fn run_validate(cfg: &ExperimentConfig) -> Result<serde_json::Value, PipelineError> {
    let lattice = build_lattice(cfg)?;
    let basis = OccupationBasis::triangle_restricted(&lattice)?;
    let evo = cfg.evolution_params();
    crate::operators::check_factorization(&lattice, &evo)?;
    BraidWord::parse(&cfg.braid.word)?;
    build_patch(&cfg.codesim.patch, cfg.solver.seed)?;
    Ok(serde_json::json!({
        "ok": true,
        "n_sites": lattice.n_sites(),
        "basis_dim": basis.len(),
        "dual_evolution_factorizes": true,
    }))
}

//! Controlled-string protocols on the punctured patch.
//!
//! A protocol script is an ordered list of steps: ancilla preparation,
//! controlled connector strings, Pauli measurements on ancillas, Bell-pair
//! measurements, and Table-1 signature readout. Every measurement outcome is
//! logged with a deterministic flag; logs serialize to JSON lines.

use crate::observables::{
    classify_ground_state, GroundStateClassification, StringMeasurement,
};
use crate::pauli::{Pauli, PauliWord};
use serde::{Deserialize, Serialize};

use super::patch::{CodePatch, CodesimError};
use super::tableau::Tableau;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    /// Put two ancillas in the Bell state `(|01> + |10>)/sqrt(2)`.
    PrepareBellPair { ancillas: [usize; 2] },
    /// Put one ancilla in `|+>`.
    PreparePlus { ancilla: usize },
    /// Flip one ancilla to `|1>`.
    FlipAncilla { ancilla: usize },
    /// Controlled Z connector between the punctures' m segments.
    ControlledZString { ancilla: usize },
    /// Controlled X connector between the punctures' e segments.
    ControlledXString { ancilla: usize },
    /// Uncontrolled connector applications (direct charge creation).
    ApplyZString,
    ApplyXString,
    /// Measure a Pauli word on ancilla qubits.
    MeasureAncilla { ops: Vec<(usize, Pauli)> },
    /// Measure XX and ZZ on an ancilla pair.
    BellMeasure { ancillas: [usize; 2] },
    /// Read the four Table-1 operators.
    MeasureSignature,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub step: usize,
    pub operator: String,
    pub outcome: Option<i8>,
    pub deterministic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<GroundStateClassification>,
}

pub fn run_protocol(
    script: &[Step],
    patch: &CodePatch,
    t: &mut Tableau,
) -> Result<Vec<OutcomeRecord>, CodesimError> {
    let mut log = Vec::new();
    for (step, s) in script.iter().enumerate() {
        match s {
            Step::PrepareBellPair { ancillas } => {
                let a = patch.ancilla_qubit(ancillas[0])?;
                let b = patch.ancilla_qubit(ancillas[1])?;
                // |00> -> (|01> + |10>)/sqrt(2)
                t.h(a);
                t.controlled_word(a, &PauliWord::single(t.n_qubits(), b, Pauli::X));
                t.x(b);
            }
            Step::PreparePlus { ancilla } => {
                t.h(patch.ancilla_qubit(*ancilla)?);
            }
            Step::FlipAncilla { ancilla } => {
                t.x(patch.ancilla_qubit(*ancilla)?);
            }
            Step::ControlledZString { ancilla } => {
                t.controlled_word(patch.ancilla_qubit(*ancilla)?, &patch.z_string()?);
            }
            Step::ControlledXString { ancilla } => {
                t.controlled_word(patch.ancilla_qubit(*ancilla)?, &patch.x_string()?);
            }
            Step::ApplyZString => t.apply_pauli(&patch.z_string()?),
            Step::ApplyXString => t.apply_pauli(&patch.x_string()?),
            Step::MeasureAncilla { ops } => {
                if ops.is_empty() {
                    return Err(CodesimError::BadStep(step, "empty measurement".into()));
                }
                let ops: Vec<(usize, Pauli)> = ops
                    .iter()
                    .map(|&(k, p)| Ok((patch.ancilla_qubit(k)?, p)))
                    .collect::<Result<_, CodesimError>>()?;
                let w = PauliWord::from_ops(t.n_qubits(), &ops);
                let (outcome, deterministic) = t.measure(&w);
                log.push(OutcomeRecord {
                    step,
                    operator: w.to_string(),
                    outcome: Some(outcome),
                    deterministic,
                    signature: None,
                });
            }
            Step::BellMeasure { ancillas } => {
                let a = patch.ancilla_qubit(ancillas[0])?;
                let b = patch.ancilla_qubit(ancillas[1])?;
                for p in [Pauli::X, Pauli::Z] {
                    let w = PauliWord::from_ops(t.n_qubits(), &[(a, p), (b, p)]);
                    let (outcome, deterministic) = t.measure(&w);
                    log.push(OutcomeRecord {
                        step,
                        operator: w.to_string(),
                        outcome: Some(outcome),
                        deterministic,
                        signature: None,
                    });
                }
            }
            Step::MeasureSignature => {
                let sig = measure_table1_signature(patch, t)?;
                log.push(OutcomeRecord {
                    step,
                    operator: "table1-signature".into(),
                    outcome: None,
                    deterministic: true,
                    signature: Some(sig),
                });
            }
        }
    }
    Ok(log)
}

/// Read the four Table-1 operators without collapsing: deterministic
/// outcomes map to their sign, random ones to 0. When both connector
/// strings are individually random their product may still be pinned (the
/// `|+->` rows); in that case the product value is reported for both.
pub fn measure_table1_signature(
    patch: &CodePatch,
    t: &Tableau,
) -> Result<GroundStateClassification, CodesimError> {
    let zc = t.expectation(&patch.z_loop(0, 0)?);
    let xc = t.expectation(&patch.x_loop(0, 0)?);
    let zs_word = patch.z_string()?;
    let xs_word = patch.x_string()?;
    let zs = t.expectation(&zs_word);
    let xs = t.expectation(&xs_word);
    let (zs, xs) = match (zs, xs) {
        (None, None) => match t.expectation(&zs_word.mul(&xs_word)) {
            Some(p) => (Some(p), Some(p)),
            None => (None, None),
        },
        other => other,
    };
    let to_f = |v: Option<i8>| v.map_or(0.0, f64::from);
    let m = |label: &str, v: Option<i8>| StringMeasurement::single(label, to_f(v));
    Ok(classify_ground_state(
        &m("z-loop", zc),
        &m("x-loop", xc),
        &m("z-connector", zs),
        &m("x-connector", xs),
        0.1,
    ))
}

/// The two-puncture state-preparation protocol: an ancilla Bell pair
/// controls the X connector (first ancilla) and the Z connector (second),
/// then the pair is measured in the Bell basis. The XX outcome is the sigma
/// of the prepared `|sigma>` state.
pub fn two_puncture_prep_script() -> Vec<Step> {
    vec![
        Step::PrepareBellPair { ancillas: [0, 1] },
        Step::ControlledXString { ancilla: 0 },
        Step::ControlledZString { ancilla: 1 },
        Step::MeasureAncilla { ops: vec![(0, Pauli::X), (1, Pauli::X)] },
        Step::MeasureSignature,
    ]
}

//! Punctured planar-code patch on an abstract square lattice.
//!
//! Qubits live on the edges of a `width x height` grid of faces; every edge
//! is present. Stabilizers are the plaquette Z-words and vertex X-words. A
//! mixed-boundary puncture removes one plaquette and the star at that face's
//! south-west corner, keeping the qubits: the removed plaquette word becomes
//! the Z loop detecting an `e` charge in the puncture, the removed star the
//! X loop detecting `m`. Connector strings run between same-row punctures:
//! the Z string along the vertex path between the removed stars, the X
//! string along the dual path between the removed faces; they are
//! edge-disjoint by construction.

use crate::pauli::{Pauli, PauliWord};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use super::tableau::Tableau;

#[derive(Debug, Error)]
pub enum CodesimError {
    #[error("patch spec invalid: {0}")]
    BadSpec(String),
    #[error("loop of radius {radius} around puncture {puncture} would cross another puncture or leave the patch")]
    BadLoop { puncture: usize, radius: usize },
    #[error("operation needs exactly two punctures, patch has {0}")]
    NeedTwoPunctures(usize),
    #[error("unknown ancilla index {0}")]
    BadAncilla(usize),
    #[error("malformed protocol step {0}: {1}")]
    BadStep(usize, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub x: usize,
    pub y: usize,
    pub horizontal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatchSpec {
    /// Faces in x and y.
    pub width: usize,
    pub height: usize,
    /// Punctured faces; the matching star sits at each face's SW corner.
    /// Must share a row and be listed west to east.
    pub punctures: Vec<(usize, usize)>,
    pub n_ancilla: usize,
}

impl PatchSpec {
    /// Distance-3 default: 5x2 faces, two punctures in the middle row.
    pub fn default_two_puncture() -> Self {
        PatchSpec { width: 5, height: 2, punctures: vec![(1, 1), (3, 1)], n_ancilla: 2 }
    }

    /// Smallest patch the dense oracle handles comfortably.
    pub fn minimal_two_puncture() -> Self {
        PatchSpec { width: 3, height: 1, punctures: vec![(0, 0), (2, 0)], n_ancilla: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct CodePatch {
    pub spec: PatchSpec,
    pub n_code: usize,
    edges: Vec<Edge>,
    edge_idx: HashMap<Edge, usize>,
    /// Stabilizer generators over all qubits (code + ancilla).
    pub generators: Vec<PauliWord>,
}

impl CodePatch {
    pub fn n_qubits(&self) -> usize {
        self.n_code + self.spec.n_ancilla
    }

    pub fn ancilla_qubit(&self, k: usize) -> Result<usize, CodesimError> {
        if k >= self.spec.n_ancilla {
            return Err(CodesimError::BadAncilla(k));
        }
        Ok(self.n_code + k)
    }

    pub fn qubit(&self, e: Edge) -> usize {
        self.edge_idx[&e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn word(&self, ops: &[(Edge, Pauli)]) -> PauliWord {
        let ops: Vec<(usize, Pauli)> = ops.iter().map(|&(e, p)| (self.qubit(e), p)).collect();
        PauliWord::from_ops(self.n_qubits(), &ops)
    }

    /// Z word on the four edges of a face.
    pub fn plaquette(&self, fx: usize, fy: usize) -> PauliWord {
        self.word(&[
            (Edge { x: fx, y: fy, horizontal: true }, Pauli::Z),
            (Edge { x: fx, y: fy + 1, horizontal: true }, Pauli::Z),
            (Edge { x: fx, y: fy, horizontal: false }, Pauli::Z),
            (Edge { x: fx + 1, y: fy, horizontal: false }, Pauli::Z),
        ])
    }

    /// X word on the edges incident to a vertex.
    pub fn star(&self, vx: usize, vy: usize) -> PauliWord {
        let mut ops = Vec::new();
        if vx > 0 {
            ops.push((Edge { x: vx - 1, y: vy, horizontal: true }, Pauli::X));
        }
        if vx < self.spec.width {
            ops.push((Edge { x: vx, y: vy, horizontal: true }, Pauli::X));
        }
        if vy > 0 {
            ops.push((Edge { x: vx, y: vy - 1, horizontal: false }, Pauli::X));
        }
        if vy < self.spec.height {
            ops.push((Edge { x: vx, y: vy, horizontal: false }, Pauli::X));
        }
        self.word(&ops)
    }

    /// Z loop around a puncture: the product of plaquette words over faces
    /// within Chebyshev distance `radius` of the punctured face. Radius 0 is
    /// the removed plaquette itself; any radius gives the same outcome as
    /// long as the region avoids other punctures.
    pub fn z_loop(&self, puncture: usize, radius: usize) -> Result<PauliWord, CodesimError> {
        let (fx, fy) = self.spec.punctures[puncture];
        let mut w = PauliWord::identity(self.n_qubits());
        for gx in fx.saturating_sub(radius)..=(fx + radius).min(self.spec.width - 1) {
            for gy in fy.saturating_sub(radius)..=(fy + radius).min(self.spec.height - 1) {
                if (gx, gy) != (fx, fy) && self.spec.punctures.contains(&(gx, gy)) {
                    return Err(CodesimError::BadLoop { puncture, radius });
                }
                w = w.mul(&self.plaquette(gx, gy));
            }
        }
        Ok(w)
    }

    /// X loop around a puncture: the product of star words over vertices
    /// within Chebyshev distance `radius` of the removed star.
    pub fn x_loop(&self, puncture: usize, radius: usize) -> Result<PauliWord, CodesimError> {
        let (vx, vy) = self.spec.punctures[puncture];
        let mut w = PauliWord::identity(self.n_qubits());
        for gx in vx.saturating_sub(radius)..=(vx + radius).min(self.spec.width) {
            for gy in vy.saturating_sub(radius)..=(vy + radius).min(self.spec.height) {
                if (gx, gy) != (vx, vy) && self.spec.punctures.contains(&(gx, gy)) {
                    return Err(CodesimError::BadLoop { puncture, radius });
                }
                w = w.mul(&self.star(gx, gy));
            }
        }
        Ok(w)
    }

    /// Z connector between the removed stars of the two punctures, along
    /// horizontal edges of their shared row.
    pub fn z_string(&self) -> Result<PauliWord, CodesimError> {
        let [(x1, y), (x2, _)] = self.two_punctures()?;
        let ops: Vec<(Edge, Pauli)> = (x1..x2)
            .map(|x| (Edge { x, y, horizontal: true }, Pauli::Z))
            .collect();
        Ok(self.word(&ops))
    }

    /// X connector between the removed plaquettes, along the vertical edges
    /// crossed by the dual path through their shared row.
    pub fn x_string(&self) -> Result<PauliWord, CodesimError> {
        let [(x1, y), (x2, _)] = self.two_punctures()?;
        let ops: Vec<(Edge, Pauli)> = (x1 + 1..=x2)
            .map(|x| (Edge { x, y, horizontal: false }, Pauli::X))
            .collect();
        Ok(self.word(&ops))
    }

    fn two_punctures(&self) -> Result<[(usize, usize); 2], CodesimError> {
        match self.spec.punctures[..] {
            [a, b] => Ok([a, b]),
            _ => Err(CodesimError::NeedTwoPunctures(self.spec.punctures.len())),
        }
    }
}

/// Build the patch and a tableau initialized to the `|I>` ground state:
/// every generator fixed to `+1`, and additionally the removed plaquettes
/// and the first removed star, which pins the loop signature at `(+1, +1)`.
pub fn build_patch(spec: &PatchSpec, seed: u64) -> Result<(CodePatch, Tableau), CodesimError> {
    validate(spec)?;
    let mut edges = Vec::new();
    for y in 0..=spec.height {
        for x in 0..spec.width {
            edges.push(Edge { x, y, horizontal: true });
        }
    }
    for y in 0..spec.height {
        for x in 0..=spec.width {
            edges.push(Edge { x, y, horizontal: false });
        }
    }
    let edge_idx = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut patch = CodePatch {
        spec: spec.clone(),
        n_code: edges.len(),
        edges,
        edge_idx,
        generators: Vec::new(),
    };
    for fy in 0..spec.height {
        for fx in 0..spec.width {
            if !spec.punctures.contains(&(fx, fy)) {
                patch.generators.push(patch.plaquette(fx, fy));
            }
        }
    }
    for vy in 0..=spec.height {
        for vx in 0..=spec.width {
            if !spec.punctures.contains(&(vx, vy)) {
                patch.generators.push(patch.star(vx, vy));
            }
        }
    }
    let mut t = Tableau::new(patch.n_qubits(), seed);
    for g in &patch.generators {
        t.fix(g, 1);
    }
    for (p, &(fx, fy)) in spec.punctures.iter().enumerate() {
        t.fix(&patch.plaquette(fx, fy), 1);
        if p == 0 {
            t.fix(&patch.star(fx, fy), 1);
        }
    }
    debug_assert!(t.is_valid());
    Ok((patch, t))
}

fn validate(spec: &PatchSpec) -> Result<(), CodesimError> {
    if spec.width == 0 || spec.height == 0 {
        return Err(CodesimError::BadSpec("empty patch".into()));
    }
    for &(fx, fy) in &spec.punctures {
        if fx >= spec.width || fy >= spec.height {
            return Err(CodesimError::BadSpec(format!("puncture ({fx},{fy}) outside the patch")));
        }
    }
    match spec.punctures[..] {
        [] | [_] => Ok(()),
        [(x1, y1), (x2, y2)] => {
            if y1 != y2 {
                return Err(CodesimError::BadSpec("punctures must share a row".into()));
            }
            if x1 >= x2 {
                return Err(CodesimError::BadSpec("punctures must be listed west to east".into()));
            }
            Ok(())
        }
        _ => Err(CodesimError::BadSpec("at most two punctures supported".into())),
    }
}

/// GF(2) rank of the symplectic part of a set of Pauli words.
pub fn gf2_rank(words: &[PauliWord]) -> usize {
    if words.is_empty() {
        return 0;
    }
    let n = words[0].len();
    let mut rows: Vec<Vec<bool>> = words
        .iter()
        .map(|w| (0..n).map(|q| w.has_x(q)).chain((0..n).map(|q| w.has_z(q))).collect())
        .collect();
    let cols = 2 * n;
    let mut rank = 0;
    for c in 0..cols {
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) {
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[c] {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_counts() {
        let (patch, _) = build_patch(&PatchSpec::default_two_puncture(), 0).unwrap();
        assert_eq!(patch.n_code, 27);
        assert_eq!(patch.n_qubits(), 29);
        let (patch, _) = build_patch(&PatchSpec::minimal_two_puncture(), 0).unwrap();
        assert_eq!(patch.n_code, 10);
    }

    #[test]
    fn generators_commute_and_counts_match_degeneracy() {
        // no punctures: unique state; one mixed puncture: one encoded qubit;
        // two: three encoded binary degrees of freedom (the four anyonic
        // ground states plus the loop pair pinned at initialization).
        for (punctures, deficit) in [
            (vec![], 0usize),
            (vec![(1usize, 1usize)], 1),
            (vec![(1, 1), (3, 1)], 3),
        ] {
            let spec = PatchSpec { punctures, n_ancilla: 0, ..PatchSpec::default_two_puncture() };
            let (patch, t) = build_patch(&spec, 3).unwrap();
            for a in &patch.generators {
                for b in &patch.generators {
                    assert!(a.commutes_with(b));
                }
            }
            assert_eq!(gf2_rank(&patch.generators), patch.n_code - deficit);
            assert!(t.is_valid());
        }
    }

    #[test]
    fn fresh_patch_is_the_identity_ground_state() {
        let (patch, t) = build_patch(&PatchSpec::default_two_puncture(), 1).unwrap();
        for g in &patch.generators {
            assert_eq!(t.expectation(g), Some(1));
        }
        assert_eq!(t.expectation(&patch.z_loop(0, 0).unwrap()), Some(1));
        assert_eq!(t.expectation(&patch.z_loop(1, 0).unwrap()), Some(1));
        assert_eq!(t.expectation(&patch.x_loop(0, 0).unwrap()), Some(1));
        assert_eq!(t.expectation(&patch.x_loop(1, 0).unwrap()), Some(1));
        // connectors anticommute with the pinned loop operators: random
        assert_eq!(t.expectation(&patch.z_string().unwrap()), None);
        assert_eq!(t.expectation(&patch.x_string().unwrap()), None);
    }

    #[test]
    fn loop_choice_does_not_matter() {
        let (patch, mut t) = build_patch(&PatchSpec::default_two_puncture(), 2).unwrap();
        t.apply_pauli(&patch.x_string().unwrap()); // |I> -> |e>
        for radius in [0usize, 1] {
            assert_eq!(t.expectation(&patch.z_loop(0, radius).unwrap()), Some(-1));
            assert_eq!(t.expectation(&patch.x_loop(0, radius).unwrap()), Some(1));
        }
        // loops around either puncture agree
        assert_eq!(t.expectation(&patch.z_loop(1, 0).unwrap()), Some(-1));
        assert_eq!(t.expectation(&patch.x_loop(1, 0).unwrap()), Some(1));
    }

    #[test]
    fn strings_create_the_expected_charges() {
        let (patch, mut t) = build_patch(&PatchSpec::default_two_puncture(), 4).unwrap();
        let zc = patch.z_loop(0, 0).unwrap();
        let xc = patch.x_loop(0, 0).unwrap();
        // Z string between m-boundaries creates an m pair: X loop flips
        t.apply_pauli(&patch.z_string().unwrap());
        assert_eq!(t.expectation(&zc), Some(1));
        assert_eq!(t.expectation(&xc), Some(-1));
        // applying it again restores the signature (parity rule)
        t.apply_pauli(&patch.z_string().unwrap());
        assert_eq!(t.expectation(&xc), Some(1));
        // X string between e-boundaries creates an e pair: Z loop flips
        t.apply_pauli(&patch.x_string().unwrap());
        assert_eq!(t.expectation(&zc), Some(-1));
        assert_eq!(t.expectation(&xc), Some(1));
    }

    #[test]
    fn connector_words_commute_and_are_edge_disjoint() {
        let (patch, _) = build_patch(&PatchSpec::default_two_puncture(), 0).unwrap();
        let zs = patch.z_string().unwrap();
        let xs = patch.x_string().unwrap();
        assert!(zs.commutes_with(&xs));
        for q in 0..patch.n_qubits() {
            assert!(!(zs.has_z(q) && xs.has_x(q)));
        }
        // each anticommutes with exactly the matching removed generators
        for p in 0..2 {
            assert!(!xs.commutes_with(&patch.z_loop(p, 0).unwrap()));
            assert!(!zs.commutes_with(&patch.x_loop(p, 0).unwrap()));
            assert!(xs.commutes_with(&patch.x_loop(p, 0).unwrap()));
            assert!(zs.commutes_with(&patch.z_loop(p, 0).unwrap()));
        }
        for g in &patch.generators {
            assert!(zs.commutes_with(g));
            assert!(xs.commutes_with(g));
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut spec = PatchSpec::default_two_puncture();
        spec.punctures = vec![(1, 0), (3, 1)];
        assert!(build_patch(&spec, 0).is_err());
        spec.punctures = vec![(3, 1), (1, 1)];
        assert!(build_patch(&spec, 0).is_err());
        spec.punctures = vec![(1, 1), (9, 1)];
        assert!(build_patch(&spec, 0).is_err());
    }
}

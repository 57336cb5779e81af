//! Occupation bases and sparse Hamiltonians for the blockaded Rydberg model.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = (Omega/2) sum_i (e^{-i alpha} b_i + e^{i alpha} b_i^dag)
//!     - sum_i Delta_i n_i
//!     + (1/2) sum_{i != j} V(r_ij) n_i n_j,   V(r) = Omega (R_b / r)^6
//! ```
//!
//! with the tail truncated at `trunc_radius`. `b_i` lowers the Rydberg
//! occupation `n_i`. Site-dependent detunings enter through the lattice's
//! per-site `detuning_scale`.
//!
//! Two bases are supported: the full `2^N` occupation basis, and the
//! triangle-restricted basis with at most one excitation per triangle
//! (`4^T` states, one base-4 digit per triangle: 0 = empty, k = site k of
//! the triangle excited).

use crate::geometry::Lattice;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Rabi frequency Omega; the overall energy scale.
    pub rabi: f64,
    /// Uniform detuning Delta (scaled per site by `detuning_scale`).
    pub detuning: f64,
    /// Laser phase alpha.
    pub phase: f64,
    /// Blockade radius R_b, in the same length units as the lattice.
    pub blockade_radius: f64,
    /// Interaction truncation radius.
    pub trunc_radius: f64,
}

impl ModelParams {
    /// Working point of the spin-liquid model: Delta/Omega = 3.5, alpha = 0,
    /// R_b = 2.4 a (all six nearest shells blockaded), tail kept to sqrt(7) a.
    pub fn spin_liquid(spacing: f64) -> Self {
        ModelParams {
            rabi: 1.0,
            detuning: 3.5,
            phase: 0.0,
            blockade_radius: 2.4 * spacing,
            trunc_radius: 7.0f64.sqrt() * spacing * (1.0 + 1e-9),
        }
    }

    /// Generator of the intra-triangle dual rotation: Delta = 0,
    /// alpha = -pi/2, R_b = 1.53 a, interactions truncated at a.
    pub fn dual_evolution(spacing: f64) -> Self {
        ModelParams {
            rabi: 1.0,
            detuning: 0.0,
            phase: -std::f64::consts::FRAC_PI_2,
            blockade_radius: 1.53 * spacing,
            trunc_radius: spacing * (1.0 + 1e-9),
        }
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.rabi > 0.0) {
            return Err(OperatorError::BadParams("rabi must be positive".into()));
        }
        if !(self.blockade_radius > 0.0) || !(self.trunc_radius > 0.0) {
            return Err(OperatorError::BadParams("radii must be positive".into()));
        }
        if !self.rabi.is_finite() || !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(OperatorError::BadParams("parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn interaction(&self, r: f64) -> f64 {
        self.rabi * (self.blockade_radius / r).powi(6)
    }
}

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("invalid model parameters: {0}")]
    BadParams(String),
    #[error("basis covers {basis} sites but lattice has {lattice}")]
    SiteMismatch { basis: usize, lattice: usize },
    #[error("basis too large: {0}")]
    TooLarge(String),
    #[error("triangle-factorized evolution invalid: sites {0} and {1} of different triangles interact within the truncation radius")]
    FactorizationInvalid(usize, usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    Full,
    TriangleRestricted,
}

/// Enumeration of many-body occupation states. Configurations are site
/// bitmasks (bit i = site i excited).
#[derive(Clone, Debug)]
pub struct OccupationBasis {
    pub mode: BasisMode,
    pub n_sites: usize,
    /// Triangles as site triples, in lattice order (restricted mode).
    pub triangles: Vec<[usize; 3]>,
    /// Per site: (triangle index, position within triangle).
    site_slot: Vec<(usize, usize)>,
    dim: usize,
}

impl OccupationBasis {
    pub fn full(n_sites: usize) -> Result<Self, OperatorError> {
        if n_sites > 26 {
            return Err(OperatorError::TooLarge(format!(
                "full basis over {n_sites} sites"
            )));
        }
        Ok(OccupationBasis {
            mode: BasisMode::Full,
            n_sites,
            triangles: Vec::new(),
            site_slot: Vec::new(),
            dim: 1usize << n_sites,
        })
    }

    pub fn full_for(lattice: &Lattice) -> Result<Self, OperatorError> {
        let mut b = Self::full(lattice.n_sites())?;
        b.triangles = lattice.triangles.iter().map(|t| t.sites).collect();
        b.site_slot = site_slots(lattice);
        Ok(b)
    }

    pub fn triangle_restricted(lattice: &Lattice) -> Result<Self, OperatorError> {
        let t = lattice.n_triangles();
        if t > 12 {
            return Err(OperatorError::TooLarge(format!(
                "restricted basis over {t} triangles"
            )));
        }
        Ok(OccupationBasis {
            mode: BasisMode::TriangleRestricted,
            n_sites: lattice.n_sites(),
            triangles: lattice.triangles.iter().map(|t| t.sites).collect(),
            site_slot: site_slots(lattice),
            dim: 1usize << (2 * t),
        })
    }

    pub fn len(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// Site bitmask of the `idx`-th basis state.
    pub fn config(&self, idx: usize) -> u64 {
        match self.mode {
            BasisMode::Full => idx as u64,
            BasisMode::TriangleRestricted => {
                let mut c = 0u64;
                for (t, tri) in self.triangles.iter().enumerate() {
                    let digit = (idx >> (2 * t)) & 3;
                    if digit > 0 {
                        c |= 1 << tri[digit - 1];
                    }
                }
                c
            }
        }
    }

    /// Index of a configuration, or None if it lies outside the basis.
    pub fn index_of(&self, config: u64) -> Option<usize> {
        match self.mode {
            BasisMode::Full => Some(config as usize),
            BasisMode::TriangleRestricted => {
                let mut idx = 0usize;
                let mut rest = config;
                while rest != 0 {
                    let site = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let (t, slot) = self.site_slot[site];
                    if (idx >> (2 * t)) & 3 != 0 {
                        return None; // second excitation in this triangle
                    }
                    idx |= (slot + 1) << (2 * t);
                }
                Some(idx)
            }
        }
    }

    /// (triangle index, position within triangle) for a site; only populated
    /// when the basis was built from a lattice.
    pub fn site_slot(&self, site: usize) -> (usize, usize) {
        self.site_slot[site]
    }
}

fn site_slots(lattice: &Lattice) -> Vec<(usize, usize)> {
    let mut v = vec![(0usize, 0usize); lattice.n_sites()];
    for (t, tri) in lattice.triangles.iter().enumerate() {
        for (k, &s) in tri.sites.iter().enumerate() {
            v[s] = (t, k);
        }
    }
    v
}

/// Compressed sparse row matrix over complex amplitudes.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<Complex64>,
}

impl SparseOperator {
    pub fn from_triplets(
        dim: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> SparseOperator {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols = merged.iter().map(|&(_, c, _)| c as u32).collect();
        let vals = merged.into_iter().map(|(_, _, v)| v).collect();
        SparseOperator { dim, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        use rayon::prelude::*;
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        });
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Exact Hermiticity check: every entry must have its conjugate partner.
    pub fn is_hermitian(&self) -> bool {
        let mut entries = std::collections::HashMap::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                entries.insert((r, self.cols[k] as usize), self.vals[k]);
            }
        }
        entries
            .iter()
            .all(|(&(r, c), &v)| entries.get(&(c, r)).map(|w| w.conj()) == Some(v))
    }

    pub fn dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// Text export in coordinate form: `row col re im` per line, preceded by
    /// a `dim nnz` header.
    pub fn export_coo<W: Write>(&self, mut w: W) -> Result<(), OperatorError> {
        writeln!(w, "{} {}", self.dim, self.nnz())?;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.vals[k];
                writeln!(w, "{} {} {:.17e} {:.17e}", r, self.cols[k], v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Interacting pairs within the truncation radius, with their couplings.
pub fn interaction_pairs(lattice: &Lattice, params: &ModelParams) -> Vec<(usize, usize, f64)> {
    lattice
        .pairs_within(params.trunc_radius)
        .into_iter()
        .map(|(i, j, r)| (i, j, params.interaction(r)))
        .collect()
}

pub fn build_hamiltonian(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &OccupationBasis,
) -> Result<SparseOperator, OperatorError> {
    params.validate()?;
    if basis.n_sites != lattice.n_sites() {
        return Err(OperatorError::SiteMismatch {
            basis: basis.n_sites,
            lattice: lattice.n_sites(),
        });
    }
    build_hamiltonian_inner(lattice, params, basis)
}

fn build_hamiltonian_inner(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &OccupationBasis,
) -> Result<SparseOperator, OperatorError> {
    let n = lattice.n_sites();
    let pairs = interaction_pairs(lattice, params);
    let half = 0.5 * params.rabi;
    // b_i raises the occupation: <g|H|r> = (Omega/2) e^{i alpha}.
    let de_excite = half * Complex64::from_polar(1.0, params.phase);
    let excite = half * Complex64::from_polar(1.0, -params.phase);
    let site_delta: Vec<f64> = lattice
        .sites
        .iter()
        .map(|s| params.detuning * s.detuning_scale)
        .collect();

    let mut triplets = Vec::new();
    for idx in 0..basis.len() {
        let config = basis.config(idx);
        let mut diag = 0.0;
        for i in 0..n {
            if config >> i & 1 == 1 {
                diag -= site_delta[i];
            }
        }
        for &(i, j, v) in &pairs {
            if config >> i & 1 == 1 && config >> j & 1 == 1 {
                diag += v;
            }
        }
        if diag != 0.0 {
            triplets.push((idx, idx, Complex64::new(diag, 0.0)));
        }
        for i in 0..n {
            let flipped = config ^ (1 << i);
            if let Some(target) = basis.index_of(flipped) {
                let amp = if config >> i & 1 == 1 { de_excite } else { excite };
                triplets.push((target, idx, amp));
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis.len(), triplets))
}

/// The 4x4 single-triangle Rabi block over {empty, site 1, site 2, site 3}:
/// first row `(Omega/2) e^{i alpha}`, first column its conjugate.
pub fn triangle_block(params: &ModelParams) -> Result<SparseOperator, OperatorError> {
    params.validate()?;
    let half = 0.5 * params.rabi;
    let top = half * Complex64::from_polar(1.0, params.phase);
    let mut triplets = Vec::new();
    for k in 1..4usize {
        triplets.push((0, k, top));
        triplets.push((k, 0, top.conj()));
    }
    Ok(SparseOperator::from_triplets(4, triplets))
}

/// Hamiltonian generating the string duality rotation: detuning forced to
/// zero and phase to -pi/2, with the caller's radii (normally `R_b = 1.53 a`,
/// truncation at `a`, so it factorizes over triangles).
pub fn build_dual_generator(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &OccupationBasis,
) -> Result<SparseOperator, OperatorError> {
    let dual = ModelParams {
        detuning: 0.0,
        phase: -std::f64::consts::FRAC_PI_2,
        ..*params
    };
    build_hamiltonian(lattice, &dual, basis)
}

/// Verify that interactions do not couple distinct triangles, i.e. that the
/// model factorizes as a product over triangle blocks.
pub fn check_factorization(lattice: &Lattice, params: &ModelParams) -> Result<(), OperatorError> {
    for (i, j, _) in interaction_pairs(lattice, params) {
        if lattice.sites[i].triangle != lattice.sites[j].triangle {
            return Err(OperatorError::FactorizationInvalid(i, j));
        }
    }
    Ok(())
}

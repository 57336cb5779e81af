//! Eigensolvers and real-time evolution.
//!
//! Ground states come from a seeded Lanczos iteration with full
//! reorthogonalization and deflation, so degenerate manifolds are resolved
//! one orthogonal vector at a time. Evolution is either Krylov-subspace
//! `exp(-i tau H)` with adaptive substeps, or the exact per-triangle
//! factorized evolution available when the interaction truncation keeps
//! triangles decoupled (the duality rotation's normal mode of operation).

use crate::geometry::Lattice;
use crate::operators::{
    check_factorization, BasisMode, ModelParams, OccupationBasis, OperatorError, SparseOperator,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("dimension mismatch: operator {op} vs state {state}")]
    DimMismatch { op: usize, state: usize },
    #[error("eigensolver did not converge: best residual {best:.3e} after {restarts} restarts")]
    NoConvergence { best: f64, restarts: usize },
    #[error("evolution step size underflow; achieved error estimate {achieved:.3e}")]
    StepSize { achieved: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A normalized (or normalizable) state over an occupation basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub basis: Arc<OccupationBasis>,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(basis: Arc<OccupationBasis>) -> Self {
        let dim = basis.len();
        StateVector { basis, amps: vec![Complex64::new(0.0, 0.0); dim] }
    }

    /// Basis state with the given index (e.g. 0 for the all-ground state).
    pub fn basis_state(basis: Arc<OccupationBasis>, idx: usize) -> Self {
        let mut s = Self::zero(basis);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn random(basis: Arc<OccupationBasis>, seed: u64) -> Self {
        let dim = basis.len();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let amps = (0..dim)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut s = StateVector { basis, amps };
        s.normalize();
        s
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn nrm2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
    pub residuals: Vec<f64>,
    /// Total matrix-vector products spent.
    pub iterations: usize,
    pub converged: bool,
}

/// Lowest `k` eigenpairs of a Hermitian sparse operator.
pub fn ground_states(
    h: &SparseOperator,
    basis: &Arc<OccupationBasis>,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<EigenResult, SpectraError> {
    if h.dim != basis.len() {
        return Err(SpectraError::DimMismatch { op: h.dim, state: basis.len() });
    }
    let dim = h.dim;
    let k = k.min(dim);
    let mut eigenvalues = Vec::new();
    let mut eigenvectors: Vec<Vec<Complex64>> = Vec::new();
    let mut residuals = Vec::new();
    let mut matvecs = 0usize;
    for pair in 0..k {
        let (lambda, vec, resid, used) =
            lanczos_lowest(h, &eigenvectors, tol, seed.wrapping_add(pair as u64))?;
        matvecs += used;
        eigenvalues.push(lambda);
        eigenvectors.push(vec);
        residuals.push(resid);
    }
    // Deflation finds the next-lowest eigenvalue each round, but enforce
    // ordering in case of near-degenerate crossings.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
    let converged = residuals.iter().all(|&r| r <= tol);
    Ok(EigenResult {
        eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
        eigenvectors: order
            .iter()
            .map(|&i| StateVector { basis: Arc::clone(basis), amps: eigenvectors[i].clone() })
            .collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        iterations: matvecs,
        converged,
    })
}

/// One deflated Lanczos run with restarts; returns (eigenvalue, vector,
/// residual, matvec count).
fn lanczos_lowest(
    h: &SparseOperator,
    deflate: &[Vec<Complex64>],
    tol: f64,
    seed: u64,
) -> Result<(f64, Vec<Complex64>, f64, usize), SpectraError> {
    let dim = h.dim;
    let free = dim - deflate.len();
    let m_max = free.min(160);
    let max_restarts = 24;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut matvecs = 0usize;

    let mut start: Vec<Complex64> = random_orthogonal(dim, deflate, &mut rng);
    let mut best: Option<(f64, Vec<Complex64>, f64)> = None;
    for restart in 0..max_restarts {
        let mut vs: Vec<Vec<Complex64>> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut v = start.clone();
        let mut v_prev: Option<Vec<Complex64>> = None;
        let mut beta_prev = 0.0;
        for _ in 0..m_max {
            let mut w = h.apply(&v);
            matvecs += 1;
            let alpha = inner(&v, &w).re;
            axpy(&mut w, Complex64::new(-alpha, 0.0), &v);
            if let Some(vp) = &v_prev {
                axpy(&mut w, Complex64::new(-beta_prev, 0.0), vp);
            }
            // Full reorthogonalization against deflated and Lanczos vectors,
            // done twice to keep orthogonality at machine precision.
            vs.push(v.clone());
            for _ in 0..2 {
                for u in deflate.iter().chain(vs.iter()) {
                    let c = inner(u, &w);
                    axpy(&mut w, -c, u);
                }
            }
            alphas.push(alpha);
            let beta = nrm2(&w);
            if beta < 1e-13 {
                break;
            }
            betas.push(beta);
            for x in &mut w {
                *x /= beta;
            }
            v_prev = Some(std::mem::replace(&mut v, w));
            beta_prev = beta;
        }
        let m = alphas.len();
        if m == 0 {
            break;
        }
        betas.truncate(m - 1);
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t.symmetric_eigen();
        let mut lowest = 0;
        for i in 1..m {
            if eig.eigenvalues[i] < eig.eigenvalues[lowest] {
                lowest = i;
            }
        }
        let lambda = eig.eigenvalues[lowest];
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        for (j, vj) in vs.iter().enumerate() {
            axpy(&mut y, Complex64::new(eig.eigenvectors[(j, lowest)], 0.0), vj);
        }
        let n = nrm2(&y);
        for x in &mut y {
            *x /= n;
        }
        let mut r = h.apply(&y);
        matvecs += 1;
        axpy(&mut r, Complex64::new(-lambda, 0.0), &y);
        let resid = nrm2(&r);
        if best.as_ref().map_or(true, |(_, _, b)| resid < *b) {
            best = Some((lambda, y.clone(), resid));
        }
        if resid <= tol {
            let (l, v, r) = best.unwrap();
            return Ok((l, v, r, matvecs));
        }
        // Restart from the Ritz vector; mix in noise occasionally in case
        // the Krylov space collapsed onto a wrong invariant subspace.
        start = y;
        if restart % 6 == 5 {
            let noise = random_orthogonal(dim, deflate, &mut rng);
            axpy(&mut start, Complex64::new(0.05, 0.0), &noise);
        }
        for u in deflate {
            let c = inner(u, &start);
            axpy(&mut start, -c, u);
        }
        let n = nrm2(&start);
        for x in &mut start {
            *x /= n;
        }
    }
    let (_, _, b) = best.unwrap_or((0.0, Vec::new(), f64::INFINITY));
    Err(SpectraError::NoConvergence { best: b, restarts: max_restarts })
}

fn random_orthogonal(
    dim: usize,
    deflate: &[Vec<Complex64>],
    rng: &mut ChaCha20Rng,
) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        for u in deflate {
            let c = inner(u, &v);
            axpy(&mut v, -c, u);
        }
        let n = nrm2(&v);
        if n > 1e-6 {
            for x in &mut v {
                *x /= n;
            }
            return v;
        }
    }
}

/// Dense Hermitian eigendecomposition, eigenvalues ascending. The slow,
/// obviously-correct reference path for small dimensions.
pub fn dense_spectrum(h: &SparseOperator) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = h.dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(h.dim, h.dim);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    (values, vectors)
}

/// `exp(-i tau H) |psi>` for a dense Hermitian matrix.
pub fn expm_apply_dense(
    h: &DMatrix<Complex64>,
    tau: f64,
    psi: &DVector<Complex64>,
) -> DVector<Complex64> {
    expm_hermitian(h, tau) * psi
}

/// `exp(-i tau H)` for a dense Hermitian matrix.
pub fn expm_hermitian(h: &DMatrix<Complex64>, tau: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -tau * l)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Krylov-subspace `exp(-i tau H) |psi>` with adaptive substepping.
pub fn evolve(
    psi: &StateVector,
    h: &SparseOperator,
    tau: f64,
) -> Result<StateVector, SpectraError> {
    if h.dim != psi.amps.len() {
        return Err(SpectraError::DimMismatch { op: h.dim, state: psi.amps.len() });
    }
    if tau == 0.0 {
        return Ok(psi.clone());
    }
    let dim = h.dim;
    let m_max = dim.min(40);
    let sign = tau.signum();
    let total = tau.abs();
    let min_dt = total * 1e-9;
    let step_tol = 1e-13;
    let mut done = 0.0;
    let mut dt = total;
    let mut cur = psi.amps.clone();
    while done < total {
        dt = dt.min(total - done);
        let norm0 = nrm2(&cur);
        if norm0 == 0.0 {
            break;
        }
        // Lanczos basis of the Krylov space of the current state.
        let mut vs: Vec<Vec<Complex64>> = Vec::new();
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut v: Vec<Complex64> = cur.iter().map(|a| a / norm0).collect();
        let mut beta_end = 0.0;
        for _ in 0..m_max {
            let mut w = h.apply(&v);
            let alpha = inner(&v, &w).re;
            axpy(&mut w, Complex64::new(-alpha, 0.0), &v);
            vs.push(v.clone());
            for _ in 0..2 {
                for u in &vs {
                    let c = inner(u, &w);
                    axpy(&mut w, -c, u);
                }
            }
            alphas.push(alpha);
            let beta = nrm2(&w);
            beta_end = beta;
            if beta < 1e-13 {
                break;
            }
            betas.push(beta);
            for x in &mut w {
                *x /= beta;
            }
            v = w;
        }
        let m = alphas.len();
        betas.truncate(m - 1);
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let happy = beta_end < 1e-13;
        loop {
            let eig = t.clone().symmetric_eigen();
            let mut u = DVector::<Complex64>::zeros(m);
            for i in 0..m {
                let phase = Complex64::from_polar(1.0, -sign * dt * eig.eigenvalues[i]);
                let wi = eig.eigenvectors[(0, i)];
                for j in 0..m {
                    u[j] += phase * wi * eig.eigenvectors[(j, i)];
                }
            }
            let err = if happy { 0.0 } else { beta_end * u[m - 1].norm() };
            if err <= step_tol || happy {
                let mut next = vec![Complex64::new(0.0, 0.0); dim];
                for (j, vj) in vs.iter().enumerate() {
                    axpy(&mut next, u[j] * norm0, vj);
                }
                cur = next;
                done += dt;
                dt *= 2.0;
                break;
            }
            dt /= 2.0;
            if dt < min_dt {
                return Err(SpectraError::StepSize { achieved: err });
            }
        }
    }
    Ok(StateVector { basis: Arc::clone(&psi.basis), amps: cur })
}

/// Exact factorized evolution `prod_T exp(-i tau H_T) |psi>`, valid when the
/// truncated interactions do not couple distinct triangles.
pub fn evolve_factorized(
    psi: &StateVector,
    lattice: &Lattice,
    params: &ModelParams,
    tau: f64,
) -> Result<StateVector, SpectraError> {
    check_factorization(lattice, params)?;
    params.validate()?;
    let basis = &psi.basis;
    if basis.n_sites != lattice.n_sites() {
        return Err(SpectraError::Operator(OperatorError::SiteMismatch {
            basis: basis.n_sites,
            lattice: lattice.n_sites(),
        }));
    }
    let mut amps = psi.amps.clone();
    match basis.mode {
        BasisMode::TriangleRestricted => {
            for (t, tri) in lattice.triangles.iter().enumerate() {
                let u = expm_hermitian(&restricted_block(lattice, params, tri.sites), tau);
                apply_digit_gate(&mut amps, t, &u);
            }
        }
        BasisMode::Full => {
            for tri in &lattice.triangles {
                let u = expm_hermitian(&full_block(lattice, params, tri.sites), tau);
                apply_bit_triple_gate(&mut amps, tri.sites, &u);
            }
        }
    }
    Ok(StateVector { basis: Arc::clone(basis), amps })
}

/// 4x4 triangle Hamiltonian over {empty, site 1, site 2, site 3}; the
/// blockade term vanishes identically on these states.
fn restricted_block(lattice: &Lattice, params: &ModelParams, sites: [usize; 3]) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(4, 4);
    let top = 0.5 * params.rabi * Complex64::from_polar(1.0, params.phase);
    for (k, &s) in sites.iter().enumerate() {
        h[(0, k + 1)] = top;
        h[(k + 1, 0)] = top.conj();
        h[(k + 1, k + 1)] =
            Complex64::new(-params.detuning * lattice.sites[s].detuning_scale, 0.0);
    }
    h
}

/// 8x8 triangle Hamiltonian over occupation bits, including the
/// intra-triangle van der Waals repulsion.
fn full_block(lattice: &Lattice, params: &ModelParams, sites: [usize; 3]) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(8, 8);
    let de_excite = 0.5 * params.rabi * Complex64::from_polar(1.0, params.phase);
    for s in 0..8usize {
        let mut diag = 0.0;
        for i in 0..3 {
            if s >> i & 1 == 1 {
                diag -= params.detuning * lattice.sites[sites[i]].detuning_scale;
            }
            for j in (i + 1)..3 {
                if s >> i & 1 == 1 && s >> j & 1 == 1 {
                    let r = lattice.distance(sites[i], sites[j]);
                    if r <= params.trunc_radius * (1.0 + 1e-9) {
                        diag += params.interaction(r);
                    }
                }
            }
        }
        h[(s, s)] = Complex64::new(diag, 0.0);
        for i in 0..3 {
            let t = s ^ (1 << i);
            h[(t, s)] = if s >> i & 1 == 1 { de_excite } else { de_excite.conj() };
        }
    }
    h
}

/// Apply a 4x4 unitary to base-4 digit `t` of every index.
fn apply_digit_gate(amps: &mut [Complex64], t: usize, u: &DMatrix<Complex64>) {
    let step = 1usize << (2 * t);
    let dim = amps.len();
    let block = step * 4;
    let mut scratch = [Complex64::new(0.0, 0.0); 4];
    let mut base_hi = 0;
    while base_hi < dim {
        for low in 0..step {
            let base = base_hi + low;
            for d in 0..4 {
                scratch[d] = amps[base + d * step];
            }
            for r in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..4 {
                    acc += u[(r, c)] * scratch[c];
                }
                amps[base + r * step] = acc;
            }
        }
        base_hi += block;
    }
}

/// Apply an 8x8 unitary to the occupation bits of three sites.
fn apply_bit_triple_gate(amps: &mut [Complex64], sites: [usize; 3], u: &DMatrix<Complex64>) {
    let dim = amps.len();
    let masks: Vec<usize> = sites.iter().map(|&s| 1usize << s).collect();
    let all = masks[0] | masks[1] | masks[2];
    let mut scratch = [Complex64::new(0.0, 0.0); 8];
    for base in 0..dim {
        if base & all != 0 {
            continue;
        }
        for d in 0..8usize {
            let mut idx = base;
            for (i, &m) in masks.iter().enumerate() {
                if d >> i & 1 == 1 {
                    idx |= m;
                }
            }
            scratch[d] = amps[idx];
        }
        for r in 0..8usize {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..8usize {
                acc += u[(r, c)] * scratch[c];
            }
            let mut idx = base;
            for (i, &m) in masks.iter().enumerate() {
                if r >> i & 1 == 1 {
                    idx |= m;
                }
            }
            amps[idx] = acc;
        }
    }
}

/// The duality rotation time `tau* = 4 pi / (3 sqrt(3) Omega)`.
pub fn duality_time(rabi: f64) -> f64 {
    4.0 * std::f64::consts::PI / (3.0 * 3.0f64.sqrt() * rabi)
}

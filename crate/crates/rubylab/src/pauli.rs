//! Pauli words over `n` qubits with an explicit power-of-`i` phase.
//!
//! A word is `i^k · P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}` with `P_q ∈ {I, X, Y, Z}`.
//! Hermitian words (stabilizers, observables) have `k ∈ {0, 2}`, i.e. an
//! overall sign. Qubit 0 is the leftmost (most significant) tensor factor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `a · b = i^k · c` for single-qubit Paulis; returns `(k, c)`.
fn single_mul(a: Pauli, b: Pauli) -> (u8, Pauli) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (0, p),
        (X, X) | (Y, Y) | (Z, Z) => (0, I),
        (X, Y) => (1, Z),
        (Y, Z) => (1, X),
        (Z, X) => (1, Y),
        (Y, X) => (3, Z),
        (Z, Y) => (3, X),
        (X, Z) => (3, Y),
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PauliWord {
    x: Vec<bool>,
    z: Vec<bool>,
    /// Exponent of the global factor `i^phase`, mod 4.
    phase: u8,
}

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        PauliWord { x: vec![false; n], z: vec![false; n], phase: 0 }
    }

    pub fn from_ops(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut w = Self::identity(n);
        for &(q, p) in ops {
            assert!(q < n, "qubit index out of range");
            let (x, z) = p.bits();
            assert!(!w.x[q] && !w.z[q], "duplicate qubit in Pauli word");
            w.x[q] = x;
            w.z[q] = z;
        }
        w
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        Self::from_ops(n, &[(q, p)])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(self.z.iter()).any(|&b| b)
    }

    pub fn pauli_at(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x[q], self.z[q])
    }

    pub fn has_x(&self, q: usize) -> bool {
        self.x[q]
    }

    pub fn has_z(&self, q: usize) -> bool {
        self.z[q]
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Sign of a Hermitian word: +1 or -1.
    pub fn sign(&self) -> i8 {
        assert!(self.is_hermitian(), "sign of a non-Hermitian word");
        if self.phase == 0 {
            1
        } else {
            -1
        }
    }

    pub fn set_sign(&mut self, sign: i8) {
        self.phase = if sign >= 0 { 0 } else { 2 };
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        assert_eq!(self.len(), other.len());
        let mut anti = false;
        for q in 0..self.len() {
            let a = (self.x[q], self.z[q]);
            let b = (other.x[q], other.z[q]);
            if a != (false, false) && b != (false, false) && a != b {
                anti = !anti;
            }
        }
        !anti
    }

    pub fn mul(&self, other: &PauliWord) -> PauliWord {
        assert_eq!(self.len(), other.len());
        let mut out = PauliWord::identity(self.len());
        let mut phase = (self.phase + other.phase) % 4;
        for q in 0..self.len() {
            let (k, c) = single_mul(self.pauli_at(q), other.pauli_at(q));
            phase = (phase + k) % 4;
            let (x, z) = c.bits();
            out.x[q] = x;
            out.z[q] = z;
        }
        out.phase = phase;
        out
    }

    /// Conjugation by a Hadamard on qubit `q`: X <-> Z, Y -> -Y.
    pub fn conjugate_h(&mut self, q: usize) {
        if self.x[q] && self.z[q] {
            self.negate();
        }
        std::mem::swap(&mut self.x[q], &mut self.z[q]);
    }

    /// Conjugation by X on qubit `q`: Z -> -Z, Y -> -Y.
    pub fn conjugate_x(&mut self, q: usize) {
        if self.z[q] {
            self.negate();
        }
    }

    /// Conjugation by Z on qubit `q`: X -> -X, Y -> -Y.
    pub fn conjugate_z(&mut self, q: usize) {
        if self.x[q] {
            self.negate();
        }
    }

    /// Matrix-free application to a dense state vector of length `2^n`.
    pub fn apply_to_vec(&self, amps: &mut [Complex64]) {
        let n = self.len();
        assert_eq!(amps.len(), 1usize << n);
        let i = Complex64::new(0.0, 1.0);
        let global = i.powu(self.phase as u32);
        let mut xmask = 0usize;
        for q in 0..n {
            if self.x[q] {
                xmask |= 1 << (n - 1 - q);
            }
        }
        for col in 0..amps.len() {
            let row = col ^ xmask;
            if row < col || (row == col && xmask != 0) {
                continue;
            }
            // amplitude factor moving basis state `col` to `row`
            let factor = |src: usize| {
                let mut amp = global;
                for q in 0..n {
                    let bit = (src >> (n - 1 - q)) & 1;
                    match self.pauli_at(q) {
                        Pauli::I | Pauli::X => {}
                        Pauli::Z => {
                            if bit == 1 {
                                amp = -amp;
                            }
                        }
                        Pauli::Y => amp *= if bit == 0 { i } else { -i },
                    }
                }
                amp
            };
            if row == col {
                amps[col] *= factor(col);
            } else {
                let (a, b) = (amps[col], amps[row]);
                amps[row] = factor(col) * a;
                amps[col] = factor(row) * b;
            }
        }
    }

    /// Dense matrix representation; intended for small `n` only.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let dim = 1usize << n;
        let i = Complex64::new(0.0, 1.0);
        let global = i.powu(self.phase as u32);
        let mut xmask = 0usize;
        for q in 0..n {
            if self.x[q] {
                xmask |= 1 << (n - 1 - q);
            }
        }
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            let row = col ^ xmask;
            let mut amp = global;
            for q in 0..n {
                let bit = (col >> (n - 1 - q)) & 1;
                match self.pauli_at(q) {
                    Pauli::I | Pauli::X => {}
                    Pauli::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                    Pauli::Y => {
                        amp *= if bit == 0 { i } else { -i };
                    }
                }
            }
            m[(row, col)] = amp;
        }
        m
    }
}

impl std::fmt::Display for PauliWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            3 => "-i",
            _ => unreachable!(),
        };
        write!(f, "{}", prefix)?;
        for q in 0..self.len() {
            write!(f, "{}", self.pauli_at(q).symbol())?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xz_product_is_minus_iy() {
        let n = 1;
        let x = PauliWord::single(n, 0, Pauli::X);
        let z = PauliWord::single(n, 0, Pauli::Z);
        let xz = x.mul(&z);
        assert_eq!(xz.pauli_at(0), Pauli::Y);
        assert_eq!(xz.phase_exponent(), 3); // XZ = -iY
        let d = xz.dense();
        let y = PauliWord::single(n, 0, Pauli::Y).dense();
        let i = Complex64::new(0.0, 1.0);
        assert!((d + y * i).norm() < 1e-14);
    }

    #[test]
    fn commutation_parity() {
        let xx = PauliWord::from_ops(2, &[(0, Pauli::X), (1, Pauli::X)]);
        let zz = PauliWord::from_ops(2, &[(0, Pauli::Z), (1, Pauli::Z)]);
        let zi = PauliWord::single(2, 0, Pauli::Z);
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
    }

    #[test]
    fn dense_matches_algebra() {
        let a = PauliWord::from_ops(3, &[(0, Pauli::X), (2, Pauli::Y)]);
        let b = PauliWord::from_ops(3, &[(1, Pauli::Z), (2, Pauli::Z)]);
        let prod = a.mul(&b);
        let err = (a.dense() * b.dense() - prod.dense()).norm();
        assert!(err < 1e-14);
    }

    #[test]
    fn vector_application_matches_dense() {
        let w = {
            let mut w = PauliWord::from_ops(3, &[(0, Pauli::Y), (1, Pauli::Z), (2, Pauli::X)]);
            w.set_sign(-1);
            w
        };
        let mut v: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new(0.3 + k as f64, 0.1 * k as f64))
            .collect();
        let want = w.dense() * nalgebra::DVector::from_vec(v.clone());
        w.apply_to_vec(&mut v);
        for (a, b) in v.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn clifford_conjugations() {
        let mut w = PauliWord::single(2, 0, Pauli::X);
        w.conjugate_h(0);
        assert_eq!(w.pauli_at(0), Pauli::Z);
        assert_eq!(w.sign(), 1);
        w.conjugate_x(0);
        assert_eq!(w.sign(), -1);
        let mut y = PauliWord::single(1, 0, Pauli::Y);
        y.conjugate_h(0);
        assert_eq!(y.pauli_at(0), Pauli::Y);
        assert_eq!(y.sign(), -1);
        let mut x = PauliWord::single(1, 0, Pauli::X);
        x.conjugate_z(0);
        assert_eq!(x.sign(), -1);
    }

    #[test]
    fn sign_round_trip() {
        let mut w = PauliWord::from_ops(2, &[(0, Pauli::Z), (1, Pauli::Z)]);
        w.set_sign(-1);
        assert_eq!(w.sign(), -1);
        w.negate();
        assert_eq!(w.sign(), 1);
    }
}

//! Stabilizer tableau with destabilizers.
//!
//! Supports measurement of arbitrary Hermitian Pauli words, non-collapsing
//! expectation queries, Pauli-frame application, single-qubit Cliffords, and
//! the controlled-word gate `|0><0| I + |1><1| W` used by the puncture
//! protocols. Random measurement outcomes come from a seeded generator so
//! runs are reproducible.

use crate::pauli::PauliWord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    stab: Vec<PauliWord>,
    destab: Vec<PauliWord>,
    rng: ChaCha20Rng,
}

impl Tableau {
    /// The all-zeros computational state.
    pub fn new(n: usize, seed: u64) -> Self {
        let stab = (0..n).map(|q| PauliWord::single(n, q, crate::pauli::Pauli::Z)).collect();
        let destab = (0..n).map(|q| PauliWord::single(n, q, crate::pauli::Pauli::X)).collect();
        Tableau { n, stab, destab, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliWord] {
        &self.stab
    }

    /// Measure a Hermitian Pauli word; returns (outcome, deterministic).
    pub fn measure(&mut self, w: &PauliWord) -> (i8, bool) {
        assert!(w.is_hermitian());
        assert_eq!(w.len(), self.n);
        let p = (0..self.n).find(|&i| !self.stab[i].commutes_with(w));
        match p {
            Some(p) => {
                let outcome: i8 = if self.rng.gen::<bool>() { 1 } else { -1 };
                let pivot = self.stab[p].clone();
                for q in 0..self.n {
                    if q != p && !self.stab[q].commutes_with(w) {
                        self.stab[q] = self.stab[q].mul(&pivot);
                    }
                    if q != p && !self.destab[q].commutes_with(w) {
                        self.destab[q] = self.destab[q].mul(&pivot);
                    }
                }
                self.destab[p] = pivot;
                let mut new = w.clone();
                new.set_sign(outcome);
                self.stab[p] = new;
                (outcome, false)
            }
            None => (self.deterministic_sign(w), true),
        }
    }

    /// Expectation of a Hermitian word without collapsing: `Some(+-1)` when
    /// deterministic, `None` when the outcome would be a fair coin.
    pub fn expectation(&self, w: &PauliWord) -> Option<i8> {
        assert!(w.is_hermitian());
        if (0..self.n).any(|i| !self.stab[i].commutes_with(w)) {
            return None;
        }
        Some(self.deterministic_sign(w))
    }

    /// Sign of a word already in the stabilizer group: the product of the
    /// generators whose destabilizer partners anticommute with it.
    fn deterministic_sign(&self, w: &PauliWord) -> i8 {
        let mut prod = PauliWord::identity(self.n);
        for i in 0..self.n {
            if !self.destab[i].commutes_with(w) {
                prod = prod.mul(&self.stab[i]);
            }
        }
        let check = prod.mul(w);
        assert!(check.is_identity(), "word not generated by the stabilizer group");
        check.sign()
    }

    /// Apply a Pauli word as a unitary: flips the sign of every
    /// anticommuting row.
    pub fn apply_pauli(&mut self, u: &PauliWord) {
        for row in self.stab.iter_mut().chain(self.destab.iter_mut()) {
            if !row.commutes_with(u) {
                row.negate();
            }
        }
    }

    /// `|0><0| I + |1><1| W` with control qubit `a`; `w` must act as the
    /// identity on `a`.
    pub fn controlled_word(&mut self, a: usize, w: &PauliWord) {
        assert!(w.is_hermitian());
        assert!(!w.has_x(a) && !w.has_z(a), "word must not touch the control");
        let za = PauliWord::single(self.n, a, crate::pauli::Pauli::Z);
        for row in self.stab.iter_mut().chain(self.destab.iter_mut()) {
            let target_anti = !row.commutes_with(w);
            let control_x = row.has_x(a);
            if control_x {
                *row = w.mul(row);
            }
            if target_anti {
                *row = row.mul(&za);
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        for row in self.stab.iter_mut().chain(self.destab.iter_mut()) {
            row.conjugate_h(q);
        }
    }

    pub fn x(&mut self, q: usize) {
        for row in self.stab.iter_mut().chain(self.destab.iter_mut()) {
            row.conjugate_x(q);
        }
    }

    pub fn z(&mut self, q: usize) {
        for row in self.stab.iter_mut().chain(self.destab.iter_mut()) {
            row.conjugate_z(q);
        }
    }

    /// Symplectic sanity: stabilizers commute pairwise and are Hermitian;
    /// each destabilizer anticommutes with exactly its partner.
    pub fn is_valid(&self) -> bool {
        for i in 0..self.n {
            if !self.stab[i].is_hermitian() {
                return false;
            }
            for j in 0..self.n {
                if !self.stab[i].commutes_with(&self.stab[j]) {
                    return false;
                }
                let want_anti = i == j;
                if self.destab[i].commutes_with(&self.stab[j]) == want_anti {
                    return false;
                }
                if !self.destab[i].commutes_with(&self.destab[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Measure and, when the outcome is random and differs from `want`,
    /// correct with the destabilizer so the word is fixed at `want` without
    /// touching any other generator. Panics if a deterministic outcome
    /// contradicts `want`.
    pub fn fix(&mut self, w: &PauliWord, want: i8) {
        let p = (0..self.n).find(|&i| !self.stab[i].commutes_with(w));
        let (outcome, deterministic) = self.measure(w);
        if outcome != want {
            assert!(!deterministic, "deterministic outcome contradicts the requested fix");
            let partner = self.destab[p.unwrap()].clone();
            self.apply_pauli(&partner);
        }
    }
}

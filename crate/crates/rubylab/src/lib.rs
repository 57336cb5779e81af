//! Workbench for Rydberg-atom ruby-lattice spin liquids: lattice geometry
//! with punctures, blockaded Hamiltonians and their spectra, string-operator
//! observables, Ising-anyon braiding on ancilla registers, and a stabilizer
//! simulation of the punctured-code measurement protocols.

pub mod anyons;
pub mod codesim;
pub mod config;
pub mod geometry;
pub mod observables;
pub mod operators;
pub mod pauli;
pub mod pipeline;
pub mod spectra;

//! Diagonalize the working-point Hamiltonian on a small cylinder and read
//! the closed and open string observables that distinguish the phases.

use rubylab::geometry::{build_ruby_lattice, BoundaryY, LatticeSpec, StringKind, Topology};
use rubylab::observables::{
    classify_phase, expect_x_string, expect_z_string, normalized_expectation,
    normalized_x_expectation, PhaseThresholds, StringMeasurement,
};
use rubylab::operators::{build_hamiltonian, ModelParams, OccupationBasis};
use rubylab::spectra::ground_states;
use std::sync::Arc;

fn main() {
    let spec = LatticeSpec { cells_x: 2, cells_y: 2, boundary_y: BoundaryY::Periodic, spacing: 1.0 };
    let lat = build_ruby_lattice(&spec).unwrap();
    let basis = Arc::new(OccupationBasis::triangle_restricted(&lat).unwrap());
    println!("{} sites, restricted dimension {}", lat.n_sites(), basis.len());

    let params = ModelParams::spin_liquid(1.0);
    let evo = ModelParams::dual_evolution(1.0);
    let h = build_hamiltonian(&lat, &params, &basis).unwrap();
    let res = ground_states(&h, &basis, 2, 1e-10, 7).unwrap();
    println!(
        "lowest energies: {:?} (residuals {:.1e}, {:.1e})",
        res.eigenvalues, res.residuals[0], res.residuals[1]
    );
    let psi = &res.eigenvectors[0];

    let z_family: Vec<_> =
        (0..2).map(|c| lat.loop_path(c, StringKind::Z).unwrap()).collect();
    let x_family: Vec<_> =
        (0..2).map(|c| lat.loop_path(c, StringKind::XDual).unwrap()).collect();
    let cz = normalized_expectation(psi, &z_family, "closed-z").unwrap();
    let cx = normalized_x_expectation(psi, &x_family, &lat, &evo, "closed-x").unwrap();
    println!("closed Z loops: raw {:.4}, normalized {:?}", cz.raw, cz.normalized);
    println!("closed X loops: raw {:.4}, normalized {:?}", cx.raw, cx.normalized);

    // open strings: the loops truncated by one cell, averaged over columns
    let mut oz = 0.0;
    let mut ox = 0.0;
    for (zf, xf) in z_family.iter().zip(&x_family) {
        let mut z_open = zf.clone();
        z_open.topology = Topology::Open;
        z_open.sites.truncate(zf.sites.len() - 2);
        let mut x_open = xf.clone();
        x_open.topology = Topology::Open;
        x_open.sites.truncate(xf.sites.len() - 1);
        oz += expect_z_string(psi, &z_open).unwrap() / 2.0;
        ox += expect_x_string(psi, &x_open, &lat, &evo).unwrap() / 2.0;
    }
    println!("open strings (column-averaged): Z {oz:.4}, X {ox:.4}");

    let label = classify_phase(
        &cz,
        &cx,
        &StringMeasurement::single("open-z", oz),
        &StringMeasurement::single("open-x", ox),
        &PhaseThresholds::default(),
    );
    println!("phase label at detuning/rabi = {}: {label:?}", params.detuning);
}

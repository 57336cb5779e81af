//! End-to-end acceptance checks, one per stated requirement. Each prints a
//! single PASS/FAIL line (visible with `--nocapture`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rubylab::anyons::{
    braid_generator, build_stabilizers, compile_braid, controlled_z_decomposition, fusion_matrix,
    BraidWord,
};
use rubylab::codesim::{
    build_patch, measure_table1_signature, run_protocol, two_puncture_prep_script, PatchSpec, Step,
};
use rubylab::geometry::{
    build_ruby_lattice, BoundaryY, LatticeSpec, StringKind, StringPath, Topology,
};
use rubylab::observables::{
    classify_ground_state, direct_x_string, expect_x_string, expect_z_string,
    GroundStateLabel, StringMeasurement,
};
use rubylab::operators::{
    build_hamiltonian, triangle_block, ModelParams, OccupationBasis,
};
use rubylab::spectra::{
    dense_spectrum, duality_time, expm_hermitian, ground_states, StateVector,
};
use std::sync::Arc;

fn criterion(n: usize, desc: &str, pass: bool) {
    println!("criterion {n}: {} - {desc}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {desc}");
}

fn lattice(cx: usize, cy: usize, by: BoundaryY) -> rubylab::geometry::Lattice {
    build_ruby_lattice(&LatticeSpec { cells_x: cx, cells_y: cy, boundary_y: by, spacing: 1.0 })
        .unwrap()
}

#[test]
fn criterion_1_triangle_duality_identity() {
    let dual = ModelParams::dual_evolution(1.0);
    let h = triangle_block(&dual).unwrap().dense();
    let u = expm_hermitian(&h, duality_time(dual.rabi));
    // restricted 4-state block, digits (empty, r1, r2, r3)
    let z12 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]));
    // the constrained flip of site 3: empty <-> r3, r1 <-> r2
    let mut x3 = DMatrix::zeros(4, 4);
    for (r, c) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
        x3[(r, c)] = Complex64::new(1.0, 0.0);
    }
    let rotated = u.adjoint() * z12 * &u;
    let err = (rotated - x3).norm();
    criterion(1, &format!("duality rotation of Z1Z2 at tau* is X3, error {err:.2e}"), err <= 1e-10);
}

#[test]
fn criterion_2_x_string_route_equivalence() {
    let specs = [
        (1, 1, BoundaryY::Open),
        (2, 1, BoundaryY::Open),
        (1, 2, BoundaryY::Open),
        (1, 2, BoundaryY::Periodic),
    ];
    let params = ModelParams::dual_evolution(1.0);
    let mut worst = 0.0f64;
    for (cx, cy, by) in specs {
        let lat = lattice(cx, cy, by);
        assert!(lat.n_sites() <= 12);
        let basis = Arc::new(OccupationBasis::triangle_restricted(&lat).unwrap());
        let x_path = |sites: Vec<usize>| StringPath {
            kind: StringKind::XDual,
            topology: Topology::Open,
            sites,
            anchors: None,
        };
        let mut strings = Vec::new();
        let nt = lat.n_triangles();
        for t in 0..nt {
            for k in 0..3 {
                strings.push(x_path(vec![lat.triangles[t].sites[k]]));
            }
        }
        for t1 in 0..nt {
            for t2 in t1 + 1..nt {
                for k1 in 0..3 {
                    for k2 in 0..3 {
                        strings.push(x_path(vec![
                            lat.triangles[t1].sites[k1],
                            lat.triangles[t2].sites[k2],
                        ]));
                    }
                }
            }
        }
        if by == BoundaryY::Periodic {
            strings.push(lat.loop_path(0, StringKind::XDual).unwrap());
        }
        for seed in [1u64, 2] {
            let psi = StateVector::random(Arc::clone(&basis), seed);
            for s in &strings {
                let via_duality = expect_x_string(&psi, s, &lat, &params).unwrap();
                let direct = direct_x_string(&psi, s).unwrap();
                worst = worst.max((via_duality - direct).abs());
            }
        }
    }
    criterion(
        2,
        &format!("direct vs duality-route X strings on all lattices <= 12 sites, worst {worst:.2e}"),
        worst <= 1e-8,
    );
}

#[test]
fn criterion_3_reference_table_oracle() {
    let spec = PatchSpec::default_two_puncture();
    let mut ok = true;
    let direct: [(GroundStateLabel, [f64; 4], &[Step]); 4] = [
        (GroundStateLabel::I, [1.0, 1.0, 0.0, 0.0], &[]),
        (GroundStateLabel::E, [-1.0, 1.0, 0.0, 0.0], &[Step::ApplyXString]),
        (GroundStateLabel::M, [1.0, -1.0, 0.0, 0.0], &[Step::ApplyZString]),
        (
            GroundStateLabel::Epsilon,
            [-1.0, -1.0, 0.0, 0.0],
            &[Step::ApplyXString, Step::ApplyZString],
        ),
    ];
    for (label, values, script) in direct {
        let (patch, mut t) = build_patch(&spec, 11).unwrap();
        run_protocol(script, &patch, &mut t).unwrap();
        let sig = measure_table1_signature(&patch, &t).unwrap();
        ok &= sig.label == label && sig.values == values;
    }
    for want in [1.0f64, -1.0] {
        let (patch, mut t) = build_patch(&spec, 13).unwrap();
        let log = run_protocol(&two_puncture_prep_script(), &patch, &mut t).unwrap();
        if f64::from(log[0].outcome.unwrap()) != want {
            t.apply_pauli(&patch.z_loop(0, 0).unwrap());
        }
        let sig = measure_table1_signature(&patch, &t).unwrap();
        let label = if want > 0.0 { GroundStateLabel::Plus } else { GroundStateLabel::Minus };
        ok &= sig.label == label && sig.values == [0.0, 0.0, want, want];
    }
    criterion(3, "all six reference rows reproduced exactly on the distance-3 patch", ok);
}

#[test]
fn criterion_4_state_prep_frequency() {
    let spec = PatchSpec::default_two_puncture();
    let runs = 1000usize;
    let mut plus = 0usize;
    let mut signatures_ok = true;
    for seed in 0..runs as u64 {
        let (patch, mut t) = build_patch(&spec, seed).unwrap();
        let log = run_protocol(&two_puncture_prep_script(), &patch, &mut t).unwrap();
        let sigma = log[0].outcome.unwrap();
        if sigma > 0 {
            plus += 1;
        }
        let sig = match &log[1].signature {
            Some(s) => s,
            None => panic!("missing signature record"),
        };
        let s = f64::from(sigma);
        let want = if sigma > 0 { GroundStateLabel::Plus } else { GroundStateLabel::Minus };
        signatures_ok &= sig.label == want && sig.values == [0.0, 0.0, s, s];
    }
    let freq = plus as f64 / runs as f64;
    criterion(
        4,
        &format!("Bell-measured prep gives |+>/|-> signatures, plus frequency {freq:.3}"),
        signatures_ok && (freq - 0.5).abs() <= 0.05,
    );
}

#[test]
fn criterion_5_braid_algebra() {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 1..=3usize {
        let stabs = build_stabilizers(n).unwrap();
        for i in 1..=2 * n + 1 {
            let g = braid_generator(n, i).unwrap();
            let w = g.exponent_word();
            ok &= stabs.words.iter().all(|s| s.commutes_with(&w));
        }
        // Yang-Baxter on the full register
        for i in 1..=2 * n {
            let a = braid_generator(n, i).unwrap().dense(false);
            let b = braid_generator(n, i + 1).unwrap().dense(false);
            let err = (&a * &b * &a - &b * &a * &b).norm();
            ok &= err <= 1e-10;
        }
    }
    notes.push("stabilizer commutation + Yang-Baxter".to_string());
    // (R23)^2 = logical X up to the recorded global phase
    let sq = compile_braid(&BraidWord::parse("R2 R2").unwrap(), 1).unwrap();
    let x = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    let x_err = (sq.canonical_logical() - x).norm();
    ok &= x_err <= 1e-10 && sq.leakage <= 1e-10;
    notes.push(format!("(R23)^2 = X, phase {:.4}", sq.global_phase));
    // R12^-1 R23 R12^-1 = F up to the recorded global phase
    let f_braid = compile_braid(&BraidWord::parse("R1^-1 R2 R1^-1").unwrap(), 1).unwrap();
    let f = fusion_matrix();
    let canon = f_braid.canonical_logical();
    let f_err = (&canon - &f).norm();
    let entries_ok = (0..2).all(|r| {
        (0..2).all(|c| (canon[(r, c)].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-10)
    });
    ok &= f_err <= 1e-10 && entries_ok && f_braid.leakage <= 1e-10;
    notes.push(format!("F identity, phase {:.4}", f_braid.global_phase));
    // N = 2 controlled-Z decomposition
    let report = controlled_z_decomposition().unwrap();
    ok &= report.pass && report.r56_block_error <= 1e-10;
    notes.push(format!("controlled-Z block error {:.2e}", report.r56_block_error));
    criterion(5, &notes.join("; "), ok);
}

#[test]
fn criterion_6_phase_trend_on_largest_cylinder() {
    // largest tractable: 2x2 cells = 24 sites, 4^8 = 65536 restricted states
    let lat = lattice(2, 2, BoundaryY::Periodic);
    let basis = Arc::new(OccupationBasis::triangle_restricted(&lat).unwrap());
    let evo = ModelParams::dual_evolution(1.0);
    // winding loop through all four triangles of column 0
    let mut loop_sites = Vec::new();
    for iy in 0..2 {
        for slot in [0usize, 1, 3, 4] {
            loop_sites.push(lat.site_at([0, iy], slot).unwrap());
        }
    }
    let long_loop = StringPath {
        kind: StringKind::Z,
        topology: Topology::Loop,
        sites: loop_sites,
        anchors: None,
    };
    let open_of = |full: &StringPath, per_cell: usize| {
        let mut cut = full.clone();
        cut.topology = Topology::Open;
        cut.sites.truncate(full.sites.len() - per_cell);
        cut
    };
    let mut closed_z = [0.0f64; 2];
    let mut opens = [0.0f64; 2];
    for (k, detuning) in [1.0f64, 3.5].into_iter().enumerate() {
        let params = ModelParams { detuning, ..ModelParams::spin_liquid(1.0) };
        let h = build_hamiltonian(&lat, &params, &basis).unwrap();
        let res = ground_states(&h, &basis, 1, 1e-10, 7).unwrap();
        let psi = &res.eigenvectors[0];
        closed_z[k] = expect_z_string(psi, &long_loop).unwrap();
        // open strings as translation-averaged families over both columns:
        // the Lanczos vector picks an arbitrary combination within the
        // quasi-degenerate manifold, so single-column values carry a
        // symmetry-breaking artifact that the column average removes
        let mut oz = 0.0;
        let mut ox = 0.0;
        for col in 0..2 {
            let open_z = open_of(&lat.loop_path(col, StringKind::Z).unwrap(), 2);
            let open_x = open_of(&lat.loop_path(col, StringKind::XDual).unwrap(), 1);
            oz += expect_z_string(psi, &open_z).unwrap() / 2.0;
            ox += expect_x_string(psi, &open_x, &lat, &evo).unwrap() / 2.0;
        }
        opens[k] = oz.abs().max(ox.abs());
    }
    let ratio = closed_z[1].abs() / closed_z[0].abs();
    criterion(
        6,
        &format!(
            "closed-Z loop {:.4} at 3.5 vs {:.4} at 1.0 (ratio {ratio:.1}), open strings {:.3} at 3.5",
            closed_z[1], closed_z[0], opens[1]
        ),
        ratio >= 3.0 && opens[1] < 0.1,
    );
}

#[test]
fn criterion_7_eigensolver_soundness() {
    let mut worst_resid = 0.0f64;
    let mut worst_gap = 0.0f64;
    // instances up to 4096 dimensions: 1 to 3 cells in a row
    for cx in 1..=3usize {
        let lat = lattice(cx, 1, BoundaryY::Open);
        let basis = Arc::new(OccupationBasis::triangle_restricted(&lat).unwrap());
        assert!(basis.len() <= 4096);
        let params = ModelParams::spin_liquid(1.0);
        let h = build_hamiltonian(&lat, &params, &basis).unwrap();
        let res = ground_states(&h, &basis, 3, 1e-10, 42).unwrap();
        let (dense, _) = dense_spectrum(&h);
        for (k, (lambda, v)) in res.eigenvalues.iter().zip(&res.eigenvectors).enumerate() {
            let hv = h.apply(&v.amps);
            let resid: f64 = hv
                .iter()
                .zip(&v.amps)
                .map(|(a, b)| (a - b * Complex64::new(*lambda, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst_resid = worst_resid.max(resid);
            worst_gap = worst_gap.max((lambda - dense[k]).abs());
        }
    }
    criterion(
        7,
        &format!("residuals <= {worst_resid:.2e}, dense-oracle gap <= {worst_gap:.2e}"),
        worst_resid <= 1e-8 && worst_gap <= 1e-9,
    );
}

#[test]
fn criterion_8_classifier_and_noise_rule() {
    // all oracle states classify to their labels
    let spec = PatchSpec::default_two_puncture();
    let mut ok = true;
    let scripts: [(&[Step], GroundStateLabel); 4] = [
        (&[], GroundStateLabel::I),
        (&[Step::ApplyXString], GroundStateLabel::E),
        (&[Step::ApplyZString], GroundStateLabel::M),
        (&[Step::ApplyXString, Step::ApplyZString], GroundStateLabel::Epsilon),
    ];
    for (script, label) in scripts {
        let (patch, mut t) = build_patch(&spec, 17).unwrap();
        run_protocol(script, &patch, &mut t).unwrap();
        ok &= measure_table1_signature(&patch, &t).unwrap().label == label;
    }
    // noisy open-string value consistent with zero under the 2-stderr rule
    let noisy = StringMeasurement {
        path_label: "noisy-z".into(),
        raw: -0.309,
        normalized: Some(-0.309),
        stderr: 0.301,
        n_strings: 4,
    };
    let zero_ok = noisy.consistent_with_zero(0.1);
    // and it classifies like the identity row alongside clean loop values
    let one = StringMeasurement::single("loop", 1.0);
    let noisy_x = StringMeasurement { path_label: "noisy-x".into(), ..noisy.clone() };
    let label = classify_ground_state(&one, &one, &noisy, &noisy_x, 0.1).label;
    ok &= zero_ok && label == GroundStateLabel::I;
    criterion(8, "oracle labels assigned; -0.309 +- 0.301 flagged consistent with zero", ok);
}

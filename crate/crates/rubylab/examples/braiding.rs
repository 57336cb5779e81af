//! Compile braid words on the ancilla register: the logical X from a double
//! exchange, the fusion-basis change from three exchanges, Yang-Baxter, and
//! the two-qubit controlled-Z decomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rubylab::anyons::{
    braid_generator, compile_braid, controlled_z_decomposition, fusion_matrix, BraidWord,
};

fn print_matrix(label: &str, m: &DMatrix<Complex64>) {
    println!("{label}:");
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| {
                let v = m[(r, c)];
                if v.norm() < 1e-10 {
                    "    .     ".into()
                } else if v.im.abs() < 1e-10 {
                    format!("{:9.5} ", v.re)
                } else if v.re.abs() < 1e-10 {
                    format!("{:8.5}i ", v.im)
                } else {
                    format!("{:.2}{:+.2}i", v.re, v.im)
                }
            })
            .collect();
        println!("  [{}]", row.join(""));
    }
}

fn main() {
    // one logical qubit lives on 4 ancillas (2 Bell pairs)
    let sq = compile_braid(&BraidWord::parse("R2 R2").unwrap(), 1).unwrap();
    print_matrix("(R2)^2 on the logical qubit", &sq.logical);
    println!("global phase {:.6} rad, leakage {:.1e}", sq.global_phase, sq.leakage);
    print_matrix("phase removed", &sq.canonical_logical());

    let f = compile_braid(&BraidWord::parse("R1^-1 R2 R1^-1").unwrap(), 1).unwrap();
    print_matrix("\nR1^-1 R2 R1^-1 (fusion-basis change)", &f.logical);
    println!(
        "distance to the fusion matrix after removing the phase: {:.1e}",
        (f.canonical_logical() - fusion_matrix()).norm()
    );

    // Yang-Baxter on the full register, N = 2
    let mut worst = 0.0f64;
    for i in 1..=4usize {
        let a = braid_generator(2, i).unwrap().dense(false);
        let b = braid_generator(2, i + 1).unwrap().dense(false);
        worst = worst.max((&a * &b * &a - &b * &a * &b).norm());
    }
    println!("\nYang-Baxter residual over all neighbor pairs at N=2: {worst:.1e}");

    let report = controlled_z_decomposition().unwrap();
    print_matrix("\nR56 on two logical qubits", &report.r56);
    println!(
        "block-decomposition error {:.1e} (literal printed form {:.2}), R34 = I x R12^-1 to {:.1e}",
        report.r56_block_error, report.r56_literal_error, report.r34_single_qubit_error
    );
    println!("R12^2 = logical Z up to phase: {}", report.r12_squared_is_z);
    println!("controlled-Z verification pass: {}", report.pass);
}

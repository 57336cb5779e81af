//! The single-triangle duality: evolving under the zero-detuning,
//! alpha = -pi/2 Hamiltonian for tau* = 4 pi / (3 sqrt(3) Omega) rotates the
//! diagonal Z1 Z2 into the constrained flip of site 3.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rubylab::operators::{triangle_block, ModelParams};
use rubylab::spectra::{duality_time, expm_hermitian};

fn print_matrix(label: &str, m: &DMatrix<Complex64>) {
    println!("{label}:");
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| {
                let v = m[(r, c)];
                if v.norm() < 1e-12 {
                    "     .    ".into()
                } else if v.im.abs() < 1e-12 {
                    format!("{:10.6}", v.re)
                } else {
                    format!("{:.3}{:+.3}i", v.re, v.im)
                }
            })
            .collect();
        println!("  [{}]", row.join(" "));
    }
}

fn main() {
    let dual = ModelParams::dual_evolution(1.0);
    let h = triangle_block(&dual).unwrap().dense();
    print_matrix("dual-evolution triangle block (basis: empty, r1, r2, r3)", &h);

    let tau = duality_time(dual.rabi);
    println!("\ntau* = {tau:.12} (= 4 pi / (3 sqrt(3)))");
    let u = expm_hermitian(&h, tau);

    let z12 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]));
    let rotated = u.adjoint() * z12 * &u;
    print_matrix("\nexp(+i tau* H) Z1 Z2 exp(-i tau* H)", &rotated);

    let mut x3 = DMatrix::zeros(4, 4);
    for (r, c) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
        x3[(r, c)] = Complex64::new(1.0, 0.0);
    }
    println!(
        "\ndistance to the constrained flip (empty <-> r3, r1 <-> r2): {:.2e}",
        (&rotated - &x3).norm()
    );

    // three applications of the rotation cycle back to the start
    let u3 = &u * &u * &u;
    let phase = u3[(0, 0)] / u3[(0, 0)].norm();
    println!(
        "U^3 is the identity up to a global phase: residual {:.2e}",
        (u3.map(|v| v / phase) - DMatrix::identity(4, 4)).norm()
    );
}

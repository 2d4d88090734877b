//! On an affine operator the backward recursion for `C^t` settles at the
//! fixed point `C = (√(I + (2ηA)²) − I)/2`, which solves `C² + C = η²A²`.

use monotone_play::dynamics::run_og;
use monotone_play::linalg::{spectral_norm, Matrix, Vector};
use monotone_play::operators::make_bilinear;
use monotone_play::potential::{backward_c, closed_form_c_linear};

fn main() -> monotone_play::Result<()> {
    let m = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.8]);
    let op = make_bilinear(&m, &Vector::zeros(2), &Vector::zeros(2), 1.0)?;
    let eta = 0.05;
    let z0 = Vector::from_column_slice(&[0.3, -0.2, 0.5, 0.1]);
    let trace = run_og(&op, &z0, &z0, eta, 300)?;
    let pt = backward_c(&op, &trace, 2)?;
    let c = closed_form_c_linear(op.matrix(), eta, 1e-14)?;

    let a = op.matrix();
    println!(
        "||C^2 + C - eta^2 A^2|| = {:.3e}",
        spectral_norm(&(&c * &c + &c - a * a * (eta * eta)))
    );
    for t in [300i64, 299, 295, 290, 280, 250, 0] {
        println!(
            "T - t = {:>3}  ||C^t - C|| = {:.3e}",
            300 - t,
            spectral_norm(&(pt.c(t) - &c))
        );
    }
    Ok(())
}

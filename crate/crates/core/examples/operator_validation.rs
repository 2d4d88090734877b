//! Sampled monotonicity and smoothness certificates for each operator family.

use monotone_play::linalg::{Matrix, Vector};
use monotone_play::operators::{
    check_monotone_and_smooth, make_bilinear, make_linear, make_perturbed_bilinear,
    make_quadratic_min,
};

fn main() -> monotone_play::Result<()> {
    let m = Matrix::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 0.9]);
    let zero = Vector::zeros(2);
    let ops = [
        make_bilinear(&m, &zero, &zero, 1.0)?,
        make_perturbed_bilinear(&m, &zero, &zero, 0.02, 1.0)?,
        make_quadratic_min(
            &Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            &zero,
            1.0,
        )?,
        make_linear(
            &Matrix::from_row_slice(2, 2, &[0.5, 1.0, -1.0, 0.1]),
            &zero,
            1.0,
        )?,
    ];
    for op in &ops {
        let r = check_monotone_and_smooth(op, 1_000, 7, 1e-9)?;
        println!(
            "{:<20} monotone {}  ell = {:.4} (sampled {:.4})  lambda = {:.4} (sampled {:.4})",
            op.kind().to_string(),
            r.monotone,
            op.ell(),
            r.ell_hat,
            op.lambda(),
            r.lambda_hat
        );
    }
    let bad = make_linear(
        &Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]),
        &zero,
        1.0,
    );
    println!("non-monotone matrix rejected: {}", bad.is_err());
    Ok(())
}

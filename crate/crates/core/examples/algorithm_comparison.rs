//! Gradient descent, extragradient and optimistic gradient on the same
//! bilinear game. Plain gradient steps spiral outward; the other two converge.

use monotone_play::dynamics::{run_eg, run_gd, run_og, run_og_peg};
use monotone_play::linalg::{Matrix, Vector};
use monotone_play::operators::make_bilinear;

fn main() -> monotone_play::Result<()> {
    let op = make_bilinear(
        &Matrix::identity(1, 1),
        &Vector::zeros(1),
        &Vector::zeros(1),
        1.0,
    )?;
    let z0 = Vector::from_column_slice(&[1.0, 0.0]);
    let (eta, t) = (0.1, 2_000);

    let gd = run_gd(&op, &z0, eta, t)?;
    let eg = run_eg(&op, &z0, eta, t, None)?;
    let og = run_og(&op, &z0, &z0, eta, t)?;
    let peg = run_og_peg(&op, &z0, &z0, eta, t)?;

    println!("{:>6} {:>12} {:>12} {:>12}", "T", "gd", "eg", "og");
    for s in [0i64, 10, 100, 1_000, 2_000] {
        println!(
            "{s:>6} {:>12.4e} {:>12.4e} {:>12.4e}",
            gd.grad_norm(s),
            eg.grad_norm(s),
            og.grad_norm(s)
        );
    }
    let drift = (0..=t as i64)
        .map(|s| (og.z(s) - peg.z(s)).norm())
        .fold(0.0, f64::max);
    println!("max distance between the two optimistic forms: {drift:.2e}");
    Ok(())
}

//! Optimistic gradient on a bilinear game: the last iterate's gradient norm
//! decays and stays under the `60D/(η√T)` envelope.

use monotone_play::diagnostics::theorem1_check;
use monotone_play::dynamics::run_og;
use monotone_play::linalg::{Matrix, Vector};
use monotone_play::operators::make_bilinear;

fn main() -> monotone_play::Result<()> {
    let m = Matrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.7]);
    let op = make_bilinear(&m, &Vector::zeros(2), &Vector::zeros(2), 1.0)?;
    let eta = 1.0 / (150.0 * op.ell());
    let z0 = Vector::from_column_slice(&[0.5, -0.3, 0.2, 0.4]);
    let trace = run_og(&op, &z0, &z0, eta, 20_000)?;

    println!("ell = {:.4}, eta = {eta:.6}", op.ell());
    for t in [1usize, 10, 100, 1_000, 10_000, 20_000] {
        let envelope = 60.0 / (eta * (t as f64).sqrt());
        println!(
            "T = {t:>6}  ||F(z^T)|| = {:.3e}  envelope = {envelope:.3e}",
            trace.grad_norm(t as i64)
        );
    }
    let check = theorem1_check(&trace, 1.0, eta, op.ell(), op.lambda());
    println!(
        "last-iterate bound: {} (max ratio {:.3e})",
        check.label(),
        check.margin
    );
    Ok(())
}

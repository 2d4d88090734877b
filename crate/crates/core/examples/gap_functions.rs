//! Gradient gap versus total gap along an optimistic run on a bilinear game
//! with an offset, using deviation balls of radius 3D around the start.

use monotone_play::diagnostics::{gap_reports, DeviationSets};
use monotone_play::dynamics::run_og;
use monotone_play::linalg::{Matrix, Vector};
use monotone_play::operators::GameSpec;

fn main() -> monotone_play::Result<()> {
    let m = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.5, 1.0]);
    let b1 = Vector::from_column_slice(&[0.2, -0.1]);
    let b2 = Vector::from_column_slice(&[0.0, 0.3]);
    let game = GameSpec::bilinear(&m, &b1, &b2, 1.0)?;
    let eta = 1.0 / (150.0 * game.operator.ell());
    let z0 = Vector::from_column_slice(&[0.4, 0.0, -0.2, 0.1]);
    let trace = run_og(&game.operator, &z0, &z0, eta, 5_000)?;
    let sets = DeviationSets::around_start(&game, &z0, 1.0);

    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "t", "grad gap", "total gap", "bound", "dist to z*"
    );
    for r in gap_reports(&game, &trace, &sets)?.iter().step_by(1_000) {
        let fmt = |x: Option<f64>| x.map_or("-".into(), |v| format!("{v:.4e}"));
        println!(
            "{:>6} {:>12.4e} {:>12} {:>12} {:>12}",
            r.t,
            r.grad_gap,
            fmt(r.total_gap),
            fmt(r.total_gap_bound),
            fmt(r.dist_to_eq)
        );
    }
    Ok(())
}

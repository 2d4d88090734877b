//! Quadratic hard instances for gradient descent: suboptimality decays like
//! `ℓD²/T`, and the window sum matches the companion-power formula exactly.

use monotone_play::diagnostics::rate_fit;
use monotone_play::dynamics::SCLICoefficients;
use monotone_play::scli::convexmin_experiment;

fn main() -> monotone_play::Result<()> {
    let rep = convexmin_experiment(
        &SCLICoefficients::gd(1.0),
        1.0,
        1.0,
        &[25, 100, 400, 1_600],
        2,
        10_000,
    )?;
    for r in &rep.rows {
        println!(
            "T = {:>5}  nu = {:.6}  f - f* = {:.4e}  identity error = {:.1e}  ratio = {:.4}",
            r.horizon,
            r.nu,
            r.max_subopt,
            r.identity_rel_error(),
            r.ratio
        );
    }
    let series: Vec<(f64, f64)> = rep
        .rows
        .iter()
        .map(|r| (r.horizon as f64, r.max_subopt))
        .collect();
    println!("fitted slope: {:.4}", rate_fit(&series, Some(0))?.slope);
    Ok(())
}

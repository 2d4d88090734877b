//! Spectral radius sweeps of `q − νr` over `ν ∈ [μ, ℓ]`: the accelerated
//! pair is flat at `√α`, the literal fixed-step pair peaks at `ν = μ`, and
//! random consistent pairs never drop below the conjectured bound.

use monotone_play::scli::{
    agd_polys, conjecture_bound, nesterov_fixed_step_polys, radius_sweep, random_consistent_coeffs,
    PolyPair, SweepFamily,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> monotone_play::Result<()> {
    let (mu, ell) = (0.01, 1.0);
    let bound = conjecture_bound(mu, ell)?;
    println!("conjectured bound at l/mu = 100: {bound:.6}");

    let agd = radius_sweep(&agd_polys(mu, ell)?, mu, ell, 1_000, SweepFamily::ConvexMin)?;
    let (lo, hi) = agd
        .series
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, r)| {
            (lo.min(r), hi.max(r))
        });
    println!("accelerated pair: radius in [{lo:.9}, {hi:.9}]");

    let lit = radius_sweep(
        &nesterov_fixed_step_polys(mu, ell)?,
        mu,
        ell,
        1_000,
        SweepFamily::ConvexMin,
    )?;
    println!(
        "fixed-step pair: sup {:.6} at nu = {:.4}",
        lit.sup, lit.argmax_nu
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in 1..=4 {
        let c = random_consistent_coeffs(&mut rng, p);
        let s = radius_sweep(
            &PolyPair::from_coeffs(&c)?,
            mu,
            ell,
            1_000,
            SweepFamily::ConvexMin,
        )?;
        println!("random pair p = {p}: sup {:.6} (bound {bound:.6})", s.sup);
    }
    Ok(())
}

//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use monotone_play::diagnostics::{best_iterate_check, rate_fit, theorem1_check};
use monotone_play::dynamics::{
    alternating_adversary, eg_regret_demo, og_regret_run, run_og, SCLICoefficients, StepSchedule,
    Trace,
};
use monotone_play::linalg::{sample_ball, spectral_norm, Matrix, Vector};
use monotone_play::operators::{make_bilinear, make_perturbed_bilinear, MonotoneOperator};
use monotone_play::potential::{
    backward_c, closed_form_c_linear, lemma5_report, verify_potential_identity,
};
use monotone_play::scli::{
    agd_polys, char_identity, convexmin_experiment, lowerbound_experiment, radius_sweep,
    random_consistent_coeffs, PolyPair, SweepFamily,
};
use monotone_play::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: usize = 10_000;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        ok,
        detail: detail.into(),
    })
}

fn bilinear_nu(nu: f64, d: f64) -> MonotoneOperator {
    make_bilinear(
        &(Matrix::identity(2, 2) * nu),
        &Vector::zeros(2),
        &Vector::zeros(2),
        d,
    )
    .unwrap()
}

/// OG runs on `M = νI`, `n = 4`, `D = 1`, `η = 1/(150ℓ)`, `T = 10⁴`.
fn og_runs() -> Result<Vec<(f64, f64, Trace)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut runs = Vec::new();
    for nu in [0.1, 1.0] {
        let op = bilinear_nu(nu, 1.0);
        let eta = 1.0 / (150.0 * op.ell());
        for _ in 0..3 {
            let z0 = sample_ball(&mut rng, &Vector::zeros(4), 1.0);
            runs.push((nu, eta, run_og(&op, &z0, &z0, eta, 10_000)?));
        }
    }
    Ok(runs)
}

fn ac1() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (nu, eta, trace) in og_runs()? {
        let c = theorem1_check(&trace, 1.0, eta, nu, 0.0);
        ok &= !c.vacuous && c.holds;
        worst = worst.max(c.margin);
    }
    verdict(
        ok,
        format!("max ||F(z^T)|| / (60D/(eta sqrt T)) = {worst:.4e}"),
    )
}

fn ac2() -> Result<Verdict> {
    let mut ok = true;
    let (mut w1, mut w3): (f64, f64) = (0.0, 0.0);
    for (nu, eta, trace) in og_runs()? {
        let a = best_iterate_check(&trace, 1.0, eta, nu, 1)?;
        let b = best_iterate_check(&trace, 1.0, eta, nu, 3)?;
        ok &= !a.vacuous && a.holds && !b.vacuous && b.holds;
        w1 = w1.max(a.margin);
        w3 = w3.max(b.margin);
    }
    verdict(ok, format!("max ratio S=1 {w1:.4e}, S=3 {w3:.4e}"))
}

fn potential_case(op: &MonotoneOperator, eta: f64, seed: u64) -> Result<(f64, bool, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = op
        .equilibrium()
        .cloned()
        .unwrap_or_else(|| Vector::zeros(op.dim()));
    let z0 = sample_ball(&mut rng, &center, 1.0);
    let trace = run_og(op, &z0, &z0, eta, 500)?;
    let pt = backward_c(op, &trace, 2)?;
    let res = verify_potential_identity(&pt)
        .into_iter()
        .fold(0.0, f64::max);
    let l5 = lemma5_report(&pt, eta, op.ell());
    Ok((res, l5.all_hold(), l5.vacuous))
}

fn linear_instance() -> MonotoneOperator {
    let m = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.8]);
    make_bilinear(
        &m,
        &Vector::from_column_slice(&[0.1, -0.2]),
        &Vector::from_column_slice(&[0.05, 0.0]),
        1.0,
    )
    .unwrap()
}

fn ac3() -> Result<Verdict> {
    let lin = linear_instance();
    let pert = make_perturbed_bilinear(
        &Matrix::identity(2, 2),
        &Vector::zeros(2),
        &Vector::zeros(2),
        0.01,
        1.0,
    )?;
    let (r1, h1, v1) = potential_case(&lin, 0.05, 31)?;
    let (r2, h2, v2) = potential_case(&pert, 0.05, 32)?;
    let ok = r1 <= 1e-8 && r2 <= 1e-8 && h1 && h2 && !v1 && !v2;
    verdict(
        ok,
        format!("max residual linear {r1:.3e}, perturbed {r2:.3e}; norm bounds {h1}/{h2}"),
    )
}

fn ac4() -> Result<Verdict> {
    let op = linear_instance();
    let eta = 0.05;
    let z0 = Vector::from_column_slice(&[0.3, -0.2, 0.5, 0.1]);
    let trace = run_og(&op, &z0, &z0, eta, 500)?;
    let pt = backward_c(&op, &trace, 2)?;
    let a = op.matrix();
    let cf = closed_form_c_linear(a, eta, 1e-14)?;
    let gap = (0..=450)
        .map(|t| spectral_norm(&(pt.c(t) - &cf)))
        .fold(0.0, f64::max);
    let res = spectral_norm(&(&cf * &cf + &cf - a * a * (eta * eta)));
    verdict(
        gap <= 1e-6 && res <= 1e-10,
        format!("max ||C^t - C|| = {gap:.3e} for T - t >= 50, quadratic residual {res:.3e}"),
    )
}

fn ac5() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bound = 9.0 / 11.0 - 1e-3;
    let mut min_sup = f64::INFINITY;
    for _ in 0..100 {
        let p = rng.random_range(1..=4);
        let c = random_consistent_coeffs(&mut rng, p);
        let s = radius_sweep(
            &PolyPair::from_coeffs(&c)?,
            0.01,
            1.0,
            GRID,
            SweepFamily::ConvexMin,
        )?;
        min_sup = min_sup.min(s.sup);
    }
    verdict(
        min_sup >= bound,
        format!("min sup {min_sup:.6} vs 9/11 - 1e-3 = {bound:.6}"),
    )
}

fn ac6() -> Result<Verdict> {
    let s = radius_sweep(
        &agd_polys(0.01, 1.0)?,
        0.01,
        1.0,
        GRID,
        SweepFamily::ConvexMin,
    )?;
    let target = (9.0f64 / 11.0).sqrt();
    let dev = s
        .series
        .iter()
        .map(|(_, r)| (r - target).abs())
        .fold(0.0, f64::max);
    verdict(
        dev <= 1e-8,
        format!("max |rho - sqrt(9/11)| = {dev:.3e} over {GRID} points"),
    )
}

fn ac7() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let p = rng.random_range(1..=4);
        let n = if i % 2 == 0 { 2 } else { 4 };
        let alpha = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let beta = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let c = SCLICoefficients::new(alpha, beta, 0.0, 1.0)?;
        let nu = rng.random_range(0.01..=1.0);
        let (m, q) = char_identity(&c, nu, n)?;
        worst = worst.max((m - q).abs());
    }
    verdict(
        worst <= 1e-8,
        format!("max |rho(C(A)) - maxroot| = {worst:.3e}"),
    )
}

fn ac8() -> Result<Verdict> {
    let rep = lowerbound_experiment(
        &SCLICoefficients::og(1.0 / 150.0),
        1.0,
        1.0,
        &[100, 1_000, 10_000],
        4,
        GRID,
    )?;
    let min_ratio = rep
        .rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    let series: Vec<(f64, f64)> = rep
        .rows
        .iter()
        .map(|r| (r.horizon as f64, r.max_gradgap))
        .collect();
    let fit = rate_fit(&series, Some(0))?;
    verdict(
        min_ratio >= 1e-3 && (-0.65..=-0.35).contains(&fit.slope),
        format!(
            "case {}, min ratio {min_ratio:.4e}, slope {:.4}",
            rep.case.label(),
            fit.slope
        ),
    )
}

fn ac9() -> Result<Verdict> {
    let rep = convexmin_experiment(
        &SCLICoefficients::gd(1.0),
        1.0,
        1.0,
        &[25, 100, 400],
        2,
        GRID,
    )?;
    let series: Vec<(f64, f64)> = rep
        .rows
        .iter()
        .map(|r| (r.horizon as f64, r.max_subopt))
        .collect();
    let fit = rate_fit(&series, Some(0))?;
    let err = rep
        .rows
        .iter()
        .map(|r| r.identity_rel_error())
        .fold(0.0, f64::max);
    verdict(
        (-1.2..=-0.8).contains(&fit.slope) && err <= 1e-8,
        format!("slope {:.4}, identity relative error {err:.3e}", fit.slope),
    )
}

fn ac10() -> Result<Verdict> {
    let mut ok = true;
    for eta in [0.5, 1.0] {
        for t in 1..=1_000usize {
            let demo = eg_regret_demo(t, eta)?;
            ok &= demo.regret[t - 1] == t.div_ceil(2) as f64 && demo.cumulative_loss[t - 1] == 0.0;
        }
    }
    let og = og_regret_run(
        &alternating_adversary(1_000),
        1.0,
        StepSchedule::inverse_sqrt(1.0, 1.0),
    )?;
    let avg = og.regret[999] / 1_000.0;
    verdict(
        ok && avg <= 0.1,
        format!("extragradient regret exact: {ok}; optimistic regret/T = {avg:.4e}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Result<Verdict>, Option<Duration>);
    let criteria: [Criterion; 10] = [
        ("AC1 last-iterate bound", ac1, Some(Duration::from_secs(10))),
        ("AC2 best-iterate bounds", ac2, None),
        ("AC3 potential identity", ac3, Some(Duration::from_secs(30))),
        ("AC4 closed-form C", ac4, None),
        ("AC5 radius lower bound", ac5, Some(Duration::from_secs(60))),
        ("AC6 accelerated flatness", ac6, None),
        ("AC7 companion identity", ac7, None),
        (
            "AC8 min-max lower bound",
            ac8,
            Some(Duration::from_secs(60)),
        ),
        ("AC9 convex lower bound", ac9, None),
        ("AC10 regret", ac10, None),
    ];
    let mut failures = 0;
    for (name, f, budget) in criteria {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(v) => {
                let in_time = budget.is_none_or(|b| elapsed <= b);
                let mut detail = v.detail;
                if !in_time {
                    detail.push_str(&format!("; over budget {:?}", budget.unwrap()));
                }
                (v.ok && in_time, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

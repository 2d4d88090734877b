//! Gap functions, distance statistics, bound checks over traces, and
//! log-log rate fitting.

use std::io::Write;

use crate::dynamics::Trace;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{blocks, Vector};
use crate::operators::{GameSpec, MonotoneOperator};

/// Gradient gap `‖F(z)‖`.
pub fn grad_gap(op: &MonotoneOperator, z: &Vector) -> Result<f64> {
    Ok(op.eval(z)?.norm())
}

/// Per-step gap summary. Absent entries are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub t: i64,
    pub grad_gap: f64,
    /// Exact total gap over the deviation balls (own-affine games only).
    pub total_gap: Option<f64>,
    /// `diam · √K · ‖F(z)‖`, present while `z` lies in the deviation sets.
    pub total_gap_bound: Option<f64>,
    pub dist_to_eq: Option<f64>,
}

/// Per-player deviation balls `B(center_k, radius)`.
#[derive(Debug, Clone)]
pub struct DeviationSets {
    pub centers: Vec<Vector>,
    pub radius: f64,
}

impl DeviationSets {
    /// Balls of radius `3D` around the player blocks of `z⁰`.
    pub fn around_start(game: &GameSpec, z0: &Vector, d: f64) -> Self {
        Self {
            centers: blocks(z0, &game.dims).collect(),
            radius: 3.0 * d,
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, dims: &[usize], z: &Vector) -> bool {
        blocks(z, dims)
            .zip(&self.centers)
            .all(|(b, c)| (b - c).norm() <= self.radius * (1.0 + 1e-12))
    }

    fn validate(&self, game: &GameSpec) -> Result<()> {
        if self.centers.len() != game.players() {
            return Err(Error::Contract(format!(
                "need {} centers, got {}",
                game.players(),
                self.centers.len()
            )));
        }
        for (c, &k) in self.centers.iter().zip(&game.dims) {
            check_dim("center", k, c.len())?;
        }
        if !(self.radius > 0.0) {
            return Err(Error::Contract("deviation radius must be positive".into()));
        }
        Ok(())
    }
}

/// Exact total gap `Σ_k [f_k(z) − min_{z'_k ∈ B(c_k, R)} f_k(z'_k, z_{−k})]`
/// for games whose costs are affine in each player's own block.
pub fn total_gap_bilinear(game: &GameSpec, z: &Vector, sets: &DeviationSets) -> Result<f64> {
    if !game.own_affine() {
        return Err(Error::Unsupported(
            "exact total gap needs costs affine in each player's own block".into(),
        ));
    }
    check_dim("state", game.operator.dim(), z.len())?;
    sets.validate(game)?;
    let f = game.operator.apply(z);
    let mut gap = 0.0;
    for (k, c) in sets.centers.iter().enumerate() {
        let start = game.block_start(k);
        let nk = game.dims[k];
        let mut deviated = z.clone();
        deviated.rows_mut(start, nk).copy_from(c);
        let own_grad = f.rows(start, nk).norm();
        gap += game.cost(k, z)? - game.cost(k, &deviated)? + sets.radius * own_grad;
    }
    Ok(gap.max(0.0))
}

/// `diam · √K · ‖F(z)‖` when `z` lies in the deviation sets.
pub fn total_gap_bound(game: &GameSpec, z: &Vector, sets: &DeviationSets) -> Result<Option<f64>> {
    sets.validate(game)?;
    check_dim("state", game.operator.dim(), z.len())?;
    if !sets.contains(&game.dims, z) {
        return Ok(None);
    }
    let k = game.players() as f64;
    Ok(Some(
        sets.diameter() * k.sqrt() * game.operator.apply(z).norm(),
    ))
}

/// Gap reports for `t = 0 … T`.
pub fn gap_reports(game: &GameSpec, trace: &Trace, sets: &DeviationSets) -> Result<Vec<GapReport>> {
    sets.validate(game)?;
    let eq = game.operator.equilibrium();
    (0..=trace.horizon() as i64)
        .map(|t| {
            let z = trace.z(t);
            Ok(GapReport {
                t,
                grad_gap: trace.grad_norm(t),
                total_gap: if game.own_affine() {
                    Some(total_gap_bilinear(game, z, sets)?)
                } else {
                    None
                },
                total_gap_bound: total_gap_bound(game, z, sets)?,
                dist_to_eq: eq.map(|e| (z - e).norm()),
            })
        })
        .collect()
}

pub fn write_gap_csv<W: Write>(reports: &[GapReport], mut w: W) -> Result<()> {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    writeln!(w, "t,grad_gap,total_gap,total_gap_bound,dist_to_eq")?;
    for r in reports {
        writeln!(
            w,
            "{},{:.16e},{},{},{}",
            r.t,
            r.grad_gap,
            opt(r.total_gap),
            opt(r.total_gap_bound),
            opt(r.dist_to_eq)
        )?;
    }
    Ok(())
}

/// Minimiser of the (windowed) gradient gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestIterate {
    pub index: usize,
    pub value: f64,
}

/// `min_{0≤t≤T−S} max_{0≤s<S} ‖F(z^{t+s})‖` over the first `prefix` points
/// `z⁰ … z^{prefix−1}`. With `S = 1` this is the plain best iterate.
pub fn best_iterate_prefix(trace: &Trace, window: usize, prefix: usize) -> Result<BestIterate> {
    if window == 0 {
        return Err(Error::Contract("window must be >= 1".into()));
    }
    if prefix == 0 || prefix > trace.horizon() + 1 {
        return Err(Error::Contract(format!(
            "prefix {prefix} outside 1..={}",
            trace.horizon() + 1
        )));
    }
    if window > 1 && 3 * window >= prefix {
        return Err(Error::Contract(format!(
            "window {window} must be below T/3 = {}",
            prefix as f64 / 3.0
        )));
    }
    let g = trace.grad_norms();
    let mut best = BestIterate {
        index: 0,
        value: f64::INFINITY,
    };
    for t in 0..=prefix - window {
        let v = g[t..t + window].iter().copied().fold(0.0, f64::max);
        if v < best.value {
            best = BestIterate { index: t, value: v };
        }
    }
    Ok(best)
}

/// Best (windowed) iterate over the whole trace.
pub fn best_iterate(trace: &Trace, window: usize) -> Result<BestIterate> {
    best_iterate_prefix(trace, window, trace.horizon() + 1)
}

/// Right-hand side of the best-iterate bound for horizon `T`:
/// `4D/(η√T·√(1−10η²ℓ²))` for `S = 1`, `6D/(η√(T/S)·√(1−10η²ℓ²))` otherwise.
/// `None` when `10η²ℓ² ≥ 1`.
pub fn best_iterate_bound(
    d: f64,
    eta: f64,
    ell: f64,
    horizon: usize,
    window: usize,
) -> Option<f64> {
    let shrink = 1.0 - 10.0 * (eta * ell).powi(2);
    if shrink <= 0.0 {
        return None;
    }
    let t = horizon as f64;
    Some(if window <= 1 {
        4.0 * d / (eta * t.sqrt() * shrink.sqrt())
    } else {
        6.0 * d / (eta * (t / window as f64).sqrt() * shrink.sqrt())
    })
}

/// Outcome of a bound checked at every prefix length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// Precondition failed, so the bound says nothing.
    pub vacuous: bool,
    pub holds: bool,
    /// Largest ratio of measured value to bound.
    pub margin: f64,
    /// Prefix length attaining the margin.
    pub worst: usize,
}

impl BoundCheck {
    pub fn label(&self) -> &'static str {
        match (self.vacuous, self.holds) {
            (true, _) => "vacuous",
            (false, true) => "holds",
            (false, false) => "fails",
        }
    }
}

fn ratio_check(vacuous: bool, ratios: impl Iterator<Item = (usize, f64)>) -> BoundCheck {
    let (worst, margin) = ratios.fold((0, 0.0), |acc, (t, r)| if r > acc.1 { (t, r) } else { acc });
    BoundCheck {
        vacuous,
        holds: margin <= 1.0,
        margin,
        worst,
    }
}

/// Best-iterate bound at every horizon `T` with `1 ≤ T ≤` trace length
/// (and `3S < T` for the window form).
pub fn best_iterate_check(
    trace: &Trace,
    d: f64,
    eta: f64,
    ell: f64,
    window: usize,
) -> Result<BoundCheck> {
    if window == 0 {
        return Err(Error::Contract("window must be >= 1".into()));
    }
    let g = trace.grad_norms();
    let n = trace.horizon();
    let vacuous = best_iterate_bound(d, eta, ell, 1, window).is_none();
    if vacuous {
        return Ok(BoundCheck {
            vacuous,
            holds: true,
            margin: 0.0,
            worst: 0,
        });
    }
    // running minimum of window maxima, O(T·S)
    let mut ratios = Vec::new();
    let mut run_min = f64::INFINITY;
    for horizon in window..=n {
        let t = horizon - window;
        let m = g[t..t + window].iter().copied().fold(0.0, f64::max);
        run_min = run_min.min(m);
        if window > 1 && 3 * window >= horizon {
            continue;
        }
        let bound = best_iterate_bound(d, eta, ell, horizon, window).expect("gate checked");
        ratios.push((horizon, run_min / bound));
    }
    Ok(ratio_check(false, ratios.into_iter()))
}

/// Whether `η ≤ min{1/(150ℓ), 1/(1711DΛ)}`.
pub fn last_iterate_step_ok(d: f64, eta: f64, ell: f64, lambda: f64) -> bool {
    let cap1 = 1.0 / (150.0 * ell);
    let cap2 = if lambda > 0.0 {
        1.0 / (1711.0 * d * lambda)
    } else {
        f64::INFINITY
    };
    eta <= cap1.min(cap2)
}

/// `‖F(z^T)‖ ≤ 60D/(η√T)` for every prefix length `T ≥ 1`.
pub fn theorem1_check(trace: &Trace, d: f64, eta: f64, ell: f64, lambda: f64) -> BoundCheck {
    let vacuous = !last_iterate_step_ok(d, eta, ell, lambda);
    let ratios = (1..=trace.horizon()).map(|t| {
        let bound = 60.0 * d / (eta * (t as f64).sqrt());
        (t, trace.grad_norm(t as i64) / bound)
    });
    ratio_check(vacuous, ratios)
}

/// Bound on the total gap at `T` obtained by composing the last-iterate
/// bound with the gradient-to-total-gap inequality over `B(z_k⁰, 3D)`:
/// `6D·√K·60D/(η√T)`.
pub fn total_gap_rate_bound(d: f64, players: usize, eta: f64, horizon: usize) -> f64 {
    6.0 * d * (players as f64).sqrt() * 60.0 * d / (eta * (horizon as f64).sqrt())
}

/// `‖F(z̄^T)‖` with `z̄^T = (1/T)Σ_{t=1}^T z^t`, for `T = 1 … horizon`.
pub fn averaged_iterate_gap(trace: &Trace, op: &MonotoneOperator) -> Result<Vec<f64>> {
    check_dim("trace", op.dim(), trace.dim())?;
    let mut sum = Vector::zeros(trace.dim());
    Ok(trace
        .iterates()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            sum += z;
            op.apply(&(&sum / (i + 1) as f64)).norm()
        })
        .collect())
}

/// Least-squares fit of `log value = slope · log T + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points_used: usize,
}

/// Fit after dropping `burn_in` leading points (default: first 10%) and
/// any nonpositive entries.
pub fn rate_fit(series: &[(f64, f64)], burn_in: Option<usize>) -> Result<RateFit> {
    let skip = burn_in.unwrap_or(series.len() / 10);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.iter().skip(skip) {
        if t > 0.0 && v > 0.0 && t.is_finite() && v.is_finite() {
            xs.push(t.ln());
            ys.push(v.ln());
        } else {
            log::warn!("rate fit: excluding point ({t}, {v})");
        }
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Numeric(format!(
            "rate fit needs at least 3 positive points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("rate fit: all T values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        points_used: n,
    })
}

/// `max_t ‖z^t − z*‖` against twice the initial distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedIterates {
    /// `max_t ‖z^t − z*‖ / (2·initial distance)`.
    pub ratio: f64,
    pub holds: bool,
    /// Whether the two initial points coincided.
    pub equal_inits: bool,
}

impl BoundedIterates {
    /// A violation with distinct initial points is outside the setting of
    /// the bound; it is reported, not treated as a failure.
    pub fn is_finding(&self) -> bool {
        !self.holds && !self.equal_inits
    }
}

pub fn bounded_iterates_check(trace: &Trace, z_star: &Vector) -> Result<BoundedIterates> {
    check_dim("equilibrium", trace.dim(), z_star.len())?;
    let equal_inits = trace.inits().windows(2).all(|w| w[0] == w[1]);
    let base = trace
        .inits()
        .iter()
        .map(|z| (z - z_star).norm())
        .fold(0.0, f64::max);
    let far = (0..=trace.horizon() as i64)
        .map(|t| (trace.z(t) - z_star).norm())
        .fold(0.0, f64::max);
    let ratio = if base == 0.0 {
        if far == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        far / (2.0 * base)
    };
    Ok(BoundedIterates {
        ratio,
        holds: ratio <= 1.0 + 1e-6,
        equal_inits,
    })
}

/// Short-term growth: whenever `max(‖F(z^t)‖, ‖F(z^{t−1})‖) ≤ δ`, every
/// later `‖F(z^{t+s})‖ ≤ δ(1+3ηℓ)^s`. Checked for all `t ≥ 1` in `O(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub holds: bool,
    /// Largest `‖F(z^{t+s})‖ / (δ_t (1+3ηℓ)^s)` over all pairs.
    pub worst_ratio: f64,
}

pub fn short_term_growth_check(trace: &Trace, eta: f64, ell: f64) -> GrowthCheck {
    let g = trace.grad_norms();
    let lq = (3.0 * eta * ell).ln_1p();
    let n = g.len();
    // suffix[u] = max_{v ≥ u} (ln g_v − v·lq)
    let mut suffix = vec![f64::NEG_INFINITY; n + 1];
    for u in (0..n).rev() {
        suffix[u] = suffix[u + 1].max(g[u].ln() - u as f64 * lq);
    }
    let mut worst: f64 = 0.0;
    for t in 1..n.saturating_sub(1) {
        let delta = g[t].max(g[t - 1]);
        let later = suffix[t + 1];
        let r = if later == f64::NEG_INFINITY {
            0.0
        } else if delta == 0.0 {
            f64::INFINITY
        } else {
            (later - (delta.ln() - t as f64 * lq)).exp()
        };
        worst = worst.max(r);
    }
    GrowthCheck {
        holds: worst <= 1.0 + 1e-12,
        worst_ratio: worst,
    }
}

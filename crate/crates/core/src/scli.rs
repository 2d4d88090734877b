//! Spectral lower-bound laboratory for stationary p-step linear iterations.
//!
//! On `F(z) = Az + b` a p-SCLI stacks its last `p` iterates into
//! `w^t = (z^{t−p+1}, …, z^t)` and evolves as `w^{t+1} = C(A)w^t + U N(A) b`
//! with the block companion matrix
//!
//! ```text
//!        ┌ 0    I    0   …   0      ┐
//! C(A) = │ ⋮              ⋱   ⋮      │
//!        │ 0    …        0   I      │
//!        └ C₀(A) C₁(A)   …   C_{p−1}(A) ┘
//! ```
//!
//! For `A = [[0, νI], [−νI, 0]]` the spectral radius of `C(A)` is the largest
//! root modulus of `q² + ν²r²`, and for `A = νI` that of `q − νr`, where
//! `q(λ) = λ^p − Σβ_jλ^j` and `r(λ) = Σα_jλ^j`.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{Complex, Schur, SVD};
use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{run_scli, SCLICoefficients, Trace};
use crate::error::{Error, Result};
use crate::linalg::{block_norms, Matrix, Vector};
use crate::operators::{make_bilinear, make_quadratic_min, suboptimality, MonotoneOperator};

/// Environment variable capping the worker threads used by sweeps.
pub const THREADS_ENV: &str = "MONOTONE_PLAY_THREADS";

pub const DEFAULT_GRID_POINTS: usize = 10_000;

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            builder = builder.num_threads(n);
        }
        builder.build().expect("failed to start sweep thread pool")
    })
}

/// Positive integer from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Largest eigenvalue modulus, via balancing and a real Schur form.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn eigenvalues(m: &Matrix) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::Contract(
            "spectral radius needs a square matrix".into(),
        ));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract(
            "spectral radius needs finite entries".into(),
        ));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let max_iter = 10_000 * m.nrows();
    let mut balanced = m.clone();
    balance_parlett_reinsch(&mut balanced);
    // exact zero patterns can stall the shifted QR sweep; an orthogonal
    // similarity keeps the spectrum and breaks the pattern
    let candidates = [balanced.clone(), m.clone(), reflect(&balanced)];
    for work in candidates {
        if let Some(schur) = Schur::try_new(work, f64::EPSILON, max_iter) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::Numeric(
        "eigenvalue iteration did not converge".into(),
    ))
}

/// `H M H` for a fixed Householder reflector `H`.
fn reflect(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let v = Vector::from_fn(n, |i, _| 1.0 + 0.618 * (i as f64 * 1.3).sin());
    let v = &v / v.norm();
    let h = Matrix::identity(n, n) - (&v * v.transpose()) * 2.0;
    &h * m * &h
}

fn trim(coeffs: &[f64]) -> Result<&[f64]> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Contract(
            "polynomial coefficients must be finite".into(),
        ));
    }
    let deg = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .ok_or_else(|| Error::Contract("zero polynomial has no roots".into()))?;
    if deg == 0 {
        return Err(Error::Contract("constant polynomial has no roots".into()));
    }
    Ok(&coeffs[..=deg])
}

/// Roots of `Σ c_k z^k` (coefficients in ascending order).
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex<f64>>> {
    let c = trim(coeffs)?;
    let d = c.len() - 1;
    let lead = c[d];
    let mut comp = Matrix::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lead;
    }
    eigenvalues(&comp)
}

/// Largest root modulus of `Σ c_k z^k` (ascending coefficients).
pub fn poly_radius(coeffs: &[f64]) -> Result<f64> {
    Ok(poly_roots(coeffs)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len().max(y.len());
    (0..n)
        .map(|i| a * x.get(i).copied().unwrap_or(0.0) + y.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Which reduction the spectral radius belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    /// Bilinear games: roots of `q² + ν²r²`.
    MinMax,
    /// Quadratic minimisation: roots of `q − νr`.
    ConvexMin,
}

/// Polynomial pair `(q, r)` with ascending coefficients, `q` monic of
/// degree `p` and `deg r ≤ p − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPair {
    q: Vec<f64>,
    r: Vec<f64>,
}

impl PolyPair {
    /// Normalises `q` to be monic, scaling `r` by the same factor.
    pub fn new(q: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let q_trim = trim(&q)?.to_vec();
        let p = q_trim.len() - 1;
        if r.iter().any(|c| !c.is_finite()) {
            return Err(Error::Contract("r must have finite coefficients".into()));
        }
        let r_deg = r.iter().rposition(|&c| c != 0.0).map_or(0, |d| d);
        if r_deg >= p {
            return Err(Error::Contract(format!(
                "deg r = {r_deg} must be below deg q = {p}"
            )));
        }
        let lead = q_trim[p];
        let mut r: Vec<f64> = r.iter().map(|c| c / lead).collect();
        r.resize(p, 0.0);
        Ok(Self {
            q: q_trim.iter().map(|c| c / lead).collect(),
            r,
        })
    }

    /// `q(λ) = λ^p − Σβ_jλ^j`, `r(λ) = Σα_jλ^j`.
    pub fn from_coeffs(c: &SCLICoefficients) -> Result<Self> {
        c.validate()?;
        let mut q: Vec<f64> = c.beta.iter().map(|b| -b).collect();
        q.push(1.0);
        Self::new(q, c.alpha.clone())
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }
    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn degree(&self) -> usize {
        self.q.len() - 1
    }

    /// Coefficients of `q − νr`.
    pub fn pencil(&self, nu: f64) -> Vec<f64> {
        poly_axpy(-nu, &self.r, &self.q)
    }

    /// Coefficients of `q² + ν²r²`.
    pub fn squared_pencil(&self, nu: f64) -> Vec<f64> {
        let qq = poly_mul(&self.q, &self.q);
        let rr = poly_mul(&self.r, &self.r);
        poly_axpy(nu * nu, &rr, &qq)
    }

    /// Spectral radius of the family member at `ν`.
    pub fn radius(&self, nu: f64, family: SweepFamily) -> Result<f64> {
        match family {
            SweepFamily::ConvexMin => poly_radius(&self.pencil(nu)),
            SweepFamily::MinMax => poly_radius(&self.squared_pencil(nu)),
        }
    }

    /// `q(1)`.
    pub fn q_at_one(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Supremum estimate of the radius over `ν ∈ [μ, ℓ]`.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub sup: f64,
    pub argmax_nu: f64,
    /// `(ν, ρ)` on the uniform grid.
    pub series: Vec<(f64, f64)>,
}

/// Uniform grid over `[μ, ℓ]` followed by golden-section refinement around
/// the grid maximiser. Grid evaluation runs on the capped thread pool.
pub fn radius_sweep(
    pair: &PolyPair,
    mu: f64,
    ell: f64,
    grid_points: usize,
    family: SweepFamily,
) -> Result<Sweep> {
    if !(mu > 0.0 && mu < ell && ell.is_finite()) {
        return Err(Error::Contract(format!(
            "need 0 < mu < ell, got mu={mu}, ell={ell}"
        )));
    }
    if grid_points < 2 {
        return Err(Error::Contract("grid_points must be >= 2".into()));
    }
    let step = (ell - mu) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| {
            if i + 1 == grid_points {
                ell
            } else {
                mu + step * i as f64
            }
        })
        .collect();
    let values: Vec<f64> = pool().install(|| {
        grid.par_iter()
            .map(|&nu| pair.radius(nu, family))
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid_points - 1)];
    let (nu_ref, rho_ref) = golden_max(|nu| pair.radius(nu, family), lo, hi, 80)?;
    let (sup, argmax_nu) = if rho_ref > values[best] {
        (rho_ref, nu_ref)
    } else {
        (values[best], grid[best])
    };
    Ok(Sweep {
        sup,
        argmax_nu,
        series: grid.into_iter().zip(values).collect(),
    })
}

fn golden_max(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

pub fn write_sweep_csv<W: Write>(sweep: &Sweep, mut w: W) -> Result<()> {
    writeln!(w, "nu,rho")?;
    for (nu, rho) in &sweep.series {
        writeln!(w, "{nu:.16e},{rho:.16e}")?;
    }
    Ok(())
}

/// `(√(ℓ/μ) − 1)/(√(ℓ/μ) + 1)`.
pub fn conjecture_bound(mu: f64, ell: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < ell) {
        return Err(Error::Contract(format!(
            "need 0 < mu < ell, got mu={mu}, ell={ell}"
        )));
    }
    let k = (ell / mu).sqrt();
    Ok((k - 1.0) / (k + 1.0))
}

/// `(√ℓ − √μ)/(√ℓ + √μ)`.
pub fn agd_momentum(mu: f64, ell: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < ell) {
        return Err(Error::Contract(format!(
            "need 0 < mu < ell, got mu={mu}, ell={ell}"
        )));
    }
    Ok((ell.sqrt() - mu.sqrt()) / (ell.sqrt() + mu.sqrt()))
}

/// Accelerated-gradient pair with a flat radius: `q = (z − α)(z − 1)`,
/// `r = −(1+α)z/ℓ`. Every `q − νr`, `ν ∈ [μ, ℓ]`, has complex roots of
/// modulus `√α`.
pub fn agd_polys(mu: f64, ell: f64) -> Result<PolyPair> {
    let a = agd_momentum(mu, ell)?;
    PolyPair::new(vec![a, -(1.0 + a), 1.0], vec![0.0, -(1.0 + a) / ell])
}

/// Fixed-step Nesterov pair `q = ℓ(z − α)(z − 1)`, `r = −(1+α)z + α`.
/// Its radius is `√(α(1 − ν/ℓ))` while the roots are complex, so the sweep
/// peaks at `ν = μ` with value `1 − √(μ/ℓ)`.
pub fn nesterov_fixed_step_polys(mu: f64, ell: f64) -> Result<PolyPair> {
    let a = agd_momentum(mu, ell)?;
    PolyPair::new(vec![ell * a, -ell * (1.0 + a), ell], vec![a, -(1.0 + a)])
}

/// `A = [[0, νI], [−νI, 0]]` of size `n`.
pub fn bilinear_nu_matrix(nu: f64, n: usize) -> Matrix {
    let h = n / 2;
    let mut a = Matrix::zeros(n, n);
    for i in 0..h {
        a[(i, h + i)] = nu;
        a[(h + i, i)] = -nu;
    }
    a
}

/// Block companion form of a p-SCLI applied to `F(z) = Az + b`.
#[derive(Debug, Clone)]
pub struct CompanionSystem {
    /// `C(A)`, `pn × pn`.
    pub c_of_a: Matrix,
    /// Selector of the newest block, `pn × n`.
    pub u: Matrix,
    /// `N(A) = γA + δI`.
    pub n_of_a: Matrix,
    pub nu: Option<f64>,
    pub coeffs: SCLICoefficients,
}

pub fn build_companion(coeffs: &SCLICoefficients, a: &Matrix) -> Result<CompanionSystem> {
    coeffs.validate()?;
    if !a.is_square() {
        return Err(Error::Contract("A must be square".into()));
    }
    let n = a.nrows();
    let p = coeffs.p();
    let mut c = Matrix::zeros(p * n, p * n);
    for i in 0..p - 1 {
        c.view_mut((i * n, (i + 1) * n), (n, n))
            .copy_from(&Matrix::identity(n, n));
    }
    for j in 0..p {
        c.view_mut(((p - 1) * n, j * n), (n, n))
            .copy_from(&coeffs.c_block(j, a));
    }
    let mut u = Matrix::zeros(p * n, n);
    u.view_mut(((p - 1) * n, 0), (n, n))
        .copy_from(&Matrix::identity(n, n));
    Ok(CompanionSystem {
        c_of_a: c,
        u,
        n_of_a: coeffs.n_block(a),
        nu: None,
        coeffs: coeffs.clone(),
    })
}

/// `(ρ(C(A)), largest root modulus of q² + ν²r²)` for the bilinear `A` of
/// size `n` with parameter `ν`. The two agree.
pub fn char_identity(coeffs: &SCLICoefficients, nu: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "n must be even and positive, got {n}"
        )));
    }
    let sys = build_companion(coeffs, &bilinear_nu_matrix(nu, n))?;
    let pair = PolyPair::from_coeffs(coeffs)?;
    Ok((
        spectral_radius(&sys.c_of_a)?,
        pair.radius(nu, SweepFamily::MinMax)?,
    ))
}

/// Random coefficients with `α_j, β_j` uniform in `[−1, 1]`, then every
/// `β_j` shifted by `(1 − Σβ)/p` so that `Σβ = 1`.
pub fn random_consistent_coeffs<R: Rng + ?Sized>(rng: &mut R, p: usize) -> SCLICoefficients {
    let alpha: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let shift = (1.0 - beta.iter().sum::<f64>()) / p as f64;
    beta.iter_mut().for_each(|b| *b += shift);
    let delta = alpha.iter().sum();
    SCLICoefficients {
        alpha,
        beta,
        gamma: 0.0,
        delta,
    }
}

/// Per-step radius floor `(2T − 1)/(2T + 1)` for the min-max sweep over
/// `[ℓ/(2T), ℓ]`.
pub fn per_step_floor(horizon: usize) -> f64 {
    let t = 2.0 * horizon as f64;
    (t - 1.0) / (t + 1.0)
}

/// Which branch of the lower-bound construction applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBoundCase {
    /// `C(A) − I` is singular at `ν`: stacked constant points never move.
    Stationary { nu: f64 },
    /// `N(A)` is singular at `ν`: the offset never enters the iterates.
    ZeroShift { nu: f64 },
    /// `ρ(C(A)) > 1` at `ν`: iterates blow up.
    Divergent { nu: f64, rho: f64 },
    /// `Σβ ≠ 1`: iterates settle at the wrong point.
    Inconsistent,
    /// `Σβ = 1` and `ρ(C(A)) ≤ 1`: the singular-vector hard instance.
    Consistent,
}

impl LowerBoundCase {
    pub fn label(&self) -> &'static str {
        match self {
            LowerBoundCase::Stationary { .. } => "1 (stationary point)",
            LowerBoundCase::ZeroShift { .. } => "1 (offset ignored)",
            LowerBoundCase::Divergent { .. } => "2 (spectral radius above one)",
            LowerBoundCase::Inconsistent => "3a (inconsistent)",
            LowerBoundCase::Consistent => "3b (consistent)",
        }
    }

    pub fn converges(&self) -> bool {
        matches!(self, LowerBoundCase::Consistent)
    }
}

const COEFF_TOL: f64 = 1e-12;

/// Detect the branch for `ν ∈ (0, ℓ]`. Divergence is probed on a grid of
/// `probe_points` values over `[ℓ·10⁻⁴, ℓ]`.
pub fn classify(
    coeffs: &SCLICoefficients,
    family: SweepFamily,
    ell: f64,
    probe_points: usize,
) -> Result<LowerBoundCase> {
    coeffs.validate()?;
    if !(ell > 0.0) {
        return Err(Error::Contract("ell must be positive".into()));
    }
    let sum_a: f64 = coeffs.alpha.iter().sum();
    let sum_b: f64 = coeffs.beta.iter().sum();
    let in_window = |nu: f64| nu > 0.0 && nu <= ell * (1.0 + COEFF_TOL);
    match family {
        SweepFamily::MinMax => {
            if (sum_b - 1.0).abs() <= COEFF_TOL && sum_a.abs() <= COEFF_TOL {
                return Ok(LowerBoundCase::Stationary { nu: ell });
            }
            if coeffs.gamma.abs() <= COEFF_TOL && coeffs.delta.abs() <= COEFF_TOL {
                return Ok(LowerBoundCase::ZeroShift { nu: ell });
            }
        }
        SweepFamily::ConvexMin => {
            // det(C(S) − I) ∝ (1 − Σβ) − νΣα, det N(S) ∝ γν + δ
            if (sum_b - 1.0).abs() <= COEFF_TOL && sum_a.abs() <= COEFF_TOL {
                return Ok(LowerBoundCase::Stationary { nu: ell });
            }
            if sum_a.abs() > COEFF_TOL && in_window((1.0 - sum_b) / sum_a) {
                return Ok(LowerBoundCase::Stationary {
                    nu: ((1.0 - sum_b) / sum_a).min(ell),
                });
            }
            if coeffs.gamma.abs() <= COEFF_TOL && coeffs.delta.abs() <= COEFF_TOL {
                return Ok(LowerBoundCase::ZeroShift { nu: ell });
            }
            if coeffs.gamma.abs() > COEFF_TOL && in_window(-coeffs.delta / coeffs.gamma) {
                return Ok(LowerBoundCase::ZeroShift {
                    nu: (-coeffs.delta / coeffs.gamma).min(ell),
                });
            }
        }
    }
    let pair = PolyPair::from_coeffs(coeffs)?;
    let sweep = radius_sweep(&pair, ell * 1e-4, ell, probe_points.max(2), family)?;
    if sweep.sup > 1.0 + 1e-9 {
        return Ok(LowerBoundCase::Divergent {
            nu: sweep.argmax_nu,
            rho: sweep.sup,
        });
    }
    if (sum_b - 1.0).abs() > COEFF_TOL {
        return Ok(LowerBoundCase::Inconsistent);
    }
    Ok(LowerBoundCase::Consistent)
}

/// Instance and initial points produced for one horizon.
#[derive(Debug, Clone)]
pub struct HardInstance {
    pub case: LowerBoundCase,
    pub operator: MonotoneOperator,
    /// `p` initial points, oldest first.
    pub inits: Vec<Vector>,
    pub nu: f64,
    /// `ln ‖C^T w⁰‖ − ln ‖w⁰‖` for singular-vector constructions.
    pub log_gain: Option<f64>,
}

/// `C^T` as `(scaled product, ln scale)`, rescaled each step.
fn companion_power(c: &Matrix, horizon: usize) -> (Matrix, f64) {
    let mut prod = Matrix::identity(c.nrows(), c.ncols());
    let mut log_scale = 0.0;
    for _ in 0..horizon {
        prod = c * prod;
        let m = prod.amax();
        if m > 0.0 && m.is_finite() {
            prod /= m;
            log_scale += m.ln();
        }
    }
    (prod, log_scale)
}

/// Top right singular vector of `C^T`, with `ln σ_max`.
fn top_singular_vector(c: &Matrix, horizon: usize) -> Result<(Vector, f64)> {
    let (prod, log_scale) = companion_power(c, horizon);
    let svd = SVD::try_new(prod, false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("SVD of companion power did not converge".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numeric("SVD returned no right singular vectors".into()))?;
    let (idx, sigma) = svd.singular_values.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, s)| if s > acc.1 { (i, s) } else { acc },
    );
    Ok((v_t.row(idx).transpose(), sigma.ln() + log_scale))
}

/// Split the stacked vector into `p` points and scale so the largest player
/// block norm is exactly `d`.
fn scaled_inits(
    stacked: &Vector,
    p: usize,
    n: usize,
    player_dims: &[usize],
    d: f64,
) -> Vec<Vector> {
    let pts: Vec<Vector> = (0..p)
        .map(|j| stacked.rows(j * n, n).into_owned())
        .collect();
    let biggest = pts
        .iter()
        .flat_map(|z| block_norms(z, player_dims))
        .fold(0.0, f64::max);
    let s = if biggest > 0.0 { d / biggest } else { 0.0 };
    pts.into_iter().map(|z| z * s).collect()
}

fn check_shape(n: usize, d: f64, horizon: usize, family: SweepFamily) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Contract("horizon T must be >= 1".into()));
    }
    if !(d > 0.0) {
        return Err(Error::Contract("D must be positive".into()));
    }
    match family {
        SweepFamily::MinMax if n == 0 || !n.is_multiple_of(2) => Err(Error::Contract(format!(
            "n must be even and positive, got {n}"
        ))),
        SweepFamily::ConvexMin if n == 0 => Err(Error::Contract("n must be positive".into())),
        _ => Ok(()),
    }
}

fn family_operator(
    family: SweepFamily,
    nu: f64,
    offset_norm: f64,
    n: usize,
    d: f64,
) -> Result<MonotoneOperator> {
    match family {
        SweepFamily::MinMax => {
            let h = n / 2;
            let b1 = Vector::from_element(h, offset_norm / (h as f64).sqrt());
            let b2 = -&b1;
            make_bilinear(&(Matrix::identity(h, h) * nu), &b1, &b2, d)
        }
        SweepFamily::ConvexMin => {
            let b = Vector::from_element(n, -offset_norm / (n as f64).sqrt());
            make_quadratic_min(&(Matrix::identity(n, n) * nu), &b, d)
        }
    }
}

fn family_matrix(family: SweepFamily, nu: f64, n: usize) -> Matrix {
    match family {
        SweepFamily::MinMax => bilinear_nu_matrix(nu, n),
        SweepFamily::ConvexMin => Matrix::identity(n, n) * nu,
    }
}

fn hard_instance(
    coeffs: &SCLICoefficients,
    family: SweepFamily,
    ell: f64,
    d: f64,
    horizon: usize,
    n: usize,
    grid_points: usize,
) -> Result<HardInstance> {
    check_shape(n, d, horizon, family)?;
    let case = classify(coeffs, family, ell, grid_points.min(2000))?;
    let p = coeffs.p();
    let singular = |nu: f64| -> Result<HardInstance> {
        let op = family_operator(family, nu, 0.0, n, d)?;
        let sys = build_companion(coeffs, &family_matrix(family, nu, n))?;
        let (v, log_gain) = top_singular_vector(&sys.c_of_a, horizon)?;
        let inits = scaled_inits(&v, p, n, op.player_dims(), d);
        Ok(HardInstance {
            case,
            inits,
            nu,
            log_gain: Some(log_gain),
            operator: op,
        })
    };
    match case {
        LowerBoundCase::Consistent => {
            let mu = match family {
                SweepFamily::MinMax => ell / (2.0 * (horizon as f64).sqrt()),
                SweepFamily::ConvexMin => ell / (4.0 * horizon as f64),
            };
            let nu = if mu < ell {
                let pair = PolyPair::from_coeffs(coeffs)?;
                radius_sweep(&pair, mu, ell, grid_points, family)?.argmax_nu
            } else {
                ell
            };
            singular(nu)
        }
        LowerBoundCase::Divergent { nu, .. } => singular(nu),
        LowerBoundCase::Stationary { nu } => {
            let op = family_operator(family, nu, 0.0, n, d)?;
            let per = op.player_dims()[0] as f64;
            let z = Vector::from_element(n, d / per.sqrt());
            Ok(HardInstance {
                case,
                inits: vec![z; p],
                nu,
                log_gain: None,
                operator: op,
            })
        }
        LowerBoundCase::ZeroShift { nu } => offset_witness(case, family, nu, n, d, p),
        LowerBoundCase::Inconsistent => offset_witness(case, family, ell, n, d, p),
    }
}

fn offset_witness(
    case: LowerBoundCase,
    family: SweepFamily,
    nu: f64,
    n: usize,
    d: f64,
    p: usize,
) -> Result<HardInstance> {
    // offset sized so the equilibrium blocks have norm exactly D
    let op = family_operator(family, nu, nu * d, n, d)?;
    Ok(HardInstance {
        case,
        inits: vec![Vector::zeros(n); p],
        nu,
        log_gain: None,
        operator: op,
    })
}

/// Bilinear hard instance with `M = νI`, `b = 0`, for horizon `T`.
pub fn hard_instance_minmax(
    coeffs: &SCLICoefficients,
    ell: f64,
    d: f64,
    horizon: usize,
    n: usize,
    grid_points: usize,
) -> Result<HardInstance> {
    hard_instance(coeffs, SweepFamily::MinMax, ell, d, horizon, n, grid_points)
}

/// Quadratic hard instance with `S = νI`, `b = 0`, for horizon `T`.
pub fn hard_instance_convexmin(
    coeffs: &SCLICoefficients,
    ell: f64,
    d: f64,
    horizon: usize,
    n: usize,
    grid_points: usize,
) -> Result<HardInstance> {
    hard_instance(
        coeffs,
        SweepFamily::ConvexMin,
        ell,
        d,
        horizon,
        n,
        grid_points,
    )
}

/// One horizon of a lower-bound experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundRow {
    pub horizon: usize,
    pub nu: f64,
    /// `max_{T ≤ T' ≤ T+p−1} ‖F(z^{T'})‖`; infinite after divergence.
    pub max_gradgap: f64,
    /// `max_gradgap / (ℓD/√T)`.
    pub ratio: f64,
    pub diverged_at: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    pub case: LowerBoundCase,
    pub rows: Vec<LowerBoundRow>,
}

fn run_witness(
    coeffs: &SCLICoefficients,
    inst: &HardInstance,
    steps: usize,
) -> Result<std::result::Result<Trace, i64>> {
    match run_scli(&inst.operator, coeffs, &inst.inits, steps) {
        Ok(tr) => Ok(Ok(tr)),
        Err(Error::Divergence { index }) => Ok(Err(index)),
        Err(e) => Err(e),
    }
}

fn check_horizons(t_list: &[usize]) -> Result<()> {
    if t_list.is_empty() || t_list.windows(2).any(|w| w[1] <= w[0]) || t_list[0] == 0 {
        return Err(Error::Contract(
            "T_list must be nonempty, positive and ascending".into(),
        ));
    }
    Ok(())
}

/// Build the min-max hard instance for each `T`, run the iteration for
/// `T + p − 1` steps and record the largest gradient norm in the final window.
pub fn lowerbound_experiment(
    coeffs: &SCLICoefficients,
    ell: f64,
    d: f64,
    t_list: &[usize],
    n: usize,
    grid_points: usize,
) -> Result<LowerBoundReport> {
    check_horizons(t_list)?;
    let p = coeffs.p();
    let mut rows = Vec::with_capacity(t_list.len());
    let mut case = None;
    for &t in t_list {
        let inst = hard_instance_minmax(coeffs, ell, d, t, n, grid_points)?;
        case = Some(inst.case);
        let scale = ell * d / (t as f64).sqrt();
        let row = match run_witness(coeffs, &inst, t + p - 1)? {
            Ok(tr) => {
                let g = (t..t + p)
                    .map(|s| tr.grad_norm(s as i64))
                    .fold(0.0, f64::max);
                LowerBoundRow {
                    horizon: t,
                    nu: inst.nu,
                    max_gradgap: g,
                    ratio: g / scale,
                    diverged_at: None,
                }
            }
            Err(index) => LowerBoundRow {
                horizon: t,
                nu: inst.nu,
                max_gradgap: f64::INFINITY,
                ratio: f64::INFINITY,
                diverged_at: Some(index),
            },
        };
        rows.push(row);
    }
    Ok(LowerBoundReport {
        case: case.expect("nonempty list"),
        rows,
    })
}

pub fn write_lowerbound_csv<W: Write>(rows: &[LowerBoundRow], mut w: W) -> Result<()> {
    writeln!(w, "T,nu,max_gradgap,ratio")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            r.horizon, r.nu, r.max_gradgap, r.ratio
        )?;
    }
    Ok(())
}

/// One horizon of the quadratic-minimisation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRow {
    pub horizon: usize,
    pub nu: f64,
    /// `max_{T ≤ T' ≤ T+p−1} f(x^{T'}) − f(x*)`.
    pub max_subopt: f64,
    /// `Σ_{T−p+1 ≤ s ≤ T} f(x^s) − f(x*)`.
    pub window_sum: f64,
    /// `(ν/2)‖C(S)^T w⁰‖²` from the companion product.
    pub identity_rhs: f64,
    /// `max_subopt / (ℓD²/T)`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ConvexReport {
    pub case: LowerBoundCase,
    pub rows: Vec<ConvexRow>,
}

impl ConvexRow {
    pub fn identity_rel_error(&self) -> f64 {
        (self.window_sum - self.identity_rhs).abs() / self.identity_rhs.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn convexmin_experiment(
    coeffs: &SCLICoefficients,
    ell: f64,
    d: f64,
    t_list: &[usize],
    n: usize,
    grid_points: usize,
) -> Result<ConvexReport> {
    check_horizons(t_list)?;
    let p = coeffs.p();
    let mut rows = Vec::with_capacity(t_list.len());
    let mut case = None;
    for &t in t_list {
        let inst = hard_instance_convexmin(coeffs, ell, d, t, n, grid_points)?;
        case = Some(inst.case);
        let tr = match run_witness(coeffs, &inst, t + p - 1)? {
            Ok(tr) => tr,
            Err(index) => return Err(Error::Divergence { index }),
        };
        let sub = |s: i64| suboptimality(&inst.operator, tr.z(s));
        let mut max_subopt: f64 = 0.0;
        for s in t..t + p {
            max_subopt = max_subopt.max(sub(s as i64)?);
        }
        let mut window_sum = 0.0;
        for s in (t as i64 + 1 - p as i64)..=t as i64 {
            window_sum += sub(s)?;
        }
        let sys = build_companion(coeffs, &family_matrix(SweepFamily::ConvexMin, inst.nu, n))?;
        let (prod, log_scale) = companion_power(&sys.c_of_a, t);
        let w0 = Vector::from_iterator(p * n, inst.inits.iter().flat_map(|z| z.iter().copied()));
        let img = prod * w0;
        let identity_rhs = 0.5 * inst.nu * img.norm_squared() * (2.0 * log_scale).exp();
        rows.push(ConvexRow {
            horizon: t,
            nu: inst.nu,
            max_subopt,
            window_sum,
            identity_rhs,
            ratio: max_subopt / (ell * d * d / t as f64),
        });
    }
    Ok(ConvexReport {
        case: case.expect("nonempty list"),
        rows,
    })
}

pub fn write_convex_csv<W: Write>(rows: &[ConvexRow], mut w: W) -> Result<()> {
    writeln!(w, "T,nu,max_subopt,window_sum,identity_rhs,ratio")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.horizon, r.nu, r.max_subopt, r.window_sum, r.identity_rhs, r.ratio
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectral_radius_examples() {
        let rot = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((spectral_radius(&rot).unwrap() - 1.0).abs() < 1e-14);
        let diag = Matrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, -0.7]);
        assert!((spectral_radius(&diag).unwrap() - 0.7).abs() < 1e-15);
        let comp = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((spectral_radius(&comp).unwrap() - 1.0).abs() < 1e-14);
        assert!(spectral_radius(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn spectral_radius_structured_companion() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let alpha = vec![
            -0.08154053517949336,
            0.8299526014989419,
            -0.9743517266978213,
        ];
        let beta = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = SCLICoefficients::new(alpha, beta, 0.0, 1.0).unwrap();
        let nu = 0.7915166728795174;
        let sys = build_companion(&c, &(Matrix::identity(3, 3) * nu)).unwrap();
        let pair = PolyPair::from_coeffs(&c).unwrap();
        let lhs = spectral_radius(&sys.c_of_a).unwrap();
        let rhs = pair.radius(nu, SweepFamily::ConvexMin).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn poly_radius_examples() {
        assert!((poly_radius(&[-1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((poly_radius(&[0.25, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((poly_radius(&[0.25, 0.0, 1.0, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(poly_radius(&[0.0, 0.0]), Err(Error::Contract(_))));
        assert!(poly_radius(&[3.0]).is_err());
    }

    #[test]
    fn pair_from_og_coefficients() {
        let pair = PolyPair::from_coeffs(&SCLICoefficients::og(0.1)).unwrap();
        assert_eq!(pair.q(), &[0.0, -1.0, 1.0]);
        assert_eq!(pair.r(), &[0.1, -0.2]);
        assert_eq!(pair.q_at_one(), 0.0);
    }

    #[test]
    fn pair_normalises_to_monic() {
        let pair = PolyPair::new(vec![2.0, -6.0, 4.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(pair.q(), &[0.5, -1.5, 1.0]);
        assert_eq!(pair.r(), &[0.25, 0.5]);
        assert!(PolyPair::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn sweep_with_zero_r_is_constant() {
        let pair = PolyPair::new(vec![0.06, -0.5, 1.0], vec![0.0]).unwrap();
        let s = radius_sweep(&pair, 0.01, 1.0, 50, SweepFamily::ConvexMin).unwrap();
        let rho_q = poly_radius(pair.q()).unwrap();
        assert!((s.sup - rho_q).abs() < 1e-14);
        assert!(s.series.iter().all(|(_, r)| (r - rho_q).abs() < 1e-14));
        assert_eq!(s.series[0].0, 0.01);
        assert_eq!(s.series[49].0, 1.0);
    }

    #[test]
    fn conjecture_bound_values() {
        assert!((conjecture_bound(0.01, 1.0).unwrap() - 9.0 / 11.0).abs() < 1e-15);
        assert!((conjecture_bound(0.25, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(conjecture_bound(1.0 - 1e-12, 1.0).unwrap() < 1e-6);
        assert!(conjecture_bound(1.0, 1.0).is_err());
    }

    #[test]
    fn agd_pair_is_flat() {
        let a = agd_momentum(0.01, 1.0).unwrap();
        assert!((a - 9.0 / 11.0).abs() < 1e-15);
        let pair = agd_polys(0.01, 1.0).unwrap();
        assert!(pair.q_at_one().abs() < 1e-15);
        let s = radius_sweep(&pair, 0.01, 1.0, 1000, SweepFamily::ConvexMin).unwrap();
        let want = (9.0f64 / 11.0).sqrt();
        assert!((want - 0.904534).abs() < 1e-6);
        for (nu, rho) in &s.series {
            assert!((rho - want).abs() <= 1e-8, "nu {nu}: {rho}");
        }
        for (mu, ell) in [(0.1, 1.0), (0.5, 3.0), (1e-3, 10.0)] {
            assert!(agd_polys(mu, ell).unwrap().q_at_one().abs() < 1e-12);
        }
    }

    #[test]
    fn literal_nesterov_pair_peaks_at_mu() {
        let pair = nesterov_fixed_step_polys(0.01, 1.0).unwrap();
        assert!(pair.q_at_one().abs() < 1e-15);
        let s = radius_sweep(&pair, 0.01, 1.0, 500, SweepFamily::ConvexMin).unwrap();
        // double root at nu = mu
        assert!((s.sup - 0.9).abs() < 1e-7, "{}", s.sup);
        assert!((s.argmax_nu - 0.01).abs() < 1e-6);
        let mid = pair.radius(0.5, SweepFamily::ConvexMin).unwrap();
        let a = 9.0 / 11.0;
        assert!((mid - (a * 0.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn companion_layout() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let sys = build_companion(&SCLICoefficients::og(0.1), &a).unwrap();
        let c = &sys.c_of_a;
        assert_eq!(c.shape(), (4, 4));
        assert_eq!(c.view((0, 0), (2, 2)).into_owned(), Matrix::zeros(2, 2));
        assert_eq!(c.view((0, 2), (2, 2)).into_owned(), Matrix::identity(2, 2));
        assert_eq!(c.view((2, 0), (2, 2)).into_owned(), &a * 0.1);
        assert_eq!(
            c.view((2, 2), (2, 2)).into_owned(),
            Matrix::identity(2, 2) - &a * 0.2
        );
        assert_eq!(sys.n_of_a, Matrix::identity(2, 2) * -0.1);
        let gd = build_companion(&SCLICoefficients::gd(0.3), &a).unwrap();
        assert_eq!(gd.c_of_a, Matrix::identity(2, 2) - &a * 0.3);
    }

    #[test]
    fn char_identity_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..20 {
            let p = 1 + i % 4;
            let n = if i % 2 == 0 { 2 } else { 4 };
            let alpha = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let beta = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = SCLICoefficients::new(alpha, beta, 0.0, 1.0).unwrap();
            let nu = rng.random_range(0.01..1.0);
            let (m, poly) = char_identity(&c, nu, n).unwrap();
            assert!((m - poly).abs() <= 1e-8, "case {i}: {m} vs {poly}");
        }
    }

    #[test]
    fn random_pairs_meet_radius_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (mu, ell) in [(0.01, 1.0), (0.1, 1.0)] {
            let bound = conjecture_bound(mu, ell).unwrap();
            for i in 0..20 {
                let c = random_consistent_coeffs(&mut rng, 1 + i % 4);
                assert!((c.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let pair = PolyPair::from_coeffs(&c).unwrap();
                let s = radius_sweep(&pair, mu, ell, 500, SweepFamily::ConvexMin).unwrap();
                assert!(s.sup >= bound - 1e-3, "pair {i}: {} < {bound}", s.sup);
            }
        }
    }

    #[test]
    fn per_step_floor_on_algorithms() {
        for t in [10, 100, 1000] {
            let floor = per_step_floor(t);
            for c in [SCLICoefficients::og(1.0 / 150.0), SCLICoefficients::og(0.3)] {
                let pair = PolyPair::from_coeffs(&c).unwrap();
                let s = radius_sweep(&pair, 1.0 / (2.0 * t as f64), 1.0, 200, SweepFamily::MinMax)
                    .unwrap();
                assert!(s.sup >= floor, "T {t}: {} < {floor}", s.sup);
            }
        }
    }

    #[test]
    fn classification() {
        let og = SCLICoefficients::og(1.0 / 150.0);
        assert_eq!(
            classify(&og, SweepFamily::MinMax, 1.0, 500).unwrap(),
            LowerBoundCase::Consistent
        );
        assert!(matches!(
            classify(&SCLICoefficients::identity(), SweepFamily::MinMax, 1.0, 500).unwrap(),
            LowerBoundCase::Stationary { .. }
        ));
        assert!(matches!(
            classify(&SCLICoefficients::gd(0.1), SweepFamily::MinMax, 1.0, 500).unwrap(),
            LowerBoundCase::Divergent { .. }
        ));
        assert_eq!(
            classify(&SCLICoefficients::gd(1.0), SweepFamily::ConvexMin, 1.0, 500).unwrap(),
            LowerBoundCase::Consistent
        );
        let damped = SCLICoefficients::new(vec![-0.1], vec![0.5], 0.0, -0.1).unwrap();
        assert_eq!(
            classify(&damped, SweepFamily::MinMax, 1.0, 500).unwrap(),
            LowerBoundCase::Inconsistent
        );
        let no_shift = SCLICoefficients::new(vec![-0.1], vec![0.5], 0.0, 0.0).unwrap();
        assert!(matches!(
            classify(&no_shift, SweepFamily::MinMax, 1.0, 500).unwrap(),
            LowerBoundCase::ZeroShift { .. }
        ));
    }

    #[test]
    fn minmax_window_start() {
        let og = SCLICoefficients::og(1.0 / 150.0);
        let inst = hard_instance_minmax(&og, 1.0, 1.0, 100, 4, 2000).unwrap();
        assert!(inst.nu >= 0.05 - 1e-15);
        assert!((inst.nu - 0.05).abs() < 1e-3);
        let norms: Vec<f64> = inst
            .inits
            .iter()
            .flat_map(|z| block_norms(z, &[2, 2]))
            .collect();
        let biggest = norms.iter().copied().fold(0.0, f64::max);
        assert!((biggest - 1.0).abs() < 1e-14);
        assert!(norms.iter().all(|&x| x <= 1.0 + 1e-14));
    }

    #[test]
    fn convex_window_start_and_identity() {
        let gd = SCLICoefficients::gd(1.0);
        let inst = hard_instance_convexmin(&gd, 1.0, 1.0, 25, 2, 2000).unwrap();
        assert!((inst.nu - 0.01).abs() < 1e-9);
        let rep = convexmin_experiment(&gd, 1.0, 1.0, &[25, 100], 2, 2000).unwrap();
        for r in &rep.rows {
            assert!(r.identity_rel_error() <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn identity_map_gradgap_constant() {
        let rep =
            lowerbound_experiment(&SCLICoefficients::identity(), 1.0, 1.0, &[10, 100], 4, 200)
                .unwrap();
        assert!(matches!(rep.case, LowerBoundCase::Stationary { .. }));
        let g0 = rep.rows[0].max_gradgap;
        assert!((g0 - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(rep.rows[1].max_gradgap, g0);
    }

    #[test]
    fn inconsistent_witness_stalls() {
        let damped = SCLICoefficients::new(vec![-0.1], vec![0.5], 0.0, -0.1).unwrap();
        let rep = lowerbound_experiment(&damped, 1.0, 1.0, &[10, 100, 1000], 4, 200).unwrap();
        assert_eq!(rep.case, LowerBoundCase::Inconsistent);
        let last = rep.rows[2].max_gradgap;
        assert!(last > 0.1 && (last - rep.rows[1].max_gradgap).abs() < 1e-9);
    }

    #[test]
    fn divergent_witness_reports_index() {
        let rep = lowerbound_experiment(&SCLICoefficients::gd(0.5), 1.0, 1.0, &[10, 1000], 4, 200)
            .unwrap();
        assert!(matches!(rep.case, LowerBoundCase::Divergent { .. }));
        assert!(rep.rows[0].diverged_at.is_none() && rep.rows[0].ratio > 1.0);
        assert!(rep.rows[1].diverged_at.is_some());
        let mut buf = Vec::new();
        write_lowerbound_csv(&rep.rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains(",inf,inf"));
    }

    #[test]
    fn sweep_is_thread_count_independent() {
        let pair = PolyPair::from_coeffs(&SCLICoefficients::og(0.05)).unwrap();
        let a = radius_sweep(&pair, 0.01, 1.0, 300, SweepFamily::MinMax).unwrap();
        let b = radius_sweep(&pair, 0.01, 1.0, 300, SweepFamily::MinMax).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.sup, b.sup);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn companion_radius_matches_pencil_convex(
            alpha in prop::collection::vec(-1.0f64..1.0, 1..4),
            seed in 0u64..1000,
            nu in 0.01f64..1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let beta = (0..alpha.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = SCLICoefficients::new(alpha, beta, 0.0, 1.0).unwrap();
            let sys = build_companion(&c, &(Matrix::identity(3, 3) * nu)).unwrap();
            let pair = PolyPair::from_coeffs(&c).unwrap();
            let lhs = spectral_radius(&sys.c_of_a).unwrap();
            let rhs = pair.radius(nu, SweepFamily::ConvexMin).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-8);
        }

        #[test]
        fn consistent_pairs_vanish_at_one(seed in 0u64..10_000, p in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_consistent_coeffs(&mut rng, p);
            prop_assert!(c.consistent());
            prop_assert!(PolyPair::from_coeffs(&c).unwrap().q_at_one().abs() <= 1e-12);
        }
    }
}

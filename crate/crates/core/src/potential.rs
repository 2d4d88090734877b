//! Adaptive potential for optimistic gradient.
//!
//! With `w^t = z^t + ηF(z^{t−1})`, define the path-averaged Jacobians
//!
//! ```text
//! A^t = ∫₀¹ ∂F(w^t − (1−α)ηF(z^t)) dα
//! B^t = ∫₀¹ ∂F(w^t − (1−α)ηF(z^{t−1})) dα
//! ```
//!
//! and, backwards from `C^T = 0`,
//!
//! ```text
//! M^t = I − ηA^t + C^t,  N^t = η(ηA^t − C^t)B^t,  C^{t−1} = (M^t)⁻¹ N^t.
//! ```
//!
//! The potential `F̃^t = F(w^t) + C^{t−1}F(z^{t−1})` then satisfies
//! `F̃^{t+1} = M^t F̃^t` exactly.

use std::io::Write;

use crate::dynamics::{Algorithm, Trace};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{condition_number, solve, spectral_norm, Matrix, Vector};
use crate::operators::MonotoneOperator;
use crate::quadrature::GaussLegendre;

/// Step matrices beyond this condition estimate abort the backward pass.
pub const MAX_STEP_CONDITION: f64 = 1e12;

pub const DEFAULT_QUAD_ORDER: usize = 2;

/// Output of [`backward_c`]. Sequences indexed by `t = 0 … T` unless noted.
#[derive(Debug, Clone)]
pub struct PotentialTrace {
    pub base: Trace,
    pub eta: f64,
    /// `w⁰ … w^T`.
    pub w_seq: Vec<Vector>,
    pub a_seq: Vec<Matrix>,
    pub b_seq: Vec<Matrix>,
    /// `C^{−1} … C^T`; entry `i` holds `C^{i−1}`.
    pub c_seq: Vec<Matrix>,
    pub m_seq: Vec<Matrix>,
    pub n_seq: Vec<Matrix>,
    pub d_seq: Vec<Matrix>,
    pub ftilde_seq: Vec<Vector>,
    /// `ηℓ`.
    pub l0: f64,
    /// `ηΛ`.
    pub lambda0: f64,
    /// `‖M^t‖_σ`.
    pub step_norms: Vec<f64>,
}

impl PotentialTrace {
    pub fn horizon(&self) -> usize {
        self.a_seq.len() - 1
    }

    /// `C^t` for `t ∈ [−1, T]`.
    pub fn c(&self, t: i64) -> &Matrix {
        &self.c_seq[(t + 1) as usize]
    }

    /// `(‖F̃^t‖, ‖M^t‖_σ, ‖C^t‖_σ, identity residual of step t → t+1)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let residuals = verify_potential_identity(self);
        writeln!(w, "t,ftilde_norm,step_spec_norm,c_norm,identity_residual")?;
        for t in 0..=self.horizon() {
            let r = residuals
                .get(t)
                .map(|r| format!("{r:.16e}"))
                .unwrap_or_default();
            writeln!(
                w,
                "{t},{:.16e},{:.16e},{:.16e},{r}",
                self.ftilde_seq[t].norm(),
                self.step_norms[t],
                spectral_norm(self.c(t as i64)),
            )?;
        }
        Ok(())
    }
}

fn w_sequence(trace: &Trace, eta: f64) -> Result<Vec<Vector>> {
    match trace.algorithm() {
        Algorithm::OgPeg => Ok(trace.aux().to_vec()),
        Algorithm::Og => Ok((0..=trace.horizon() as i64)
            .map(|t| trace.z(t) + trace.grad(t - 1) * eta)
            .collect()),
        other => Err(Error::Contract(format!(
            "adaptive potential needs an optimistic-gradient trace, got {other}"
        ))),
    }
}

fn segment_average(
    op: &MonotoneOperator,
    rule: &GaussLegendre,
    w: &Vector,
    dir: &Vector,
    eta: f64,
) -> Matrix {
    if op.is_affine() {
        return op.matrix().clone();
    }
    let n = op.dim();
    let mut acc = Matrix::zeros(n, n);
    for (&a, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let point = w - dir * ((1.0 - a) * eta);
        acc += op.jacobian_unchecked(&point) * wt;
    }
    acc
}

/// `(A^t, B^t)` by Gauss–Legendre quadrature of order `quad_order`.
pub fn alpha_avg_jacobians(
    op: &MonotoneOperator,
    trace: &Trace,
    t: usize,
    quad_order: usize,
) -> Result<(Matrix, Matrix)> {
    let eta = trace_eta(trace)?;
    check_dim("trace", op.dim(), trace.dim())?;
    if t > trace.horizon() {
        return Err(Error::Contract(format!(
            "step {t} beyond horizon {}",
            trace.horizon()
        )));
    }
    let rule = GaussLegendre::new(quad_order)?;
    let w = w_sequence(trace, eta)?;
    let t = t as i64;
    Ok((
        segment_average(op, &rule, &w[t as usize], trace.grad(t), eta),
        segment_average(op, &rule, &w[t as usize], trace.grad(t - 1), eta),
    ))
}

fn trace_eta(trace: &Trace) -> Result<f64> {
    trace
        .eta()
        .ok_or_else(|| Error::Contract("trace carries no step size".into()))
}

/// Forward quantities from `trace`, then the backward recursion for `C^t`.
pub fn backward_c(
    op: &MonotoneOperator,
    trace: &Trace,
    quad_order: usize,
) -> Result<PotentialTrace> {
    let eta = trace_eta(trace)?;
    check_dim("trace", op.dim(), trace.dim())?;
    let rule = GaussLegendre::new(quad_order)?;
    let w_seq = w_sequence(trace, eta)?;
    let horizon = trace.horizon();
    let n = op.dim();
    let id = Matrix::identity(n, n);

    let mut a_seq = Vec::with_capacity(horizon + 1);
    let mut b_seq = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon as i64 {
        let w = &w_seq[t as usize];
        a_seq.push(segment_average(op, &rule, w, trace.grad(t), eta));
        b_seq.push(segment_average(op, &rule, w, trace.grad(t - 1), eta));
    }

    // c_rev[k] = C^{T−k}
    let mut c_rev = vec![Matrix::zeros(n, n)];
    let mut m_rev = Vec::with_capacity(horizon + 1);
    let mut n_rev = Vec::with_capacity(horizon + 1);
    for t in (0..=horizon).rev() {
        let c = c_rev.last().expect("nonempty");
        let x = &a_seq[t] * eta - c;
        let m = &id - &x;
        let cond = condition_number(&m);
        if !(cond <= MAX_STEP_CONDITION) {
            return Err(Error::Singular {
                step: t as i64,
                condition: cond,
            });
        }
        let nm = &x * &b_seq[t] * eta;
        let prev = solve(&m, &nm)?;
        m_rev.push(m);
        n_rev.push(nm);
        c_rev.push(prev);
    }
    c_rev.reverse();
    m_rev.reverse();
    n_rev.reverse();
    let c_seq = c_rev;
    let m_seq = m_rev;
    let n_seq = n_rev;

    let mut d_seq = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let c = &c_seq[t + 1];
        let x = &a_seq[t] * eta - c;
        let rhs = &x * &x * &b_seq[t] * eta;
        d_seq.push(-(c * &b_seq[t]) * eta + solve(&m_seq[t], &rhs)?);
    }

    let ftilde_seq = (0..=horizon as i64)
        .map(|t| op.apply(&w_seq[t as usize]) + &c_seq[t as usize] * trace.grad(t - 1))
        .collect();
    let step_norms = m_seq.iter().map(spectral_norm).collect();

    Ok(PotentialTrace {
        base: trace.clone(),
        eta,
        w_seq,
        a_seq,
        b_seq,
        c_seq,
        m_seq,
        n_seq,
        d_seq,
        ftilde_seq,
        l0: eta * op.ell(),
        lambda0: eta * op.lambda(),
        step_norms,
    })
}

/// `C = ((I + (2ηA)²)^{1/2} − I)/2`, with the square root summed as the
/// binomial series `√(I − X) = Σ_k (−1)^k binom(1/2, k) X^k`, `X = −(2ηA)²`.
/// Terms are added until their norm drops below `series_tol`.
pub fn closed_form_c_linear(a: &Matrix, eta: f64, series_tol: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Contract("A must be square".into()));
    }
    let two_eta_a = a * (2.0 * eta);
    let radius = spectral_norm(&two_eta_a);
    if radius >= 1.0 {
        return Err(Error::Numeric(format!(
            "square-root series diverges: ‖2ηA‖ = {radius:.6} >= 1"
        )));
    }
    let n = a.nrows();
    let x = -(&two_eta_a * &two_eta_a);
    let mut sum = Matrix::identity(n, n);
    let mut power = Matrix::identity(n, n);
    let mut binom = 1.0;
    for k in 0..1_000_000usize {
        binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        power = &power * &x;
        let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let term = &power * (sign * binom);
        sum += &term;
        if term.norm() < series_tol {
            return Ok((sum - Matrix::identity(n, n)) * 0.5);
        }
    }
    Err(Error::Numeric(
        "square-root series did not reach tolerance".into(),
    ))
}

/// `‖F̃^{t+1} − M^tF̃^t‖ / (1 + ‖F̃^t‖)` for `t = 0 … T−1`.
pub fn verify_potential_identity(pt: &PotentialTrace) -> Vec<f64> {
    (0..pt.horizon())
        .map(|t| {
            let pred = &pt.m_seq[t] * &pt.ftilde_seq[t];
            (&pt.ftilde_seq[t + 1] - pred).norm() / (1.0 + pt.ftilde_seq[t].norm())
        })
        .collect()
}

/// Per-step outcome of the four norm conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepNormBounds {
    /// `‖C^t‖ ≤ 2L₀²`.
    pub c_small: bool,
    /// `‖(M^t)⁻¹‖ ≤ √2`.
    pub inverse_bounded: bool,
    /// `‖ηA^t − C^t‖ ≤ 2L₀`.
    pub shift_bounded: bool,
    /// `‖M^t‖ ≤ 1 + 2L₀`.
    pub step_bounded: bool,
}

impl StepNormBounds {
    pub fn all(&self) -> bool {
        self.c_small && self.inverse_bounded && self.shift_bounded && self.step_bounded
    }
}

#[derive(Debug, Clone)]
pub struct StepNormReport {
    /// `ηℓ` exceeds `√(1/200)` or `2/3`.
    pub vacuous: bool,
    pub steps: Vec<StepNormBounds>,
}

impl StepNormReport {
    pub fn all_hold(&self) -> bool {
        self.steps.iter().all(StepNormBounds::all)
    }
}

pub fn lemma5_report(pt: &PotentialTrace, eta: f64, ell: f64) -> StepNormReport {
    let l0 = eta * ell;
    let vacuous = !(l0 <= (1.0f64 / 200.0).sqrt() && l0 <= 2.0 / 3.0);
    let slack = 1.0 + 1e-12;
    let steps = (0..=pt.horizon())
        .map(|t| {
            let c = pt.c(t as i64);
            let x = &pt.a_seq[t] * eta - c;
            let inv_norm = 1.0 / crate::linalg::min_singular_value(&pt.m_seq[t]);
            StepNormBounds {
                c_small: spectral_norm(c) <= 2.0 * l0 * l0 * slack,
                inverse_bounded: inv_norm <= 2f64.sqrt() * slack,
                shift_bounded: spectral_norm(&x) <= 2.0 * l0 * slack,
                step_bounded: pt.step_norms[t] <= (1.0 + 2.0 * l0) * slack,
            }
        })
        .collect();
    StepNormReport { vacuous, steps }
}

/// `‖(I − ηA^{t−1} + C^{t−1}) − (I − ηA^{t−1} + η²A^tB^t + D^t)‖_σ` for
/// `t = 1 … T`.
pub fn d_matrix_identity_check(pt: &PotentialTrace) -> Vec<f64> {
    let eta = pt.eta;
    let n = pt.base.dim();
    let id = Matrix::identity(n, n);
    (1..=pt.horizon())
        .map(|t| {
            let lead = &id - &pt.a_seq[t - 1] * eta;
            let lhs = &lead + pt.c(t as i64 - 1);
            let rhs = &lead + &pt.a_seq[t] * &pt.b_seq[t] * (eta * eta) + &pt.d_seq[t];
            spectral_norm(&(lhs - rhs))
        })
        .collect()
}

/// Consecutive gradient pairs can grow: with `F(z) = z`, `z^{t−1} = 0` and
/// `z^t = δ`, one optimistic step gives
/// `‖(F(z^{t+1}), F(z^t))‖ = δ√((1−2η)² + 1) > δ√(2 − 4η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGrowth {
    pub pair_norm: f64,
    pub threshold: f64,
}

pub fn pair_growth_counterexample(eta: f64, delta: f64) -> Result<PairGrowth> {
    let op = crate::operators::make_linear(
        &Matrix::identity(1, 1),
        &Vector::zeros(1),
        delta.abs().max(1.0),
    )?;
    let trace = crate::dynamics::run_og(
        &op,
        &Vector::zeros(1),
        &Vector::from_element(1, delta),
        eta,
        1,
    )?;
    let pair_norm = (trace.grad(1).norm_squared() + trace.grad(0).norm_squared()).sqrt();
    Ok(PairGrowth {
        pair_norm,
        threshold: delta * (2.0 - 4.0 * eta).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_og, run_og_peg};
    use crate::operators::{make_bilinear, make_perturbed_bilinear};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn linear_instance() -> MonotoneOperator {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.6]);
        make_bilinear(&m, &v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 1.0).unwrap()
    }

    fn perturbed_instance() -> MonotoneOperator {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.6]);
        make_perturbed_bilinear(&m, &v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 0.01, 1.0).unwrap()
    }

    fn start() -> (Vector, Vector) {
        (v(&[0.4, -0.3, 0.2, 0.5]), v(&[0.5, -0.2, 0.1, 0.5]))
    }

    #[test]
    fn linear_jacobian_averages_are_a() {
        let op = linear_instance();
        let (zm, z0) = start();
        let tr = run_og_peg(&op, &zm, &z0, 0.01, 10).unwrap();
        for order in [1, 3] {
            let (a, b) = alpha_avg_jacobians(&op, &tr, 5, order).unwrap();
            assert_eq!(&a, op.matrix());
            assert_eq!(&b, op.matrix());
        }
    }

    #[test]
    fn quadrature_exactness_on_perturbed() {
        let op = perturbed_instance();
        let eta = 1.0 / (150.0 * op.ell());
        let (zm, z0) = start();
        let tr = run_og_peg(&op, &zm, &z0, eta, 20).unwrap();
        for t in 0..20 {
            let (a2, b2) = alpha_avg_jacobians(&op, &tr, t, 2).unwrap();
            let (a6, b6) = alpha_avg_jacobians(&op, &tr, t, 6).unwrap();
            assert!((&a2 - &a6).amax() <= 1e-12);
            assert!((&b2 - &b6).amax() <= 1e-12);
            let w = &tr.aux()[t];
            let g = tr.grad(t as i64);
            let lhs = op.eval(&(w - g * eta)).unwrap();
            let rhs = op.eval(w).unwrap() - &a2 * g * eta;
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn c_terminal_is_zero() {
        let op = linear_instance();
        let (zm, z0) = start();
        let tr = run_og(&op, &zm, &z0, 0.01, 30).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        assert_eq!(pt.c(30), &Matrix::zeros(4, 4));
        assert_eq!(pt.c_seq.len(), 32);
    }

    #[test]
    fn identity_holds_linear_and_perturbed() {
        let (zm, z0) = start();
        for op in [linear_instance(), perturbed_instance()] {
            let eta = 1.0 / (150.0 * op.ell());
            let tr = run_og_peg(&op, &zm, &z0, eta, 200).unwrap();
            let pt = backward_c(&op, &tr, 2).unwrap();
            let worst = verify_potential_identity(&pt)
                .into_iter()
                .fold(0.0, f64::max);
            assert!(worst <= 1e-10, "{} residual {worst}", op.kind());
            let dres = d_matrix_identity_check(&pt).into_iter().fold(0.0, f64::max);
            assert!(dres <= 1e-10, "{dres}");
            let rep = lemma5_report(&pt, eta, op.ell());
            assert!(!rep.vacuous && rep.all_hold());
        }
    }

    #[test]
    fn identity_from_plain_og_trace() {
        let op = linear_instance();
        let (zm, z0) = start();
        let tr = run_og(&op, &zm, &z0, 0.005, 100).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        assert!(verify_potential_identity(&pt).iter().all(|&r| r <= 1e-10));
    }

    #[test]
    fn equilibrium_start_potential_zero() {
        let op = linear_instance();
        let z = Vector::zeros(4);
        let tr = run_og_peg(&op, &z, &z, 0.01, 10).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        assert!(pt.ftilde_seq.iter().all(|f| f.norm() == 0.0));
        assert!(verify_potential_identity(&pt).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn terminal_d_matrix() {
        let op = linear_instance();
        let (zm, z0) = start();
        let eta = 0.01;
        let tr = run_og(&op, &zm, &z0, eta, 5).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        let a = op.matrix();
        let m = Matrix::identity(4, 4) - a * eta;
        let want = solve(&m, &(a * a * a * eta.powi(3))).unwrap();
        assert!((&pt.d_seq[5] - want).amax() < 1e-16);
    }

    #[test]
    fn closed_form_scalar_case() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let c = closed_form_c_linear(&a, 0.1, 1e-14).unwrap();
        let s = (0.96f64).sqrt();
        let want = Matrix::identity(2, 2) * ((s - 1.0) / 2.0);
        assert!((&c - &want).amax() < 1e-14);
        assert!((want[(0, 0)] + 0.0101021).abs() < 1e-7);
        let resid = &c * &c + &c - a.clone() * &a * 0.01;
        assert!(spectral_norm(&resid) <= 1e-13);
        let x = c[(0, 0)];
        assert!((x * x + x + 0.01).abs() < 1e-15);
    }

    #[test]
    fn closed_form_zero_and_divergent() {
        assert_eq!(
            closed_form_c_linear(&Matrix::zeros(3, 3), 0.1, 1e-14).unwrap(),
            Matrix::zeros(3, 3)
        );
        let a = Matrix::identity(2, 2) * 10.0;
        assert!(matches!(
            closed_form_c_linear(&a, 0.1, 1e-14),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn backward_c_converges_to_closed_form() {
        let op = linear_instance();
        let eta = 1.0 / (150.0 * op.ell());
        let (zm, z0) = start();
        let tr = run_og(&op, &zm, &z0, eta, 200).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        let c = closed_form_c_linear(op.matrix(), eta, 1e-14).unwrap();
        for t in 0..=150 {
            assert!(spectral_norm(&(pt.c(t) - &c)) <= 1e-6);
        }
        assert!(spectral_norm(&(&c * op.matrix() - op.matrix() * &c)) <= 1e-10);
    }

    #[test]
    fn stepwise_norm_inequalities() {
        let (zm, z0) = start();
        for op in [linear_instance(), perturbed_instance()] {
            let eta = 1.0 / (150.0 * op.ell());
            let tr = run_og_peg(&op, &zm, &z0, eta, 300).unwrap();
            let pt = backward_c(&op, &tr, 2).unwrap();
            for t in 0..300 {
                let lhs = pt.ftilde_seq[t + 1].norm();
                assert!(lhs <= pt.step_norms[t] * pt.ftilde_seq[t].norm() * (1.0 + 1e-10) + 1e-300);
            }
            for t in 0..=300 {
                let fw = op.eval(&pt.w_seq[t]).unwrap().norm();
                let prev = tr.grad(t as i64 - 1).norm();
                assert!(fw <= pt.ftilde_seq[t].norm() + 2.0 * pt.l0 * pt.l0 * prev + 1e-15);
            }
        }
    }

    #[test]
    fn step_norm_gate() {
        let op = linear_instance();
        let (zm, z0) = start();
        let eta = 1.0 / op.ell();
        let tr = run_og(&op, &zm, &z0, eta, 5).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        assert!(lemma5_report(&pt, eta, op.ell()).vacuous);
    }

    #[test]
    fn pair_growth() {
        for eta in [0.001, 0.01, 0.1, 0.2] {
            let p = pair_growth_counterexample(eta, 0.5).unwrap();
            let want = 0.5 * ((1.0 - 2.0 * eta).powi(2) + 1.0).sqrt();
            assert!((p.pair_norm - want).abs() < 1e-15);
            assert!(p.pair_norm > p.threshold);
        }
    }

    #[test]
    fn rejects_non_optimistic_traces() {
        let op = linear_instance();
        let tr = crate::dynamics::run_gd(&op, &Vector::zeros(4), 0.1, 3).unwrap();
        assert!(matches!(backward_c(&op, &tr, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn csv_has_one_row_per_step() {
        let op = linear_instance();
        let (zm, z0) = start();
        let tr = run_og(&op, &zm, &z0, 0.01, 4).unwrap();
        let pt = backward_c(&op, &tr, 2).unwrap();
        let mut buf = Vec::new();
        pt.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(
            lines[0],
            "t,ftilde_norm,step_spec_norm,c_norm,identity_residual"
        );
        assert_eq!(lines.len(), 6);
        assert!(lines[5].ends_with(','));
    }
}

//! Iterative dynamics: optimistic gradient in both update forms,
//! extragradient, gradient descent, a generic stationary p-step linear
//! iteration (p-SCLI), and the online-learning regret environments.
//!
//! All runners evaluate `F` once per new iterate and reuse the cached value
//! as the "previous gradient", so traces are bit-reproducible.

use std::fmt;
use std::io::Write;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, project_blocks, Matrix, Vector};
use crate::operators::MonotoneOperator;

/// Iterates beyond `DIVERGENCE_FACTOR · (1 + ‖z⁰‖)` abort the run.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Og,
    OgPeg,
    Eg,
    Gd,
    Scli,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Og => "og",
            Algorithm::OgPeg => "og-peg",
            Algorithm::Eg => "eg",
            Algorithm::Gd => "gd",
            Algorithm::Scli => "scli",
        })
    }
}

/// Output of a run: `p` initial points `z^{−p+1}, …, z⁰` followed by the
/// iterates `z¹, …, z^T`, each with its cached operator value.
#[derive(Debug, Clone)]
pub struct Trace {
    inits: Vec<Vector>,
    iterates: Vec<Vector>,
    grads: Vec<Vector>,
    eta: Option<f64>,
    algorithm: Algorithm,
    aux: Vec<Vector>,
}

impl Trace {
    /// Number of initial points.
    pub fn p(&self) -> usize {
        self.inits.len()
    }
    /// Number of iterates after `z⁰`.
    pub fn horizon(&self) -> usize {
        self.iterates.len()
    }
    pub fn dim(&self) -> usize {
        self.inits[0].len()
    }
    pub fn eta(&self) -> Option<f64> {
        self.eta
    }
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }
    /// Initial points, oldest first.
    pub fn inits(&self) -> &[Vector] {
        &self.inits
    }
    /// `z¹ … z^T`.
    pub fn iterates(&self) -> &[Vector] {
        &self.iterates
    }
    /// `F(z^t)` for `t = −p+1 … T`.
    pub fn grads(&self) -> &[Vector] {
        &self.grads
    }
    /// Secondary sequence indexed from 0: `w^t` for the PEG form, `u^t` for
    /// extragradient. Empty otherwise.
    pub fn aux(&self) -> &[Vector] {
        &self.aux
    }
    /// Smallest valid index, `−p+1`.
    pub fn first_index(&self) -> i64 {
        1 - self.p() as i64
    }

    fn slot(&self, t: i64) -> usize {
        let s = t - self.first_index();
        assert!(
            s >= 0 && (s as usize) < self.grads.len(),
            "trace index {t} out of range"
        );
        s as usize
    }

    /// `z^t` for `t ∈ [−p+1, T]`.
    pub fn z(&self, t: i64) -> &Vector {
        let s = self.slot(t);
        if s < self.p() {
            &self.inits[s]
        } else {
            &self.iterates[s - self.p()]
        }
    }

    /// `F(z^t)`.
    pub fn grad(&self, t: i64) -> &Vector {
        &self.grads[self.slot(t)]
    }

    pub fn grad_norm(&self, t: i64) -> f64 {
        self.grad(t).norm()
    }

    /// `‖F(z^t)‖` for `t = 0 … T`.
    pub fn grad_norms(&self) -> Vec<f64> {
        self.grads[self.p() - 1..]
            .iter()
            .map(|g| g.norm())
            .collect()
    }

    pub fn last(&self) -> &Vector {
        self.z(self.horizon() as i64)
    }

    /// CSV with one row per stored point, `t` starting at `−p+1`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,algorithm,eta")?;
        for i in 0..self.dim() {
            write!(w, ",z_{i}")?;
        }
        writeln!(w, ",grad_norm")?;
        let eta = self.eta.map(|e| format!("{e:.16e}")).unwrap_or_default();
        for t in self.first_index()..=self.horizon() as i64 {
            write!(w, "{t},{},{eta}", self.algorithm)?;
            for x in self.z(t).iter() {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w, ",{:.16e}", self.grad_norm(t))?;
        }
        Ok(())
    }
}

struct DivergenceGuard {
    limit: f64,
}

impl DivergenceGuard {
    fn new(z0: &Vector) -> Self {
        Self {
            limit: DIVERGENCE_FACTOR * (1.0 + z0.norm()),
        }
    }

    fn check(&self, t: i64, z: &Vector) -> Result<()> {
        if !all_finite(z) || z.norm() > self.limit {
            return Err(Error::Divergence { index: t });
        }
        Ok(())
    }
}

fn check_step(eta: f64, horizon: usize) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Contract(format!(
            "step size must be positive, got {eta}"
        )));
    }
    if horizon == 0 {
        return Err(Error::Contract("horizon T must be >= 1".into()));
    }
    Ok(())
}

/// Optimistic gradient: `z^{t+1} = z^t − 2ηF(z^t) + ηF(z^{t−1})`.
pub fn run_og(
    op: &MonotoneOperator,
    z_minus1: &Vector,
    z0: &Vector,
    eta: f64,
    horizon: usize,
) -> Result<Trace> {
    check_step(eta, horizon)?;
    check_dim("z^{-1}", op.dim(), z_minus1.len())?;
    check_dim("z^0", op.dim(), z0.len())?;
    let guard = DivergenceGuard::new(z0);
    let mut grads = vec![op.apply(z_minus1), op.apply(z0)];
    let mut iterates: Vec<Vector> = Vec::with_capacity(horizon);
    let mut z = z0.clone();
    for t in 1..=horizon {
        let g = &grads[t];
        let g_prev = &grads[t - 1];
        let next = &z - g * (2.0 * eta) + g_prev * eta;
        guard.check(t as i64, &next)?;
        grads.push(op.apply(&next));
        iterates.push(next.clone());
        z = next;
    }
    Ok(Trace {
        inits: vec![z_minus1.clone(), z0.clone()],
        iterates,
        grads,
        eta: Some(eta),
        algorithm: Algorithm::Og,
        aux: Vec::new(),
    })
}

/// Optimistic gradient in past-extragradient form, with
/// `w⁰ = z⁰ + ηF(z^{−1})`, `w^{t+1} = w^t − ηF(z^t)`,
/// `z^{t+1} = w^{t+1} − ηF(z^t)`.
pub fn run_og_peg(
    op: &MonotoneOperator,
    z_minus1: &Vector,
    z0: &Vector,
    eta: f64,
    horizon: usize,
) -> Result<Trace> {
    check_step(eta, horizon)?;
    check_dim("z^{-1}", op.dim(), z_minus1.len())?;
    check_dim("z^0", op.dim(), z0.len())?;
    let guard = DivergenceGuard::new(z0);
    let mut grads = vec![op.apply(z_minus1), op.apply(z0)];
    let mut w = z0 + &grads[0] * eta;
    let mut aux = vec![w.clone()];
    let mut iterates = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let g = &grads[t];
        w.axpy(-eta, g, 1.0);
        let next = &w - g * eta;
        guard.check(t as i64, &next)?;
        aux.push(w.clone());
        grads.push(op.apply(&next));
        iterates.push(next);
    }
    Ok(Trace {
        inits: vec![z_minus1.clone(), z0.clone()],
        iterates,
        grads,
        eta: Some(eta),
        algorithm: Algorithm::OgPeg,
        aux,
    })
}

/// Extragradient from `u⁰`:
/// `z⁰ = Π(u⁰ − ηF(u⁰))`, `u^t = Π(u^{t−1} − ηF(z^{t−1}))`,
/// `z^t = Π(u^t − ηF(u^t))`. `Π` is the per-player projection onto the
/// centered ball of `projection_radius`, or the identity when `None`.
pub fn run_eg(
    op: &MonotoneOperator,
    u0: &Vector,
    eta: f64,
    horizon: usize,
    projection_radius: Option<f64>,
) -> Result<Trace> {
    check_step(eta, horizon)?;
    check_dim("u^0", op.dim(), u0.len())?;
    if let Some(r) = projection_radius {
        if !(r > 0.0) {
            return Err(Error::Contract(format!(
                "projection radius must be positive, got {r}"
            )));
        }
    }
    let dims = op.player_dims().to_vec();
    let project = |v: &mut Vector| {
        if let Some(r) = projection_radius {
            project_blocks(v, &dims, r);
        }
    };
    let guard = DivergenceGuard::new(u0);
    let mut u = u0.clone();
    project(&mut u);
    let mut z = &u - op.apply(&u) * eta;
    project(&mut z);
    guard.check(0, &z)?;
    let mut aux = vec![u.clone()];
    let mut grads = vec![op.apply(&z)];
    let inits = vec![z];
    let mut iterates: Vec<Vector> = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        u.axpy(-eta, &grads[t - 1], 1.0);
        project(&mut u);
        let mut next = &u - op.apply(&u) * eta;
        project(&mut next);
        guard.check(t as i64, &next)?;
        aux.push(u.clone());
        grads.push(op.apply(&next));
        iterates.push(next);
    }
    Ok(Trace {
        inits,
        iterates,
        grads,
        eta: Some(eta),
        algorithm: Algorithm::Eg,
        aux,
    })
}

/// Gradient descent `z^{t+1} = z^t − ηF(z^t)`.
pub fn run_gd(op: &MonotoneOperator, z0: &Vector, eta: f64, horizon: usize) -> Result<Trace> {
    check_step(eta, horizon)?;
    check_dim("z^0", op.dim(), z0.len())?;
    let guard = DivergenceGuard::new(z0);
    let mut grads = vec![op.apply(z0)];
    let mut iterates = Vec::with_capacity(horizon);
    let mut z = z0.clone();
    for t in 1..=horizon {
        z.axpy(-eta, &grads[t - 1], 1.0);
        guard.check(t as i64, &z)?;
        grads.push(op.apply(&z));
        iterates.push(z.clone());
    }
    Ok(Trace {
        inits: vec![z0.clone()],
        iterates,
        grads,
        eta: Some(eta),
        algorithm: Algorithm::Gd,
        aux: Vec::new(),
    })
}

/// Scalars of a stationary p-step linear iteration
/// `z^t = Σ_j (α_j A + β_j I) z^{t−p+j} + (γA + δI) b`.
/// Index `p−1` multiplies the most recent iterate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SCLICoefficients {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub delta: f64,
}

impl SCLICoefficients {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: f64, delta: f64) -> Result<Self> {
        let c = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() || self.alpha.len() != self.beta.len() {
            return Err(Error::Config(format!(
                "alpha and beta must be nonempty with equal length (got {} and {})",
                self.alpha.len(),
                self.beta.len()
            )));
        }
        let all = self
            .alpha
            .iter()
            .chain(&self.beta)
            .chain([&self.gamma, &self.delta]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Optimistic gradient: `α = (η, −2η)`, `β = (0, 1)`, `N = −ηI`.
    pub fn og(eta: f64) -> Self {
        Self {
            alpha: vec![eta, -2.0 * eta],
            beta: vec![0.0, 1.0],
            gamma: 0.0,
            delta: -eta,
        }
    }

    /// Gradient descent: `α₀ = −η`, `β₀ = 1`, `N = −ηI`.
    pub fn gd(eta: f64) -> Self {
        Self {
            alpha: vec![-eta],
            beta: vec![1.0],
            gamma: 0.0,
            delta: -eta,
        }
    }

    /// `z^t = z^{t−1}`: never moves.
    pub fn identity() -> Self {
        Self {
            alpha: vec![0.0],
            beta: vec![1.0],
            gamma: 0.0,
            delta: 0.0,
        }
    }

    pub fn p(&self) -> usize {
        self.alpha.len()
    }

    /// `Σβ_j = 1` (to rounding).
    pub fn consistent(&self) -> bool {
        let s: f64 = self.beta.iter().sum();
        (s - 1.0).abs() <= 1e-12 * (1.0 + self.beta.iter().map(|b| b.abs()).sum::<f64>())
    }

    /// `C_j(A) = α_j A + β_j I`.
    pub fn c_block(&self, j: usize, a: &Matrix) -> Matrix {
        a * self.alpha[j] + Matrix::identity(a.nrows(), a.ncols()) * self.beta[j]
    }

    /// `N(A) = γA + δI`.
    pub fn n_block(&self, a: &Matrix) -> Matrix {
        a * self.gamma + Matrix::identity(a.nrows(), a.ncols()) * self.delta
    }
}

/// Run a p-SCLI on an affine operator from `p` initial points (oldest first).
pub fn run_scli(
    op: &MonotoneOperator,
    coeffs: &SCLICoefficients,
    inits: &[Vector],
    horizon: usize,
) -> Result<Trace> {
    coeffs.validate()?;
    if !op.is_affine() {
        return Err(Error::Contract(format!(
            "p-SCLI runner needs an affine operator, got {}",
            op.kind()
        )));
    }
    let p = coeffs.p();
    if inits.len() != p {
        return Err(Error::Contract(format!(
            "p-SCLI of order {p} needs {p} initial points, got {}",
            inits.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::Contract("horizon T must be >= 1".into()));
    }
    for z in inits {
        check_dim("init", op.dim(), z.len())?;
    }
    let a = op.matrix();
    let blocks: Vec<Matrix> = (0..p).map(|j| coeffs.c_block(j, a)).collect();
    let shift = coeffs.n_block(a) * op.offset();
    let guard = DivergenceGuard::new(&inits[p - 1]);

    let mut all: Vec<Vector> = inits.to_vec();
    for t in 1..=horizon {
        let base = all.len() - p;
        let mut next = shift.clone();
        for (j, c) in blocks.iter().enumerate() {
            next.gemv(1.0, c, &all[base + j], 1.0);
        }
        guard.check(t as i64, &next)?;
        all.push(next);
    }
    let grads = all.iter().map(|z| op.apply(z)).collect();
    let iterates = all.split_off(p);
    Ok(Trace {
        inits: all,
        iterates,
        grads,
        eta: None,
        algorithm: Algorithm::Scli,
        aux: Vec::new(),
    })
}

/// Extragradient implemented as an online learner on `f₁(v₁, v₂) = v₁v₂`
/// over `[−1, 1]`, against the adversary `v₂ = 1` on even rounds and `0` on
/// odd rounds, starting from `v₁ = 0`.
#[derive(Debug, Clone)]
pub struct EgRegretDemo {
    /// Learner actions `v₁⁰ … v₁^{T−1}`.
    pub actions: Vec<f64>,
    /// Adversary actions `v₂⁰ … v₂^{T−1}`.
    pub adversary: Vec<f64>,
    /// Learner loss summed over rounds `0 … t−1`, for `t = 1 … T`.
    pub cumulative_loss: Vec<f64>,
    /// Regret after `t` rounds against the best fixed action in `[−1, 1]`.
    pub regret: Vec<f64>,
}

pub fn eg_regret_demo(horizon: usize, eta: f64) -> Result<EgRegretDemo> {
    check_step(eta, horizon)?;
    let clip = |x: f64| x.clamp(-1.0, 1.0);
    let adversary: Vec<f64> = (0..horizon)
        .map(|t| if t % 2 == 0 { 1.0 } else { 0.0 })
        .collect();
    // gradient of v₁ ↦ v₁v₂ is v₂
    let mut actions = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let v = if t == 0 {
            0.0
        } else if t % 2 == 1 {
            clip(actions[t - 1] - eta * adversary[t - 1])
        } else {
            clip(actions[t - 2] - eta * adversary[t - 1])
        };
        actions.push(v);
    }
    let mut cumulative_loss = Vec::with_capacity(horizon);
    let mut regret = Vec::with_capacity(horizon);
    let (mut loss, mut grad_sum) = (0.0, 0.0);
    for t in 0..horizon {
        loss += actions[t] * adversary[t];
        grad_sum += adversary[t];
        cumulative_loss.push(loss);
        regret.push(loss + grad_sum.abs());
    }
    Ok(EgRegretDemo {
        actions,
        adversary,
        cumulative_loss,
        regret,
    })
}

/// Step-size rule for online runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `η_t = scale / √(t+1)`.
    InverseSqrt {
        scale: f64,
    },
}

impl StepSchedule {
    /// `η_t = D / (L√(t+1))`.
    pub fn inverse_sqrt(d: f64, grad_bound: f64) -> Self {
        StepSchedule::InverseSqrt {
            scale: d / grad_bound,
        }
    }

    pub fn at(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Constant(e) => e,
            StepSchedule::InverseSqrt { scale } => scale / ((t + 1) as f64).sqrt(),
        }
    }
}

/// Optimistic gradient as an online learner over `B(0, D)`.
#[derive(Debug, Clone)]
pub struct RegretRun {
    /// Played actions `v⁰ … v^{T−1}`.
    pub actions: Vec<Vector>,
    /// Regret after `t` rounds, `t = 1 … T`.
    pub regret: Vec<f64>,
}

/// Optimistic online gradient with projection onto `B(0, D)` facing the
/// linear losses `v ↦ ⟨g_t, v⟩`. Uses the two-sequence form
/// `w^{t+1} = Π(w^t − η_t g_t)`, `v^{t+1} = Π(w^{t+1} − η_{t+1} g_t)`
/// from `w⁰ = v⁰ = 0`. Regret is exact:
/// `Σ⟨g_s, v^s⟩ + D‖Σ g_s‖`.
pub fn og_regret_run(gradients: &[Vector], d: f64, schedule: StepSchedule) -> Result<RegretRun> {
    if gradients.is_empty() {
        return Err(Error::Contract("need at least one loss gradient".into()));
    }
    if !(d > 0.0) {
        return Err(Error::Contract(format!(
            "radius D must be positive, got {d}"
        )));
    }
    let n = gradients[0].len();
    for g in gradients {
        check_dim("loss gradient", n, g.len())?;
    }
    let ball = [n];
    let mut w = Vector::zeros(n);
    let mut v = Vector::zeros(n);
    let mut actions = Vec::with_capacity(gradients.len());
    let mut regret = Vec::with_capacity(gradients.len());
    let mut loss = 0.0;
    let mut sum = Vector::zeros(n);
    for (t, g) in gradients.iter().enumerate() {
        actions.push(v.clone());
        loss += g.dot(&v);
        sum += g;
        regret.push(loss + d * sum.norm());
        w.axpy(-schedule.at(t), g, 1.0);
        project_blocks(&mut w, &ball, d);
        v = &w - g * schedule.at(t + 1);
        project_blocks(&mut v, &ball, d);
    }
    Ok(RegretRun { actions, regret })
}

/// Loss gradients of the alternating adversary (`1` on even rounds, `0` on
/// odd rounds) for a one-dimensional learner.
pub fn alternating_adversary(horizon: usize) -> Vec<Vector> {
    (0..horizon)
        .map(|t| Vector::from_element(1, if t % 2 == 0 { 1.0 } else { 0.0 }))
        .collect()
}

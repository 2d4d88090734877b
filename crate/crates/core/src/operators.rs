//! Monotone operators, the games that induce them, and the instance
//! families used by the upper- and lower-bound experiments.
//!
//! Every operator is affine plus an optional cubic term:
//!
//! ```text
//! F(z) = A z + b + ε ‖z‖² z
//! ```
//!
//! The cubic term (only for [`OperatorKind::PerturbedBilinear`]) is the
//! gradient of `ε‖z‖⁴/4`, so its Jacobian `ε(‖z‖² I + 2 z zᵀ)` is symmetric
//! PSD and quadratic in `z`. Smoothness constants are certified on the ball
//! `B(0, 3D)`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    block_norms, min_singular_value, sample_ball, solve_vec, spectral_norm, sym_part_eig_range,
    Matrix, Vector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Linear,
    Bilinear,
    PerturbedBilinear,
    QuadraticMin,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Linear => "linear",
            OperatorKind::Bilinear => "bilinear",
            OperatorKind::PerturbedBilinear => "perturbed-bilinear",
            OperatorKind::QuadraticMin => "quadratic-min",
        })
    }
}

/// An evaluatable monotone map with closed-form Jacobian and certified
/// smoothness constants. Immutable once built.
#[derive(Debug, Clone)]
pub struct MonotoneOperator {
    kind: OperatorKind,
    a: Matrix,
    b: Vector,
    epsilon: f64,
    ell: f64,
    lambda: f64,
    domain_radius: f64,
    equilibrium: Option<Vector>,
    /// Per-player block sizes (two halves for min-max kinds).
    player_dims: Vec<usize>,
}

impl MonotoneOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
    pub fn dim(&self) -> usize {
        self.b.len()
    }
    /// Linear part `A`.
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
    pub fn offset(&self) -> &Vector {
        &self.b
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    /// First-order Lipschitz constant on the domain ball.
    pub fn ell(&self) -> f64 {
        self.ell
    }
    /// Second-order (Jacobian) Lipschitz constant on the domain ball.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }
    pub fn equilibrium(&self) -> Option<&Vector> {
        self.equilibrium.as_ref()
    }
    pub fn player_dims(&self) -> &[usize] {
        &self.player_dims
    }
    /// True when `F(z) = A z + b` exactly.
    pub fn is_affine(&self) -> bool {
        self.kind != OperatorKind::PerturbedBilinear
    }

    /// `F(z)`. Warns (log) when `z` leaves the certified domain ball.
    pub fn eval(&self, z: &Vector) -> Result<Vector> {
        check_dim("eval", self.dim(), z.len())?;
        if z.norm() > self.domain_radius {
            log::warn!(
                "evaluating {} operator outside B(0, {}) (‖z‖ = {:.3e})",
                self.kind,
                self.domain_radius,
                z.norm()
            );
        }
        Ok(self.apply(z))
    }

    /// `F(z)` without dimension or domain checks; used in iteration loops.
    pub(crate) fn apply(&self, z: &Vector) -> Vector {
        let mut out = &self.a * z + &self.b;
        if self.epsilon != 0.0 {
            out.axpy(self.epsilon * z.norm_squared(), z, 1.0);
        }
        out
    }

    /// Closed-form Jacobian `∂F(z)`.
    pub fn jacobian(&self, z: &Vector) -> Result<Matrix> {
        check_dim("jacobian", self.dim(), z.len())?;
        Ok(self.jacobian_unchecked(z))
    }

    pub(crate) fn jacobian_unchecked(&self, z: &Vector) -> Matrix {
        let mut j = self.a.clone();
        if self.epsilon != 0.0 {
            let n = self.dim();
            let sq = z.norm_squared();
            for i in 0..n {
                j[(i, i)] += self.epsilon * sq;
            }
            j.ger(2.0 * self.epsilon, z, z, 1.0);
        }
        j
    }

    /// Affine operator built without any validation. Meant for exercising
    /// the validators with deliberately broken instances.
    pub fn affine_unchecked(a: Matrix, b: Vector) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Contract("A must be square".into()));
        }
        check_dim("offset", a.nrows(), b.len())?;
        let n = b.len();
        Ok(Self {
            kind: OperatorKind::Linear,
            ell: spectral_norm(&a),
            a,
            b,
            epsilon: 0.0,
            lambda: 0.0,
            domain_radius: f64::INFINITY,
            equilibrium: None,
            player_dims: vec![n],
        })
    }
}

fn ensure_finite_matrix(name: &str, m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} has non-finite entries")))
    }
}

fn ensure_radius(d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("radius D must be positive, got {d}")))
    }
}

fn is_invertible(m: &Matrix) -> bool {
    let hi = spectral_norm(m);
    hi > 0.0 && min_singular_value(m) > 1e-12 * hi
}

/// Bilinear zero-sum game `f(x, y) = xᵀMy + b₁ᵀx + b₂ᵀy` with operator
/// `A = [[0, M], [−Mᵀ, 0]]`, `b = (b₁, −b₂)`.
///
/// When `M` is invertible the equilibrium `−A⁻¹b` must lie in
/// `B(0, D) × B(0, D)`; otherwise the instance is rejected.
pub fn make_bilinear(m: &Matrix, b1: &Vector, b2: &Vector, d: f64) -> Result<MonotoneOperator> {
    ensure_radius(d)?;
    if !m.is_square() {
        return Err(Error::Config("M must be square".into()));
    }
    ensure_finite_matrix("M", m)?;
    let k = m.nrows();
    if b1.len() != k || b2.len() != k {
        return Err(Error::Config(format!(
            "b1/b2 must have length {k} (got {}, {})",
            b1.len(),
            b2.len()
        )));
    }
    let n = 2 * k;
    let mut a = Matrix::zeros(n, n);
    a.view_mut((0, k), (k, k)).copy_from(m);
    a.view_mut((k, 0), (k, k)).copy_from(&(-m.transpose()));
    let mut b = Vector::zeros(n);
    b.rows_mut(0, k).copy_from(b1);
    b.rows_mut(k, k).copy_from(&(-b2));

    let equilibrium = if is_invertible(m) {
        let z = -solve_vec(&a, &b)?;
        check_in_ball_product(&z, &[k, k], d)?;
        Some(z)
    } else {
        None
    };

    Ok(MonotoneOperator {
        kind: OperatorKind::Bilinear,
        ell: spectral_norm(m),
        a,
        b,
        epsilon: 0.0,
        lambda: 0.0,
        domain_radius: 3.0 * d,
        equilibrium,
        player_dims: vec![k, k],
    })
}

fn check_in_ball_product(z: &Vector, dims: &[usize], d: f64) -> Result<()> {
    for (i, nrm) in block_norms(z, dims).into_iter().enumerate() {
        if nrm > d * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "equilibrium block {i} has norm {nrm:.6e} > D = {d}"
            )));
        }
    }
    Ok(())
}

/// Bilinear game plus the monotone cubic term `ε‖z‖²z`.
///
/// Constants are certified on `B(0, R)` with `R = 3D`:
/// `ℓ = ‖M‖_σ + 3εR²` and `Λ = 6εR`. With `ε = 0` this is exactly
/// [`make_bilinear`].
pub fn make_perturbed_bilinear(
    m: &Matrix,
    b1: &Vector,
    b2: &Vector,
    epsilon: f64,
    d: f64,
) -> Result<MonotoneOperator> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Config(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let base = make_bilinear(m, b1, b2, d)?;
    if epsilon == 0.0 {
        return Ok(base);
    }
    let r = 3.0 * d;
    let mut op = MonotoneOperator {
        kind: OperatorKind::PerturbedBilinear,
        ell: base.ell + 3.0 * epsilon * r * r,
        lambda: 6.0 * epsilon * r,
        epsilon,
        equilibrium: None,
        ..base.clone()
    };
    op.equilibrium = if op.b.iter().all(|&x| x == 0.0) {
        Some(Vector::zeros(op.dim()))
    } else {
        newton_zero(
            &op,
            base.equilibrium
                .clone()
                .unwrap_or_else(|| Vector::zeros(op.dim())),
        )
    };
    if let Some(z) = &op.equilibrium {
        check_in_ball_product(z, &op.player_dims, d)?;
    }
    Ok(op)
}

fn newton_zero(op: &MonotoneOperator, mut z: Vector) -> Option<Vector> {
    let scale = 1.0 + op.b.norm();
    for _ in 0..100 {
        let f = op.apply(&z);
        if f.norm() <= 1e-14 * scale {
            return Some(z);
        }
        let step = solve_vec(&op.jacobian_unchecked(&z), &f).ok()?;
        z -= step;
        if !z.iter().all(|x| x.is_finite()) {
            return None;
        }
    }
    (op.apply(&z).norm() <= 1e-12 * scale).then_some(z)
}

/// Quadratic minimisation `f(x) = ½xᵀSx + bᵀx` with `F = ∇f`.
pub fn make_quadratic_min(s: &Matrix, b: &Vector, d: f64) -> Result<MonotoneOperator> {
    ensure_radius(d)?;
    if !s.is_square() {
        return Err(Error::Config("S must be square".into()));
    }
    ensure_finite_matrix("S", s)?;
    check_dim("b", s.nrows(), b.len()).map_err(|e| Error::Config(e.to_string()))?;
    let asym = (s - s.transpose()).amax();
    if asym > 1e-12 * s.amax().max(1.0) {
        return Err(Error::Config("S is not symmetric".into()));
    }
    let eig = s.symmetric_eigenvalues();
    if eig.min() <= 0.0 {
        return Err(Error::Config(format!(
            "S is not positive definite (min eigenvalue {:.3e})",
            eig.min()
        )));
    }
    let x_star = -solve_vec(s, b)?;
    if x_star.norm() > d * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "minimiser norm {:.6e} exceeds D = {d}",
            x_star.norm()
        )));
    }
    let n = b.len();
    Ok(MonotoneOperator {
        kind: OperatorKind::QuadraticMin,
        a: s.clone(),
        b: b.clone(),
        epsilon: 0.0,
        ell: eig.max(),
        lambda: 0.0,
        domain_radius: 3.0 * d,
        equilibrium: Some(x_star),
        player_dims: vec![n],
    })
}

/// General affine monotone operator `F(z) = Az + b`; requires `A + Aᵀ ⪰ 0`.
pub fn make_linear(a: &Matrix, b: &Vector, d: f64) -> Result<MonotoneOperator> {
    ensure_radius(d)?;
    if !a.is_square() {
        return Err(Error::Config("A must be square".into()));
    }
    ensure_finite_matrix("A", a)?;
    check_dim("b", a.nrows(), b.len()).map_err(|e| Error::Config(e.to_string()))?;
    let (lo, _) = sym_part_eig_range(a);
    if lo < -1e-12 * spectral_norm(a).max(1.0) {
        return Err(Error::Config(format!(
            "A + Aᵀ is not PSD (min eigenvalue of symmetric part {lo:.3e})"
        )));
    }
    let equilibrium = if is_invertible(a) {
        let z = -solve_vec(a, b)?;
        if z.norm() > d * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "equilibrium norm {:.6e} exceeds D = {d}",
                z.norm()
            )));
        }
        Some(z)
    } else {
        None
    };
    let n = b.len();
    Ok(MonotoneOperator {
        kind: OperatorKind::Linear,
        ell: spectral_norm(a),
        a: a.clone(),
        b: b.clone(),
        epsilon: 0.0,
        lambda: 0.0,
        domain_radius: 3.0 * d,
        equilibrium,
        player_dims: vec![n],
    })
}

/// `f(x) − f(x*) = ½(Sx+b)ᵀS⁻¹(Sx+b)` for quadratic-min operators.
pub fn suboptimality(op: &MonotoneOperator, x: &Vector) -> Result<f64> {
    if op.kind != OperatorKind::QuadraticMin {
        return Err(Error::Contract(format!(
            "suboptimality needs a quadratic-min operator, got {}",
            op.kind
        )));
    }
    check_dim("suboptimality", op.dim(), x.len())?;
    let g = op.apply(x);
    let chol =
        op.a.clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric("S lost positive definiteness".into()))?;
    Ok(0.5 * g.dot(&chol.solve(&g)))
}

/// Result of [`check_monotone_and_smooth`].
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub monotone: bool,
    /// Smallest sampled `⟨F(z) − F(z'), z − z'⟩`.
    pub min_inner: f64,
    pub ell_hat: f64,
    pub lambda_hat: f64,
    pub ell_violated: bool,
    pub lambda_violated: bool,
    /// For affine kinds: whether `A + Aᵀ` is PSD by its eigenvalues.
    pub symmetric_part_psd: Option<bool>,
}

impl SmoothnessReport {
    pub fn ok(&self) -> bool {
        self.monotone
            && !self.ell_violated
            && !self.lambda_violated
            && self.symmetric_part_psd.unwrap_or(true)
    }
}

/// Seeded sampling check of monotonicity and the two Lipschitz constants on
/// the operator's domain ball.
pub fn check_monotone_and_smooth(
    op: &MonotoneOperator,
    num_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SmoothnessReport> {
    if num_samples < 2 {
        return Err(Error::Contract("num_samples must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = if op.domain_radius.is_finite() {
        op.domain_radius
    } else {
        1.0
    };
    let origin = Vector::zeros(op.dim());
    let mut monotone = true;
    let mut min_inner = f64::INFINITY;
    let mut ell_hat: f64 = 0.0;
    let mut lambda_hat: f64 = 0.0;
    for _ in 0..num_samples {
        let z = sample_ball(&mut rng, &origin, radius);
        let zp = sample_ball(&mut rng, &origin, radius);
        let dz = &z - &zp;
        let dn = dz.norm();
        if dn == 0.0 {
            continue;
        }
        let df = op.apply(&z) - op.apply(&zp);
        let inner = df.dot(&dz);
        min_inner = min_inner.min(inner);
        if inner < -tol * (1.0 + df.norm() * dn) {
            monotone = false;
        }
        ell_hat = ell_hat.max(df.norm() / dn);
        let dj = op.jacobian_unchecked(&z) - op.jacobian_unchecked(&zp);
        lambda_hat = lambda_hat.max(spectral_norm(&dj) / dn);
    }
    let symmetric_part_psd = op.is_affine().then(|| {
        let (lo, _) = sym_part_eig_range(&op.a);
        lo >= -tol * spectral_norm(&op.a).max(1.0)
    });
    Ok(SmoothnessReport {
        monotone,
        min_inner,
        ell_hat,
        lambda_hat,
        ell_violated: ell_hat > op.ell * (1.0 + tol) + tol,
        lambda_violated: lambda_hat > op.lambda * (1.0 + tol) + tol,
        symmetric_part_psd,
    })
}

/// Per-player cost functions of a game whose gradient map is a bundled
/// operator family.
#[derive(Debug, Clone)]
pub enum GameCosts {
    /// `f₁ = xᵀMy + b₁ᵀx + b₂ᵀy`, `f₂ = −f₁`.
    Bilinear { m: Matrix, b1: Vector, b2: Vector },
    /// Bilinear costs each plus `ε‖z‖⁴/4`.
    PerturbedBilinear {
        m: Matrix,
        b1: Vector,
        b2: Vector,
        epsilon: f64,
    },
    /// Single player, `f = ½xᵀSx + bᵀx`.
    QuadraticMin { s: Matrix, b: Vector },
}

/// A continuous game together with its induced operator `F_G`.
#[derive(Debug, Clone)]
pub struct GameSpec {
    pub dims: Vec<usize>,
    pub costs: GameCosts,
    pub operator: MonotoneOperator,
}

impl GameSpec {
    pub fn bilinear(m: &Matrix, b1: &Vector, b2: &Vector, d: f64) -> Result<Self> {
        let operator = make_bilinear(m, b1, b2, d)?;
        Ok(Self {
            dims: operator.player_dims.clone(),
            costs: GameCosts::Bilinear {
                m: m.clone(),
                b1: b1.clone(),
                b2: b2.clone(),
            },
            operator,
        })
    }

    pub fn perturbed_bilinear(
        m: &Matrix,
        b1: &Vector,
        b2: &Vector,
        epsilon: f64,
        d: f64,
    ) -> Result<Self> {
        let operator = make_perturbed_bilinear(m, b1, b2, epsilon, d)?;
        let costs = if epsilon == 0.0 {
            GameCosts::Bilinear {
                m: m.clone(),
                b1: b1.clone(),
                b2: b2.clone(),
            }
        } else {
            GameCosts::PerturbedBilinear {
                m: m.clone(),
                b1: b1.clone(),
                b2: b2.clone(),
                epsilon,
            }
        };
        Ok(Self {
            dims: operator.player_dims.clone(),
            costs,
            operator,
        })
    }

    pub fn quadratic_min(s: &Matrix, b: &Vector, d: f64) -> Result<Self> {
        let operator = make_quadratic_min(s, b, d)?;
        Ok(Self {
            dims: operator.player_dims.clone(),
            costs: GameCosts::QuadraticMin {
                s: s.clone(),
                b: b.clone(),
            },
            operator,
        })
    }

    /// Number of players `K`.
    pub fn players(&self) -> usize {
        self.dims.len()
    }

    /// Whether every `f_k` is affine in the player's own block.
    pub fn own_affine(&self) -> bool {
        matches!(self.costs, GameCosts::Bilinear { .. })
    }

    /// `f_k(z)`.
    pub fn cost(&self, k: usize, z: &Vector) -> Result<f64> {
        check_dim("cost", self.operator.dim(), z.len())?;
        if k >= self.players() {
            return Err(Error::Contract(format!("player {k} out of range")));
        }
        let bilinear = |m: &Matrix, b1: &Vector, b2: &Vector| {
            let h = m.nrows();
            let x = z.rows(0, h);
            let y = z.rows(h, h);
            (x.transpose() * m * y)[(0, 0)] + b1.dot(&x) + b2.dot(&y)
        };
        Ok(match &self.costs {
            GameCosts::Bilinear { m, b1, b2 } => {
                let f = bilinear(m, b1, b2);
                if k == 0 {
                    f
                } else {
                    -f
                }
            }
            GameCosts::PerturbedBilinear { m, b1, b2, epsilon } => {
                let f = bilinear(m, b1, b2);
                let quartic = 0.25 * epsilon * z.norm_squared().powi(2);
                if k == 0 {
                    f + quartic
                } else {
                    -f + quartic
                }
            }
            GameCosts::QuadraticMin { s, b } => 0.5 * z.dot(&(s * z)) + b.dot(z),
        })
    }

    /// Offset of player `k`'s block inside the joint vector.
    pub fn block_start(&self, k: usize) -> usize {
        self.dims[..k].iter().sum()
    }
}

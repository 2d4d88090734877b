//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Largest singular value, `‖m‖_σ`.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Smallest singular value.
pub fn min_singular_value(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().min()
}

/// 2-norm condition number; infinite for a singular matrix.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Extreme eigenvalues of the symmetric part `(m + mᵀ)/2`.
pub fn sym_part_eig_range(m: &Matrix) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    (eig.min(), eig.max())
}

/// Solve `m x = rhs` for a matrix right-hand side (column by column).
pub fn solve(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Numeric("singular linear system".into()))
}

pub fn solve_vec(m: &Matrix, rhs: &Vector) -> Result<Vector> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Numeric("singular linear system".into()))
}

/// Split a vector into consecutive blocks of the given sizes.
pub fn blocks<'a>(v: &'a Vector, sizes: &'a [usize]) -> impl Iterator<Item = Vector> + 'a {
    let mut start = 0;
    sizes.iter().map(move |&k| {
        let b = v.rows(start, k).into_owned();
        start += k;
        b
    })
}

pub fn block_norms(v: &Vector, sizes: &[usize]) -> Vec<f64> {
    blocks(v, sizes).map(|b| b.norm()).collect()
}

/// Euclidean projection of each block onto the centered ball of `radius`.
pub fn project_blocks(v: &mut Vector, sizes: &[usize], radius: f64) {
    let mut start = 0;
    for &k in sizes {
        let mut b = v.rows_mut(start, k);
        let nrm = b.norm();
        if nrm > radius {
            b *= radius / nrm;
        }
        start += k;
    }
}

/// Uniform sample from the ball `B(center, radius)`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, center: &Vector, radius: f64) -> Vector {
    let n = center.len();
    let dir = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let nrm = dir.norm();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / n as f64);
    center + dir * (r / nrm.max(f64::MIN_POSITIVE))
}

/// Uniform sample from the unit sphere scaled to `radius`.
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vector {
    let dir = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let nrm = dir.norm();
    dir * (radius / nrm.max(f64::MIN_POSITIVE))
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectral_norm_of_diag() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-14);
        assert!((min_singular_value(&m) - 2.0).abs() < 1e-14);
        assert!((condition_number(&m) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn projection_is_per_block() {
        let mut v = Vector::from_vec(vec![3.0, 4.0, 0.1, 0.0]);
        project_blocks(&mut v, &[2, 2], 1.0);
        assert!((v.rows(0, 2).norm() - 1.0).abs() < 1e-15);
        assert_eq!(v[2], 0.1);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        for _ in 0..500 {
            let z = sample_ball(&mut rng, &c, 0.3);
            assert!((z - &c).norm() <= 0.3 + 1e-15);
        }
    }
}

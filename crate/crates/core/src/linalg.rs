//! Dense spectral helpers shared by the diffusion and Markov-chain analyses.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Matrices up to this order use a dense Schur eigensolver; larger ones fall
/// back to power iteration.
pub const DENSE_EIGEN_LIMIT: usize = 400;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 200_000;

/// Spectral radius of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    if m.nrows() <= DENSE_EIGEN_LIMIT {
        Ok(dense_spectral_radius(m))
    } else {
        power_spectral_radius(|x| m * x, m.nrows())
    }
}

pub(crate) fn dense_spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Power iteration on an arbitrary linear operator.
///
/// The growth factor is measured over blocks of iterations so that complex
/// or negative dominant pairs still yield the modulus.
pub(crate) fn power_spectral_radius<F>(apply: F, n: usize) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    const BLOCK: usize = 16;
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_7).fract());
    x /= x.norm();
    let mut prev = f64::NAN;
    let mut iters = 0;
    while iters < POWER_MAX_ITER {
        let mut log_growth = 0.0;
        for _ in 0..BLOCK {
            let y = apply(&x);
            let norm = y.norm();
            if norm == 0.0 {
                return Ok(0.0);
            }
            log_growth += norm.ln();
            x = y / norm;
        }
        iters += BLOCK;
        let estimate = (log_growth / BLOCK as f64).exp();
        if (estimate - prev).abs() <= POWER_TOL * estimate.max(1.0) {
            return Ok(estimate);
        }
        prev = estimate;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {POWER_MAX_ITER} iterations"
    )))
}

/// Left Perron eigenvector of a nonnegative matrix with known Perron root,
/// normalised so that its entries sum to one.
///
/// Uses shifted inverse iteration, which converges in a handful of steps
/// once the eigenvalue is known to machine precision.
pub fn left_perron_vector(m: &DMatrix<f64>, rho: f64) -> Result<DVector<f64>> {
    let n = m.nrows();
    let shift = rho * (1.0 + 1e-10) + 1e-14;
    let shifted = m.transpose() - DMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut y = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..50 {
        let next = lu
            .solve(&y)
            .ok_or_else(|| Error::Numerical("singular shifted system".into()))?;
        let sum: f64 = next.sum();
        if sum == 0.0 || !sum.is_finite() {
            return Err(Error::Numerical("inverse iteration broke down".into()));
        }
        let next = next / sum;
        let change = (&next - &y).amax();
        y = next;
        if change < 1e-15 {
            break;
        }
    }
    if y.iter().any(|v| *v < -1e-12) {
        return Err(Error::Numerical(
            "left eigenvector has negative entries (matrix not primitive?)".into(),
        ));
    }
    Ok(y)
}

/// Whether the directed graph given by the nonzero pattern of `m` is strongly
/// connected (edge `i -> j` when `m[(i, j)] > 0`).
pub fn is_irreducible(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    if n == 0 {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { m[(i, j)] } else { m[(j, i)] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

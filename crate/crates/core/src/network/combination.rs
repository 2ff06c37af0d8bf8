use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Topology;
use crate::error::{invalid, Error, Result};

/// Tolerance on column sums of a left-stochastic matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

const PERRON_TOL: f64 = 1e-12;
const PERRON_MAX_ITER: usize = 100_000;

/// Left-stochastic combination matrix: entry `(l, k)` is the weight agent `k`
/// assigns to data arriving from agent `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRows", into = "WeightRows")]
pub struct CombinationMatrix {
    a: DMatrix<f64>,
}

/// JSON form: dense rows, `rows[l][k] = a_{l,k}`.
#[derive(Serialize, Deserialize)]
struct WeightRows {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<WeightRows> for CombinationMatrix {
    type Error = Error;

    fn try_from(w: WeightRows) -> Result<Self> {
        let n = w.rows.len();
        if let Some(bad) = w.rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let a = DMatrix::from_fn(n, n, |l, k| w.rows[l][k]);
        CombinationMatrix::from_matrix(a)
    }
}

impl From<CombinationMatrix> for WeightRows {
    fn from(m: CombinationMatrix) -> Self {
        WeightRows {
            rows: m.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

impl CombinationMatrix {
    /// Validates nonnegativity, unit column sums, and the sparsity pattern
    /// implied by `topology`.
    pub fn new(topology: &Topology, a: DMatrix<f64>) -> Result<Self> {
        let n = topology.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows().max(a.ncols()),
            });
        }
        for k in 0..n {
            for l in 0..n {
                let v = a[(l, k)];
                if !(v >= 0.0) {
                    return invalid(format!("negative or NaN weight a[{l},{k}] = {v}"));
                }
                if v > 0.0 && !topology.contains(k, l) {
                    return invalid(format!("weight a[{l},{k}] set but {l} is not a neighbor of {k}"));
                }
            }
        }
        let m = CombinationMatrix { a };
        m.check_stochastic()?;
        Ok(m)
    }

    /// Wraps a matrix, checking only that it is square, nonnegative, and
    /// left-stochastic.
    pub fn from_matrix(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        if a.iter().any(|v| !(*v >= 0.0)) {
            return invalid("combination weights must be nonnegative");
        }
        let m = CombinationMatrix { a };
        m.check_stochastic()?;
        Ok(m)
    }

    fn check_stochastic(&self) -> Result<()> {
        for (k, col) in self.a.column_iter().enumerate() {
            let s: f64 = col.sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return invalid(format!("column {k} sums to {s}, expected 1"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn weight(&self, l: usize, k: usize) -> f64 {
        self.a[(l, k)]
    }

    /// Column `k` as a dense vector.
    pub fn column(&self, k: usize) -> DVector<f64> {
        self.a.column(k).into_owned()
    }
}

/// `a_{l,k} = 1/n_k` over each neighborhood.
pub fn uniform_weights(t: &Topology) -> CombinationMatrix {
    let n = t.len();
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n {
        let w = 1.0 / t.degree(k) as f64;
        for &l in t.neighbors(k) {
            a[(l, k)] = w;
        }
    }
    CombinationMatrix { a }
}

/// The three-agent line network `0 - 1 - 2` with free weights
/// `a, b, c, d` in `[0, 1]`, `b + c <= 1`:
///
/// ```text
///     [ a      b        0   ]
/// A = [ 1-a    1-b-c    d   ]
///     [ 0      c        1-d ]
/// ```
pub fn three_node_line(a: f64, b: f64, c: f64, d: f64) -> Result<(Topology, CombinationMatrix)> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !(0.0..=1.0).contains(&v) {
            return invalid(format!("{name} = {v} outside [0, 1]"));
        }
    }
    if b + c > 1.0 {
        return invalid("b + c must not exceed 1");
    }
    let t = Topology::path(3)?;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(3, 3, &[
        a,       b,           0.0,
        1.0 - a, 1.0 - b - c, d,
        0.0,     c,           1.0 - d,
    ]);
    let a = CombinationMatrix::new(&t, m)?;
    Ok((t, a))
}

/// Whether some power of `a` is entrywise positive.
///
/// A primitive matrix has `A^j > 0` for every `j` past its exponent, which is
/// bounded by `(N-1)N + 1`; repeated squaring of the zero pattern reaches
/// that power in `O(log N)` boolean products.
pub fn is_primitive(a: &CombinationMatrix) -> bool {
    let n = a.len();
    if n == 0 {
        return false;
    }
    let bound = (n - 1) * n + 1;
    let mut pattern: Vec<bool> = a.a.iter().map(|v| *v > 0.0).collect();
    let mut power = 1usize;
    while power < bound {
        pattern = bool_square(&pattern, n);
        power *= 2;
    }
    pattern.into_iter().all(|p| p)
}

// column-major boolean product P * P
fn bool_square(p: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for j in 0..n {
        for k in 0..n {
            if p[k + j * n] {
                for i in 0..n {
                    if p[i + k * n] {
                        out[i + j * n] = true;
                    }
                }
            }
        }
    }
    out
}

/// Right Perron eigenvector `c` of a primitive left-stochastic matrix:
/// `A c = c`, entries positive and summing to one.
pub fn perron_vector(a: &CombinationMatrix) -> Result<DVector<f64>> {
    if !is_primitive(a) {
        return Err(Error::NotPrimitive);
    }
    let n = a.len();
    let mut c = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..PERRON_MAX_ITER {
        let mut next = &a.a * &c;
        let s = next.sum();
        next /= s;
        let change = (&next - &c).amax();
        c = next;
        if change <= PERRON_TOL {
            return Ok(c);
        }
    }
    Err(Error::Numerical(format!(
        "Perron vector did not converge in {PERRON_MAX_ITER} iterations"
    )))
}

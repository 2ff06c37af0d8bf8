//! Topologies, combination matrices, the two-model data environment, and the
//! limit point of conventional diffusion.

mod combination;
mod environment;
mod topology;

pub use combination::{is_primitive, perron_vector, three_node_line, uniform_weights, CombinationMatrix};
pub use environment::{random_environments, sample_data, AgentEnvironment};
pub use topology::{generate_topology, Topology};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The two candidate models `w0`, `w1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(Vec<f64>, Vec<f64>)", into = "(Vec<f64>, Vec<f64>)")]
pub struct ModelPair {
    w: [DVector<f64>; 2],
}

impl TryFrom<(Vec<f64>, Vec<f64>)> for ModelPair {
    type Error = Error;

    fn try_from((w0, w1): (Vec<f64>, Vec<f64>)) -> Result<Self> {
        ModelPair::new(DVector::from_vec(w0), DVector::from_vec(w1))
    }
}

impl From<ModelPair> for (Vec<f64>, Vec<f64>) {
    fn from(m: ModelPair) -> Self {
        let [w0, w1] = m.w;
        (w0.as_slice().to_vec(), w1.as_slice().to_vec())
    }
}

impl ModelPair {
    pub fn new(w0: DVector<f64>, w1: DVector<f64>) -> Result<Self> {
        if w0.is_empty() {
            return invalid("models must have length at least 1");
        }
        if w0.len() != w1.len() {
            return Err(Error::DimensionMismatch {
                expected: w0.len(),
                found: w1.len(),
            });
        }
        if w0.iter().chain(w1.iter()).any(|v| !v.is_finite()) {
            return invalid("model entries must be finite");
        }
        if w0 == w1 {
            return invalid("the two models must differ");
        }
        Ok(ModelPair { w: [w0, w1] })
    }

    pub fn from_slices(w0: &[f64], w1: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(w0), DVector::from_column_slice(w1))
    }

    pub fn dim(&self) -> usize {
        self.w[0].len()
    }

    /// Model `w_q` for `q` in `{0, 1}`.
    pub fn get(&self, q: u8) -> &DVector<f64> {
        &self.w[usize::from(q & 1)]
    }

    /// `||w0 - w1||`.
    pub fn separation(&self) -> f64 {
        (&self.w[0] - &self.w[1]).norm()
    }
}

/// Which model each agent observes: `f(k) = 0` for `w0`, `1` for `w1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ObservedAssignment(Vec<u8>);

impl TryFrom<Vec<u8>> for ObservedAssignment {
    type Error = Error;

    fn try_from(f: Vec<u8>) -> Result<Self> {
        ObservedAssignment::new(f)
    }
}

impl From<ObservedAssignment> for Vec<u8> {
    fn from(f: ObservedAssignment) -> Self {
        f.0
    }
}

impl ObservedAssignment {
    pub fn new(f: Vec<u8>) -> Result<Self> {
        if let Some(k) = f.iter().position(|&v| v > 1) {
            return invalid(format!("assignment entry {k} is {}, expected 0 or 1", f[k]));
        }
        Ok(ObservedAssignment(f))
    }

    /// First `split` agents observe `w0`, the rest `w1`.
    pub fn split(n: usize, split: usize) -> Self {
        ObservedAssignment((0..n).map(|k| u8::from(k >= split)).collect())
    }

    pub fn uniform(n: usize, model: u8) -> Self {
        ObservedAssignment(vec![model & 1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> u8 {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Whether agents `k` and `l` observe the same model.
    pub fn same(&self, k: usize, l: usize) -> bool {
        self.0[k] == self.0[l]
    }
}

/// Limit point `sum_k c_k z_k` of conventional diffusion when agents observe
/// different models.
pub fn bias_limit(c: &DVector<f64>, models: &ModelPair, f: &ObservedAssignment) -> Result<DVector<f64>> {
    if c.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: c.len(),
        });
    }
    let mut w = DVector::zeros(models.dim());
    for (k, ck) in c.iter().enumerate() {
        w.axpy(*ck, models.get(f.get(k)), 1.0);
    }
    Ok(w)
}

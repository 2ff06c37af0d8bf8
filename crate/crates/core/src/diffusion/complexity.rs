use serde::{Deserialize, Serialize};

use super::Variant;

/// Per-agent, per-iteration arithmetic and communication cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    pub multiplications: usize,
    pub additions: usize,
    pub scalar_exchanges: usize,
}

/// Operation counts for an agent with neighborhood size `n_k` (self
/// included) estimating a length-`m` model.
pub fn per_iteration_cost(variant: Variant, n_k: usize, m: usize) -> Cost {
    match variant {
        Variant::Conventional => Cost {
            multiplications: (n_k + 2) * m,
            additions: (n_k + 1) * m,
            scalar_exchanges: n_k * m,
        },
        Variant::Modified => Cost {
            multiplications: (3 * n_k + 2) * m + n_k - 1,
            additions: (3 * n_k + 1) * m + n_k - 1,
            scalar_exchanges: n_k * (2 * m + 1),
        },
    }
}

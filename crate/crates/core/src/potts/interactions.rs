use crate::error::{Error, Result};
use crate::evidence::{pairwise_conflict, SimpleSupport};

/// Interactions above this value are clamped to it (two certain, disjoint
/// pieces of evidence have an infinite weight of conflict).
pub const WEIGHT_CAP: f64 = 1e12;

/// Symmetric, non-negative, zero-diagonal coupling matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    weights: Vec<f64>,
    capped: bool,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            weights: vec![0.0; n * n],
            capped: false,
        }
    }

    /// Row-major `n × n` weights.
    pub fn from_dense(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::InvalidInteractions(format!(
                "expected {} entries, got {}",
                n * n,
                weights.len()
            )));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::InvalidInteractions(format!("non-zero diagonal at {i}")));
            }
            for k in 0..n {
                let w = weights[i * n + k];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::InvalidInteractions(format!("entry ({i}, {k}) = {w}")));
                }
                if w != weights[k * n + i] {
                    return Err(Error::InvalidInteractions(format!("asymmetric at ({i}, {k})")));
                }
            }
        }
        Ok(Self {
            n,
            weights,
            capped: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.weights[i * self.n + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether an infinite weight was clamped to [`WEIGHT_CAP`].
    pub fn is_capped(&self) -> bool {
        self.capped
    }
}

/// `J_ik = -ln(1 - s_i s_k) / lambda` for disjoint focal sets, else 0.
pub fn build_interactions(evidence: &[SimpleSupport], lambda: f64) -> Result<InteractionMatrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if evidence.is_empty() {
        return Err(Error::InvalidArgument("no evidence".into()));
    }
    let n = evidence.len();
    let mut j = InteractionMatrix::zeros(n);
    for i in 0..n {
        for k in i + 1..n {
            let mut w = pairwise_conflict(&evidence[i], &evidence[k])? / lambda;
            if w > WEIGHT_CAP {
                w = WEIGHT_CAP;
                j.capped = true;
            }
            j.weights[i * n + k] = w;
            j.weights[k * n + i] = w;
        }
    }
    Ok(j)
}

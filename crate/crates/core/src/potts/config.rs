use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one mean-field annealing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    /// Number of clusters (Potts states).
    pub q: usize,
    /// Cooling factor applied after each temperature.
    pub tau: f64,
    /// Amplitude of the uniform noise added to every updated entry.
    pub epsilon: f64,
    /// Weight of the equipartition term.
    pub alpha: f64,
    /// Self-coupling subtracted from the local field.
    pub gamma: f64,
    /// Conflict scale; interactions are `-ln(1 - s_i s_k) / lambda`.
    pub lambda: f64,
    /// A temperature is finished when `(1/N) Σ|ΔV|` over one sweep is at most this.
    pub sweep_tol: f64,
    /// Annealing stops once `(1/N) Σ V²` reaches this.
    pub saturation_tol: f64,
    pub max_sweeps_per_temp: usize,
    pub max_temps: usize,
    pub seed: u64,
}

impl AnnealConfig {
    pub const DEFAULT_TAU: f64 = 0.9;
    pub const DEFAULT_EPSILON: f64 = 0.001;
    pub const DEFAULT_GAMMA: f64 = 0.5;
    pub const DEFAULT_SWEEP_TOL: f64 = 0.01;
    pub const DEFAULT_SATURATION_TOL: f64 = 0.99;
    pub const DEFAULT_MAX_SWEEPS_PER_TEMP: usize = 1000;
    pub const DEFAULT_MAX_TEMPS: usize = 500;

    /// Benchmark defaults for `q` clusters.
    pub fn for_clusters(q: usize) -> Self {
        Self {
            q,
            tau: Self::DEFAULT_TAU,
            epsilon: Self::DEFAULT_EPSILON,
            alpha: Self::default_alpha(q),
            gamma: Self::DEFAULT_GAMMA,
            lambda: 1.0,
            sweep_tol: Self::DEFAULT_SWEEP_TOL,
            saturation_tol: Self::DEFAULT_SATURATION_TOL,
            max_sweeps_per_temp: Self::DEFAULT_MAX_SWEEPS_PER_TEMP,
            max_temps: Self::DEFAULT_MAX_TEMPS,
            seed: 0,
        }
    }

    /// Equipartition weight used on the `2^K - 1` benchmark with `K = q`.
    /// The table is not monotone in `q`; it is reproduced as published.
    pub fn default_alpha(q: usize) -> f64 {
        match q {
            8 => 1e-6,
            10 => 3e-7,
            11 => 3e-8,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.q < 2 {
            return fail(format!("q must be at least 2, got {}", self.q));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return fail(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.sweep_tol > 0.0) {
            return fail(format!("sweep_tol must be positive, got {}", self.sweep_tol));
        }
        if !(self.saturation_tol > 0.0 && self.saturation_tol <= 1.0) {
            return fail(format!("saturation_tol must lie in (0, 1], got {}", self.saturation_tol));
        }
        if self.max_sweeps_per_temp == 0 || self.max_temps == 0 {
            return fail("sweep and temperature caps must be positive".into());
        }
        Ok(())
    }
}

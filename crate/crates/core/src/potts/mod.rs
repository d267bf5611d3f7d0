//! Mean-field annealing of an antiferromagnetic Potts system.
//!
//! Each piece of evidence is a `q`-state spin; two pieces repel with the
//! weight of conflict between them. The annealer starts at the critical
//! temperature of the coupling matrix, iterates the mean-field equations to a
//! fixed point, cools geometrically, and stops once the thermal averages have
//! frozen to (nearly) hard assignments.

mod config;
mod interactions;
mod mean_field;
pub mod spectrum;

use serde::Serialize;

pub use config::AnnealConfig;
pub use interactions::{build_interactions, InteractionMatrix, WEIGHT_CAP};
pub use mean_field::{energy, partition_energy, softmax_into, MeanFieldState};
pub use spectrum::critical_temperature;

use crate::error::Result;
use crate::evidence::SimpleSupport;
use crate::partition::Partition;
use crate::rng::{stream, Purpose};

/// Outcome of one annealing run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterAssignment {
    pub partition: Partition,
    /// `(1/N) Σ V²` of the final mean-field state.
    pub saturation: f64,
    pub initial_temperature: f64,
    /// Temperature at which the last sweeps were run.
    pub final_temperature: f64,
    /// Energy of the one-hot partition.
    pub energy: f64,
    pub sweeps: usize,
    pub temperatures: usize,
    /// False when the temperature cap was hit before saturation.
    pub frozen: bool,
    /// True when some interaction was clamped to [`WEIGHT_CAP`].
    pub interactions_capped: bool,
}

/// Clusters `evidence` into `cfg.q` groups. Uses anneal stream 0 of `cfg.seed`.
pub fn anneal(evidence: &[SimpleSupport], cfg: &AnnealConfig) -> Result<ClusterAssignment> {
    cfg.validate()?;
    let j = build_interactions(evidence, cfg.lambda)?;
    anneal_interactions(&j, cfg, 0)
}

/// Anneals a prepared coupling matrix with anneal stream `run` of `cfg.seed`.
pub fn anneal_interactions(j: &InteractionMatrix, cfg: &AnnealConfig, run: u32) -> Result<ClusterAssignment> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, Purpose::Anneal, run);
    let initial_temperature = critical_temperature(j, cfg.alpha, cfg.gamma, cfg.q)?;
    let mut state = MeanFieldState::initial(j.n(), cfg.q, cfg.epsilon, initial_temperature, &mut rng);
    let mut final_temperature = initial_temperature;
    let mut frozen = false;
    while state.temps_done < cfg.max_temps {
        for _ in 0..cfg.max_sweeps_per_temp {
            if state.sweep(j, cfg, &mut rng)? <= cfg.sweep_tol {
                break;
            }
        }
        final_temperature = state.temperature;
        state.temperature *= cfg.tau;
        state.temps_done += 1;
        if state.saturation() >= cfg.saturation_tol {
            frozen = true;
            break;
        }
    }
    let partition = state.argmax_partition();
    Ok(ClusterAssignment {
        energy: partition_energy(&partition, j, cfg.alpha, cfg.gamma),
        partition,
        saturation: state.saturation(),
        initial_temperature,
        final_temperature,
        sweeps: state.sweeps_done,
        temperatures: state.temps_done,
        frozen,
        interactions_capped: j.is_capped(),
    })
}

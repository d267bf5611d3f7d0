//! Anneal settings from a flat TOML file, overridden by command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use dsclust::AnnealConfig;
use serde::Deserialize;

/// Every anneal setting, each optional. Used both for the TOML document and
/// for the command-line flags.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealOverrides {
    /// Cooling factor per temperature step.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Noise amplitude for initialization and sweeps.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Equipartition weight (default depends on the cluster count).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Self-coupling.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Conflict scale.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Fixed-point threshold on (1/N) Σ|ΔV|.
    #[arg(long)]
    pub sweep_tol: Option<f64>,
    /// Saturation at which annealing stops.
    #[arg(long)]
    pub saturation_tol: Option<f64>,
    #[arg(long)]
    pub max_sweeps_per_temp: Option<usize>,
    #[arg(long)]
    pub max_temps: Option<usize>,
    /// Seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cluster count; only read from config files.
    #[arg(skip)]
    pub q: Option<usize>,
}

impl AnnealOverrides {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: AnnealOverrides) -> AnnealOverrides {
        AnnealOverrides {
            tau: self.tau.or(base.tau),
            epsilon: self.epsilon.or(base.epsilon),
            alpha: self.alpha.or(base.alpha),
            gamma: self.gamma.or(base.gamma),
            lambda: self.lambda.or(base.lambda),
            sweep_tol: self.sweep_tol.or(base.sweep_tol),
            saturation_tol: self.saturation_tol.or(base.saturation_tol),
            max_sweeps_per_temp: self.max_sweeps_per_temp.or(base.max_sweeps_per_temp),
            max_temps: self.max_temps.or(base.max_temps),
            seed: self.seed.or(base.seed),
            q: self.q.or(base.q),
        }
    }

    /// Defaults for `q` clusters with every set field applied.
    pub fn resolve(&self, q: usize) -> AnnealConfig {
        let d = AnnealConfig::for_clusters(q);
        AnnealConfig {
            q,
            tau: self.tau.unwrap_or(d.tau),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            alpha: self.alpha.unwrap_or(d.alpha),
            gamma: self.gamma.unwrap_or(d.gamma),
            lambda: self.lambda.unwrap_or(d.lambda),
            sweep_tol: self.sweep_tol.unwrap_or(d.sweep_tol),
            saturation_tol: self.saturation_tol.unwrap_or(d.saturation_tol),
            max_sweeps_per_temp: self.max_sweeps_per_temp.unwrap_or(d.max_sweeps_per_temp),
            max_temps: self.max_temps.unwrap_or(d.max_temps),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

/// Merges an optional config file under the flags.
pub fn merged(flags: AnnealOverrides, file: Option<&Path>) -> Result<AnnealOverrides> {
    let base = match file {
        Some(path) => AnnealOverrides::load(path)?,
        None => AnnealOverrides::default(),
    };
    Ok(flags.over(base))
}

/// Cluster count from the flag, else from the config file.
pub fn cluster_count(flag: Option<usize>, settings: &AnnealOverrides) -> Result<usize> {
    match flag.or(settings.q) {
        Some(q) => Ok(q),
        None => bail!("the number of clusters is required (--q or `q` in the config file)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_file() {
        let file: AnnealOverrides = toml::from_str("tau = 0.8\nseed = 4\nq = 3\n").unwrap();
        let flags = AnnealOverrides {
            seed: Some(9),
            ..Default::default()
        };
        let merged = flags.over(file);
        let cfg = merged.resolve(cluster_count(None, &merged).unwrap());
        assert_eq!(cfg.q, 3);
        assert_eq!(cfg.tau, 0.8);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.gamma, AnnealConfig::DEFAULT_GAMMA);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<AnnealOverrides>("temperature = 1.0\n").is_err());
    }

    #[test]
    fn alpha_default_follows_the_cluster_count() {
        let none = AnnealOverrides::default();
        assert_eq!(none.resolve(8).alpha, 1e-6);
        assert_eq!(none.resolve(9).alpha, 0.0);
    }
}

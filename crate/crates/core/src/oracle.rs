//! Exhaustive minimization over every partition of a small instance.
//!
//! Assignments are scanned in lexicographic order with the first piece of
//! evidence pinned to cluster 1, which removes part of the label symmetry
//! without losing any minimum. No pruning is attempted.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{linearized_conflict, metaconflict, SimpleSupport};
use crate::partition::Partition;

/// Largest `q^N` the oracle agrees to scan.
pub const SCAN_LIMIT: f64 = 1e7;

/// Tolerance under which two metaconflict values count as equal.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Metaconflict of the partition.
    Exact,
    /// Sum of within-cluster linearized conflicts, `λ = 1`.
    Linearized,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub objective: Objective,
    /// Argmin of the chosen objective.
    pub best_partition: Partition,
    pub min_metaconflict: f64,
    pub metaconflict_argmin: Partition,
    pub min_linearized: f64,
    pub linearized_argmin: Partition,
    pub partitions_scanned: u64,
}

/// Lexicographic odometer over assignments with the first entry fixed at 0.
struct Assignments {
    labels: Vec<usize>,
    q: usize,
    started: bool,
}

impl Assignments {
    fn new(n: usize, q: usize) -> Self {
        Self {
            labels: vec![0; n],
            q,
            started: false,
        }
    }

    fn advance(&mut self) -> Option<&[usize]> {
        if !self.started {
            self.started = true;
            return Some(&self.labels);
        }
        for digit in (1..self.labels.len()).rev() {
            self.labels[digit] += 1;
            if self.labels[digit] < self.q {
                return Some(&self.labels);
            }
            self.labels[digit] = 0;
        }
        None
    }
}

pub fn check_size(n: usize, q: usize) -> Result<()> {
    let size = (q as f64).powi(n as i32);
    if size > SCAN_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: SCAN_LIMIT,
        });
    }
    Ok(())
}

/// Scans every partition of `evidence` into `q` clusters and minimizes both
/// objectives. `objective` selects which argmin is reported as
/// `best_partition`; ties keep the first partition in scan order.
pub fn enumerate_min(evidence: &[SimpleSupport], q: usize, objective: Objective) -> Result<OracleResult> {
    let n = evidence.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no evidence".into()));
    }
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    check_size(n, q)?;
    let mut best_exact = (f64::INFINITY, Vec::new());
    let mut best_linear = (f64::INFINITY, Vec::new());
    let mut scanned = 0u64;
    let mut odometer = Assignments::new(n, q);
    while let Some(labels) = odometer.advance() {
        scanned += 1;
        let partition = Partition::new(labels.to_vec(), q)?;
        let exact = metaconflict(evidence, &partition)?;
        let linear = within_linearized(evidence, &partition)?;
        if exact < best_exact.0 {
            best_exact = (exact, labels.to_vec());
        }
        if linear < best_linear.0 {
            best_linear = (linear, labels.to_vec());
        }
    }
    let metaconflict_argmin = Partition::new(best_exact.1, q)?;
    let linearized_argmin = Partition::new(best_linear.1, q)?;
    Ok(OracleResult {
        objective,
        best_partition: match objective {
            Objective::Exact => metaconflict_argmin.clone(),
            Objective::Linearized => linearized_argmin.clone(),
        },
        min_metaconflict: best_exact.0,
        metaconflict_argmin,
        min_linearized: best_linear.0,
        linearized_argmin,
        partitions_scanned: scanned,
    })
}

/// Σ over clusters of the linearized conflict (`λ = 1`).
pub fn within_linearized(evidence: &[SimpleSupport], partition: &Partition) -> Result<f64> {
    let mut total = 0.0;
    for members in partition.clusters() {
        let cluster: Vec<SimpleSupport> = members.iter().map(|&i| evidence[i]).collect();
        total += linearized_conflict(&cluster, 1.0)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearizationGap {
    /// Metaconflict of the linearized argmin minus the true minimum.
    pub gap: f64,
    /// Whether both argmins reach the same metaconflict.
    pub argmin_agree: bool,
}

pub fn linearization_gap(evidence: &[SimpleSupport], q: usize) -> Result<LinearizationGap> {
    let result = enumerate_min(evidence, q, Objective::Exact)?;
    let at_linear = metaconflict(evidence, &result.linearized_argmin)?;
    let gap = at_linear - result.min_metaconflict;
    Ok(LinearizationGap {
        gap,
        argmin_agree: gap.abs() <= AGREEMENT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{cluster_conflict, FocalSet, Frame};
    use crate::rng::{open_unit, stream, Purpose};
    use proptest::prelude::*;
    use rand::Rng;

    fn singletons(supports: &[(usize, f64)], k: usize) -> Vec<SimpleSupport> {
        let frame = Frame::new(k).unwrap();
        supports
            .iter()
            .map(|&(e, s)| SimpleSupport::from_elements(frame, &[e], s).unwrap())
            .collect()
    }

    fn random_evidence(n: usize, k: usize, seed: u64) -> Vec<SimpleSupport> {
        let frame = Frame::new(k).unwrap();
        let mut rng = stream(seed, Purpose::RandomInstance, 1);
        (0..n)
            .map(|_| {
                let bits = rng.gen_range(1..(1u64 << k));
                SimpleSupport::new(frame, FocalSet::from_bits(bits), 0.9 * open_unit(&mut rng)).unwrap()
            })
            .collect()
    }

    /// Minimum over all `q^n` assignments, without the pinned first label.
    fn full_scan_min(evidence: &[SimpleSupport], q: usize) -> f64 {
        let n = evidence.len();
        let mut best = f64::INFINITY;
        for code in 0..q.pow(n as u32) {
            let labels: Vec<usize> = (0..n).map(|i| code / q.pow(i as u32) % q).collect();
            let p = Partition::new(labels, q).unwrap();
            best = best.min(metaconflict(evidence, &p).unwrap());
        }
        best
    }

    /// Conflict of a cluster as the product mass of all conjunctive choices
    /// whose intersection is empty.
    fn conjunctive_conflict(cluster: &[SimpleSupport]) -> f64 {
        let full = cluster.first().map(|s| s.frame().mask()).unwrap_or(0);
        let mut empty = 0.0;
        for choice in 0..1u32 << cluster.len() {
            let mut set = full;
            let mut weight = 1.0;
            for (k, piece) in cluster.iter().enumerate() {
                if choice >> k & 1 == 1 {
                    set &= piece.focal().bits();
                    weight *= piece.support();
                } else {
                    weight *= 1.0 - piece.support();
                }
            }
            if set == 0 {
                empty += weight;
            }
        }
        empty
    }

    #[test]
    fn three_disjoint_pieces_in_two_clusters() {
        let ev = singletons(&[(1, 0.5), (2, 0.5), (3, 0.5)], 3);
        let r = enumerate_min(&ev, 2, Objective::Exact).unwrap();
        assert!((r.min_metaconflict - 0.25).abs() < 1e-12);
        assert_eq!(r.partitions_scanned, 4);
        assert_eq!(r.best_partition.labels(), &[0, 0, 1]);
    }

    #[test]
    fn single_piece() {
        let ev = singletons(&[(1, 0.7)], 2);
        for q in 1..4 {
            let r = enumerate_min(&ev, q, Objective::Linearized).unwrap();
            assert_eq!(r.min_metaconflict, 0.0);
            assert_eq!(r.best_partition.labels(), &[0]);
            assert_eq!(r.partitions_scanned, 1);
        }
    }

    #[test]
    fn objective_selects_the_reported_argmin() {
        let ev = random_evidence(6, 3, 3);
        let a = enumerate_min(&ev, 2, Objective::Exact).unwrap();
        let b = enumerate_min(&ev, 2, Objective::Linearized).unwrap();
        assert_eq!(a.best_partition, a.metaconflict_argmin);
        assert_eq!(b.best_partition, b.linearized_argmin);
        assert_eq!(a.min_metaconflict, b.min_metaconflict);
    }

    #[test]
    fn guard_rejects_large_scans() {
        let ev = random_evidence(16, 3, 1);
        assert!(matches!(
            enumerate_min(&ev, 3, Objective::Exact),
            Err(Error::TooLarge { .. })
        ));
        assert!(check_size(14, 3).is_ok());
    }

    #[test]
    fn two_pieces_have_no_linearization_gap() {
        for seed in 0..20 {
            let ev = random_evidence(2, 3, seed);
            for q in [1, 2] {
                let g = linearization_gap(&ev, q).unwrap();
                assert_eq!(g.gap, 0.0);
                assert!(g.argmin_agree);
            }
        }
    }

    #[test]
    fn conflict_free_instances_have_no_gap() {
        let ev = singletons(&[(1, 0.3), (2, 0.6), (1, 0.9), (3, 0.2), (2, 0.5)], 3);
        let g = linearization_gap(&ev, 3).unwrap();
        assert_eq!(g.gap, 0.0);
        assert!(g.argmin_agree);
    }

    #[test]
    fn pinning_the_first_label_loses_nothing() {
        for seed in 0..30 {
            let n = 1 + (seed as usize % 5);
            let ev = random_evidence(n, 3, seed);
            for q in [2, 3] {
                let pinned = enumerate_min(&ev, q, Objective::Exact).unwrap().min_metaconflict;
                assert_eq!(pinned, full_scan_min(&ev, q), "seed {seed} q {q}");
            }
        }
    }

    #[test]
    fn an_all_conflicting_newcomer_never_lowers_the_minimum() {
        let k = 6;
        let frame = Frame::new(k).unwrap();
        for seed in 0..20 {
            let mut rng = stream(seed, Purpose::RandomInstance, 2);
            // Pieces live on elements 1..=5; the newcomer sits on element 6.
            let mut ev: Vec<SimpleSupport> = (0..6)
                .map(|_| {
                    let bits = rng.gen_range(1..(1u64 << (k - 1)));
                    SimpleSupport::new(frame, FocalSet::from_bits(bits), 0.9 * open_unit(&mut rng)).unwrap()
                })
                .collect();
            let before = enumerate_min(&ev, 2, Objective::Exact).unwrap().min_metaconflict;
            ev.push(SimpleSupport::from_elements(frame, &[6], 0.9 * open_unit(&mut rng)).unwrap());
            let after = enumerate_min(&ev, 2, Objective::Exact).unwrap().min_metaconflict;
            assert!(after >= before - 1e-12, "seed {seed}: {after} < {before}");
        }
    }

    #[test]
    fn combine_chain_matches_an_independent_accumulator() {
        for seed in 0..200 {
            let n = 1 + (seed as usize % 4);
            let ev = random_evidence(n, 4, seed);
            let direct = cluster_conflict(&ev).unwrap();
            assert!((direct - conjunctive_conflict(&ev)).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn singleton_instances_are_overestimated_at_every_partition() {
        let k = 4;
        let frame = Frame::new(k).unwrap();
        for seed in 0..10 {
            let mut rng = stream(seed, Purpose::RandomInstance, 3);
            let ev: Vec<SimpleSupport> = (0..7)
                .map(|_| {
                    let e = rng.gen_range(1..=k);
                    SimpleSupport::from_elements(frame, &[e], 0.9 * open_unit(&mut rng)).unwrap()
                })
                .collect();
            let mut odometer = Assignments::new(ev.len(), 3);
            while let Some(labels) = odometer.advance() {
                let p = Partition::new(labels.to_vec(), 3).unwrap();
                let linear = within_linearized(&ev, &p).unwrap();
                let exact_weight: f64 = p
                    .clusters()
                    .iter()
                    .map(|members| {
                        let cluster: Vec<SimpleSupport> = members.iter().map(|&i| ev[i]).collect();
                        -(-cluster_conflict(&cluster).unwrap()).ln_1p()
                    })
                    .sum();
                assert!(linear >= exact_weight - 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn within_minimum_is_between_maximum(seed in any::<u64>(), n in 2usize..=8) {
            let ev = random_evidence(n, 3, seed);
            let within = enumerate_min(&ev, 2, Objective::Linearized).unwrap();
            let mut best_between = (f64::NEG_INFINITY, Vec::new());
            let mut odometer = Assignments::new(n, 2);
            while let Some(labels) = odometer.advance() {
                let mut between = 0.0;
                for i in 0..n {
                    for k in i + 1..n {
                        if labels[i] != labels[k] {
                            between += crate::evidence::pairwise_conflict(&ev[i], &ev[k]).unwrap();
                        }
                    }
                }
                if between > best_between.0 + 1e-12 {
                    best_between = (between, labels.to_vec());
                }
            }
            let argmax = Partition::new(best_between.1, 2).unwrap();
            prop_assert!((within_linearized(&ev, &argmax).unwrap() - within.min_linearized).abs() <= 1e-9);
        }
    }
}

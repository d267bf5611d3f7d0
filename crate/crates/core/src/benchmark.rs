//! The `2^K - 1` benchmark: every non-empty subset of a `K`-element frame is
//! one piece of evidence with a uniform random support, to be clustered into
//! `K` groups. Grouping each piece under its lowest element has zero
//! metaconflict, so the optimum is always known.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{metaconflict, FocalSet, Frame, SimpleSupport};
use crate::partition::Partition;
use crate::potts::{anneal_interactions, build_interactions, AnnealConfig};
use crate::rng::{open_unit, stream, Purpose};

/// Largest frame the generator accepts.
pub const MAX_FRAME: usize = 20;

/// A run counts as a global optimum when its metaconflict is at most this.
pub const GLOBAL_OPTIMUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkInstance {
    pub frame: Frame,
    pub evidence: Vec<SimpleSupport>,
    pub seed: u64,
    /// Instance stream index within `seed`.
    pub index: u32,
}

/// All non-empty subsets of `1..=k`, ordered by size and then
/// lexicographically by their sorted elements.
pub fn subsets_by_size(k: usize) -> Vec<FocalSet> {
    let mut sets: Vec<(usize, Vec<usize>, u64)> = (1..1u64 << k)
        .map(|bits| {
            let set = FocalSet::from_bits(bits);
            (set.len(), set.elements(), bits)
        })
        .collect();
    sets.sort();
    sets.into_iter().map(|(_, _, bits)| FocalSet::from_bits(bits)).collect()
}

/// Instance with stream index 0.
pub fn generate_instance(k: usize, seed: u64) -> Result<BenchmarkInstance> {
    generate_instance_at(k, seed, 0)
}

/// Supports are drawn on the open interval (0, 1) from instance stream `index`.
pub fn generate_instance_at(k: usize, seed: u64, index: u32) -> Result<BenchmarkInstance> {
    if !(2..=MAX_FRAME).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must lie in 2..={MAX_FRAME}, got {k}")));
    }
    let frame = Frame::new(k)?;
    let mut rng = stream(seed, Purpose::Instance, index);
    let evidence = subsets_by_size(k)
        .into_iter()
        .map(|set| SimpleSupport::new(frame, set, open_unit(&mut rng)))
        .collect::<Result<_>>()?;
    Ok(BenchmarkInstance {
        frame,
        evidence,
        seed,
        index,
    })
}

/// Puts every piece of evidence in the cluster of its lowest element.
pub fn zero_conflict_witness(instance: &BenchmarkInstance) -> Partition {
    let labels = instance
        .evidence
        .iter()
        .map(|piece| piece.focal().bits().trailing_zeros() as usize)
        .collect();
    Partition::new(labels, instance.frame.size()).expect("lowest element lies in the frame")
}

/// Average conflict per cluster when all `q` clusters share the same
/// conflict: `1 - (1 - Mcf)^(1/q)`.
pub fn per_cluster_conflict(metaconflict: f64, q: usize) -> f64 {
    1.0 - (1.0 - metaconflict).powf(1.0 / q as f64)
}

/// Per-cluster conflict divided by the mean cluster size `n / q`.
pub fn per_evidence_conflict(metaconflict: f64, n: usize, q: usize) -> f64 {
    per_cluster_conflict(metaconflict, q) / (n as f64 / q as f64)
}

pub fn n2k2(n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    n * n * k * k
}

/// `N² (log₂ N)²`.
pub fn n2log2n(n: usize) -> f64 {
    let n = n as f64;
    n * n * n.log2().powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub k: usize,
    pub n: usize,
    pub run: u32,
    pub metaconflict: f64,
    pub per_cluster: f64,
    pub per_evidence: f64,
    /// Seconds spent annealing; absent when timing is off.
    pub wall_time_s: Option<f64>,
    pub time_per_n2k2: Option<f64>,
    pub time_per_n2log2n: Option<f64>,
    pub sweeps_total: usize,
    pub temperatures: usize,
    pub frozen: bool,
    pub hit_global: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub k: usize,
    pub n: usize,
    pub runs: usize,
    pub median_mcf: f64,
    pub mean_mcf: f64,
    pub median_per_cluster: f64,
    pub mean_per_cluster: f64,
    pub median_per_evidence: f64,
    pub mean_per_evidence: f64,
    pub global_opt_pct: f64,
    pub mean_time_s: Option<f64>,
    pub time_per_n2k2: Option<f64>,
    pub time_per_n2log2n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub runs: Vec<RunMetrics>,
    pub summary: Summary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub runs: u32,
    /// Worker threads; 1 runs everything on the calling thread.
    pub jobs: usize,
    /// Record anneal wall-clock times.
    pub timing: bool,
}

impl SuiteOptions {
    pub fn sequential(runs: u32) -> Self {
        Self {
            runs,
            jobs: 1,
            timing: true,
        }
    }
}

/// One benchmark run: instance stream `run` and anneal stream `run` of
/// `cfg.seed`. Only the anneal itself is timed.
pub fn run_once(k: usize, run: u32, cfg: &AnnealConfig, timing: bool) -> Result<RunMetrics> {
    let instance = generate_instance_at(k, cfg.seed, run)?;
    let n = instance.evidence.len();
    let j = build_interactions(&instance.evidence, cfg.lambda)?;
    let start = Instant::now();
    let outcome = anneal_interactions(&j, cfg, run)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mcf = metaconflict(&instance.evidence, &outcome.partition)?;
    let wall_time_s = timing.then_some(elapsed);
    Ok(RunMetrics {
        k,
        n,
        run,
        metaconflict: mcf,
        per_cluster: per_cluster_conflict(mcf, cfg.q),
        per_evidence: per_evidence_conflict(mcf, n, cfg.q),
        wall_time_s,
        time_per_n2k2: wall_time_s.map(|t| t / n2k2(n, k)),
        time_per_n2log2n: wall_time_s.map(|t| t / n2log2n(n)),
        sweeps_total: outcome.sweeps,
        temperatures: outcome.temperatures,
        frozen: outcome.frozen,
        hit_global: mcf <= GLOBAL_OPTIMUM_TOLERANCE,
    })
}

/// Runs `options.runs` independent instances of size `k` and summarizes them.
pub fn run_suite(k: usize, cfg: &AnnealConfig, options: SuiteOptions) -> Result<SuiteResult> {
    if options.runs == 0 {
        return Err(Error::InvalidArgument("at least one run is required".into()));
    }
    cfg.validate()?;
    let runs: Vec<RunMetrics> = if options.jobs <= 1 {
        (0..options.runs)
            .map(|run| run_once(k, run, cfg, options.timing))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| {
            (0..options.runs)
                .into_par_iter()
                .map(|run| run_once(k, run, cfg, options.timing))
                .collect::<Result<_>>()
        })?
    };
    let summary = summarize(k, &runs);
    Ok(SuiteResult { runs, summary })
}

/// Median and mean of every metric. `runs` must be non-empty.
pub fn summarize(k: usize, runs: &[RunMetrics]) -> Summary {
    let pick = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    let mcf = pick(|r| r.metaconflict);
    let per_cluster = pick(|r| r.per_cluster);
    let per_evidence = pick(|r| r.per_evidence);
    let times: Option<Vec<f64>> = runs.iter().map(|r| r.wall_time_s).collect();
    let n = runs[0].n;
    let mean_time_s = times.map(|t| mean(&t));
    Summary {
        k,
        n,
        runs: runs.len(),
        median_mcf: median(&mcf),
        mean_mcf: mean(&mcf),
        median_per_cluster: median(&per_cluster),
        mean_per_cluster: mean(&per_cluster),
        median_per_evidence: median(&per_evidence),
        mean_per_evidence: mean(&per_evidence),
        global_opt_pct: 100.0 * runs.iter().filter(|r| r.hit_global).count() as f64 / runs.len() as f64,
        mean_time_s,
        time_per_n2k2: mean_time_s.map(|t| t / n2k2(n, k)),
        time_per_n2log2n: mean_time_s.map(|t| t / n2log2n(n)),
    }
}

/// Middle value, or the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unordered pairs of distinct non-empty subsets of a `q`-element frame.
pub fn pair_count(q: usize) -> f64 {
    let m = 2f64.powi(q as i32) - 1.0;
    0.5 * (m * m - m)
}

/// Unordered pairs of disjoint non-empty subsets: choose the first set's
/// size `j`, then a non-empty subset of the remaining `q - j` elements.
pub fn conflicting_pair_count(q: usize) -> f64 {
    let mut ordered = 0.0;
    for j in 1..q {
        let inner: f64 = (1..=q - j).map(|k| binomial(q - j, k)).sum();
        ordered += binomial(q, j) * inner;
    }
    0.5 * ordered
}

/// Probability that two distinct random non-empty subsets are disjoint, and
/// the expected conflict `0.25 ·` that probability under uniform supports.
pub fn expected_random_conflict(q: usize) -> Result<(f64, f64)> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("q must be at least 2, got {q}")));
    }
    let p = conflicting_pair_count(q) / pair_count(q);
    Ok((p, 0.25 * p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub k: usize,
    pub n: usize,
    pub mean_time_s: f64,
    pub time_per_n2k2: f64,
    pub time_per_n2log2n: f64,
}

/// Sequential timing over `ks`; `config_for(k)` supplies each size's config.
pub fn timing_profile(
    ks: impl IntoIterator<Item = usize>,
    runs: u32,
    config_for: impl Fn(usize) -> AnnealConfig,
) -> Result<Vec<TimingRow>> {
    ks.into_iter()
        .map(|k| {
            let suite = run_suite(k, &config_for(k), SuiteOptions::sequential(runs))?;
            let s = suite.summary;
            Ok(TimingRow {
                k,
                n: s.n,
                mean_time_s: s.mean_time_s.expect("timing enabled"),
                time_per_n2k2: s.time_per_n2k2.expect("timing enabled"),
                time_per_n2log2n: s.time_per_n2log2n.expect("timing enabled"),
            })
        })
        .collect()
}

pub const CSV_HEADER: [&str; 12] = [
    "K",
    "N",
    "median_mcf",
    "mean_mcf",
    "median_per_cluster",
    "mean_per_cluster",
    "median_per_evidence",
    "mean_per_evidence",
    "global_opt_pct",
    "mean_time_s",
    "time_per_N2K2",
    "time_per_N2log2N",
];

/// One row per summary; time columns are left empty when timing was off.
pub fn write_summary_csv<W: Write>(writer: W, summaries: &[Summary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    let float = |x: f64| serde_json::to_string(&x).expect("finite float");
    let optional = |x: Option<f64>| x.map(float).unwrap_or_default();
    for s in summaries {
        out.write_record([
            s.k.to_string(),
            s.n.to_string(),
            float(s.median_mcf),
            float(s.mean_mcf),
            float(s.median_per_cluster),
            float(s.mean_per_cluster),
            float(s.median_per_evidence),
            float(s.mean_per_evidence),
            float(s.global_opt_pct),
            optional(s.mean_time_s),
            optional(s.time_per_n2k2),
            optional(s.time_per_n2log2n),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One JSON object per run.
pub fn write_run_log<W: Write>(mut writer: W, runs: &[RunMetrics]) -> Result<()> {
    for run in runs {
        let line = serde_json::to_string(run).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_min, Objective};
    use rand::Rng;

    /// Ordered pairs of distinct non-empty subsets that are disjoint, by
    /// direct enumeration.
    fn disjoint_fraction_by_enumeration(q: usize) -> f64 {
        let m = 1u64 << q;
        let mut disjoint = 0u64;
        let mut total = 0u64;
        for a in 1..m {
            for b in 1..m {
                if a != b {
                    total += 1;
                    if a & b == 0 {
                        disjoint += 1;
                    }
                }
            }
        }
        disjoint as f64 / total as f64
    }

    #[test]
    fn three_element_instance_layout() {
        let inst = generate_instance(3, 1).unwrap();
        let sets: Vec<Vec<usize>> = inst.evidence.iter().map(|s| s.focal().elements()).collect();
        assert_eq!(
            sets,
            vec![vec![1], vec![2], vec![3], vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 2, 3]]
        );
        assert!(inst.evidence.iter().all(|s| s.support() > 0.0 && s.support() < 1.0));
    }

    #[test]
    fn every_subset_appears_once() {
        for k in 2..=8 {
            let inst = generate_instance(k, 0).unwrap();
            let mut bits: Vec<u64> = inst.evidence.iter().map(|s| s.focal().bits()).collect();
            assert_eq!(bits.len(), (1 << k) - 1);
            bits.sort();
            bits.dedup();
            assert_eq!(bits.len(), (1 << k) - 1);
        }
        assert!(generate_instance(1, 0).is_err());
        assert!(generate_instance(21, 0).is_err());
    }

    #[test]
    fn instances_are_reproducible_and_seed_dependent() {
        assert_eq!(generate_instance(4, 5).unwrap(), generate_instance(4, 5).unwrap());
        assert_ne!(generate_instance(4, 5).unwrap(), generate_instance(4, 6).unwrap());
        assert_ne!(
            generate_instance_at(4, 5, 0).unwrap().evidence,
            generate_instance_at(4, 5, 1).unwrap().evidence
        );
    }

    #[test]
    fn witness_is_conflict_free() {
        for k in 2..=9 {
            let inst = generate_instance(k, k as u64).unwrap();
            let w = zero_conflict_witness(&inst);
            assert_eq!(metaconflict(&inst.evidence, &w).unwrap(), 0.0);
        }
    }

    #[test]
    fn oracle_minimum_is_zero_on_three_elements() {
        for seed in 0..5 {
            let inst = generate_instance(3, seed).unwrap();
            let r = enumerate_min(&inst.evidence, 3, Objective::Exact).unwrap();
            assert_eq!(r.min_metaconflict, 0.0);
        }
    }

    #[test]
    fn conflicting_fraction_matches_enumeration() {
        for q in 2..=6 {
            let (p, e) = expected_random_conflict(q).unwrap();
            assert!((p - disjoint_fraction_by_enumeration(q)).abs() < 1e-15, "q={q}");
            assert_eq!(e, 0.25 * p);
        }
        assert!((expected_random_conflict(2).unwrap().0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conflicting_pair_count_closed_form() {
        for q in 2..=11 {
            let closed = 0.5 * (3f64.powi(q as i32) - 2f64.powi(q as i32 + 1) + 1.0);
            assert_eq!(conflicting_pair_count(q), closed);
        }
    }

    #[test]
    fn sampled_disjoint_rate_agrees() {
        let q = 5;
        let (p, _) = expected_random_conflict(q).unwrap();
        let mut rng = stream(17, Purpose::RandomInstance, 0);
        let draws = 1_000_000;
        let mut hits = 0u64;
        let mut taken = 0u64;
        while taken < draws {
            let a = rng.gen_range(1..1u64 << q);
            let b = rng.gen_range(1..1u64 << q);
            if a == b {
                continue;
            }
            taken += 1;
            if a & b == 0 {
                hits += 1;
            }
        }
        let rate = hits as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((rate - p).abs() <= 3.0 * se, "{rate} vs {p}");
    }

    #[test]
    fn per_cluster_and_per_evidence_algebra() {
        assert_eq!(per_cluster_conflict(0.0, 5), 0.0);
        assert!((per_cluster_conflict(0.75, 2) - 0.5).abs() < 1e-15);
        assert!((per_evidence_conflict(0.75, 10, 2) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn a_single_run_summarizes_to_itself() {
        let cfg = AnnealConfig {
            seed: 2,
            ..AnnealConfig::for_clusters(3)
        };
        let suite = run_suite(3, &cfg, SuiteOptions::sequential(1)).unwrap();
        let (r, s) = (&suite.runs[0], &suite.summary);
        assert_eq!(s.median_mcf, r.metaconflict);
        assert_eq!(s.mean_mcf, r.metaconflict);
        assert_eq!(s.median_per_evidence, r.per_evidence);
        assert_eq!(s.mean_time_s, r.wall_time_s);
        assert_eq!(s.global_opt_pct, if r.hit_global { 100.0 } else { 0.0 });
        assert_eq!(s.n, 7);
    }

    #[test]
    fn parallel_runs_match_sequential_runs() {
        let cfg = AnnealConfig {
            seed: 3,
            ..AnnealConfig::for_clusters(4)
        };
        let opts = SuiteOptions {
            runs: 4,
            jobs: 1,
            timing: false,
        };
        let a = run_suite(4, &cfg, opts).unwrap();
        let b = run_suite(4, &cfg, SuiteOptions { jobs: 3, ..opts }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_layout() {
        let cfg = AnnealConfig {
            seed: 1,
            ..AnnealConfig::for_clusters(3)
        };
        let opts = SuiteOptions {
            runs: 2,
            jobs: 1,
            timing: false,
        };
        let s = run_suite(3, &cfg, opts).unwrap().summary;
        let mut out = Vec::new();
        write_summary_csv(&mut out, &[s]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row = lines.next().unwrap();
        assert!(row.starts_with("3,7,"));
        assert!(row.ends_with(",,,"));
        assert!(lines.next().is_none());
    }
}

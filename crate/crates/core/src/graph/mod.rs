//! The bond-graph dual of the antiferromagnetic Potts system.
//!
//! Every coupled pair of sites carries a bond probability
//! `p = 1 - exp(-β J)`. In the joint spin/bond model a bond between unequal
//! spins is vacant with probability `p` and occupied otherwise, and a bond
//! between equal spins is always occupied. Bond-clusters are the connected
//! components of occupied bonds.
//!
//! The distribution identities of the joint model are checked here by brute
//! force on tiny systems.

mod union_find;

use serde::Serialize;

pub use union_find::UnionFind;

use crate::error::{Error, Result};
use crate::potts::InteractionMatrix;
use crate::rng::{open_unit, stream, Purpose};

/// Limit on the number of joint configurations an enumeration may visit.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Threshold used for deterministic bond-cluster extraction.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub i: usize,
    pub k: usize,
    pub p: f64,
}

/// Sites and the edges between coupled pairs. Pairs without a coupling have
/// no edge (and no bond variable), which differs from an edge with `p = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BondGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl BondGraph {
    /// Edges must have `i < k < n` and `p` in `[0, 1]`, each pair at most once.
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if !(e.i < e.k && e.k < n) {
                return Err(Error::InvalidGraph(format!("bad edge ({}, {}) for {n} sites", e.i, e.k)));
            }
            if !(0.0..=1.0).contains(&e.p) {
                return Err(Error::InvalidGraph(format!("bond probability {} outside [0, 1]", e.p)));
            }
        }
        edges.sort_by_key(|e| (e.i, e.k));
        if edges.windows(2).any(|w| (w[0].i, w[0].k) == (w[1].i, w[1].k)) {
            return Err(Error::InvalidGraph("repeated edge".into()));
        }
        Ok(Self { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges ordered by `(i, k)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn probability(&self, i: usize, k: usize) -> Option<f64> {
        let (i, k) = (i.min(k), i.max(k));
        self.edges
            .binary_search_by_key(&(i, k), |e| (e.i, e.k))
            .ok()
            .map(|idx| self.edges[idx].p)
    }

    /// Every pair of distinct sites is joined by an edge.
    pub fn is_fully_connected(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }
}

/// Occupation of each edge of a [`BondGraph`], aligned with
/// [`BondGraph::edges`]. `true` is occupied (`n_ij = 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondState {
    occupied: Vec<bool>,
}

impl BondState {
    pub fn new(g: &BondGraph, occupied: Vec<bool>) -> Result<Self> {
        if occupied.len() != g.edges.len() {
            return Err(Error::InvalidGraph(format!(
                "{} bond values for {} edges",
                occupied.len(),
                g.edges.len()
            )));
        }
        Ok(Self { occupied })
    }

    pub fn all_occupied(g: &BondGraph) -> Self {
        Self {
            occupied: vec![true; g.edges.len()],
        }
    }

    /// Bit `e` of `mask` is the state of edge `e`.
    fn from_mask(edges: usize, mask: u64) -> Self {
        Self {
            occupied: (0..edges).map(|e| mask >> e & 1 == 1).collect(),
        }
    }

    pub fn is_occupied(&self, edge: usize) -> bool {
        self.occupied[edge]
    }

    pub fn values(&self) -> &[bool] {
        &self.occupied
    }
}

/// `p = 1 - exp(-β J)` on every pair with `J > 0`.
pub fn bond_probabilities(j: &InteractionMatrix, beta: f64) -> Result<BondGraph> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let n = j.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            let w = j.get(i, k);
            if w > 0.0 {
                edges.push(Edge {
                    i,
                    k,
                    p: -(-beta * w).exp_m1(),
                });
            }
        }
    }
    BondGraph::new(n, edges)
}

/// Deterministic bond-clusters: an edge is vacant when `p > threshold` and
/// occupied otherwise; returns connected components of occupied edges.
pub fn extract_bond_clusters(g: &BondGraph, threshold: f64) -> Result<Vec<Vec<usize>>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let occupied = g.edges.iter().map(|e| e.p <= threshold).collect();
    Ok(bond_clusters(g, &BondState { occupied }))
}

/// Connected components of the occupied bonds, isolated sites included.
pub fn bond_clusters(g: &BondGraph, bonds: &BondState) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(g.n);
    for (e, edge) in g.edges.iter().enumerate() {
        if bonds.occupied[e] {
            uf.union(edge.i, edge.k);
        }
    }
    uf.components()
}

/// Unnormalized joint spin/bond weight:
/// `Π_edges [(1 - p) [n = 1] + p [n = 0] [σ_i ≠ σ_k]]`. Spins are 0-based.
pub fn joint_weight(spins: &[usize], bonds: &BondState, g: &BondGraph) -> f64 {
    assert_eq!(spins.len(), g.n, "one spin per site");
    g.edges
        .iter()
        .zip(&bonds.occupied)
        .map(|(e, &on)| match (on, spins[e.i] == spins[e.k]) {
            (true, _) => 1.0 - e.p,
            (false, false) => e.p,
            (false, true) => 0.0,
        })
        .product()
}

/// The ground-state approximation to the bond-state weight: the composition
/// sum `Σ q!/(q_1!…q_C!) q_1^{N_1}…q_C^{N_C}` over splits of the `q` spin
/// directions among the `C` bond-clusters, times `Π_vacant p Π_occupied (1-p)`.
///
/// Zero when `C > q`. Requires a fully connected graph and no vacant bond
/// inside a bond-cluster.
pub fn graph_distribution_weight(bonds: &BondState, g: &BondGraph, q: usize) -> Result<f64> {
    if !g.is_fully_connected() {
        return Err(Error::InvalidGraph("bond-state weight needs full connectivity".into()));
    }
    if bonds.occupied.len() != g.edges.len() {
        return Err(Error::InvalidGraph("bond state does not match the graph".into()));
    }
    let clusters = bond_clusters(g, bonds);
    let mut cluster_of = vec![0; g.n];
    for (c, members) in clusters.iter().enumerate() {
        for &site in members {
            cluster_of[site] = c;
        }
    }
    for (e, edge) in g.edges.iter().enumerate() {
        if !bonds.occupied[e] && cluster_of[edge.i] == cluster_of[edge.k] {
            return Err(Error::NotGroundStateForm(edge.i, edge.k));
        }
    }
    if clusters.len() > q {
        return Ok(0.0);
    }
    let sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
    let bond_factor: f64 = g
        .edges
        .iter()
        .zip(&bonds.occupied)
        .map(|(e, &on)| if on { 1.0 - e.p } else { e.p })
        .product();
    Ok(composition_sum(q, &sizes) * bond_factor)
}

/// `Σ_{q_1+…+q_C = q, q_a ≥ 1} q!/(q_1!…q_C!) Π q_a^{N_a}`.
pub fn composition_sum(q: usize, sizes: &[usize]) -> f64 {
    fn recurse(remaining: usize, sizes: &[usize], acc: f64) -> f64 {
        match sizes.split_first() {
            None => {
                if remaining == 0 {
                    acc
                } else {
                    0.0
                }
            }
            Some((&n_a, rest)) => {
                let mut total = 0.0;
                // Leave at least one direction for every later cluster.
                for q_a in 1..=remaining.saturating_sub(rest.len()) {
                    let term = acc / factorial(q_a) * (q_a as f64).powi(n_a as i32);
                    total += recurse(remaining - q_a, rest, term);
                }
                total
            }
        }
    }
    if sizes.is_empty() {
        return if q == 0 { 1.0 } else { 0.0 };
    }
    recurse(q, sizes, factorial(q))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Exhaustive `Σ_σ joint_weight(σ, bonds)` over all `q^N` spin states.
pub fn spin_sum_weight(bonds: &BondState, g: &BondGraph, q: usize) -> Result<f64> {
    check_size((q as f64).powi(g.n as i32))?;
    let mut total = 0.0;
    for_each_spin_state(g.n, q, |spins| total += joint_weight(spins, bonds, g));
    Ok(total)
}

fn check_size(size: f64) -> Result<()> {
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

fn for_each_spin_state(n: usize, q: usize, mut visit: impl FnMut(&[usize])) {
    let mut spins = vec![0; n];
    loop {
        visit(&spins);
        let mut digit = n;
        loop {
            if digit == 0 {
                return;
            }
            digit -= 1;
            spins[digit] += 1;
            if spins[digit] < q {
                break;
            }
            spins[digit] = 0;
        }
    }
}

/// Distances found by enumerating every joint spin/bond state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalReport {
    /// Total variation between the bond-summed joint law and the Boltzmann
    /// law `exp(-β Σ J [σ_i = σ_k]) / Z`.
    pub tv_spin: f64,
    /// Largest total variation, over spin states, between the enumerated
    /// `P(bonds | spins)` and its closed form.
    pub tv_conditional: f64,
    /// Most bond-clusters seen in any state of nonzero weight.
    pub max_bond_clusters: usize,
    /// States of nonzero weight with more than `q` bond-clusters. Only
    /// meaningful on fully connected graphs.
    pub bound_violations: u64,
    pub states: u64,
}

pub fn verify_marginals(g: &BondGraph, j: &InteractionMatrix, beta: f64, q: usize) -> Result<MarginalReport> {
    if j.n() != g.n {
        return Err(Error::InvalidGraph("graph and interactions differ in size".into()));
    }
    if q == 0 || !(beta > 0.0) {
        return Err(Error::InvalidArgument("need q ≥ 1 and β > 0".into()));
    }
    let n_edges = g.edges.len();
    check_size((q as f64).powi(g.n as i32) * 2f64.powi(n_edges as i32))?;

    let mut spin_states = Vec::new();
    let mut marginals = Vec::new();
    let mut boltzmann = Vec::new();
    let mut conditional_tv = 0.0f64;
    let mut max_clusters = 0;
    let mut violations = 0;
    let mut states = 0;
    let mut joint = vec![0.0; 1 << n_edges];
    for_each_spin_state(g.n, q, |spins| {
        let mut marginal = 0.0;
        for mask in 0..1u64 << n_edges {
            let bonds = BondState::from_mask(n_edges, mask);
            let w = joint_weight(spins, &bonds, g);
            joint[mask as usize] = w;
            marginal += w;
            states += 1;
            if w > 0.0 {
                let c = bond_clusters(g, &bonds).len();
                max_clusters = max_clusters.max(c);
                if c > q {
                    violations += 1;
                }
            }
        }
        if marginal > 0.0 {
            let mut tv = 0.0;
            for (mask, &w) in joint.iter().enumerate() {
                let closed = conditional_bond_law(spins, mask as u64, g);
                tv += (w / marginal - closed).abs();
            }
            conditional_tv = conditional_tv.max(0.5 * tv);
        }
        let mut energy = 0.0;
        for i in 0..g.n {
            for k in i + 1..g.n {
                if spins[i] == spins[k] {
                    energy += j.get(i, k);
                }
            }
        }
        spin_states.push(spins.to_vec());
        marginals.push(marginal);
        boltzmann.push((-beta * energy).exp());
    });
    let z_joint: f64 = marginals.iter().sum();
    let z_spin: f64 = boltzmann.iter().sum();
    let tv_spin = 0.5
        * marginals
            .iter()
            .zip(&boltzmann)
            .map(|(m, b)| (m / z_joint - b / z_spin).abs())
            .sum::<f64>();
    Ok(MarginalReport {
        tv_spin,
        tv_conditional: conditional_tv,
        max_bond_clusters: max_clusters,
        bound_violations: violations,
        states,
    })
}

/// Closed-form `P(bonds | spins)`: equal spins are always bonded, unequal
/// spins are vacant with probability `p`.
fn conditional_bond_law(spins: &[usize], mask: u64, g: &BondGraph) -> f64 {
    g.edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let on = mask >> e & 1 == 1;
            match (spins[edge.i] == spins[edge.k], on) {
                (true, true) => 1.0,
                (true, false) => 0.0,
                (false, true) => 1.0 - edge.p,
                (false, false) => edge.p,
            }
        })
        .product()
}

/// Comparison of [`graph_distribution_weight`] with [`spin_sum_weight`] over
/// every bond state where the former is defined.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightCheck {
    pub bond_states: u64,
    pub evaluable_states: u64,
    pub max_abs_error: f64,
    /// Evaluable states whose two weights differ by more than the tolerance.
    pub mismatches: u64,
    /// Bond-cluster sizes of the first mismatching state, if any.
    pub first_mismatch: Option<Vec<usize>>,
}

pub fn check_ground_state_weights(g: &BondGraph, q: usize, tolerance: f64) -> Result<WeightCheck> {
    let n_edges = g.edges.len();
    check_size((q as f64).powi(g.n as i32) * 2f64.powi(n_edges as i32))?;
    let mut check = WeightCheck {
        bond_states: 0,
        evaluable_states: 0,
        max_abs_error: 0.0,
        mismatches: 0,
        first_mismatch: None,
    };
    for mask in 0..1u64 << n_edges {
        let bonds = BondState::from_mask(n_edges, mask);
        check.bond_states += 1;
        let approx = match graph_distribution_weight(&bonds, g, q) {
            Ok(w) => w,
            Err(Error::NotGroundStateForm(..)) => continue,
            Err(e) => return Err(e),
        };
        check.evaluable_states += 1;
        let error = (approx - spin_sum_weight(&bonds, g, q)?).abs();
        check.max_abs_error = check.max_abs_error.max(error);
        if error > tolerance {
            check.mismatches += 1;
            if check.first_mismatch.is_none() {
                check.first_mismatch = Some(bond_clusters(g, &bonds).iter().map(Vec::len).collect());
            }
        }
    }
    Ok(check)
}

/// Fully coupled `n`-site interactions whose bond probabilities at `β = 1`
/// are independent uniform draws on (0, 1). Stream: `GraphCheck`, `index`.
pub fn random_interactions(n: usize, seed: u64, index: u32) -> InteractionMatrix {
    let mut rng = stream(seed, Purpose::GraphCheck, index);
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for k in i + 1..n {
            let x = -(-open_unit(&mut rng)).ln_1p();
            w[i * n + k] = x;
            w[k * n + i] = x;
        }
    }
    InteractionMatrix::from_dense(n, w).expect("symmetric and non-negative")
}

/// Everything `graph-check` reports for one random instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphCheckReport {
    pub n: usize,
    pub q: usize,
    pub beta: f64,
    pub seed: u64,
    pub edges: usize,
    pub marginals: MarginalReport,
    pub weights: WeightCheck,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn graph_check(n: usize, q: usize, beta: f64, seed: u64, tolerance: f64) -> Result<GraphCheckReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one site".into()));
    }
    let j = random_interactions(n, seed, 0);
    let g = bond_probabilities(&j, beta)?;
    let marginals = verify_marginals(&g, &j, beta, q)?;
    let weights = check_ground_state_weights(&g, q, tolerance)?;
    let passed = marginals.tv_spin <= tolerance
        && marginals.tv_conditional <= tolerance
        && marginals.bound_violations == 0
        && weights.mismatches == 0;
    Ok(GraphCheckReport {
        n,
        q,
        beta,
        seed,
        edges: g.edges.len(),
        marginals,
        weights,
        tolerance,
        passed,
    })
}

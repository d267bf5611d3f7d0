//! Mean-field state and the serial update of the Potts thermal averages.

use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::potts::{AnnealConfig, InteractionMatrix};

/// Row-stochastic `n × q` matrix of thermal averages `V[i][a]`, plus the
/// annealing bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldState {
    n: usize,
    q: usize,
    v: Vec<f64>,
    pub temperature: f64,
    pub sweeps_done: usize,
    pub temps_done: usize,
}

impl MeanFieldState {
    /// Symmetric state `1/q` plus `epsilon · U[0,1)` per entry, rows
    /// renormalized.
    pub fn initial<R: Rng + ?Sized>(n: usize, q: usize, epsilon: f64, temperature: f64, rng: &mut R) -> Self {
        let mut v = vec![1.0 / q as f64; n * q];
        if epsilon > 0.0 {
            for row in v.chunks_mut(q) {
                for x in row.iter_mut() {
                    *x += epsilon * rng.gen::<f64>();
                }
                normalize_row(row);
            }
        }
        Self {
            n,
            q,
            v,
            temperature,
            sweeps_done: 0,
            temps_done: 0,
        }
    }

    /// A state with given row-major values; every row must lie on the simplex.
    pub fn from_values(n: usize, q: usize, v: Vec<f64>, temperature: f64) -> Result<Self> {
        if v.len() != n * q || q == 0 {
            return Err(Error::InvalidArgument(format!(
                "expected {n} × {q} values, got {}",
                v.len()
            )));
        }
        for (i, row) in v.chunks(q).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::InvalidArgument(format!("row {i} is not a distribution")));
            }
        }
        if !(temperature > 0.0) {
            return Err(Error::InvalidArgument(format!("temperature must be positive, got {temperature}")));
        }
        Ok(Self {
            n,
            q,
            v,
            temperature,
            sweeps_done: 0,
            temps_done: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.v[i * self.q..(i + 1) * self.q]
    }

    /// `(1/N) Σ V²`: `1/q` in the symmetric state, 1 when frozen.
    pub fn saturation(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>() / self.n as f64
    }

    /// Cluster of each row's largest entry; ties go to the lowest index.
    pub fn argmax_partition(&self) -> Partition {
        let labels = self
            .v
            .chunks(self.q)
            .map(|row| {
                let mut best = 0;
                for (a, &x) in row.iter().enumerate() {
                    if x > row[best] {
                        best = a;
                    }
                }
                best
            })
            .collect();
        Partition::new(labels, self.q).expect("labels are below q")
    }

    /// One serial pass `i = 0..n` of the mean-field equations at the current
    /// temperature. Returns `(1/N) Σ |ΔV|`.
    pub fn sweep<R: Rng + ?Sized>(&mut self, j: &InteractionMatrix, cfg: &AnnealConfig, rng: &mut R) -> Result<f64> {
        if j.n() != self.n || cfg.q != self.q {
            return Err(Error::InvalidArgument(format!(
                "state is {} × {}, interactions {} and q {}",
                self.n,
                self.q,
                j.n(),
                cfg.q
            )));
        }
        let (n, q) = (self.n, self.q);
        let mut column_sums = vec![0.0; q];
        for row in self.v.chunks(q) {
            for (c, x) in column_sums.iter_mut().zip(row) {
                *c += x;
            }
        }
        let mut field = vec![0.0; q];
        let mut updated = vec![0.0; q];
        let mut delta = 0.0;
        for i in 0..n {
            for (a, h) in field.iter_mut().enumerate() {
                *h = cfg.alpha * column_sums[a] - cfg.gamma * self.v[i * q + a];
            }
            for (k, &w) in j.row(i).iter().enumerate() {
                if w != 0.0 {
                    let other = &self.v[k * q..(k + 1) * q];
                    for (h, x) in field.iter_mut().zip(other) {
                        *h += w * x;
                    }
                }
            }
            softmax_into(&field, self.temperature, &mut updated);
            if cfg.epsilon > 0.0 {
                for x in updated.iter_mut() {
                    *x += cfg.epsilon * rng.gen::<f64>();
                }
                normalize_row(&mut updated);
            }
            let row = &mut self.v[i * q..(i + 1) * q];
            for a in 0..q {
                delta += (updated[a] - row[a]).abs();
                column_sums[a] += updated[a] - row[a];
                row[a] = updated[a];
            }
        }
        self.sweeps_done += 1;
        Ok(delta / n as f64)
    }
}

/// `out[a] = exp(-field[a]/T) / Σ_b exp(-field[b]/T)`, evaluated with the
/// row minimum subtracted so the largest exponent is 0.
pub fn softmax_into(field: &[f64], temperature: f64, out: &mut [f64]) {
    let min = field.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (o, h) in out.iter_mut().zip(field) {
        *o = (-(h - min) / temperature).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

fn normalize_row(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= total);
}

/// `½ ΣΣ J_ij S_i·S_j - (γ/2) Σ S² + (α/2) Σ_a (Σ_i S_ia)²` on row-major
/// `n × q` values, mean-field or one-hot.
pub fn energy(values: &[f64], q: usize, j: &InteractionMatrix, alpha: f64, gamma: f64) -> f64 {
    let n = j.n();
    assert_eq!(values.len(), n * q, "values must be n × q");
    let row = |i: usize| &values[i * q..(i + 1) * q];
    let mut pair = 0.0;
    for i in 0..n {
        for (k, &w) in j.row(i).iter().enumerate() {
            if w != 0.0 {
                pair += w * row(i).iter().zip(row(k)).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
    let self_term: f64 = values.iter().map(|x| x * x).sum();
    let balance: f64 = (0..q)
        .map(|a| (0..n).map(|i| values[i * q + a]).sum::<f64>().powi(2))
        .sum();
    0.5 * pair - 0.5 * gamma * self_term + 0.5 * alpha * balance
}

/// [`energy`] of the one-hot encoding of `partition`.
pub fn partition_energy(partition: &Partition, j: &InteractionMatrix, alpha: f64, gamma: f64) -> f64 {
    energy(&partition.one_hot(), partition.cluster_count(), j, alpha, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;
    use rand::Rng;

    fn quiet(q: usize) -> AnnealConfig {
        AnnealConfig {
            epsilon: 0.0,
            ..AnnealConfig::for_clusters(q)
        }
    }

    fn pair(w: f64) -> InteractionMatrix {
        InteractionMatrix::from_dense(2, vec![0.0, w, w, 0.0]).unwrap()
    }

    fn random_interactions(n: usize, seed: u64) -> InteractionMatrix {
        let mut rng = stream(seed, Purpose::RandomInstance, 0);
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for k in i + 1..n {
                if rng.gen_bool(0.5) {
                    let x = rng.gen_range(0.0..2.0);
                    w[i * n + k] = x;
                    w[k * n + i] = x;
                }
            }
        }
        InteractionMatrix::from_dense(n, w).unwrap()
    }

    #[test]
    fn equal_fields_give_the_uniform_row() {
        let mut state = MeanFieldState::from_values(1, 4, vec![0.25; 4], 0.3).unwrap();
        let mut rng = stream(0, Purpose::Anneal, 0);
        let delta = state.sweep(&InteractionMatrix::zeros(1), &quiet(4), &mut rng).unwrap();
        assert_eq!(state.values(), &[0.25; 4]);
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn uniform_state_is_a_fixed_point_without_couplings() {
        let mut state = MeanFieldState::from_values(3, 3, vec![1.0 / 3.0; 9], 0.7).unwrap();
        let before = state.clone();
        let mut rng = stream(0, Purpose::Anneal, 0);
        state.sweep(&InteractionMatrix::zeros(3), &quiet(3), &mut rng).unwrap();
        for (a, b) in state.values().iter().zip(before.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn strong_coupling_pushes_two_spins_apart() {
        let v = vec![0.6, 0.4, 0.45, 0.55];
        let mut state = MeanFieldState::from_values(2, 2, v, 0.05).unwrap();
        let mut rng = stream(0, Purpose::Anneal, 0);
        let j = pair(5.0);
        for _ in 0..50 {
            state.sweep(&j, &quiet(2), &mut rng).unwrap();
        }
        assert!(state.row(0)[0] > 0.999, "{:?}", state.values());
        assert!(state.row(1)[1] > 0.999, "{:?}", state.values());
        assert_eq!(state.argmax_partition().labels(), &[0, 1]);
    }

    #[test]
    fn softmax_survives_huge_fields() {
        let mut out = [0.0; 3];
        softmax_into(&[1e300, 1e300 + 1e290, -1e300], 1e-3, &mut out);
        assert!(out.iter().all(|x| x.is_finite()));
        assert_eq!(out[2], 1.0);
    }

    #[test]
    fn argmax_ties_go_to_the_lowest_label() {
        let state = MeanFieldState::from_values(2, 3, vec![0.4, 0.4, 0.2, 0.2, 0.4, 0.4], 1.0).unwrap();
        assert_eq!(state.argmax_partition().labels(), &[0, 1]);
    }

    #[test]
    fn energy_examples() {
        let zero = InteractionMatrix::zeros(4);
        let together = Partition::new(vec![0, 0, 0, 0], 2).unwrap();
        let split = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(partition_energy(&together, &zero, 0.0, 0.5), -0.5 * 0.5 * 4.0);
        assert_eq!(partition_energy(&split, &zero, 0.3, 0.0), 0.3 * 4.0);
        assert_eq!(partition_energy(&together, &zero, 0.3, 0.0), 0.3 * 8.0);

        let same = Partition::new(vec![1, 1], 2).unwrap();
        assert_eq!(partition_energy(&same, &pair(0.7), 0.0, 0.0), 0.7);
    }

    #[test]
    fn saturation_bounds() {
        let sym = MeanFieldState::from_values(2, 4, vec![0.25; 8], 1.0).unwrap();
        assert!((sym.saturation() - 0.25).abs() < 1e-15);
        let frozen = MeanFieldState::from_values(2, 2, vec![1.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(frozen.saturation(), 1.0);
    }

    proptest! {
        #[test]
        fn sweeps_keep_rows_on_the_simplex(
            n in 1usize..12,
            q in 2usize..6,
            seed in any::<u64>(),
            temperature in 1e-4f64..10.0,
            epsilon in prop_oneof![Just(0.0), 1e-4f64..0.1],
        ) {
            let j = random_interactions(n, seed);
            let cfg = AnnealConfig { epsilon, ..AnnealConfig::for_clusters(q) };
            let mut rng = stream(seed, Purpose::Anneal, 0);
            let mut state = MeanFieldState::initial(n, q, epsilon, temperature, &mut rng);
            for _ in 0..5 {
                state.sweep(&j, &cfg, &mut rng).unwrap();
                for row in state.values().chunks(q) {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                    prop_assert!(row.iter().all(|x| (0.0..=1.0).contains(x)));
                }
                let sat = state.saturation();
                prop_assert!(sat >= 1.0 / q as f64 - 1e-12 && sat <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn softmax_ignores_a_constant_shift(
            field in prop::collection::vec(-50.0f64..50.0, 2..8),
            shift in -1e3f64..1e3,
            temperature in 0.01f64..10.0,
        ) {
            let shifted: Vec<f64> = field.iter().map(|h| h + shift).collect();
            let mut a = vec![0.0; field.len()];
            let mut b = vec![0.0; field.len()];
            softmax_into(&field, temperature, &mut a);
            softmax_into(&shifted, temperature, &mut b);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn energy_is_label_symmetric(
            labels in prop::collection::vec(0usize..3, 1..9),
            seed in any::<u64>(),
            alpha in 0.0f64..1.0,
        ) {
            let n = labels.len();
            let j = random_interactions(n, seed);
            let p = Partition::new(labels, 3).unwrap();
            let e = partition_energy(&p, &j, alpha, 0.5);
            for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1]] {
                let relabeled = p.relabel(&perm).unwrap();
                prop_assert!((partition_energy(&relabeled, &j, alpha, 0.5) - e).abs() <= 1e-9);
            }
        }
    }
}

//! Extreme eigenvalues of the symmetric matrix `M = J + α - γ I`, used to
//! pick the starting temperature.

use crate::error::{Error, Result};
use crate::potts::InteractionMatrix;

/// Matrices up to this order are fully diagonalized with cyclic Jacobi.
pub const JACOBI_LIMIT: usize = 256;

const POWER_TOLERANCE: f64 = 1e-8;
const JACOBI_MAX_SWEEPS: usize = 100;

/// `(1/q) · max(-λ_min, λ_max)` of `M[i][k] = J[i][k] + α - γ δ_ik`.
pub fn critical_temperature(j: &InteractionMatrix, alpha: f64, gamma: f64, q: usize) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let m = shifted_couplings(j, alpha, gamma);
    let (lo, hi) = extreme_eigenvalues(&m, j.n());
    let t = (-lo).max(hi) / q as f64;
    if !(t > 0.0) {
        return Err(Error::DegenerateSpectrum(t));
    }
    Ok(t)
}

fn shifted_couplings(j: &InteractionMatrix, alpha: f64, gamma: f64) -> Vec<f64> {
    let n = j.n();
    let mut m: Vec<f64> = j.weights().iter().map(|w| w + alpha).collect();
    for i in 0..n {
        m[i * n + i] -= gamma;
    }
    m
}

/// `(λ_min, λ_max)` of a symmetric row-major matrix.
pub fn extreme_eigenvalues(m: &[f64], n: usize) -> (f64, f64) {
    if n <= JACOBI_LIMIT {
        let eig = jacobi_eigenvalues(m, n);
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    } else {
        power_extremes(m, n)
    }
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, unsorted.
pub fn jacobi_eigenvalues(m: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = (f64::EPSILON * scale).powi(2);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Extreme eigenvalues by power iteration on `cI + M` and `cI - M`, where `c`
/// is the Gershgorin bound, so both iterated matrices are positive
/// semidefinite and their dominant eigenvalues are `c + λ_max`, `c - λ_min`.
pub fn power_extremes(m: &[f64], n: usize) -> (f64, f64) {
    assert_eq!(m.len(), n * n);
    let c = (0..n)
        .map(|i| m[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if c == 0.0 {
        return (0.0, 0.0);
    }
    let top = dominant_eigenvalue(m, n, c, 1.0);
    let bottom = dominant_eigenvalue(m, n, c, -1.0);
    (c - bottom, top - c)
}

/// Dominant eigenvalue of `shift·I + sign·M` (assumed positive semidefinite).
fn dominant_eigenvalue(m: &[f64], n: usize, shift: f64, sign: f64) -> f64 {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    let mut y = vec![0.0; n];
    normalize(&mut x);
    let mut estimate = f64::NAN;
    for _ in 0..(10 * n).max(100) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &m[i * n..(i + 1) * n];
            let mx: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            *yi = shift * x[i] + sign * mx;
        }
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
        if normalize(&mut x) == 0.0 {
            return 0.0;
        }
        if (rayleigh - estimate).abs() <= POWER_TOLERANCE * rayleigh.abs().max(1.0) {
            return rayleigh;
        }
        estimate = rayleigh;
    }
    estimate
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for k in i..n {
                let v: f64 = rng.gen_range(-2.0..2.0);
                m[i * n + k] = v;
                m[k * n + i] = v;
            }
        }
        m
    }

    fn reference_extremes(m: &[f64], n: usize) -> (f64, f64) {
        let eig = DMatrix::from_row_slice(n, n, m).symmetric_eigen().eigenvalues;
        (eig.min(), eig.max())
    }

    #[test]
    fn two_by_two() {
        let j = InteractionMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let t = critical_temperature(&j, 0.0, 0.5, 2).unwrap();
        assert!((t - 0.75).abs() < 1e-12);
    }

    #[test]
    fn scalar_matrix() {
        let j = InteractionMatrix::zeros(4);
        let t = critical_temperature(&j, 0.0, 0.5, 3).unwrap();
        assert!((t - 0.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_spectrum_is_degenerate() {
        let j = InteractionMatrix::zeros(3);
        assert!(matches!(
            critical_temperature(&j, 0.0, 0.0, 2),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn jacobi_matches_dense_reference() {
        for seed in 0..20 {
            let m = random_symmetric(8, seed);
            let mut ours = jacobi_eigenvalues(&m, 8);
            ours.sort_by(f64::total_cmp);
            let mut reference: Vec<f64> = DMatrix::from_row_slice(8, 8, &m)
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            reference.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn power_iteration_matches_dense_reference() {
        // Interaction-like matrices: non-negative couplings, -γ on the diagonal.
        for (n, seed) in [(30, 1u64), (60, 2), (300, 3)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = -0.5;
                for k in i + 1..n {
                    let v = if rng.gen_bool(0.4) { rng.gen_range(0.0..1.5) } else { 0.0 };
                    m[i * n + k] = v;
                    m[k * n + i] = v;
                }
            }
            let (lo, hi) = power_extremes(&m, n);
            let (rlo, rhi) = reference_extremes(&m, n);
            let spread = rhi - rlo;
            assert!((hi - rhi).abs() <= 1e-6 * spread.max(1.0), "n={n}: {hi} vs {rhi}");
            assert!((lo - rlo).abs() <= 1e-3 * spread.max(1.0), "n={n}: {lo} vs {rlo}");
        }
    }

    #[test]
    fn dispatch_uses_power_iteration_above_the_limit() {
        let n = JACOBI_LIMIT + 4;
        let mut m = vec![0.3; n * n];
        for i in 0..n {
            m[i * n + i] = -0.5;
        }
        // Eigenvalues: 0.3 n - 0.8 once, -0.8 with multiplicity n - 1.
        let (lo, hi) = extreme_eigenvalues(&m, n);
        assert!((hi - (0.3 * n as f64 - 0.8)).abs() < 1e-6);
        assert!((lo + 0.8).abs() < 1e-6);
    }
}

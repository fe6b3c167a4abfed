//! Compressed request channel: random sign measurement matrices, the noisy
//! superposition observed at the destination, and sparse recovery of the
//! buffer-state vector.
//!
//! Every node modulates its queue occupancy (an integer in `0..=L`) onto its
//! own signature column of the measurement matrix. The destination observes
//! `y = A x + z` and recovers `x` with orthogonal matching pursuit
//! ([`omp_recover`]). [`brute_force_l0`] is an exhaustive sparsest-solution
//! search used as a reference decoder on small instances.

mod brute_force;
mod omp;

pub use brute_force::{brute_force_l0, BRUTE_FORCE_MAX_SUPPORT, BRUTE_FORCE_MAX_USERS};
pub use omp::{omp_recover, Estimate, RecoveryConfig, Stopping};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Default standard deviation of the additive request-channel noise.
pub const DEFAULT_NOISE_STD: f64 = 0.01;
/// Default buffer capacity in packets, which is also the largest constellation point.
pub const DEFAULT_CONSTELLATION_MAX: u32 = 10;

/// An `M x N` matrix of signatures with entries `+-1/sqrt(M)`, plus the
/// request-channel noise level and the constellation `{0, .., L}`.
///
/// Stored column-major: the signature of node `k` is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    n_users: usize,
    n_measurements: usize,
    columns: Vec<f64>,
    noise_std: f64,
    constellation_max: u32,
}

impl MeasurementModel {
    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn constellation_max(&self) -> u32 {
        self.constellation_max
    }

    pub fn with_noise_std(mut self, noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::Domain(format!("noise_std must be finite and >= 0, got {noise_std}")));
        }
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn with_constellation_max(mut self, constellation_max: u32) -> Self {
        self.constellation_max = constellation_max;
        self
    }

    /// Signature of node `k` (column `k`).
    pub fn column(&self, k: usize) -> &[f64] {
        let m = self.n_measurements;
        &self.columns[k * m..(k + 1) * m]
    }

    /// Entry at row `i`, column `k`.
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.columns[k * self.n_measurements + i]
    }

    /// Noiseless product `A x` for a real-valued `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_users {
            return Err(Error::Dimension(format!(
                "vector has length {}, matrix has {} columns",
                x.len(),
                self.n_users
            )));
        }
        let mut out = vec![0.0; self.n_measurements];
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                for (o, a) in out.iter_mut().zip(self.column(k)) {
                    *o += xk * a;
                }
            }
        }
        Ok(out)
    }

    /// `A^T r`.
    pub(crate) fn correlate(&self, r: &[f64], out: &mut [f64]) {
        for (k, c) in out.iter_mut().enumerate() {
            *c = dot(self.column(k), r);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws an `M x N` symmetric Bernoulli matrix scaled to unit-norm columns.
///
/// Deterministic for a fixed seed. Noise level and constellation take their
/// defaults; override them with [`MeasurementModel::with_noise_std`] and
/// [`MeasurementModel::with_constellation_max`].
pub fn generate_matrix(n_users: usize, n_measurements: usize, seed: u64) -> Result<MeasurementModel> {
    if n_measurements == 0 || n_measurements > n_users {
        return Err(Error::Dimension(format!(
            "need 1 <= M <= N, got M = {n_measurements}, N = {n_users}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n_measurements as f64).sqrt();
    let len = n_users * n_measurements;
    let mut columns = Vec::with_capacity(len);
    while columns.len() < len {
        let bits: u64 = rng.random();
        let take = (len - columns.len()).min(64);
        columns.extend((0..take).map(|b| if (bits >> b) & 1 == 1 { scale } else { -scale }));
    }
    Ok(MeasurementModel {
        n_users,
        n_measurements,
        columns,
        noise_std: DEFAULT_NOISE_STD,
        constellation_max: DEFAULT_CONSTELLATION_MAX,
    })
}

/// Queue occupancies announced by the nodes, in packets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BufferStateVector {
    entries: Vec<u32>,
}

impl BufferStateVector {
    /// Validates every entry against the buffer capacity `constellation_max`.
    pub fn new(entries: Vec<u32>, constellation_max: u32) -> Result<Self> {
        if let Some((k, &v)) = entries.iter().enumerate().find(|(_, &v)| v > constellation_max) {
            return Err(Error::Domain(format!(
                "entry {k} = {v} exceeds constellation maximum {constellation_max}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, k: usize) -> u32 {
        self.entries[k]
    }

    pub(crate) fn set(&mut self, k: usize, v: u32) {
        self.entries[k] = v;
    }

    /// Indices of nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.entries.iter().filter(|&&v| v > 0).count()
    }

    pub fn is_sparse(&self, sparsity: usize) -> bool {
        self.support_size() <= sparsity
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|&v| v as f64).collect()
    }

    /// Number of indices where the two vectors disagree.
    pub fn mismatches(&self, other: &BufferStateVector) -> usize {
        self.entries
            .iter()
            .zip(&other.entries)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Observation `y` at the destination, one value per measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    values: Vec<f64>,
}

impl MeasurementVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `y = A x + z` with `z` i.i.d. Gaussian of standard deviation `model.noise_std()`.
pub fn measure(model: &MeasurementModel, x: &BufferStateVector, seed: u64) -> Result<MeasurementVector> {
    let mut values = model.apply(&x.to_f64())?;
    add_noise(&mut values, model.noise_std(), seed);
    Ok(MeasurementVector::new(values))
}

pub(crate) fn add_noise(values: &mut [f64], std: f64, seed: u64) {
    if std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, std).expect("std validated as finite and positive");
        for v in values.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
}

/// `||y - A x||_2`.
pub fn residual_norm(model: &MeasurementModel, y: &MeasurementVector, x: &BufferStateVector) -> Result<f64> {
    let ax = model.apply(&x.to_f64())?;
    if ax.len() != y.len() {
        return Err(Error::Dimension(format!(
            "measurement vector has length {}, model has {} rows",
            y.len(),
            ax.len()
        )));
    }
    Ok(y.values().iter().zip(&ax).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_matrix_has_half_entries() {
        let m = generate_matrix(4, 4, 7).unwrap();
        for k in 0..4 {
            for i in 0..4 {
                assert_eq!(m.entry(i, k).abs(), 0.5);
            }
        }
    }

    #[test]
    fn paper_dimensions() {
        let m = generate_matrix(400, 82, 1).unwrap();
        assert_eq!((m.n_measurements(), m.n_users()), (82, 400));
        for k in 0..400 {
            let norm: f64 = m.column(k).iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_more_measurements_than_users() {
        assert!(matches!(generate_matrix(4, 5, 0), Err(Error::Dimension(_))));
        assert!(matches!(generate_matrix(4, 0, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate_matrix(50, 20, 3).unwrap(), generate_matrix(50, 20, 3).unwrap());
        assert_ne!(generate_matrix(50, 20, 3).unwrap(), generate_matrix(50, 20, 4).unwrap());
    }

    #[test]
    fn signs_are_balanced() {
        let m = generate_matrix(400, 100, 11).unwrap();
        let pos = (0..400)
            .flat_map(|k| m.column(k).to_vec())
            .filter(|&a| a > 0.0)
            .count() as f64;
        // 40000 fair coins: 5 sigma = 500
        assert!((pos - 20_000.0).abs() < 500.0, "{pos}");
    }

    #[test]
    fn zero_input_zero_noise() {
        let m = generate_matrix(20, 8, 2).unwrap().with_noise_std(0.0).unwrap();
        let y = measure(&m, &BufferStateVector::zeros(20), 5).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_spike_is_scaled_column() {
        let m = generate_matrix(10, 6, 2).unwrap().with_noise_std(0.0).unwrap();
        let mut x = vec![0; 10];
        x[3] = 4;
        let y = measure(&m, &BufferStateVector::new(x, 10).unwrap(), 0).unwrap();
        for (yi, ai) in y.values().iter().zip(m.column(3)) {
            assert_eq!(*yi, 4.0 * ai);
        }
    }

    #[test]
    fn noisy_measurement_matches_dense_product() {
        use rand::seq::index::sample;
        let m = generate_matrix(400, 70, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut x = vec![0u32; 400];
        for k in sample(&mut rng, 400, 14) {
            x[k] = rng.random_range(1..=10);
        }
        let x = BufferStateVector::new(x, 10).unwrap();
        // dense row-by-row product, independent of the column-major kernel
        let dense: Vec<f64> = (0..70)
            .map(|i| (0..400).map(|k| m.entry(i, k) * x.get(k) as f64).sum())
            .collect();
        let noiseless = m.clone().with_noise_std(0.0).unwrap();
        let y0 = measure(&noiseless, &x, 1).unwrap();
        for (a, b) in y0.values().iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9);
        }
        let y = measure(&m, &x, 1).unwrap();
        let dev: f64 = y.values().iter().zip(&dense).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 70.0;
        assert!(dev.sqrt() < 0.02 && dev.sqrt() > 0.005, "noise rms {}", dev.sqrt());
    }

    #[test]
    fn measure_rejects_length_mismatch() {
        let m = generate_matrix(10, 5, 0).unwrap();
        assert!(matches!(measure(&m, &BufferStateVector::zeros(9), 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn buffer_state_rejects_out_of_range() {
        assert!(BufferStateVector::new(vec![0, 11], 10).is_err());
        let x = BufferStateVector::new(vec![0, 3, 0, 10], 10).unwrap();
        assert_eq!(x.support(), vec![1, 3]);
        assert!(x.is_sparse(2) && !x.is_sparse(1));
    }
}

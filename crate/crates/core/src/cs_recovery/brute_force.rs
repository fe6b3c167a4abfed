use super::{BufferStateVector, MeasurementModel, MeasurementVector};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_USERS: usize = 16;
pub const BRUTE_FORCE_MAX_SUPPORT: usize = 3;

/// Exhaustive sparsest-fit search over all supports of size `<= max_support`
/// and all constellation assignments `{1, .., L}` on them.
///
/// Returns the vector with the smallest `||y - A x||_2`; among (numerically)
/// equal residuals the smaller support wins, then the lexicographically first
/// support and value assignment.
pub fn brute_force_l0(model: &MeasurementModel, y: &MeasurementVector, max_support: usize) -> Result<BufferStateVector> {
    let n = model.n_users();
    if n > BRUTE_FORCE_MAX_USERS || max_support > BRUTE_FORCE_MAX_SUPPORT {
        return Err(Error::Capacity(format!(
            "exhaustive search limited to N <= {BRUTE_FORCE_MAX_USERS} and support <= {BRUTE_FORCE_MAX_SUPPORT}, got N = {n}, support = {max_support}"
        )));
    }
    if y.len() != model.n_measurements() {
        return Err(Error::Dimension(format!(
            "measurement vector has length {}, model has {} rows",
            y.len(),
            model.n_measurements()
        )));
    }
    let max = model.constellation_max();
    let y = y.values();
    let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>();

    let mut best_r2 = y.iter().map(|v| v * v).sum::<f64>();
    let mut best: (Vec<usize>, Vec<u32>) = (Vec::new(), Vec::new());
    let mut residual = vec![0.0; y.len()];

    for size in 1..=max_support.min(n) {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            let mut values = vec![1u32; size];
            loop {
                residual.copy_from_slice(y);
                for (&k, &v) in support.iter().zip(&values) {
                    for (r, a) in residual.iter_mut().zip(model.column(k)) {
                        *r -= v as f64 * a;
                    }
                }
                let r2: f64 = residual.iter().map(|r| r * r).sum();
                if r2 < best_r2 - 1e-12 * scale {
                    best_r2 = r2;
                    best = (support.clone(), values.clone());
                }
                if !next_assignment(&mut values, max) {
                    break;
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }

    let mut entries = vec![0; n];
    for (k, v) in best.0.into_iter().zip(best.1) {
        entries[k] = v;
    }
    BufferStateVector::new(entries, max)
}

/// Odometer over `{1, .., max}^len`.
fn next_assignment(values: &mut [u32], max: u32) -> bool {
    for v in values.iter_mut().rev() {
        if *v < max {
            *v += 1;
            return true;
        }
        *v = 1;
    }
    false
}

/// Next size-`k` subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::{generate_matrix, measure, residual_norm};
    use super::*;

    #[test]
    fn zero_observation_gives_zero_vector() {
        let m = generate_matrix(10, 8, 0).unwrap();
        let y = MeasurementVector::new(vec![0.0; 8]);
        assert_eq!(brute_force_l0(&m, &y, 2).unwrap(), BufferStateVector::zeros(10));
    }

    #[test]
    fn recovers_two_sparse_exactly() {
        let m = generate_matrix(10, 8, 21).unwrap().with_noise_std(0.0).unwrap();
        let x = BufferStateVector::new(vec![0, 0, 3, 0, 0, 0, 0, 9, 0, 0], 10).unwrap();
        let y = measure(&m, &x, 0).unwrap();
        let got = brute_force_l0(&m, &y, 2).unwrap();
        assert!(residual_norm(&m, &y, &got).unwrap() < 1e-12);
        assert_eq!(got, x);
    }

    #[test]
    fn noisy_fit_is_no_worse_than_truth() {
        let m = generate_matrix(12, 8, 5).unwrap().with_noise_std(0.3).unwrap();
        let x = BufferStateVector::new(vec![0, 5, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0], 10).unwrap();
        let y = measure(&m, &x, 8).unwrap();
        let got = brute_force_l0(&m, &y, 2).unwrap();
        assert!(residual_norm(&m, &y, &got).unwrap() <= residual_norm(&m, &y, &x).unwrap() + 1e-12);
    }

    #[test]
    fn guard_rejects_large_problems() {
        let m = generate_matrix(17, 8, 0).unwrap();
        let y = MeasurementVector::new(vec![0.0; 8]);
        assert!(matches!(brute_force_l0(&m, &y, 1), Err(Error::Capacity(_))));
        let m = generate_matrix(10, 8, 0).unwrap();
        assert!(matches!(brute_force_l0(&m, &y, 4), Err(Error::Capacity(_))));
    }

    #[test]
    fn combination_enumeration_counts() {
        let mut c = vec![0, 1, 2];
        let mut count = 1;
        while next_combination(&mut c, 6) {
            count += 1;
        }
        assert_eq!(count, 20);
    }
}

mod common;

use common::{exact_tail, rel_diff};
use csmac::cs_recovery::*;
use csmac::sparsity_design::*;
use proptest::prelude::*;

#[test]
fn tail_matches_exact_rational_sums() {
    for (n, num, den, k) in [(20, 1, 10, 3), (50, 1, 100, 4), (400, 1, 100, 13), (400, 1, 100, 14), (200, 3, 20, 45), (30, 1, 2, 15)] {
        let exact = exact_tail(n, num, den, k);
        let got = tail_prob(n as usize, num as f64 / den as f64, k as usize).unwrap();
        assert!(rel_diff(got, exact) < 1e-10, "n={n} p={num}/{den} k={k}: {got} vs {exact}");
    }
}

#[test]
fn reference_tail_values() {
    // P[X >= 14] is already below 1e-4, P[X >= 13] is not
    assert!(exact_tail(400, 1, 100, 13) > 1e-4);
    assert!(exact_tail(400, 1, 100, 14) <= 1e-4);
    assert!(exact_tail(400, 1, 100, 15) <= 1e-4);
}

#[test]
fn brute_force_recovers_two_sparse() {
    let model = generate_matrix(10, 8, 11).unwrap().with_noise_std(0.0).unwrap();
    let mut e = vec![0; 10];
    e[2] = 7;
    e[9] = 3;
    let x = BufferStateVector::new(e, 10).unwrap();
    let y = measure(&model, &x, 0).unwrap();
    let found = brute_force_l0(&model, &y, 2).unwrap();
    assert!(residual_norm(&model, &y, &found).unwrap() < 1e-12);
}

fn sparse_vector(n: usize, max_support: usize) -> impl Strategy<Value = BufferStateVector> {
    prop::collection::btree_map(0..n, 1u32..=10, 0..=max_support)
        .prop_map(move |m| {
            let mut e = vec![0; n];
            for (k, v) in m {
                e[k] = v;
            }
            BufferStateVector::new(e, 10).unwrap()
        })
}

proptest! {
    #[test]
    fn tail_decreases_in_k_and_grows_in_p(n in 1usize..300, p in 0.0f64..1.0, k in 0usize..300, dp in 0.0f64..0.2) {
        let k = k % (n + 1);
        let t = tail_prob(n, p, k).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
        if k < n {
            prop_assert!(tail_prob(n, p, k + 1).unwrap() <= t * (1.0 + 1e-12));
        }
        let q = (p + dp).min(1.0);
        prop_assert!(tail_prob(n, q, k).unwrap() >= t * (1.0 - 1e-12));
    }

    #[test]
    fn sparsity_level_is_minimal(n in 2u32..120, num in 0u64..50, eps_exp in 2i32..7) {
        let eps = 10f64.powi(-eps_exp);
        let p = num as f64 / 100.0;
        let s = sparsity_for_request_prob(n as usize, p, eps).unwrap();
        if (s as u32) < n {
            prop_assert!(exact_tail(n, num, 100, s as u32 + 1) <= eps * (1.0 + 1e-9));
        }
        if s > 0 {
            prop_assert!(exact_tail(n, num, 100, s as u32) > eps * (1.0 - 1e-9));
        }
    }

    #[test]
    fn max_request_prob_is_tight(n in 20usize..400, s in 1usize..40, eps_exp in 2i32..6) {
        let eps = 10f64.powi(-eps_exp);
        let s = s.min(n - 1);
        let a = max_request_prob(n, s, eps, 201).unwrap();
        prop_assert!(tail_prob(n, a, s + 1).unwrap() <= eps);
        if a < 1.0 - 1e-5 {
            prop_assert!(tail_prob(n, a + 2.0 * REQUEST_PROB_RESOLUTION, s + 1).unwrap() > eps);
        }
    }

    #[test]
    fn measurement_is_linear(seed in any::<u64>(), a in sparse_vector(40, 6), b in sparse_vector(40, 6)) {
        let model = generate_matrix(40, 17, seed).unwrap().with_noise_std(0.0).unwrap();
        let sum: Vec<f64> = a.to_f64().iter().zip(b.to_f64()).map(|(x, y)| x + y).collect();
        let ya = model.apply(&a.to_f64()).unwrap();
        let yb = model.apply(&b.to_f64()).unwrap();
        let ys = model.apply(&sum).unwrap();
        for i in 0..17 {
            prop_assert!((ys[i] - ya[i] - yb[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn quantized_omp_stays_in_constellation(seed in any::<u64>(), x in sparse_vector(60, 8), noise in 0.0f64..2.0) {
        let model = generate_matrix(60, 30, seed).unwrap().with_noise_std(noise).unwrap();
        let y = measure(&model, &x, seed ^ 1).unwrap();
        let est = omp_recover(&model, &y, &RecoveryConfig::max_support(8)).unwrap();
        prop_assert!(est.support.len() <= 8);
        let q = est.to_buffer_state(10);
        prop_assert!(q.entries().iter().all(|&v| v <= 10));
        prop_assert!(q.support_size() <= 8);
    }

    #[test]
    fn single_spike_is_recovered(seed in any::<u64>(), k in 0usize..100, v in 1u32..=10) {
        let model = generate_matrix(100, 40, seed).unwrap().with_noise_std(0.0).unwrap();
        let mut e = vec![0; 100];
        e[k] = v;
        let x = BufferStateVector::new(e, 10).unwrap();
        let y = measure(&model, &x, 0).unwrap();
        let est = omp_recover(&model, &y, &RecoveryConfig::max_support(1)).unwrap();
        prop_assert_eq!(est.to_buffer_state(10), x);
    }

    #[test]
    fn brute_force_residual_is_smallest(seed in any::<u64>(), x in sparse_vector(9, 2), noise in 0.0f64..0.5) {
        let model = generate_matrix(9, 6, seed).unwrap().with_noise_std(noise).unwrap();
        let y = measure(&model, &x, seed.wrapping_add(3)).unwrap();
        let bf = brute_force_l0(&model, &y, 2).unwrap();
        let omp = omp_recover(&model, &y, &RecoveryConfig::max_support(2)).unwrap().to_buffer_state(10);
        let r_bf = residual_norm(&model, &y, &bf).unwrap();
        prop_assert!(r_bf <= residual_norm(&model, &y, &x).unwrap() + 1e-12);
        prop_assert!(r_bf <= residual_norm(&model, &y, &omp).unwrap() + 1e-12);
    }
}

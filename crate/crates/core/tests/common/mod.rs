//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigUint;

/// `P[Binomial(n, num/den) >= k]` from an exact rational sum.
pub fn exact_tail(n: u32, num: u64, den: u64, k: u32) -> f64 {
    let p = BigUint::from(num);
    let q = BigUint::from(den - num);
    let mut total = BigUint::from(0u32);
    let mut binom = BigUint::from(1u32);
    for j in 0..=n {
        if j >= k {
            total += &binom * p.pow(j) * q.pow(n - j);
        }
        binom = binom * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    ratio_to_f64(&total, &BigUint::from(den).pow(n))
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.bits() == 0 {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 80;
    let scaled = if shift >= 0 { (num << shift as u64) / den } else { (num >> (-shift) as u64) / den };
    let q = u128::try_from(&scaled).expect("quotient has about 80 bits");
    q as f64 * 2f64.powi(-(shift as i32))
}

/// Minimum two-owner power over `points` interior splits of `t`.
pub fn grid_two_owner(bits: [f64; 2], w: f64, t: f64, kappa: f64, points: usize) -> f64 {
    let power = |b: f64, d: f64| kappa * (2f64.powf(b / (w * d)) - 1.0);
    (1..=points)
        .map(|i| {
            let t1 = t * i as f64 / (points + 1) as f64;
            power(bits[0], t1) + power(bits[1], t - t1)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimum slotted power over every assignment of `d` slots with at least one
/// slot per owner.
pub fn exhaustive_slots(bits: &[f64], d: usize, t_s: f64, w: f64, kappa: f64) -> f64 {
    fn rec(bits: &[f64], left: usize, t_s: f64, w: f64, kappa: f64) -> f64 {
        match bits {
            [] => if left == 0 { 0.0 } else { f64::INFINITY },
            [b] => kappa * (2f64.powf(b / (left as f64 * w * t_s)) - 1.0),
            [b, rest @ ..] => (1..=left.saturating_sub(rest.len()))
                .map(|n| kappa * (2f64.powf(b / (n as f64 * w * t_s)) - 1.0) + rec(rest, left - n, t_s, w, kappa))
                .fold(f64::INFINITY, f64::min),
        }
    }
    rec(bits, d, t_s, w, kappa)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) }
}

//! Unslotted data phase: split a data time `T` among frame owners so that the
//! total transmit power `sum_k kappa (2^(a_k / T_k) - 1)`, `a_k = B_k / W`, is
//! minimal.
//!
//! [`solve_exact`] solves the convex program through its KKT conditions,
//! [`solve_closed_form`] uses the square-root rule of the relaxed problem.
//! [`power_lower_bound`] and [`power_upper_bound`] sandwich the optimum.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest admissible exponent `a_k / T_k`.
pub const EXPONENT_CAP: f64 = 1024.0;
/// Default relative tolerance of [`solve_exact`].
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_NEWTON: usize = 100;
const MAX_OUTER: usize = 400;

/// `kappa (2^exponent - 1)`, refusing exponents above [`EXPONENT_CAP`].
pub fn rate_power(noise_psd: f64, exponent: f64) -> Result<f64> {
    if exponent > EXPONENT_CAP || exponent.is_nan() {
        return Err(Error::Saturation { exponent, cap: EXPONENT_CAP });
    }
    Ok(noise_psd * (exponent * LN_2).exp_m1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    bits: Vec<f64>,
    bandwidth: f64,
    data_time: f64,
    noise_psd: f64,
}

impl AllocationProblem {
    /// All bit counts must be positive; owners with nothing to send are
    /// excluded by the caller.
    pub fn new(bits: Vec<f64>, bandwidth: f64, data_time: f64, noise_psd: f64) -> Result<Self> {
        for (name, v) in [("bandwidth", bandwidth), ("data_time", data_time), ("noise_psd", noise_psd)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if let Some(b) = bits.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::Domain(format!("every owner needs a positive bit count, got {b}")));
        }
        Ok(Self { bits, bandwidth, data_time, noise_psd })
    }

    pub fn bits(&self) -> &[f64] {
        &self.bits
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn data_time(&self) -> f64 {
        self.data_time
    }

    pub fn noise_psd(&self) -> f64 {
        self.noise_psd
    }

    pub fn n_owners(&self) -> usize {
        self.bits.len()
    }

    /// `a_k = B_k / W`, seconds of unit-rate airtime.
    fn airtime(&self, k: usize) -> f64 {
        self.bits[k] / self.bandwidth
    }

    /// Total power of `durations`, with the per-owner powers.
    pub fn evaluate(&self, durations: &[f64]) -> Result<(Vec<f64>, f64)> {
        let powers = durations
            .iter()
            .enumerate()
            .map(|(k, &t)| rate_power(self.noise_psd, self.airtime(k) / t))
            .collect::<Result<Vec<_>>>()?;
        let total = powers.iter().sum();
        Ok((powers, total))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMethod {
    Exact,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousAllocation {
    /// Seconds per owner, in problem order.
    pub durations: Vec<f64>,
    /// Watts/Hz per owner.
    pub powers: Vec<f64>,
    pub total_power: f64,
    pub method: AllocationMethod,
    /// Lagrange multiplier of the time budget (exact solver only).
    pub dual: Option<f64>,
}

/// Exponent `e = a / T_k` solving `ln2 e + 2 ln e = level` (Newton in `ln e`).
///
/// The left side is increasing and convex in `ln e`, so Newton started to the
/// right of the root decreases monotonically onto it.
fn exponent_at(level: f64) -> f64 {
    let mut v = if level > LN_2 { (level / 2.0).min((level / LN_2).ln()) } else { level / 2.0 };
    for _ in 0..MAX_NEWTON {
        let e = v.exp();
        let g = LN_2 * e + 2.0 * v - level;
        let step = g / (LN_2 * e + 2.0);
        v -= step;
        if step.abs() <= 1e-15 * v.abs().max(1.0) {
            break;
        }
    }
    v.exp()
}

/// Exact power-minimizing split of the data time.
///
/// Stationarity gives `kappa ln2 a_k 2^(a_k/T_k) / T_k^2 = nu` for every
/// owner. With `e_k = a_k / T_k` this reads
/// `ln2 e_k + 2 ln e_k = ln nu - ln(kappa ln2) + ln a_k`, which has a unique
/// root per owner. The outer loop finds `ln nu` with `sum_k T_k = T` by
/// safeguarded Newton on a bracket. Durations are finally rescaled to use the
/// budget exactly.
pub fn solve_exact(p: &AllocationProblem, tol: f64) -> Result<ContinuousAllocation> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let n = p.n_owners();
    if n == 0 {
        return Ok(ContinuousAllocation {
            durations: vec![],
            powers: vec![],
            total_power: 0.0,
            method: AllocationMethod::Exact,
            dual: None,
        });
    }
    let t_total = p.data_time();
    let ln_kappa_ln2 = (p.noise_psd() * LN_2).ln();
    let ln_a: Vec<f64> = (0..n).map(|k| p.airtime(k).ln()).collect();
    // ln nu at which owner k uses exponent e
    let level_for = |k: usize, e: f64| LN_2 * e + 2.0 * e.ln() + ln_kappa_ln2 - ln_a[k];

    // lo: every T_k >= T; hi: every T_k <= T / n
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let a = p.airtime(k);
        lo = lo.min(level_for(k, a / t_total));
        hi = hi.max(level_for(k, a * n as f64 / t_total));
    }

    let durations_at = |ln_nu: f64, out: &mut Vec<f64>| -> (f64, f64) {
        out.clear();
        let mut sum = 0.0;
        let mut slope = 0.0;
        for k in 0..n {
            let e = exponent_at(ln_nu - ln_kappa_ln2 + ln_a[k]);
            let t = p.airtime(k) / e;
            sum += t;
            // dT/d ln nu = -(a/e^2) de/dlevel = -t / (ln2 e + 2)
            slope -= t / (LN_2 * e + 2.0);
            out.push(t);
        }
        (sum - t_total, slope)
    };

    let mut durations = Vec::with_capacity(n);
    let mut ln_nu = 0.5 * (lo + hi);
    for _ in 0..MAX_OUTER {
        let (gap, slope) = durations_at(ln_nu, &mut durations);
        if gap.abs() <= tol * t_total * 1e-3 {
            break;
        }
        if gap > 0.0 {
            lo = ln_nu;
        } else {
            hi = ln_nu;
        }
        let newton = ln_nu - gap / slope;
        ln_nu = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * ln_nu.abs().max(1.0) {
            durations_at(ln_nu, &mut durations);
            break;
        }
    }

    let sum: f64 = durations.iter().sum();
    if (sum - t_total).abs() > tol * t_total {
        return Err(Error::Domain(format!(
            "exact solver did not converge: sum of durations {sum} vs budget {t_total}"
        )));
    }
    let scale = t_total / sum;
    for t in durations.iter_mut() {
        *t *= scale;
    }
    let (powers, total_power) = p.evaluate(&durations)?;
    Ok(ContinuousAllocation {
        durations,
        powers,
        total_power,
        method: AllocationMethod::Exact,
        dual: Some(ln_nu.exp()),
    })
}

/// Square-root rule: `T_k = T sqrt(B_k) / sum_j sqrt(B_j)`.
pub fn solve_closed_form(p: &AllocationProblem) -> Result<ContinuousAllocation> {
    let roots: Vec<f64> = p.bits().iter().map(|b| b.sqrt()).collect();
    let root_sum: f64 = roots.iter().sum();
    let durations: Vec<f64> = roots.iter().map(|r| p.data_time() * r / root_sum).collect();
    let (powers, total_power) = p.evaluate(&durations)?;
    Ok(ContinuousAllocation {
        durations,
        powers,
        total_power,
        method: AllocationMethod::ClosedForm,
        dual: None,
    })
}

/// Total power of the square-root rule written out directly:
/// `sum_k kappa (2^(sqrt(B_k) sum_j sqrt(B_j) / (T W)) - 1)`.
pub fn power_upper_bound(p: &AllocationProblem) -> Result<f64> {
    let root_sum: f64 = p.bits().iter().map(|b| b.sqrt()).sum();
    let tw = p.data_time() * p.bandwidth();
    p.bits().iter().map(|b| rate_power(p.noise_psd(), b.sqrt() * root_sum / tw)).sum()
}

/// Upper bound when all `owners` queues are full: `kappa K (2^(K L b / (T W)) - 1)`.
pub fn full_buffer_upper_bound(owners: usize, queue_bits: f64, bandwidth: f64, data_time: f64, noise_psd: f64) -> Result<f64> {
    let k = owners as f64;
    Ok(k * rate_power(noise_psd, k * queue_bits / (data_time * bandwidth))?)
}

/// Power to send all `total_bits` from one virtual buffer: `kappa (2^(B / (W T)) - 1)`.
pub fn power_lower_bound(total_bits: f64, bandwidth: f64, data_time: f64, noise_psd: f64) -> Result<f64> {
    if !(total_bits >= 0.0) {
        return Err(Error::Domain(format!("total bits must be >= 0, got {total_bits}")));
    }
    rate_power(noise_psd, total_bits / (bandwidth * data_time))
}

/// Largest relative deviation of the per-owner marginal power
/// `kappa ln2 a_k 2^(a_k/T_k) / T_k^2` from the multiplier `nu`.
pub fn kkt_residual(p: &AllocationProblem, alloc: &ContinuousAllocation) -> Option<f64> {
    let nu = alloc.dual?;
    let ln_nu = nu.ln();
    let ln_kappa_ln2 = (p.noise_psd() * LN_2).ln();
    alloc
        .durations
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let a = p.airtime(k);
            let ln_marginal = ln_kappa_ln2 + a.ln() + LN_2 * a / t - 2.0 * t.ln();
            (ln_marginal - ln_nu).exp_m1().abs()
        })
        .reduce(f64::max)
}

//! Operating-point design: how many simultaneous requests the decoder must
//! handle (sparsity level `S`), the request probability `alpha` that keeps
//! the request vector that sparse, and the measurement count `M` needed to
//! decode it.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SystemConfig;
use crate::cs_recovery::{generate_matrix, measure, omp_recover, BufferStateVector, RecoveryConfig};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream_rng};

/// Default `M / S` ratio of the heuristic measurement rule.
pub const DEFAULT_RATIO_C: f64 = 5.0;
/// Bisection resolution of [`max_request_prob`].
pub const REQUEST_PROB_RESOLUTION: f64 = 1e-6;

/// `P[Binomial(n, p) >= k]`, evaluated in log space.
pub fn tail_prob(n: usize, p: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    Ok(tail_unchecked(n, p, k))
}

/// Same as [`tail_prob`] but allows `k = n + 1` (empty sum, zero).
fn tail_unchecked(n: usize, p: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_pmf = |j: usize, ln_choose: f64| ln_choose + j as f64 * ln_p + (n - j) as f64 * ln_q;

    let mut ln_choose = 0.0;
    let mut terms = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            ln_choose += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        terms.push(ln_pmf(j, ln_choose));
    }
    // sum whichever side of the mean is the small one
    if k as f64 > n as f64 * p {
        log_sum_exp(&terms[k..]).exp().min(1.0)
    } else {
        (1.0 - log_sum_exp(&terms[..k]).exp()).clamp(0.0, 1.0)
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Smallest `S` with `P[Binomial(n, p) > S] <= epsilon`: the sparsity level
/// that a request probability `p` supports when every node has data.
pub fn sparsity_for_request_prob(n: usize, p: f64, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    // tail is nonincreasing in k and vanishes at k = n + 1
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if tail_unchecked(n, p, mid + 1) <= epsilon {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Natural sparsity level of `n` nodes that are each nonempty with probability `p`.
///
/// Smallest `S` with `P[Binomial(n, p) >= S] <= epsilon`, i.e. one request of
/// headroom over [`sparsity_for_request_prob`]; 0 when even a single request
/// has probability at most `epsilon`.
pub fn min_sparsity_level(n: usize, p: f64, epsilon: f64) -> Result<usize> {
    let s = sparsity_for_request_prob(n, p, epsilon)?;
    Ok(if s == 0 { 0 } else { (s + 1).min(n) })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Largest request probability with `P[Binomial(n, alpha) > sparsity] <= epsilon`.
///
/// Scans a uniform grid of `grid` points on `[0, 1]`, then bisects between the
/// last feasible and first infeasible grid point down to
/// [`REQUEST_PROB_RESOLUTION`]. The returned value is always feasible.
pub fn max_request_prob(n: usize, sparsity: usize, epsilon: f64, grid: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    if grid < 2 {
        return Err(Error::Domain(format!("grid must have >= 2 points, got {grid}")));
    }
    if sparsity >= n {
        return Ok(1.0);
    }
    let feasible = |a: f64| tail_unchecked(n, a, sparsity + 1) <= epsilon;
    let step = 1.0 / (grid - 1) as f64;
    let point = |i: usize| if i == grid - 1 { 1.0 } else { i as f64 * step };
    let mut last = 0;
    for i in 1..grid {
        if feasible(point(i)) {
            last = i;
        } else {
            break;
        }
    }
    if last == grid - 1 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (point(last), point(last + 1));
    while hi - lo > REQUEST_PROB_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Monte Carlo calibration of the measurement count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloCalibration {
    pub n_users: usize,
    /// Admissible per-element decoding failure rate.
    pub target_fail: f64,
    pub trials: usize,
    pub constellation_max: u32,
    pub noise_std: f64,
    pub seed: u64,
}

impl MonteCarloCalibration {
    pub fn new(n_users: usize, target_fail: f64, trials: usize) -> Self {
        Self { n_users, target_fail, trials, constellation_max: 10, noise_std: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementRule {
    /// `M = ceil(c S)`.
    Heuristic { ratio_c: f64 },
    MonteCarlo(MonteCarloCalibration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementCount {
    pub n_measurements: usize,
    /// Calibration could not reach its target even with `M = N`.
    pub saturated: bool,
}

/// How many nonzero entries each random test request carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportSize {
    /// Exactly this many (the worst case for a decoder designed for it).
    Exact(usize),
    /// Uniform over `1..=s`.
    UniformUpTo(usize),
}

impl SupportSize {
    fn max(self) -> usize {
        match self {
            SupportSize::Exact(s) | SupportSize::UniformUpTo(s) => s,
        }
    }
}

/// Decoding error counts over a batch of random sparse requests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecoveryStats {
    pub trials: usize,
    pub n_users: usize,
    /// Entries of the recovered vectors that differ from the truth.
    pub element_errors: usize,
    /// Trials with at least one wrong entry.
    pub failed_trials: usize,
}

impl RecoveryStats {
    /// Probability that a given entry of the request vector is decoded wrongly.
    pub fn per_element_failure(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.element_errors as f64 / (self.trials * self.n_users) as f64
    }

    pub fn trial_failure(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.failed_trials as f64 / self.trials as f64
    }
}

/// Runs noisy or noiseless OMP (stopping at the largest admissible support,
/// quantized) on `trials` random instances: a fresh matrix per trial and
/// nonzero entries drawn uniformly from `{1, .., L}`.
///
/// Trial `t` uses the same random stream for every `n_measurements`, so
/// failure curves over `M` share their randomness.
pub fn omp_recovery_stats(
    n_users: usize,
    n_measurements: usize,
    support: SupportSize,
    trials: usize,
    constellation_max: u32,
    noise_std: f64,
    seed: u64,
) -> Result<RecoveryStats> {
    let max_support = support.max();
    if max_support == 0 || max_support > n_users {
        return Err(Error::Domain(format!("support must lie in 1..={n_users}, got {max_support}")));
    }
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut rng = stream_rng(seed, t as u64);
            let model = generate_matrix(n_users, n_measurements, rng.random())?
                .with_noise_std(noise_std)?
                .with_constellation_max(constellation_max);
            let size = match support {
                SupportSize::Exact(s) => s,
                SupportSize::UniformUpTo(s) => rng.random_range(1..=s),
            };
            let mut entries = vec![0u32; n_users];
            for k in sample(&mut rng, n_users, size) {
                entries[k] = rng.random_range(1..=constellation_max);
            }
            let x = BufferStateVector::new(entries, constellation_max)?;
            let y = measure(&model, &x, rng.random())?;
            let est = omp_recover(&model, &y, &RecoveryConfig::max_support(max_support))?;
            Ok(est.to_buffer_state(constellation_max).mismatches(&x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryStats {
        trials,
        n_users,
        element_errors: per_trial.iter().sum(),
        failed_trials: per_trial.iter().filter(|&&e| e > 0).count(),
    })
}

/// Measurement count for decoding `S`-sparse requests.
///
/// The Monte Carlo rule returns the smallest `M` in `S+1..=N` whose
/// per-element failure on exactly `S`-sparse requests is at most the target,
/// found by binary search.
pub fn measurements_for_sparsity(sparsity: usize, rule: &MeasurementRule) -> Result<MeasurementCount> {
    if sparsity == 0 {
        return Err(Error::Domain("sparsity must be >= 1".into()));
    }
    match *rule {
        MeasurementRule::Heuristic { ratio_c } => {
            if !(ratio_c > 0.0 && ratio_c.is_finite()) {
                return Err(Error::Domain(format!("ratio_c must be positive, got {ratio_c}")));
            }
            Ok(MeasurementCount { n_measurements: (ratio_c * sparsity as f64).ceil() as usize, saturated: false })
        }
        MeasurementRule::MonteCarlo(mc) => {
            if sparsity >= mc.n_users {
                return Ok(MeasurementCount { n_measurements: mc.n_users, saturated: true });
            }
            let fail = |m: usize| -> Result<f64> {
                let seed = derive_seed(mc.seed, sparsity as u64);
                Ok(omp_recovery_stats(mc.n_users, m, SupportSize::Exact(sparsity), mc.trials, mc.constellation_max, mc.noise_std, seed)?
                    .per_element_failure())
            };
            if fail(mc.n_users)? > mc.target_fail {
                return Ok(MeasurementCount { n_measurements: mc.n_users, saturated: true });
            }
            let (mut lo, mut hi) = (sparsity + 1, mc.n_users);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if fail(mid)? <= mc.target_fail {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(MeasurementCount { n_measurements: lo, saturated: false })
        }
    }
}

/// The `(alpha, S, M)` operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparsityDesign {
    pub n_users: usize,
    pub sparsity_level: usize,
    pub request_prob: f64,
    pub epsilon: f64,
    pub n_measurements: usize,
    pub ratio_c: f64,
    /// Probability that a node has data, as assumed by the design (1 for the
    /// worst case where every queue is nonempty).
    pub activity: f64,
    /// Arrivals alone keep the request vector sparse; every node requests.
    pub naturally_sparse: bool,
    /// `S` was raised from 0 to 1.
    pub floored: bool,
}

impl SparsityDesign {
    /// Builds a design and checks `S < M <= N` and the sparsity condition
    /// `P[Binomial(N, alpha * activity) > S] <= epsilon`.
    pub fn new(
        n_users: usize,
        sparsity_level: usize,
        request_prob: f64,
        activity: f64,
        epsilon: f64,
        n_measurements: usize,
    ) -> Result<Self> {
        if !(sparsity_level < n_measurements && n_measurements <= n_users) {
            return Err(Error::Infeasible(format!(
                "need S < M <= N, got S = {sparsity_level}, M = {n_measurements}, N = {n_users}"
            )));
        }
        let tail = tail_unchecked(n_users, request_prob * activity, sparsity_level + 1);
        if tail > epsilon {
            return Err(Error::Infeasible(format!(
                "P[more than {sparsity_level} requests] = {tail:e} exceeds epsilon = {epsilon:e}"
            )));
        }
        Ok(Self {
            n_users,
            sparsity_level,
            request_prob,
            epsilon,
            n_measurements,
            ratio_c: n_measurements as f64 / sparsity_level as f64,
            activity,
            naturally_sparse: false,
            floored: false,
        })
    }
}

/// Grid used when searching the request probability for a sparsity level.
const DESIGN_GRID: usize = 1001;

/// Chooses the operating point for `cfg`.
///
/// Uses `cfg.arrival_rate` as the probability that a queue is nonempty. If
/// the arrival process alone keeps the request vector sparse with
/// `M < N / 2`, every nonempty node requests (`alpha = 1`). Otherwise the
/// largest `S` with `M(S) < N / 2` is taken, which maximizes the expected
/// number of requests `alpha(S) N`, with `alpha(S)` from [`max_request_prob`].
///
/// A fixed `cfg.request_prob` bypasses the search: `S` then follows from the
/// worst case where every node has data.
pub fn design_operating_point(cfg: &SystemConfig) -> Result<SparsityDesign> {
    cfg.validate()?;
    let n = cfg.n_users;
    let rule = MeasurementRule::Heuristic { ratio_c: cfg.ratio_c };
    let m_of = |s: usize| -> Result<usize> {
        if cfg.n_measurements > 0 {
            Ok(cfg.n_measurements)
        } else {
            Ok(measurements_for_sparsity(s, &rule)?.n_measurements.min(n))
        }
    };
    let useful = |m: usize| 2 * m < n;

    if let Some(alpha) = cfg.request_prob {
        let s = sparsity_for_request_prob(n, alpha, cfg.epsilon)?;
        let floored = s == 0;
        let s = s.max(1);
        let mut d = SparsityDesign::new(n, s, alpha, 1.0, cfg.epsilon, m_of(s)?)?;
        d.floored = floored;
        return Ok(d);
    }

    let natural = min_sparsity_level(n, cfg.arrival_rate, cfg.epsilon)?;
    let floored = natural == 0;
    let s = natural.max(1);
    let m = m_of(s)?;
    if useful(m) {
        let mut d = SparsityDesign::new(n, s, 1.0, cfg.arrival_rate, cfg.epsilon, m)?;
        d.naturally_sparse = true;
        d.floored = floored;
        return Ok(d);
    }

    // alpha(S) N grows with S, so the best design is the largest useful S
    let mut best = None;
    for s in 1..n {
        let m = m_of(s)?;
        if !useful(m) || s >= m {
            if cfg.n_measurements == 0 {
                break;
            }
            continue;
        }
        best = Some((s, m));
    }
    let Some((s, m)) = best else {
        return Err(Error::Infeasible(format!("no sparsity level gives M < N / 2 = {}", n / 2)));
    };
    let alpha = max_request_prob(n, s, cfg.epsilon, DESIGN_GRID)?;
    SparsityDesign::new(n, s, alpha, 1.0, cfg.epsilon, m)
}

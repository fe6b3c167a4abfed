//! Slotted data phase: `D` slots of equal length `T_s` handed to frame owners.
//!
//! Two strategies:
//! * throughput: at most one slot per owner, the destination only announces
//!   the served count and IDs;
//! * power saving: every owner gets a slot and leftover slots go to the owners
//!   whose power drops the most, at the price of also announcing slot counts.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::config::{Duplex, ExtraSlotRule};
use crate::error::{Error, Result};
use crate::time_allocation::rate_power;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotStrategy {
    Throughput,
    PowerSaving,
}

/// Frame layout parameters shared by both strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotFrame {
    pub n_slots: usize,
    /// Symbols spent on request signaling (`M`, or `N` for per-user signaling).
    pub signaling_symbols: usize,
    pub bandwidth: f64,
    pub frame_duration: f64,
    /// Full-duplex nodes schedule themselves, so no destination feedback is sent.
    pub duplex: Duplex,
}

impl SlotFrame {
    pub fn new(n_slots: usize, signaling_symbols: usize, bandwidth: f64, frame_duration: f64) -> Self {
        Self { n_slots, signaling_symbols, bandwidth, frame_duration, duplex: Duplex::Half }
    }

    pub fn with_duplex(mut self, duplex: Duplex) -> Self {
        self.duplex = duplex;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(Error::Domain("need at least one data slot".into()));
        }
        if !(self.bandwidth > 0.0) || !(self.frame_duration > 0.0) {
            return Err(Error::Domain("bandwidth and frame duration must be positive".into()));
        }
        Ok(())
    }

    /// Overhead for `feedback_symbols` destination symbols after the requests.
    fn overhead(&self, feedback_symbols: usize) -> f64 {
        let symbols = match self.duplex {
            Duplex::Half => self.signaling_symbols + feedback_symbols,
            Duplex::Full => self.signaling_symbols,
        };
        symbols as f64 / self.bandwidth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlottedPlan {
    /// Served owner IDs, ascending.
    pub served_ids: Vec<usize>,
    /// Slots of each served owner, parallel to `served_ids`.
    pub slots_per_owner: Vec<usize>,
    /// Seconds.
    pub slot_duration: f64,
    pub n_slots: usize,
    /// Seconds of signaling and feedback.
    pub overhead_time: f64,
    pub strategy: SlotStrategy,
    /// Overheads consumed the whole frame (`T_s = 0`).
    pub degenerate: bool,
}

impl SlottedPlan {
    pub fn served(&self) -> usize {
        self.served_ids.len()
    }

    pub fn used_slots(&self) -> usize {
        self.slots_per_owner.iter().sum()
    }

    pub fn slots_of(&self, id: usize) -> Option<usize> {
        self.served_ids.iter().position(|&s| s == id).map(|i| self.slots_per_owner[i])
    }

    /// Data time actually occupied.
    pub fn data_time(&self) -> f64 {
        self.used_slots() as f64 * self.slot_duration
    }

    /// Total power when each served owner sends `bits(id)` over its slots.
    pub fn total_power(&self, bits: impl Fn(usize) -> f64, bandwidth: f64, noise_psd: f64) -> Result<f64> {
        self.served_ids
            .iter()
            .zip(&self.slots_per_owner)
            .map(|(&id, &n)| slotted_power(bits(id), n, self.slot_duration, bandwidth, noise_psd))
            .sum()
    }
}

/// `kappa (2^(B / (n W T_s)) - 1)`.
pub fn slotted_power(bits: f64, n_slots: usize, slot_duration: f64, bandwidth: f64, noise_psd: f64) -> Result<f64> {
    if !(slot_duration > 0.0) {
        return Err(Error::Degenerate(format!("slot duration must be positive, got {slot_duration}")));
    }
    if n_slots == 0 {
        return Err(Error::Domain("an owner needs at least one slot".into()));
    }
    rate_power(noise_psd, bits / (n_slots as f64 * bandwidth * slot_duration))
}

/// Owners sorted by bits descending, then ID ascending.
fn by_occupancy(owners: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut sorted = owners.to_vec();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    sorted
}

fn slot_duration(frame: &SlotFrame, overhead: f64) -> f64 {
    ((frame.frame_duration - overhead) / frame.n_slots as f64).max(0.0)
}

fn finish(mut served: Vec<(usize, usize)>, frame: &SlotFrame, overhead: f64, strategy: SlotStrategy) -> SlottedPlan {
    served.sort_by_key(|&(id, _)| id);
    let t_s = slot_duration(frame, overhead);
    SlottedPlan {
        served_ids: served.iter().map(|&(id, _)| id).collect(),
        slots_per_owner: served.iter().map(|&(_, n)| n).collect(),
        slot_duration: t_s,
        n_slots: frame.n_slots,
        overhead_time: overhead,
        strategy,
        degenerate: t_s == 0.0,
    }
}

/// One slot per owner; with more owners than slots the `D` fullest queues win.
///
/// Feedback: the served count plus one ID per served owner.
pub fn plan_throughput(owners: &[(usize, f64)], frame: &SlotFrame) -> Result<SlottedPlan> {
    frame.validate()?;
    let served: Vec<(usize, usize)> = by_occupancy(owners).into_iter().take(frame.n_slots).map(|(id, _)| (id, 1)).collect();
    let overhead = frame.overhead(served.len() + 1);
    Ok(finish(served, frame, overhead, SlotStrategy::Throughput))
}

/// Every owner gets a slot; leftover slots go one at a time to the owner with
/// the largest power decrease (ties: more bits, then lower ID), or
/// round-robin by occupancy under [`ExtraSlotRule::RoundRobin`].
///
/// With at least `D` owners this is the throughput plan. Otherwise the
/// feedback also carries the slot counts: `2 T + 1` symbols.
pub fn plan_power_saving(owners: &[(usize, f64)], frame: &SlotFrame, rule: ExtraSlotRule) -> Result<SlottedPlan> {
    frame.validate()?;
    if owners.len() >= frame.n_slots {
        let mut plan = plan_throughput(owners, frame)?;
        plan.strategy = SlotStrategy::PowerSaving;
        return Ok(plan);
    }
    let sorted = by_occupancy(owners);
    let overhead = frame.overhead(2 * sorted.len() + 1);
    let t_s = slot_duration(frame, overhead);
    let mut slots = vec![1usize; sorted.len()];
    let extra = frame.n_slots - sorted.len();
    if !sorted.is_empty() {
        if rule == ExtraSlotRule::RoundRobin || t_s == 0.0 {
            for i in 0..extra {
                slots[i % sorted.len()] += 1;
            }
        } else {
            let unit = frame.bandwidth * t_s;
            for _ in 0..extra {
                // `sorted` is already in tie-break order, so the first maximum wins
                let mut best = 0;
                let mut best_gain = f64::NEG_INFINITY;
                for (i, &(_, bits)) in sorted.iter().enumerate() {
                    let gain = ln_marginal_gain(bits / unit, slots[i]);
                    if gain > best_gain {
                        best_gain = gain;
                        best = i;
                    }
                }
                slots[best] += 1;
            }
        }
    }
    let served = sorted.iter().zip(slots).map(|(&(id, _), n)| (id, n)).collect();
    Ok(finish(served, frame, overhead, SlotStrategy::PowerSaving))
}

/// `ln(2^(c/n) - 2^(c/(n+1)))`, the log power saved by an `(n+1)`-th slot,
/// with `c = B / (W T_s)`.
fn ln_marginal_gain(c: f64, n: usize) -> f64 {
    let n = n as f64;
    if c == 0.0 {
        return f64::NEG_INFINITY;
    }
    LN_2 * c / (n + 1.0) + (LN_2 * c / (n * (n + 1.0))).exp_m1().ln()
}

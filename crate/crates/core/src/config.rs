//! Static system parameters shared by the design, allocation and simulation layers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Duplex {
    Half,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    UnslottedExact,
    UnslottedClosedForm,
    SlottedThroughput,
    SlottedPowerSaving,
    FixedAssignment,
    PerUserSignaling,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::UnslottedExact,
        Scheme::UnslottedClosedForm,
        Scheme::SlottedThroughput,
        Scheme::SlottedPowerSaving,
        Scheme::FixedAssignment,
        Scheme::PerUserSignaling,
    ];

    /// True for the four schemes that divide a data phase among detected owners.
    pub fn is_allocation(self) -> bool {
        !matches!(self, Scheme::FixedAssignment | Scheme::PerUserSignaling)
    }

    pub fn is_slotted(self) -> bool {
        matches!(self, Scheme::SlottedThroughput | Scheme::SlottedPowerSaving)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    /// Requests within the sparsity level are decoded perfectly.
    Idealized,
    /// Noisy measurements decoded by OMP.
    Physical,
}

/// How leftover slots are handed out by the power-saving slotted strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraSlotRule {
    /// One slot at a time to the owner with the largest power decrease.
    MarginalPower,
    /// Cycle through owners in decreasing occupancy.
    RoundRobin,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!(
                        "unknown value `{}` (expected one of: {})",
                        other,
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(Duplex { Duplex::Half => "half", Duplex::Full => "full" });
keyword_enum!(Detection { Detection::Idealized => "idealized", Detection::Physical => "physical" });
keyword_enum!(ExtraSlotRule {
    ExtraSlotRule::MarginalPower => "marginal_power",
    ExtraSlotRule::RoundRobin => "round_robin",
});
keyword_enum!(Scheme {
    Scheme::UnslottedExact => "unslotted_exact",
    Scheme::UnslottedClosedForm => "unslotted_closed_form",
    Scheme::SlottedThroughput => "slotted_throughput",
    Scheme::SlottedPowerSaving => "slotted_power_saving",
    Scheme::FixedAssignment => "fixed_assignment",
    Scheme::PerUserSignaling => "per_user_signaling",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_users: usize,
    /// Hz.
    pub bandwidth: f64,
    /// Seconds.
    pub frame_duration: f64,
    /// Watts/Hz.
    pub noise_psd: f64,
    /// Packets per queue.
    pub buffer_capacity: u32,
    pub packet_bits: u64,
    /// Bernoulli arrival probability per queue per frame.
    pub arrival_rate: f64,
    pub epsilon: f64,
    pub n_slots: usize,
    pub duplex: Duplex,
    pub scheme: Scheme,
    /// Allocation used behind per-user signaling.
    pub per_user_allocation: Scheme,
    pub extra_slot_rule: ExtraSlotRule,
    pub detection: Detection,
    pub request_noise_std: f64,
    pub self_interference_std: f64,
    /// `M / S` used when the measurement count is derived from the sparsity level.
    pub ratio_c: f64,
    /// Measurement count override; 0 derives it from the sparsity level.
    pub n_measurements: usize,
    /// Request probability override; unset means designed from the arrival rate.
    pub request_prob: Option<f64>,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_users: 400,
            bandwidth: 5e6,
            frame_duration: 1e-3,
            noise_psd: 1e-9,
            buffer_capacity: 10,
            packet_bits: 100,
            arrival_rate: 0.01,
            epsilon: 1e-4,
            n_slots: 20,
            duplex: Duplex::Half,
            scheme: Scheme::UnslottedExact,
            per_user_allocation: Scheme::UnslottedExact,
            extra_slot_rule: ExtraSlotRule::MarginalPower,
            detection: Detection::Idealized,
            request_noise_std: 0.01,
            self_interference_std: 1.0,
            ratio_c: 5.0,
            n_measurements: 0,
            request_prob: None,
            seed: 1,
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> Error {
    Error::InvalidValue { key: key.to_string(), message: message.into() }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a finite positive number, got {v}")))
    }
}

fn probability(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(key, format!("must lie in [0, 1], got {v}")))
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(invalid("n_users", "must be >= 1"));
        }
        positive("bandwidth", self.bandwidth)?;
        positive("frame_duration", self.frame_duration)?;
        positive("noise_psd", self.noise_psd)?;
        if self.buffer_capacity == 0 {
            return Err(invalid("buffer_capacity", "must be >= 1"));
        }
        if self.packet_bits == 0 {
            return Err(invalid("packet_bits", "must be >= 1"));
        }
        probability("arrival_rate", self.arrival_rate)?;
        probability("epsilon", self.epsilon)?;
        if self.epsilon == 0.0 || self.epsilon == 1.0 {
            return Err(invalid("epsilon", "must lie strictly inside (0, 1)"));
        }
        if self.n_slots == 0 {
            return Err(invalid("n_slots", "must be >= 1"));
        }
        if !self.per_user_allocation.is_allocation() {
            return Err(invalid("per_user_allocation", "must be one of the unslotted/slotted allocation schemes"));
        }
        if !(self.request_noise_std >= 0.0 && self.request_noise_std.is_finite()) {
            return Err(invalid("request_noise_std", "must be finite and >= 0"));
        }
        if !(self.self_interference_std >= 0.0 && self.self_interference_std.is_finite()) {
            return Err(invalid("self_interference_std", "must be finite and >= 0"));
        }
        if !(self.ratio_c >= 1.0 && self.ratio_c.is_finite()) {
            return Err(invalid("ratio_c", "must be finite and >= 1"));
        }
        if self.n_measurements > self.n_users {
            return Err(invalid("n_measurements", "must not exceed n_users"));
        }
        if let Some(a) = self.request_prob {
            probability("request_prob", a)?;
        }
        Ok(())
    }

    /// Bits a full queue holds.
    pub fn queue_bits(&self) -> u64 {
        self.buffer_capacity as u64 * self.packet_bits
    }
}

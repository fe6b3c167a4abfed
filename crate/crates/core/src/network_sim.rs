//! Frame-by-frame simulation of the request, allocation and transmission cycle.
//!
//! Each frame: nodes with data announce their queue state (subject to the
//! request gate), the destination recovers the requests, the data phase is
//! divided among the detected owners, owners transmit, and finally new packets
//! arrive. Arrivals, request gates, detection noise and self-interference each
//! draw from their own random stream, so runs that differ only in the scheme
//! or the duplex mode see identical arrivals.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{Detection, Duplex, Scheme, SystemConfig};
use crate::cs_recovery::{
    add_noise, generate_matrix, measure, omp_recover, BufferStateVector, MeasurementModel, MeasurementVector,
    RecoveryConfig,
};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream_rng};
use crate::slot_allocation::{plan_power_saving, plan_throughput, SlotFrame};
use crate::sparsity_design::{design_operating_point, SparsityDesign};
use crate::time_allocation::{rate_power, solve_closed_form, solve_exact, AllocationProblem, DEFAULT_TOL};

const STREAM_ARRIVALS: u64 = 0;
const STREAM_GATES: u64 = 1;
const STREAM_DETECTION: u64 = 2;
const STREAM_SELF_GAIN: u64 = 3;
const STREAM_MATRIX: u64 = 4;

/// Queue occupancies in packets, each within `0..=capacity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueState {
    occupancy: Vec<u32>,
    capacity: u32,
}

impl QueueState {
    pub fn empty(n_users: usize, capacity: u32) -> Self {
        Self { occupancy: vec![0; n_users], capacity }
    }

    pub fn new(occupancy: Vec<u32>, capacity: u32) -> Result<Self> {
        if let Some(k) = occupancy.iter().position(|&q| q > capacity) {
            return Err(Error::Domain(format!("queue {k} holds {} > capacity {capacity}", occupancy[k])));
        }
        Ok(Self { occupancy, capacity })
    }

    pub fn occupancy(&self) -> &[u32] {
        &self.occupancy
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn nonempty(&self) -> usize {
        self.occupancy.iter().filter(|&&q| q > 0).count()
    }

    pub fn total_packets(&self) -> u64 {
        self.occupancy.iter().map(|&q| q as u64).sum()
    }

    fn remove(&mut self, k: usize, packets: u32) {
        debug_assert!(packets <= self.occupancy[k]);
        self.occupancy[k] -= packets;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArrivalCounts {
    pub arrived: u64,
    pub dropped: u64,
}

/// One Bernoulli(`arrival_rate`) packet per queue; packets beyond the capacity
/// are dropped.
///
/// A uniform is drawn for every queue whether or not it is full, so the stream
/// position does not depend on the queue state.
pub fn step_arrivals(state: &mut QueueState, arrival_rate: f64, rng: &mut impl Rng) -> ArrivalCounts {
    let mut counts = ArrivalCounts::default();
    let cap = state.capacity;
    for q in state.occupancy.iter_mut() {
        if rng.random::<f64>() < arrival_rate {
            counts.arrived += 1;
            if *q < cap {
                *q += 1;
            } else {
                counts.dropped += 1;
            }
        }
    }
    counts
}

/// Nonempty queues announce their occupancy when a Bernoulli(`alpha`) gate
/// passes. Gated-off packets stay queued.
pub fn emit_requests(state: &QueueState, design: &SparsityDesign, rng: &mut impl Rng) -> BufferStateVector {
    let alpha = design.request_prob;
    let entries = state
        .occupancy
        .iter()
        .map(|&q| {
            let pass = rng.random::<f64>() < alpha;
            if q > 0 && pass { q } else { 0 }
        })
        .collect();
    BufferStateVector::new(entries, state.capacity).expect("occupancies are within capacity")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    pub detected: BufferStateVector,
    /// Entries where the detected vector differs from the requests.
    pub errors: usize,
}

/// Keeps the `sparsity` largest requests (ties: lower ID) and zeroes the rest.
pub fn idealized_detection(x: &BufferStateVector, sparsity: usize) -> DetectionOutcome {
    let support = x.support();
    if support.len() <= sparsity {
        return DetectionOutcome { detected: x.clone(), errors: 0 };
    }
    let mut ranked = support;
    ranked.sort_by(|&a, &b| x.get(b).cmp(&x.get(a)).then(a.cmp(&b)));
    let mut detected = BufferStateVector::zeros(x.len());
    for &k in &ranked[..sparsity] {
        detected.set(k, x.get(k));
    }
    DetectionOutcome { detected, errors: ranked.len() - sparsity }
}

/// Noisy measurement followed by OMP with at most `sparsity` columns and
/// quantization to the constellation of `model`.
pub fn physical_detection(
    model: &MeasurementModel,
    x: &BufferStateVector,
    sparsity: usize,
    rng: &mut impl RngCore,
) -> Result<DetectionOutcome> {
    let y = measure(model, x, rng.next_u64())?;
    let estimate = omp_recover(model, &y, &RecoveryConfig::max_support(sparsity))?;
    let detected = estimate.to_buffer_state(model.constellation_max());
    let errors = x.mismatches(&detected);
    Ok(DetectionOutcome { detected, errors })
}

/// Everything about a run that stays fixed across frames.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: SystemConfig,
    design: Option<SparsityDesign>,
    model: Option<MeasurementModel>,
}

impl Scenario {
    /// Validates `cfg`, designs the operating point for the allocation schemes
    /// and draws the measurement matrix for physical detection.
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let (design, model) = if cfg.scheme.is_allocation() {
            let design = design_operating_point(&cfg)?;
            let model = match cfg.detection {
                Detection::Idealized => None,
                Detection::Physical => Some(
                    generate_matrix(cfg.n_users, design.n_measurements, derive_seed(cfg.seed, STREAM_MATRIX))?
                        .with_noise_std(cfg.request_noise_std)?
                        .with_constellation_max(cfg.buffer_capacity),
                ),
            };
            (Some(design), model)
        } else {
            (None, None)
        };
        Ok(Self { cfg, design, model })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// Operating point; `None` for the baselines.
    pub fn design(&self) -> Option<&SparsityDesign> {
        self.design.as_ref()
    }

    /// Measurement matrix; `None` unless detection is physical.
    pub fn model(&self) -> Option<&MeasurementModel> {
        self.model.as_ref()
    }

    fn require_design(&self) -> Result<&SparsityDesign> {
        self.design
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("scheme {} has no sparsity design", self.cfg.scheme)))
    }

    /// Requests as seen by the destination.
    pub fn detect_requests(&self, x: &BufferStateVector, rng: &mut impl RngCore) -> Result<DetectionOutcome> {
        let design = self.require_design()?;
        match &self.model {
            None => Ok(idealized_detection(x, design.sparsity_level)),
            Some(model) => physical_detection(model, x, design.sparsity_level, rng),
        }
    }
}

/// Independent random streams of one run.
#[derive(Debug, Clone)]
pub struct FrameRngs {
    pub arrivals: ChaCha8Rng,
    pub gates: ChaCha8Rng,
    pub detection: ChaCha8Rng,
    pub self_gain: ChaCha8Rng,
}

impl FrameRngs {
    pub fn new(seed: u64) -> Self {
        Self {
            arrivals: stream_rng(seed, STREAM_ARRIVALS),
            gates: stream_rng(seed, STREAM_GATES),
            detection: stream_rng(seed, STREAM_DETECTION),
            self_gain: stream_rng(seed, STREAM_SELF_GAIN),
        }
    }
}

/// Transmission resources of one owner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grant {
    pub id: usize,
    /// Bits the allocation was computed for.
    pub requested_bits: f64,
    /// Seconds of transmission.
    pub airtime: f64,
    /// Slots held; 0 for unslotted schemes.
    pub slots: usize,
}

/// Division of one frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramePlan {
    /// Served owners, ascending ID.
    pub grants: Vec<Grant>,
    /// Seconds, capped at the frame duration.
    pub overhead_time: f64,
    /// Seconds available for data.
    pub data_time: f64,
    pub degenerate: bool,
}

impl FramePlan {
    fn degenerate(overhead: f64, frame_duration: f64) -> Self {
        Self { grants: vec![], overhead_time: overhead.min(frame_duration), data_time: 0.0, degenerate: true }
    }

    /// Transmission windows in ascending ID order after the overhead.
    pub fn schedule(&self) -> Vec<ScheduleEntry> {
        let mut start = self.overhead_time;
        self.grants
            .iter()
            .map(|g| {
                let entry = ScheduleEntry { id: g.id, start, airtime: g.airtime };
                start += g.airtime;
                entry
            })
            .collect()
    }
}

/// Divides the data phase among `owners` (`(id, bits)`, bits > 0) under an
/// allocation scheme. `signaling_symbols` is the request phase length.
///
/// Unslotted half duplex spends `(signaling + 2 K) / W` on overhead, full
/// duplex only `signaling / W`.
pub fn allocate_frame(
    owners: &[(usize, f64)],
    cfg: &SystemConfig,
    scheme: Scheme,
    signaling_symbols: usize,
) -> Result<FramePlan> {
    let w = cfg.bandwidth;
    let t_f = cfg.frame_duration;
    match scheme {
        Scheme::UnslottedExact | Scheme::UnslottedClosedForm => {
            let feedback = match cfg.duplex {
                Duplex::Half => 2 * owners.len(),
                Duplex::Full => 0,
            };
            let overhead = (signaling_symbols + feedback) as f64 / w;
            let data_time = t_f - overhead;
            if data_time <= 0.0 {
                return Ok(FramePlan::degenerate(overhead, t_f));
            }
            let mut sorted = owners.to_vec();
            sorted.sort_by_key(|&(id, _)| id);
            let durations = if sorted.is_empty() {
                vec![]
            } else {
                let p = AllocationProblem::new(sorted.iter().map(|&(_, b)| b).collect(), w, data_time, cfg.noise_psd)?;
                let alloc = if scheme == Scheme::UnslottedExact { solve_exact(&p, DEFAULT_TOL)? } else { solve_closed_form(&p)? };
                alloc.durations
            };
            let grants = sorted
                .iter()
                .zip(durations)
                .map(|(&(id, bits), airtime)| Grant { id, requested_bits: bits, airtime, slots: 0 })
                .collect();
            Ok(FramePlan { grants, overhead_time: overhead, data_time, degenerate: false })
        }
        Scheme::SlottedThroughput | Scheme::SlottedPowerSaving => {
            let frame = SlotFrame::new(cfg.n_slots, signaling_symbols, w, t_f).with_duplex(cfg.duplex);
            let plan = if scheme == Scheme::SlottedThroughput {
                plan_throughput(owners, &frame)?
            } else {
                plan_power_saving(owners, &frame, cfg.extra_slot_rule)?
            };
            if plan.degenerate {
                return Ok(FramePlan::degenerate(plan.overhead_time, t_f));
            }
            let bits_of = |id: usize| owners.iter().find(|&&(o, _)| o == id).map_or(0.0, |&(_, b)| b);
            let grants = plan
                .served_ids
                .iter()
                .zip(&plan.slots_per_owner)
                .map(|(&id, &n)| Grant { id, requested_bits: bits_of(id), airtime: n as f64 * plan.slot_duration, slots: n })
                .collect();
            Ok(FramePlan {
                grants,
                overhead_time: plan.overhead_time,
                data_time: plan.n_slots as f64 * plan.slot_duration,
                degenerate: false,
            })
        }
        Scheme::FixedAssignment | Scheme::PerUserSignaling => {
            Err(Error::Domain(format!("{scheme} is not an allocation scheme")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame_index: usize,
    /// Nodes that announced a request.
    pub requests: usize,
    /// Detected owners.
    pub owners: usize,
    /// Owners granted transmission time.
    pub served: usize,
    pub delivered_bits: f64,
    /// Watts/Hz.
    pub total_power: f64,
    /// Seconds.
    pub data_time: f64,
    /// Seconds.
    pub overhead_time: f64,
    pub detection_errors: usize,
    pub arrived_packets: u64,
    pub dropped_packets: u64,
    pub degenerate: bool,
}

struct Transmission {
    delivered_bits: f64,
    total_power: f64,
}

/// Owners send `min(request, detected)` whole packets in their airtime.
fn transmit(
    state: &mut QueueState,
    requests: &BufferStateVector,
    detected: &BufferStateVector,
    plan: &FramePlan,
    cfg: &SystemConfig,
) -> Result<Transmission> {
    let mut out = Transmission { delivered_bits: 0.0, total_power: 0.0 };
    for g in &plan.grants {
        let packets = requests.get(g.id).min(detected.get(g.id));
        if packets == 0 || g.airtime <= 0.0 {
            continue;
        }
        let bits = packets as f64 * cfg.packet_bits as f64;
        out.total_power += rate_power(cfg.noise_psd, bits / (cfg.bandwidth * g.airtime))?;
        out.delivered_bits += bits;
        state.remove(g.id, packets);
    }
    Ok(out)
}

fn owners_of(detected: &BufferStateVector, packet_bits: u64) -> Vec<(usize, f64)> {
    detected.support().into_iter().map(|k| (k, detected.get(k) as f64 * packet_bits as f64)).collect()
}

/// One frame of a compressive-sensing scheme: requests, detection,
/// allocation, transmission and arrivals.
pub fn run_frame(state: &mut QueueState, sc: &Scenario, rngs: &mut FrameRngs, frame_index: usize) -> Result<FrameReport> {
    let cfg = &sc.cfg;
    let design = *sc.require_design()?;
    let x = emit_requests(state, &design, &mut rngs.gates);
    let detection = sc.detect_requests(&x, &mut rngs.detection)?;
    let owners = owners_of(&detection.detected, cfg.packet_bits);
    let plan = allocate_frame(&owners, cfg, cfg.scheme, design.n_measurements)?;
    let tx = transmit(state, &x, &detection.detected, &plan, cfg)?;
    let arrivals = step_arrivals(state, cfg.arrival_rate, &mut rngs.arrivals);
    Ok(FrameReport {
        frame_index,
        requests: x.support_size(),
        owners: owners.len(),
        served: plan.grants.len(),
        delivered_bits: tx.delivered_bits,
        total_power: tx.total_power,
        data_time: plan.data_time,
        overhead_time: plan.overhead_time,
        detection_errors: detection.errors,
        arrived_packets: arrivals.arrived,
        dropped_packets: arrivals.dropped,
        degenerate: plan.degenerate,
    })
}

/// Baseline: node `k` owns `T_f / N` of every frame and empties its queue at
/// power `kappa (2^(B_k N / (T_f W)) - 1)`. No signaling.
pub fn run_fixed_assignment(state: &mut QueueState, sc: &Scenario, rngs: &mut FrameRngs, frame_index: usize) -> Result<FrameReport> {
    let cfg = &sc.cfg;
    let share = cfg.frame_duration / cfg.n_users as f64;
    let mut owners = 0;
    let mut delivered_bits = 0.0;
    let mut total_power = 0.0;
    for k in 0..state.len() {
        let q = state.occupancy[k];
        if q == 0 {
            continue;
        }
        let bits = q as f64 * cfg.packet_bits as f64;
        total_power += rate_power(cfg.noise_psd, bits / (share * cfg.bandwidth))?;
        delivered_bits += bits;
        owners += 1;
        state.remove(k, q);
    }
    let arrivals = step_arrivals(state, cfg.arrival_rate, &mut rngs.arrivals);
    Ok(FrameReport {
        frame_index,
        requests: owners,
        owners,
        served: owners,
        delivered_bits,
        total_power,
        data_time: cfg.frame_duration,
        overhead_time: 0.0,
        detection_errors: 0,
        arrived_packets: arrivals.arrived,
        dropped_packets: arrivals.dropped,
        degenerate: false,
    })
}

/// Baseline: every nonempty node reports its queue in its own symbol (`N / W`
/// of signaling), detection is perfect, and `cfg.per_user_allocation` divides
/// the data phase.
pub fn run_per_user_signaling(state: &mut QueueState, sc: &Scenario, rngs: &mut FrameRngs, frame_index: usize) -> Result<FrameReport> {
    let cfg = &sc.cfg;
    let x = BufferStateVector::new(state.occupancy.clone(), state.capacity)?;
    let owners = owners_of(&x, cfg.packet_bits);
    let plan = allocate_frame(&owners, cfg, cfg.per_user_allocation, cfg.n_users)?;
    let tx = transmit(state, &x, &x, &plan, cfg)?;
    let arrivals = step_arrivals(state, cfg.arrival_rate, &mut rngs.arrivals);
    Ok(FrameReport {
        frame_index,
        requests: owners.len(),
        owners: owners.len(),
        served: plan.grants.len(),
        delivered_bits: tx.delivered_bits,
        total_power: tx.total_power,
        data_time: plan.data_time,
        overhead_time: plan.overhead_time,
        detection_errors: 0,
        arrived_packets: arrivals.arrived,
        dropped_packets: arrivals.dropped,
        degenerate: plan.degenerate,
    })
}

/// Stateful run of one scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    queues: QueueState,
    rngs: FrameRngs,
    frame: usize,
}

impl Simulation {
    /// Starts from empty queues.
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        let scenario = Scenario::new(cfg)?;
        let cfg = &scenario.cfg;
        Ok(Self {
            queues: QueueState::empty(cfg.n_users, cfg.buffer_capacity),
            rngs: FrameRngs::new(cfg.seed),
            frame: 0,
            scenario,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn queues(&self) -> &QueueState {
        &self.queues
    }

    pub fn step(&mut self) -> Result<FrameReport> {
        let index = self.frame;
        let report = match self.scenario.cfg.scheme {
            Scheme::FixedAssignment => run_fixed_assignment(&mut self.queues, &self.scenario, &mut self.rngs, index)?,
            Scheme::PerUserSignaling => run_per_user_signaling(&mut self.queues, &self.scenario, &mut self.rngs, index)?,
            _ => run_frame(&mut self.queues, &self.scenario, &mut self.rngs, index)?,
        };
        self.frame += 1;
        Ok(report)
    }
}

/// Run averages. Ratios with a zero denominator are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub n_frames: usize,
    /// Watts/Hz per frame.
    pub avg_total_power: f64,
    /// Total bits over total power.
    pub bits_per_watt: f64,
    pub bits_per_second: f64,
    /// Dropped over arrived packets.
    pub drop_rate: f64,
    /// Detection errors per node per frame.
    pub detection_error_rate: f64,
    pub avg_owners: f64,
    pub avg_served: f64,
    pub avg_data_time: f64,
    pub degenerate_frames: usize,
}

impl MetricsSummary {
    pub const FIELDS: [&'static str; 10] = [
        "n_frames",
        "avg_total_power",
        "bits_per_watt",
        "bits_per_second",
        "drop_rate",
        "detection_error_rate",
        "avg_owners",
        "avg_served",
        "avg_data_time",
        "degenerate_frames",
    ];

    /// Values in [`Self::FIELDS`] order.
    pub fn values(&self) -> [f64; 10] {
        [
            self.n_frames as f64,
            self.avg_total_power,
            self.bits_per_watt,
            self.bits_per_second,
            self.drop_rate,
            self.detection_error_rate,
            self.avg_owners,
            self.avg_served,
            self.avg_data_time,
            self.degenerate_frames as f64,
        ]
    }
}

/// Running sums behind [`MetricsSummary`].
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    frames: usize,
    power: f64,
    bits: f64,
    arrived: u64,
    dropped: u64,
    detection_errors: u64,
    owners: u64,
    served: u64,
    data_time: f64,
    degenerate: usize,
}

impl MetricsAccumulator {
    pub fn push(&mut self, r: &FrameReport) {
        self.frames += 1;
        self.power += r.total_power;
        self.bits += r.delivered_bits;
        self.arrived += r.arrived_packets;
        self.dropped += r.dropped_packets;
        self.detection_errors += r.detection_errors as u64;
        self.owners += r.owners as u64;
        self.served += r.served as u64;
        self.data_time += r.data_time;
        self.degenerate += r.degenerate as usize;
    }

    pub fn summary(&self, cfg: &SystemConfig) -> MetricsSummary {
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        let f = self.frames as f64;
        MetricsSummary {
            n_frames: self.frames,
            avg_total_power: ratio(self.power, f),
            bits_per_watt: ratio(self.bits, self.power),
            bits_per_second: ratio(self.bits, f * cfg.frame_duration),
            drop_rate: ratio(self.dropped as f64, self.arrived as f64),
            detection_error_rate: ratio(self.detection_errors as f64, f * cfg.n_users as f64),
            avg_owners: ratio(self.owners as f64, f),
            avg_served: ratio(self.served as f64, f),
            avg_data_time: ratio(self.data_time, f),
            degenerate_frames: self.degenerate,
        }
    }
}

/// Runs `cfg.scheme` for `n_frames` from empty queues.
pub fn run_scenario(cfg: &SystemConfig, n_frames: usize) -> Result<MetricsSummary> {
    run_scenario_with(cfg, n_frames, |_| {})
}

/// [`run_scenario`] that also hands every frame report to `on_frame`.
pub fn run_scenario_with(cfg: &SystemConfig, n_frames: usize, mut on_frame: impl FnMut(&FrameReport)) -> Result<MetricsSummary> {
    if n_frames == 0 {
        return Err(Error::Domain("need at least one frame".into()));
    }
    let mut sim = Simulation::new(cfg.clone())?;
    let mut acc = MetricsAccumulator::default();
    for _ in 0..n_frames {
        let report = sim.step()?;
        acc.push(&report);
        on_frame(&report);
    }
    Ok(acc.summary(cfg))
}

/// Per-frame self-interference channels, Gaussian with mean 0.
pub fn draw_self_gains(n_users: usize, std: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, std).map_err(|e| Error::Domain(format!("self-interference spread: {e}")))?;
    Ok((0..n_users).map(|_| normal.sample(rng)).collect())
}

/// What every full-duplex node decodes from the request phase.
///
/// Node `k` hears its own request through `self_gain[k]` plus independent
/// noise, runs OMP, then replaces entry `k` with its known queue state.
pub fn full_duplex_local_decode(
    model: &MeasurementModel,
    x: &BufferStateVector,
    self_gain: &[f64],
    sparsity: usize,
    rng: &mut impl RngCore,
) -> Result<Vec<BufferStateVector>> {
    let n = model.n_users();
    if x.len() != n || self_gain.len() != n {
        return Err(Error::Dimension(format!(
            "need {n} entries, got x = {} and self_gain = {}",
            x.len(),
            self_gain.len()
        )));
    }
    let cfg = RecoveryConfig::max_support(sparsity);
    let base = x.to_f64();
    let common = model.apply(&base)?;
    let mut views = Vec::with_capacity(n);
    for k in 0..n {
        let mut y = common.clone();
        let delta = (self_gain[k] - 1.0) * base[k];
        if delta != 0.0 {
            for (v, a) in y.iter_mut().zip(model.column(k)) {
                *v += delta * a;
            }
        }
        add_noise(&mut y, model.noise_std(), rng.next_u64());
        let estimate = omp_recover(model, &MeasurementVector::new(y), &cfg)?;
        let mut view = estimate.to_buffer_state(model.constellation_max());
        view.set(k, x.get(k));
        views.push(view);
    }
    Ok(views)
}

/// A transmission window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub id: usize,
    /// Seconds from the frame start.
    pub start: f64,
    pub airtime: f64,
}

/// Full-duplex distributed access: every requesting node computes the
/// allocation from its own view and takes its window in ascending-ID order.
/// Nodes that do not find themselves among the owners stay silent.
pub fn distributed_schedule(
    views: &[BufferStateVector],
    requests: &BufferStateVector,
    cfg: &SystemConfig,
    scheme: Scheme,
    signaling_symbols: usize,
) -> Result<Vec<ScheduleEntry>> {
    let mut entries = Vec::new();
    for k in requests.support() {
        let owners = owners_of(&views[k], cfg.packet_bits);
        let plan = allocate_frame(&owners, cfg, scheme, signaling_symbols)?;
        if let Some(e) = plan.schedule().into_iter().find(|e| e.id == k) {
            entries.push(e);
        }
    }
    Ok(entries)
}

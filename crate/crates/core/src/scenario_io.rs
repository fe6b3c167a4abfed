//! Configuration files, parameter sweeps and result tables.
//!
//! Configuration is a flat text file of `key = value` lines. `#` starts a
//! comment, blank lines are ignored, unknown and repeated keys are errors and
//! missing keys keep their defaults.
//!
//! Tables are written as CSV with a header row or as JSON lines. Every record
//! carries `schema_version` ([`SCHEMA_VERSION`]).

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::network_sim::{run_scenario, MetricsSummary};
use crate::seed::derive_seed;
use crate::sparsity_design::{
    measurements_for_sparsity, sparsity_for_request_prob, MeasurementRule, MonteCarloCalibration,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const CONFIG_KEYS: [&str; 20] = [
    "n_users",
    "bandwidth",
    "frame_duration",
    "noise_psd",
    "buffer_capacity",
    "packet_bits",
    "arrival_rate",
    "epsilon",
    "n_slots",
    "duplex",
    "scheme",
    "per_user_allocation",
    "extra_slot_rule",
    "detection",
    "request_noise_std",
    "self_interference_std",
    "ratio_c",
    "n_measurements",
    "request_prob",
    "seed",
];

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Parse { line, message: format!("`{key}`: cannot parse `{value}`: {e}") })
}

fn set_key(cfg: &mut SystemConfig, line: usize, key: &str, value: &str) -> Result<()> {
    match key {
        "n_users" => cfg.n_users = parse_value(line, key, value)?,
        "bandwidth" => cfg.bandwidth = parse_value(line, key, value)?,
        "frame_duration" => cfg.frame_duration = parse_value(line, key, value)?,
        "noise_psd" => cfg.noise_psd = parse_value(line, key, value)?,
        "buffer_capacity" => cfg.buffer_capacity = parse_value(line, key, value)?,
        "packet_bits" => cfg.packet_bits = parse_value(line, key, value)?,
        "arrival_rate" => cfg.arrival_rate = parse_value(line, key, value)?,
        "epsilon" => cfg.epsilon = parse_value(line, key, value)?,
        "n_slots" => cfg.n_slots = parse_value(line, key, value)?,
        "duplex" => cfg.duplex = parse_value(line, key, value)?,
        "scheme" => cfg.scheme = parse_value(line, key, value)?,
        "per_user_allocation" => cfg.per_user_allocation = parse_value(line, key, value)?,
        "extra_slot_rule" => cfg.extra_slot_rule = parse_value(line, key, value)?,
        "detection" => cfg.detection = parse_value(line, key, value)?,
        "request_noise_std" => cfg.request_noise_std = parse_value(line, key, value)?,
        "self_interference_std" => cfg.self_interference_std = parse_value(line, key, value)?,
        "ratio_c" => cfg.ratio_c = parse_value(line, key, value)?,
        "n_measurements" => cfg.n_measurements = parse_value(line, key, value)?,
        "request_prob" => {
            cfg.request_prob = if value == "none" { None } else { Some(parse_value(line, key, value)?) }
        }
        "seed" => cfg.seed = parse_value(line, key, value)?,
        _ => return Err(Error::Parse { line, message: format!("unknown key `{key}`") }),
    }
    Ok(())
}

/// Parses configuration text and validates the result.
pub fn parse_config_str(text: &str) -> Result<SystemConfig> {
    let mut cfg = SystemConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if seen.contains(&key) {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
        set_key(&mut cfg, line, key, value)?;
        seen.push(key);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Writes every key; [`parse_config_str`] reads it back unchanged.
pub fn emit_config(cfg: &SystemConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("n_users", &cfg.n_users);
    put("bandwidth", &cfg.bandwidth);
    put("frame_duration", &cfg.frame_duration);
    put("noise_psd", &cfg.noise_psd);
    put("buffer_capacity", &cfg.buffer_capacity);
    put("packet_bits", &cfg.packet_bits);
    put("arrival_rate", &cfg.arrival_rate);
    put("epsilon", &cfg.epsilon);
    put("n_slots", &cfg.n_slots);
    put("duplex", &cfg.duplex);
    put("scheme", &cfg.scheme);
    put("per_user_allocation", &cfg.per_user_allocation);
    put("extra_slot_rule", &cfg.extra_slot_rule);
    put("detection", &cfg.detection);
    put("request_noise_std", &cfg.request_noise_std);
    put("self_interference_std", &cfg.self_interference_std);
    put("ratio_c", &cfg.ratio_c);
    put("n_measurements", &cfg.n_measurements);
    match cfg.request_prob {
        Some(a) => put("request_prob", &a),
        None => put("request_prob", &"none"),
    }
    put("seed", &cfg.seed);
    out
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    ArrivalRate,
    FrameDuration,
    RequestProb,
    NSlots,
    Bandwidth,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::ArrivalRate => "arrival_rate",
            SweepParameter::FrameDuration => "frame_duration",
            SweepParameter::RequestProb => "request_prob",
            SweepParameter::NSlots => "n_slots",
            SweepParameter::Bandwidth => "bandwidth",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParameter::ArrivalRate => cfg.arrival_rate = value,
            SweepParameter::FrameDuration => cfg.frame_duration = value,
            SweepParameter::RequestProb => cfg.request_prob = Some(value),
            SweepParameter::Bandwidth => cfg.bandwidth = value,
            SweepParameter::NSlots => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidValue { key: "n_slots".into(), message: format!("not a slot count: {value}") });
                }
                cfg.n_slots = value as usize;
            }
        }
        Ok(cfg)
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "arrival_rate" | "lambda" => Ok(SweepParameter::ArrivalRate),
            "frame_duration" | "t_f" => Ok(SweepParameter::FrameDuration),
            "request_prob" | "alpha" => Ok(SweepParameter::RequestProb),
            "n_slots" | "d" => Ok(SweepParameter::NSlots),
            "bandwidth" | "w" => Ok(SweepParameter::Bandwidth),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected arrival_rate, frame_duration, request_prob, n_slots or bandwidth)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// Strictly monotone.
    pub values: Vec<f64>,
    pub base: SystemConfig,
    /// Every value runs each of these; empty means `base.scheme` only.
    pub schemes: Vec<Scheme>,
    pub n_frames: usize,
    pub n_seeds: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Domain("sweep needs at least one value".into()));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(Error::Domain("sweep values must be strictly monotone".into()));
        }
        if self.n_seeds == 0 || self.n_frames == 0 {
            return Err(Error::Domain("need at least one seed and one frame".into()));
        }
        Ok(())
    }

    fn schemes(&self) -> Vec<Scheme> {
        if self.schemes.is_empty() { vec![self.base.scheme] } else { self.schemes.clone() }
    }
}

/// One scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scheme: Scheme,
    pub parameter: Option<SweepParameter>,
    pub value: Option<f64>,
    pub seed_index: usize,
    pub seed: u64,
    /// Error text for failed runs.
    pub result: std::result::Result<MetricsSummary, String>,
}

/// Mean and sample standard deviation over the successful runs of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scheme: Scheme,
    pub parameter: Option<SweepParameter>,
    pub value: Option<f64>,
    pub runs: usize,
    pub failed: usize,
    pub mean: [f64; 10],
    pub std: [f64; 10],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    /// Ordered by value, then scheme, then seed.
    pub runs: Vec<RunRow>,
    /// One per (value, scheme), in the same order.
    pub aggregates: Vec<AggregateRow>,
}

/// Seed of run `index`; shared by every value and scheme of a sweep.
pub fn run_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, index as u64)
}

struct Point {
    scheme: Scheme,
    parameter: Option<SweepParameter>,
    value: Option<f64>,
    cfg: std::result::Result<SystemConfig, String>,
}

fn run_points(points: Vec<Point>, base_seed: u64, n_frames: usize, n_seeds: usize) -> SweepTable {
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..n_seeds).map(move |s| (p, s))).collect();
    let runs: Vec<RunRow> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let point = &points[p];
            let seed = run_seed(base_seed, s);
            let result = point.cfg.clone().and_then(|cfg| {
                let cfg = SystemConfig { seed, scheme: point.scheme, ..cfg };
                run_scenario(&cfg, n_frames).map_err(|e| e.to_string())
            });
            RunRow { scheme: point.scheme, parameter: point.parameter, value: point.value, seed_index: s, seed, result }
        })
        .collect();
    let aggregates = points
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let ok: Vec<[f64; 10]> = runs[p * n_seeds..(p + 1) * n_seeds]
                .iter()
                .filter_map(|r| r.result.as_ref().ok().map(|m| m.values()))
                .collect();
            let (mean, std) = mean_std(&ok);
            AggregateRow {
                scheme: point.scheme,
                parameter: point.parameter,
                value: point.value,
                runs: ok.len(),
                failed: n_seeds - ok.len(),
                mean,
                std,
            }
        })
        .collect();
    SweepTable { runs, aggregates }
}

fn mean_std(rows: &[[f64; 10]]) -> ([f64; 10], [f64; 10]) {
    let mut mean = [f64::NAN; 10];
    let mut std = [f64::NAN; 10];
    if rows.is_empty() {
        return (mean, std);
    }
    let n = rows.len() as f64;
    for j in 0..10 {
        let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = if rows.len() > 1 { rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        mean[j] = m;
        std[j] = var.sqrt();
    }
    (mean, std)
}

/// Runs every (value, scheme, seed) combination in parallel. Failed runs are
/// kept as rows with their error and skipped by the aggregates.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let schemes = spec.schemes();
    let points = spec
        .values
        .iter()
        .flat_map(|&v| {
            let cfg = spec.parameter.apply(&spec.base, v).map_err(|e| e.to_string());
            schemes.iter().map(move |&scheme| Point {
                scheme,
                parameter: Some(spec.parameter),
                value: Some(v),
                cfg: cfg.clone(),
            })
        })
        .collect();
    Ok(run_points(points, spec.base.seed, spec.n_frames, spec.n_seeds))
}

/// A single configuration under several schemes and seeds.
pub fn run_simulation(base: &SystemConfig, schemes: &[Scheme], n_frames: usize, n_seeds: usize) -> Result<SweepTable> {
    base.validate()?;
    if n_seeds == 0 || n_frames == 0 {
        return Err(Error::Domain("need at least one seed and one frame".into()));
    }
    let schemes = if schemes.is_empty() { vec![base.scheme] } else { schemes.to_vec() };
    let points = schemes
        .into_iter()
        .map(|scheme| Point { scheme, parameter: None, value: None, cfg: Ok(base.clone()) })
        .collect();
    Ok(run_points(points, base.seed, n_frames, n_seeds))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct SweepRecord<'a> {
    schema_version: u32,
    kind: &'a str,
    scheme: Scheme,
    parameter: Option<SweepParameter>,
    value: Option<f64>,
    seed_index: Option<usize>,
    seed: Option<u64>,
    runs: usize,
    failed: usize,
    error: Option<&'a str>,
    metrics: Option<serde_json::Map<String, serde_json::Value>>,
}

fn metric_map(values: &[f64; 10]) -> serde_json::Map<String, serde_json::Value> {
    MetricsSummary::FIELDS
        .iter()
        .zip(values)
        .map(|(k, &v)| (k.to_string(), serde_json::Value::from(v)))
        .collect()
}

impl SweepTable {
    /// Columns: `schema_version, kind, scheme, parameter, value, seed_index,
    /// seed, runs, failed, error`, then the [`MetricsSummary::FIELDS`].
    /// `kind` is `run`, `mean` or `std`; failed runs leave the metrics empty.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["schema_version", "kind", "scheme", "parameter", "value", "seed_index", "seed", "runs", "failed", "error"];
        header.extend(MetricsSummary::FIELDS);
        w.write_record(&header).map_err(csv_error)?;
        let version = SCHEMA_VERSION.to_string();
        for r in &self.runs {
            let mut rec = vec![
                version.clone(),
                "run".into(),
                r.scheme.to_string(),
                opt_str(r.parameter),
                opt_str(r.value),
                r.seed_index.to_string(),
                r.seed.to_string(),
            ];
            match &r.result {
                Ok(m) => {
                    rec.extend(["1".into(), "0".into(), String::new()]);
                    rec.extend(m.values().iter().map(|v| v.to_string()));
                }
                Err(e) => {
                    rec.extend(["0".into(), "1".into(), e.clone()]);
                    rec.extend(std::iter::repeat_n(String::new(), 10));
                }
            }
            w.write_record(&rec).map_err(csv_error)?;
        }
        for a in &self.aggregates {
            for (kind, values) in [("mean", &a.mean), ("std", &a.std)] {
                let mut rec = vec![
                    version.clone(),
                    kind.into(),
                    a.scheme.to_string(),
                    opt_str(a.parameter),
                    opt_str(a.value),
                    String::new(),
                    String::new(),
                    a.runs.to_string(),
                    a.failed.to_string(),
                    String::new(),
                ];
                rec.extend(values.iter().map(|v| v.to_string()));
                w.write_record(&rec).map_err(csv_error)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One JSON object per line with the CSV columns; metrics are nested under
    /// `metrics` (null for failed runs).
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for r in &self.runs {
            let rec = SweepRecord {
                schema_version: SCHEMA_VERSION,
                kind: "run",
                scheme: r.scheme,
                parameter: r.parameter,
                value: r.value,
                seed_index: Some(r.seed_index),
                seed: Some(r.seed),
                runs: r.result.is_ok() as usize,
                failed: r.result.is_err() as usize,
                error: r.result.as_ref().err().map(String::as_str),
                metrics: r.result.as_ref().ok().map(|m| metric_map(&m.values())),
            };
            serde_json::to_writer(&mut out, &rec).map_err(json_error)?;
            out.write_all(b"\n")?;
        }
        for a in &self.aggregates {
            for (kind, values) in [("mean", &a.mean), ("std", &a.std)] {
                let rec = SweepRecord {
                    schema_version: SCHEMA_VERSION,
                    kind,
                    scheme: a.scheme,
                    parameter: a.parameter,
                    value: a.value,
                    seed_index: None,
                    seed: None,
                    runs: a.runs,
                    failed: a.failed,
                    error: None,
                    metrics: Some(metric_map(values)),
                };
                serde_json::to_writer(&mut out, &rec).map_err(json_error)?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn write(&self, format: Format, out: impl Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Jsonl => self.write_jsonl(out),
        }
    }
}

/// Monte Carlo settings for the design table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTableSpec {
    pub n_users: usize,
    pub epsilon: f64,
    pub ratio_c: f64,
    pub target_fail: f64,
    pub trials: usize,
    pub constellation_max: u32,
    pub seed: u64,
}

impl DesignTableSpec {
    pub fn new(n_users: usize, epsilon: f64) -> Self {
        Self { n_users, epsilon, ratio_c: 5.0, target_fail: 1e-3, trials: 1000, constellation_max: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignRow {
    pub schema_version: u32,
    pub alpha: f64,
    /// Sparsity level, at least 1.
    pub sparsity: usize,
    /// The raw level was 0 and was raised to 1.
    pub floored: bool,
    /// `ceil(c S)`, capped at `N`.
    pub m_heuristic: usize,
    pub m_monte_carlo: usize,
    /// The failure target was not met even at `M = N`.
    pub saturated: bool,
}

/// Rows of `(alpha, S(alpha), M_heuristic, M_monte_carlo)`.
pub fn emit_design_table(spec: &DesignTableSpec, alphas: &[f64]) -> Result<Vec<DesignRow>> {
    let heuristic = MeasurementRule::Heuristic { ratio_c: spec.ratio_c };
    let mc = MeasurementRule::MonteCarlo(MonteCarloCalibration {
        constellation_max: spec.constellation_max,
        seed: spec.seed,
        ..MonteCarloCalibration::new(spec.n_users, spec.target_fail, spec.trials)
    });
    alphas
        .iter()
        .map(|&alpha| {
            let raw = sparsity_for_request_prob(spec.n_users, alpha, spec.epsilon)?;
            let sparsity = raw.max(1);
            let m_heuristic = measurements_for_sparsity(sparsity, &heuristic)?.n_measurements.min(spec.n_users);
            let m = measurements_for_sparsity(sparsity, &mc)?;
            Ok(DesignRow {
                schema_version: SCHEMA_VERSION,
                alpha,
                sparsity,
                floored: raw == 0,
                m_heuristic,
                m_monte_carlo: m.n_measurements,
                saturated: m.saturated,
            })
        })
        .collect()
}

pub fn write_design_table(rows: &[DesignRow], format: Format, mut out: impl Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for r in rows {
                serde_json::to_writer(&mut out, r).map_err(json_error)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Duplex;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config_str("").unwrap(), SystemConfig::default());
        assert_eq!(parse_config_str("# only a comment\n\n").unwrap(), SystemConfig::default());
    }

    #[test]
    fn single_key_override() {
        let cfg = parse_config_str("n_users = 200\n").unwrap();
        assert_eq!(cfg, SystemConfig { n_users: 200, ..Default::default() });
        let cfg = parse_config_str("duplex = full  # trailing comment").unwrap();
        assert_eq!(cfg.duplex, Duplex::Full);
    }

    #[test]
    fn range_error_names_key() {
        match parse_config_str("arrival_rate = 1.5") {
            Err(Error::InvalidValue { key, .. }) => assert_eq!(key, "arrival_rate"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        for (text, line) in [("n_users = 10\nbogus = 3", 2), ("\n\nn_users 10", 3), ("seed = x", 1), ("seed = 1\nseed = 2", 2)] {
            match parse_config_str(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn emit_round_trips() {
        let cfg = SystemConfig { request_prob: Some(0.0375), frame_duration: 2.5e-3, seed: 99, ..Default::default() };
        assert_eq!(parse_config_str(&emit_config(&cfg)).unwrap(), cfg);
        assert!(CONFIG_KEYS.iter().all(|k| emit_config(&cfg).contains(&format!("{k} = "))));
    }

    #[test]
    fn sweep_validation() {
        let spec = SweepSpec {
            parameter: SweepParameter::ArrivalRate,
            values: vec![0.1, 0.05, 0.2],
            base: SystemConfig::default(),
            schemes: vec![],
            n_frames: 10,
            n_seeds: 1,
        };
        assert!(spec.validate().is_err());
        assert!(SweepSpec { values: vec![], ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { values: vec![0.2, 0.1], ..spec }.validate().is_ok());
    }

    #[test]
    fn single_point_single_row() {
        let spec = SweepSpec {
            parameter: SweepParameter::ArrivalRate,
            values: vec![0.02],
            base: SystemConfig::default(),
            schemes: vec![],
            n_frames: 20,
            n_seeds: 1,
        };
        let table = run_sweep(&spec).unwrap();
        assert_eq!(table.runs.len(), 1);
        assert_eq!(table.aggregates.len(), 1);
        assert_eq!(table.aggregates[0].std, [0.0; 10]);
    }

    #[test]
    fn failures_are_marked_and_sweep_continues() {
        let spec = SweepSpec {
            parameter: SweepParameter::NSlots,
            values: vec![2.5, 4.0],
            base: SystemConfig { scheme: Scheme::SlottedThroughput, ..Default::default() },
            schemes: vec![],
            n_frames: 5,
            n_seeds: 2,
        };
        let table = run_sweep(&spec).unwrap();
        assert!(table.runs[..2].iter().all(|r| r.result.is_err()));
        assert!(table.runs[2..].iter().all(|r| r.result.is_ok()));
        assert_eq!(table.aggregates[0].failed, 2);
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 4 + 4);
    }

    #[test]
    fn jsonl_lines_parse() {
        let table = run_simulation(&SystemConfig::default(), &[Scheme::FixedAssignment], 10, 2).unwrap();
        let mut out = Vec::new();
        table.write_jsonl(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["schema_version"], 1);
        }
        assert_eq!(text.lines().count(), 4);
    }
}

//! Batch experiments: punch seeded random gaps into a set of signals, run a
//! method matrix over every gap, and stream the results to CSV.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::Instant;

use gapfill_core::fixtures::{harmonic, sine};
use gapfill_core::gap::{snr, GapSpec, ReliableMask, DEFAULT_SNR_CAP};
use gapfill_core::pipeline::{inpaint_gap, MethodSpec, PipelineConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::errors::{CliError, Result};
use crate::io::read_wav;

fn default_gaps_per_signal() -> usize {
    8
}

fn default_gap_lengths() -> Vec<f64> {
    (1..=10).map(|k| 5.0 * k as f64).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// WAV paths or builtin signals (`sine:<hz>:<rate>:<seconds>`,
    /// `harmonic:<hz>:<rate>:<seconds>`).
    pub inputs: Vec<String>,
    #[serde(default = "default_gaps_per_signal")]
    pub gaps_per_signal: usize,
    #[serde(default = "default_gap_lengths")]
    pub gap_lengths_ms: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Method descriptors, e.g. "syn:energy:half" or "janssen".
    pub methods: Vec<String>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub config: ConfigOverrides,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigOverrides {
    pub window_length: Option<usize>,
    pub hop: Option<usize>,
    pub channels: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub outer_iterations: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub gradual_strict: Option<bool>,
    pub tdc_gaps: Option<usize>,
    pub tdc_segments: Option<usize>,
    pub tdc_segment_length: Option<usize>,
    pub janssen_iterations: Option<usize>,
    pub janssen_frame_length: Option<usize>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut c: PipelineConfig) -> PipelineConfig {
        if let Some(v) = self.window_length {
            c.window_length = v;
        }
        if let Some(v) = self.hop {
            c.hop = v;
        }
        if let Some(v) = self.channels {
            c.channels = v;
        }
        if let Some(v) = self.tolerance {
            c.solver.tolerance = v;
            c.reweight.solver.tolerance = v;
        }
        if let Some(v) = self.max_iterations {
            c.solver.max_iterations = v;
            c.reweight.solver.max_iterations = v;
        }
        if let Some(v) = self.outer_iterations {
            c.reweight.outer_iterations = v;
        }
        if let Some(v) = self.epsilon {
            c.reweight.epsilon = v;
        }
        if let Some(v) = self.delta {
            c.reweight.delta = v;
        }
        if let Some(v) = self.gradual_strict {
            c.gradual.strict = v;
        }
        if let Some(v) = self.tdc_gaps {
            c.tdc.num_artificial_gaps = v;
        }
        if let Some(v) = self.tdc_segments {
            c.tdc.num_segments = v;
        }
        if let Some(v) = self.tdc_segment_length {
            c.tdc.segment_length = Some(v);
        }
        if let Some(v) = self.janssen_iterations {
            c.janssen.iterations = v;
        }
        if let Some(v) = self.janssen_frame_length {
            c.janssen.frame_length = v;
        }
        c
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub signal: String,
    pub gap_index: usize,
    pub gap_ms: f64,
    pub method: String,
    pub offset: String,
    pub snr_db: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: Option<f64>,
    pub converged: Option<bool>,
    pub status: String,
}

const CSV_HEADER: [&str; 10] = [
    "signal",
    "gap_index",
    "gap_ms",
    "method",
    "offset",
    "snr_db",
    "iterations",
    "wall_time_s",
    "converged",
    "status",
];

/// Load one input: a builtin descriptor or a WAV path.
pub fn load_input(name: &str) -> Result<(Vec<f64>, u32)> {
    let synth = |rest: &str, kind: &str| -> Result<(f64, u32, usize)> {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad =
            || CliError::Usage(format!("input '{kind}:{rest}': want {kind}:<hz>:<rate>:<seconds>"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let hz: f64 = parts[0].parse().map_err(|_| bad())?;
        let rate: u32 = parts[1].parse().map_err(|_| bad())?;
        let seconds: f64 = parts[2].parse().map_err(|_| bad())?;
        if hz <= 0.0 || rate == 0 || seconds <= 0.0 {
            return Err(bad());
        }
        Ok((hz, rate, (rate as f64 * seconds).round() as usize))
    };
    if let Some(rest) = name.strip_prefix("sine:") {
        let (hz, rate, len) = synth(rest, "sine")?;
        Ok((sine(hz, rate as f64, len), rate))
    } else if let Some(rest) = name.strip_prefix("harmonic:") {
        let (hz, rate, len) = synth(rest, "harmonic")?;
        let amps: Vec<f64> = (1..=6).map(|j| 1.0 / j as f64).collect();
        Ok((harmonic(hz, &amps, rate as f64, len), rate))
    } else {
        let audio = read_wav(Path::new(name))?;
        Ok((audio.samples, audio.sample_rate))
    }
}

/// Gap placement stream for one (signal, gap length) instance. ChaCha8 is
/// the fixed, portable generator; the 32-byte seed packs the experiment
/// seed and both indices, so instances are independent of each other and of
/// iteration order.
pub fn placement_rng(seed: u64, signal_idx: usize, length_idx: usize) -> ChaCha8Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&(signal_idx as u64).to_le_bytes());
    s[16..24].copy_from_slice(&(length_idx as u64).to_le_bytes());
    ChaCha8Rng::from_seed(s)
}

/// Uniform random placement of `count` gaps of `gap_len` samples, pairwise
/// separated and clear of the signal edges by at least `4 * window` samples.
pub fn generate_gaps(
    signal_len: usize,
    count: usize,
    gap_len: usize,
    window: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<GapSpec>> {
    let margin = 4 * window;
    let infeasible = || {
        CliError::Numeric(format!(
            "cannot place {count} gaps of {gap_len} samples in a {signal_len}-sample signal \
             with {margin}-sample margins"
        ))
    };
    if gap_len == 0 {
        return Err(CliError::Usage("gap length must be positive".into()));
    }
    let lo = margin + 1;
    let hi = (signal_len + 1)
        .checked_sub(margin + gap_len)
        .ok_or_else(infeasible)?;
    if hi < lo {
        return Err(infeasible());
    }
    let mut starts: Vec<usize> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while starts.len() < count {
        attempts += 1;
        if attempts > 10_000 {
            return Err(infeasible());
        }
        let s = rng.random_range(lo..=hi);
        let clear = starts
            .iter()
            .all(|&p| s + gap_len + margin <= p || p + gap_len + margin <= s);
        if clear {
            starts.push(s);
        }
    }
    starts.sort_unstable();
    starts
        .into_iter()
        .map(|s| GapSpec::from_start_len(s, gap_len).map_err(|e| CliError::Numeric(e.to_string())))
        .collect()
}

struct Instance {
    label: String,
    gap_ms: f64,
    original: Arc<Vec<f64>>,
    observed: Arc<Vec<f64>>,
    mask: Arc<ReliableMask>,
    gaps: Vec<GapSpec>,
}

struct Job {
    instance: Arc<Instance>,
    gap_idx: usize,
    method_label: String,
    method: MethodSpec,
}

fn offset_name(method: &MethodSpec) -> &'static str {
    match method {
        MethodSpec::Janssen => "none",
        MethodSpec::Sparse(s) => match s.offset {
            gapfill_core::frame::OffsetKind::None => "none",
            gapfill_core::frame::OffsetKind::Half => "half",
            gapfill_core::frame::OffsetKind::Full => "full",
        },
    }
}

fn run_job(job: &Job, config: &PipelineConfig) -> ResultRow {
    let inst = &job.instance;
    let gap = inst.gaps[job.gap_idx];
    let mut row = ResultRow {
        signal: inst.label.clone(),
        gap_index: job.gap_idx,
        gap_ms: inst.gap_ms,
        method: job.method_label.clone(),
        offset: offset_name(&job.method).to_string(),
        snr_db: None,
        iterations: None,
        wall_time_s: None,
        converged: None,
        status: "ok".into(),
    };
    let clock = Instant::now();
    match inpaint_gap(&inst.observed, &inst.mask, &gap, &job.method, config) {
        Err(e) => row.status = e.to_string(),
        Ok(report) => {
            row.wall_time_s = Some(clock.elapsed().as_secs_f64());
            row.iterations = Some(report.iterations);
            row.converged = Some(report.converged);
            let original_gap: Vec<f64> = gap.range0().map(|t| inst.original[t]).collect();
            let local = GapSpec::from_start_len(1, gap.len()).expect("nonempty gap");
            match snr(&original_gap, &report.samples, &[local], DEFAULT_SNR_CAP) {
                Ok(db) => row.snr_db = Some(db),
                Err(e) => row.status = e.to_string(),
            }
        }
    }
    row
}

/// Run the whole experiment, streaming rows to `out` in job order (rows are
/// computed in parallel but written deterministically, and flushed one by
/// one so an interrupted run keeps its finished rows).
pub fn run_experiment<W: io::Write + Send>(spec: &ExperimentSpec, out: W) -> Result<()> {
    let methods: Vec<(String, MethodSpec)> = spec
        .methods
        .iter()
        .map(|s| {
            s.parse::<MethodSpec>()
                .map(|m| (s.clone(), m))
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<Result<_>>()?;
    for &ms in &spec.gap_lengths_ms {
        if !(ms > 0.0) {
            return Err(CliError::Usage(format!("gap length {ms} ms not positive")));
        }
    }
    let config = spec.config.apply(PipelineConfig::default());

    let mut instances: Vec<Arc<Instance>> = Vec::new();
    for (si, input) in spec.inputs.iter().enumerate() {
        let (original, rate) = load_input(input)?;
        let original = Arc::new(original);
        for (li, &ms) in spec.gap_lengths_ms.iter().enumerate() {
            let gap_len = (ms * rate as f64 / 1000.0).round() as usize;
            let mut rng = placement_rng(spec.seed, si, li);
            let gaps = generate_gaps(
                original.len(),
                spec.gaps_per_signal,
                gap_len,
                config.window_length,
                &mut rng,
            )?;
            let mask = ReliableMask::from_gaps(original.len(), &gaps)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let mut observed = original.as_ref().clone();
            for g in &gaps {
                for t in g.range0() {
                    observed[t] = 0.0;
                }
            }
            instances.push(Arc::new(Instance {
                label: input.clone(),
                gap_ms: ms,
                original: original.clone(),
                observed: Arc::new(observed),
                mask: Arc::new(mask),
                gaps,
            }));
        }
    }

    let mut jobs: Vec<Job> = Vec::new();
    for inst in &instances {
        for gap_idx in 0..inst.gaps.len() {
            for (label, method) in &methods {
                jobs.push(Job {
                    instance: inst.clone(),
                    gap_idx,
                    method_label: label.clone(),
                    method: *method,
                });
            }
        }
    }

    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    wtr.write_record(CSV_HEADER)?;
    wtr.flush()?;

    let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
    std::thread::scope(|scope| -> Result<()> {
        scope.spawn(move || {
            jobs.par_iter().enumerate().for_each_with(tx, |tx, (i, job)| {
                let _ = tx.send((i, run_job(job, &config)));
            });
        });
        let mut pending: BTreeMap<usize, ResultRow> = BTreeMap::new();
        let mut next = 0usize;
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&next) {
                wtr.serialize(row)?;
                wtr.flush()?;
                next += 1;
            }
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SummaryRow {
    pub gap_ms: f64,
    pub method: String,
    pub mean_snr_db: Option<f64>,
    pub rows: usize,
    pub failures: usize,
}

/// Aggregate a results CSV: arithmetic mean of the dB values per
/// (gap length, method) group, failures counted separately.
pub fn summarize<R: io::Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut groups: BTreeMap<(u64, String), (f64, usize, usize)> = BTreeMap::new();
    for record in rdr.deserialize::<ResultRow>() {
        let row = record?;
        let key = (row.gap_ms.to_bits(), row.method.clone());
        let entry = groups.entry(key).or_insert((0.0, 0, 0));
        match (row.status.as_str(), row.snr_db) {
            ("ok", Some(db)) => {
                entry.0 += db;
                entry.1 += 1;
            }
            _ => entry.2 += 1,
        }
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_iter()
        .map(|((bits, method), (sum, n, failures))| SummaryRow {
            gap_ms: f64::from_bits(bits),
            method,
            mean_snr_db: (n > 0).then(|| sum / n as f64),
            rows: n,
            failures,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.gap_ms
            .total_cmp(&b.gap_ms)
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(rows)
}

pub fn write_summary<W: io::Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

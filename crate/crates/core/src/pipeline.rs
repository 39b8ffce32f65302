//! Per-gap driver: cut a context segment, align it, run the selected method,
//! and splice the filled gap back into the full signal.

use std::fmt;
use std::str::FromStr;

use crate::error::{CoreError, Result};
use crate::frame::{
    apply_offset, compute_offset, undo_offset, GaborParams, OffsetKind, TightGaborFrame,
    WindowKind,
};
use crate::gap::{GapSpec, ReliableMask};
use crate::gradual::{gradual_inpaint, GradualConfig};
use crate::janssen::{janssen_inpaint, JanssenConfig};
use crate::reweight::{reweighted_analysis, reweighted_synthesis, ReweightConfig};
use crate::solver::{cp_analysis, dr_synthesis, SolverConfig, SolverResult};
use crate::tdc::{tdc_inpaint, TdcConfig};
use crate::weights::{compute_weights, WeightScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Synthesis,
    Analysis,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Synthesis => "syn",
            Model::Analysis => "ana",
        }
    }
}

/// One sparse method: model, weighting and alignment, with optional gradual
/// and compensation wrappers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseMethod {
    pub model: Model,
    pub weighting: WeightScheme,
    pub offset: OffsetKind,
    /// Step fraction of the gradual cascade, when enabled.
    pub gradual: Option<f64>,
    pub tdc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    Sparse(SparseMethod),
    Janssen,
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Janssen => write!(f, "janssen"),
            MethodSpec::Sparse(m) => {
                let offset = match m.offset {
                    OffsetKind::None => "none",
                    OffsetKind::Half => "half",
                    OffsetKind::Full => "full",
                };
                write!(f, "{}:{}:{}", m.model.name(), m.weighting.name(), offset)?;
                if let Some(g) = m.gradual {
                    write!(f, ":grad={g}")?;
                }
                if m.tdc {
                    write!(f, ":tdc")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for MethodSpec {
    type Err = CoreError;

    /// Grammar: `janssen` or `syn|ana:<weights>:<offset>[:grad=<f>][:tdc]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| CoreError::InvalidParams(format!("method '{s}': {msg}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts[0] == "janssen" {
            if parts.len() != 1 {
                return Err(bad("janssen takes no options"));
            }
            return Ok(MethodSpec::Janssen);
        }
        if parts.len() < 3 {
            return Err(bad("expected model:weights:offset"));
        }
        let model = match parts[0] {
            "syn" => Model::Synthesis,
            "ana" => Model::Analysis,
            _ => return Err(bad("model must be syn or ana")),
        };
        let weighting: WeightScheme = parts[1].parse()?;
        let offset = match parts[2] {
            "none" => OffsetKind::None,
            "half" => OffsetKind::Half,
            "full" => OffsetKind::Full,
            _ => return Err(bad("offset must be none, half or full")),
        };
        let mut gradual = None;
        let mut tdc = false;
        for part in &parts[3..] {
            if *part == "tdc" {
                tdc = true;
            } else if let Some(v) = part.strip_prefix("grad=") {
                let f: f64 = v
                    .parse()
                    .map_err(|_| bad("grad= takes a number"))?;
                if !(f > 0.0 && f <= 0.5) {
                    return Err(bad("grad fraction outside (0, 0.5]"));
                }
                gradual = Some(f);
            } else {
                return Err(bad("unknown option"));
            }
        }
        Ok(MethodSpec::Sparse(SparseMethod {
            model,
            weighting,
            offset,
            gradual,
            tdc,
        }))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub window_length: usize,
    pub hop: usize,
    pub channels: usize,
    pub window_kind: WindowKind,
    pub solver: SolverConfig,
    pub reweight: ReweightConfig,
    pub gradual: GradualConfig,
    pub tdc: TdcConfig,
    pub janssen: JanssenConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_length: 2800,
            hop: 700,
            channels: 2800,
            window_kind: WindowKind::Hann,
            solver: SolverConfig::default(),
            reweight: ReweightConfig::default(),
            gradual: GradualConfig::default(),
            tdc: TdcConfig::default(),
            janssen: JanssenConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// A scaled-down lattice for fast tests.
    pub fn with_lattice(window_length: usize, hop: usize, channels: usize) -> Self {
        PipelineConfig {
            window_length,
            hop,
            channels,
            ..PipelineConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub gap: GapSpec,
    pub iterations: usize,
    pub converged: bool,
    /// The filled values, one per gap position.
    pub samples: Vec<f64>,
}

/// Maximal runs of unreliable samples, as 1-based gaps.
fn unreliable_runs(mask: &ReliableMask) -> Vec<GapSpec> {
    let mut runs = Vec::new();
    let mut start = None;
    for t in 0..=mask.len() {
        let broken = t < mask.len() && !mask.is_reliable(t);
        match (broken, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                runs.push(GapSpec::new(s + 1, t).expect("run bounds are valid"));
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// Context segment for the sparse methods: the gap plus up to `4w` samples
/// on each side, extended (or as a last resort shrunk) to a multiple of the
/// hop. Returns the 0-based half-open bounds.
fn sparse_segment(gap: &GapSpec, len: usize, window: usize, hop: usize) -> Result<(usize, usize)> {
    let margin = 4 * window;
    let g = gap.range0();
    if g.end > len {
        return Err(CoreError::InvalidGap(format!(
            "gap {}..={} exceeds signal length {len}",
            gap.start, gap.end
        )));
    }
    let mut s0 = g.start.saturating_sub(margin);
    let mut e0 = (g.end + margin).min(len);
    let target = (e0 - s0).div_ceil(hop) * hop;
    let mut deficit = target - (e0 - s0);
    let grow = deficit.min(len - e0);
    e0 += grow;
    deficit -= grow;
    let grow = deficit.min(s0);
    s0 -= grow;
    deficit -= grow;
    if deficit > 0 {
        // The whole signal is shorter than the rounded-up target; fall back
        // to the largest hop multiple that still contains the gap.
        let keep = len / hop * hop;
        if keep < gap.len() {
            return Err(CoreError::InsufficientContext(format!(
                "signal of {len} samples cannot host a hop-aligned segment around gap {}..={}",
                gap.start, gap.end
            )));
        }
        let mut shrink = len - keep;
        let take = shrink.min(len - g.end);
        e0 = len - take;
        shrink -= take;
        if shrink > g.start {
            return Err(CoreError::InsufficientContext(format!(
                "gap {}..={} leaves no room for hop alignment",
                gap.start, gap.end
            )));
        }
        s0 = shrink;
    }
    if e0 - s0 < window {
        return Err(CoreError::InsufficientContext(format!(
            "segment of {} samples is shorter than the window ({window})",
            e0 - s0
        )));
    }
    Ok((s0, e0))
}

/// Fixed-length segment centered on the gap, clamped to the signal.
fn centered_segment(gap: &GapSpec, len: usize, target: usize) -> (usize, usize) {
    if len <= target {
        return (0, len);
    }
    let c0 = (gap.range0().start + gap.range0().end) / 2;
    let s0 = c0.saturating_sub(target / 2).min(len - target);
    (s0, s0 + target)
}

fn run_sparse(
    method: &SparseMethod,
    segment: &[f64],
    local_mask: &ReliableMask,
    gap_local: &GapSpec,
    config: &PipelineConfig,
) -> Result<SolverResult> {
    let offset = compute_offset(gap_local, config.hop, method.offset);
    let shifted = apply_offset(segment, offset.value);
    let shifted_mask = local_mask.shifted(offset.value);
    let shifted_gap = gap_local.translated(-offset.value)?;
    let frame = TightGaborFrame::new(GaborParams {
        window_length: config.window_length,
        hop: config.hop,
        channels: config.channels,
        window_kind: config.window_kind,
        signal_length: segment.len(),
    })?;

    let run_plain = |m: &ReliableMask, o: &[f64]| -> Result<SolverResult> {
        match (method.weighting, method.model) {
            (WeightScheme::Iterative, Model::Synthesis) => {
                reweighted_synthesis(&frame, m, o, &config.reweight)
            }
            (WeightScheme::Iterative, Model::Analysis) => {
                reweighted_analysis(&frame, m, o, &config.reweight)
            }
            (scheme, model) => {
                let weights = compute_weights(&frame, m, scheme)?;
                match model {
                    Model::Synthesis => dr_synthesis(&frame, m, o, &weights, &config.solver),
                    Model::Analysis => cp_analysis(&frame, m, o, &weights, &config.solver),
                }
            }
        }
    };
    let run_graded = |m: &ReliableMask, o: &[f64]| -> Result<SolverResult> {
        match method.gradual {
            None => run_plain(m, o),
            Some(fraction) => {
                // Every unreliable run shrinks; under compensation this
                // covers the artificial gaps with the same treatment.
                let gaps = unreliable_runs(m);
                let gcfg = GradualConfig {
                    step_fraction: fraction,
                    strict: config.gradual.strict,
                    inner_scheme: method.weighting,
                };
                gradual_inpaint(m, &gaps, o, &gcfg, |mm, oo| run_plain(mm, oo))
            }
        }
    };
    let mut result = if method.tdc {
        let (result, _curve) = tdc_inpaint(
            &shifted_mask,
            &shifted_gap,
            &shifted,
            config.window_length,
            &config.tdc,
            |m, o| run_graded(m, o),
        )?;
        result
    } else {
        run_graded(&shifted_mask, &shifted)?
    };
    result.signal = undo_offset(&result.signal, offset.value);
    Ok(result)
}

/// Inpaint one gap of the signal; other gaps in the mask stay unknown. The
/// returned samples cover exactly the gap positions.
pub fn inpaint_gap(
    signal: &[f64],
    mask: &ReliableMask,
    gap: &GapSpec,
    method: &MethodSpec,
    config: &PipelineConfig,
) -> Result<GapReport> {
    let report = match method {
        MethodSpec::Janssen => {
            let (s0, e0) = centered_segment(gap, signal.len(), config.janssen.frame_length);
            let local_mask = mask.slice(s0, e0 - s0);
            let restored = janssen_inpaint(&signal[s0..e0], &local_mask, &config.janssen)?;
            let gap_local = gap.translated(-(s0 as i64))?;
            GapReport {
                gap: *gap,
                iterations: config.janssen.iterations,
                converged: true,
                samples: gap_local.range0().map(|t| restored[t]).collect(),
            }
        }
        MethodSpec::Sparse(sparse) => {
            let (s0, e0) = sparse_segment(gap, signal.len(), config.window_length, config.hop)?;
            let local_mask = mask.slice(s0, e0 - s0);
            let gap_local = gap.translated(-(s0 as i64))?;
            let result = run_sparse(sparse, &signal[s0..e0], &local_mask, &gap_local, config)?;
            GapReport {
                gap: *gap,
                iterations: result.iterations,
                converged: result.converged,
                samples: gap_local.range0().map(|t| result.signal[t]).collect(),
            }
        }
    };
    Ok(report)
}

/// Inpaint every gap independently and splice the fills into a copy of the
/// signal. Samples outside the gaps are returned bit-exactly.
pub fn inpaint_signal(
    signal: &[f64],
    gaps: &[GapSpec],
    method: &MethodSpec,
    config: &PipelineConfig,
) -> Result<(Vec<f64>, Vec<GapReport>)> {
    let mask = ReliableMask::from_gaps(signal.len(), gaps)?;
    let mut out = signal.to_vec();
    let mut reports = Vec::with_capacity(gaps.len());
    for gap in gaps {
        let report = inpaint_gap(signal, &mask, gap, method, config)?;
        for (t, &v) in gap.range0().zip(&report.samples) {
            out[t] = v;
        }
        reports.push(report);
    }
    Ok((out, reports))
}

//! Time-domain compensation of the energy drop left by sparse inpainting.
//!
//! The trick: punch artificial gaps into reliable signal near the true gap,
//! inpaint them with the same method, and compare their energy progression
//! against the (known) original. The per-segment energy ratios fit a
//! multiplicative curve that is then applied to the true gap's fill.

use crate::error::{CoreError, Result};
use crate::gap::{project_feasible, GapSpec, ReliableMask};
use crate::solver::SolverResult;
use crate::spline::ClampedCubicSpline;

#[derive(Debug, Clone, Copy)]
pub struct TdcConfig {
    /// Artificial gaps to place around the true gap (half per side, odd
    /// counts lean left). Zero disables compensation.
    pub num_artificial_gaps: usize,
    /// Segments m in each energy progression.
    pub num_segments: usize,
    /// Segment length in samples; `None` picks h/4 from the gap length.
    pub segment_length: Option<usize>,
}

impl Default for TdcConfig {
    fn default() -> Self {
        TdcConfig {
            num_artificial_gaps: 4,
            num_segments: 10,
            segment_length: None,
        }
    }
}

impl TdcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_segments < 2 {
            return Err(CoreError::InvalidConfig(
                "num_segments must be at least 2".into(),
            ));
        }
        if self.segment_length == Some(0) {
            return Err(CoreError::InvalidConfig(
                "segment_length must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn segment_length_for(&self, gap: &GapSpec) -> usize {
        self.segment_length.unwrap_or((gap.len() / 4).max(1))
    }
}

/// Energy progressions over the artificial gaps: `x[j]`/`y[j]` hold the
/// m-vector for gap j of the inpainted and the original signal respectively.
#[derive(Debug, Clone)]
pub struct EnergyMatrices {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

/// Per-segment least-squares energy ratios, one scalar fit per row:
/// `m_i = sum_j y_ij x_ij / sum_j x_ij^2`.
#[derive(Debug, Clone)]
pub struct MultiplierFit {
    pub values: Vec<f64>,
    /// Rows whose denominator vanished; their multiplier defaults to 1.
    pub degenerate_rows: Vec<usize>,
}

/// Everything learned on the way to the sampled gain curve.
#[derive(Debug, Clone)]
pub struct CompensationCurve {
    /// Energy multipliers per segment; empty when compensation is disabled.
    pub multipliers: Vec<f64>,
    /// Amplitude ratios, the square roots of the multipliers.
    pub amplitudes: Vec<f64>,
    /// Amplitudes after mirror-averaging.
    pub symmetrized: Vec<f64>,
    /// The gain sampled at each gap position, length h, floored at 1.
    pub samples: Vec<f64>,
    /// True when the floor actually raised some sample.
    pub clamped: bool,
    /// Whether the applied curve rises to a single peak and falls back.
    pub unimodal: bool,
    pub degenerate_rows: Vec<usize>,
}

impl CompensationCurve {
    fn identity(h: usize) -> Self {
        CompensationCurve {
            multipliers: Vec::new(),
            amplitudes: Vec::new(),
            symmetrized: Vec::new(),
            samples: vec![1.0; h],
            clamped: false,
            unimodal: true,
            degenerate_rows: Vec::new(),
        }
    }
}

/// Lay out artificial gaps around the true one: the first gap on each side
/// sits `window_length` reliable samples away from the true gap's edge,
/// further gaps on the same side keep `window_length/2` reliable samples
/// between neighbors. All artificial gaps copy the true gap's length. Odd
/// counts place the extra gap on the left. Returned sorted left to right.
pub fn place_artificial_gaps(
    gap: &GapSpec,
    config: &TdcConfig,
    signal_length: usize,
    window_length: usize,
) -> Result<Vec<GapSpec>> {
    config.validate()?;
    let h = gap.len();
    let w = window_length;
    let num = config.num_artificial_gaps;
    let left = num - num / 2;
    let right = num / 2;
    let mut gaps = Vec::with_capacity(num);
    for j in 0..left {
        // Right edge of the j-th gap to the left: w + j*(h + w/2) before s.
        let margin = w + j * (h + w / 2);
        let end = gap
            .start
            .checked_sub(margin + 1)
            .filter(|&e| e >= h)
            .ok_or_else(|| {
                CoreError::InsufficientContext(format!(
                    "no room for artificial gap {} left of {}..={}",
                    j + 1,
                    gap.start,
                    gap.end
                ))
            })?;
        gaps.push(GapSpec::new(end - h + 1, end)?);
    }
    for j in 0..right {
        let margin = w + j * (h + w / 2);
        let start = gap.end + margin + 1;
        if start + h - 1 > signal_length {
            return Err(CoreError::InsufficientContext(format!(
                "no room for artificial gap {} right of {}..={}",
                j + 1,
                gap.start,
                gap.end
            )));
        }
        gaps.push(GapSpec::new(start, start + h - 1)?);
    }
    gaps.sort_by_key(|g| g.start);
    Ok(gaps)
}

/// Segment start positions (1-based) and centers for a gap: m equally spaced
/// segments, the first flush with the gap start, the last flush with the end.
fn segment_layout(gap: &GapSpec, m: usize, segment_length: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let h = gap.len();
    if segment_length > h {
        return Err(CoreError::SegmentExceedsGap {
            segment: segment_length,
            gap: h,
        });
    }
    let span = (h - segment_length) as f64;
    let mut starts = Vec::with_capacity(m);
    let mut centers = Vec::with_capacity(m);
    for i in 0..m {
        let offset = (span * i as f64 / (m - 1) as f64).round() as usize;
        let start = gap.start + offset;
        starts.push(start);
        centers.push(start as f64 + (segment_length - 1) as f64 / 2.0);
    }
    Ok((starts, centers))
}

/// Energy (sum of squares) of the signal over each of the m segments.
pub fn energy_progression(
    signal: &[f64],
    gap: &GapSpec,
    m: usize,
    segment_length: usize,
) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(CoreError::InvalidConfig(
            "energy progression needs at least 2 segments".into(),
        ));
    }
    if gap.end > signal.len() {
        return Err(CoreError::InvalidGap(format!(
            "gap {}..={} exceeds signal length {}",
            gap.start,
            gap.end,
            signal.len()
        )));
    }
    let (starts, _) = segment_layout(gap, m, segment_length)?;
    Ok(starts
        .iter()
        .map(|&s| {
            signal[(s - 1)..(s - 1 + segment_length)]
                .iter()
                .map(|v| v * v)
                .sum()
        })
        .collect())
}

/// Row-wise least squares for the energy multipliers: each segment's
/// multiplier is fit over the artificial gaps independently.
pub fn solve_multipliers(energies: &EnergyMatrices) -> Result<MultiplierFit> {
    if energies.x.len() != energies.y.len() || energies.x.is_empty() {
        return Err(CoreError::InvalidParams(
            "energy matrices need matching, non-empty gap columns".into(),
        ));
    }
    let m = energies.x[0].len();
    if energies
        .x
        .iter()
        .chain(energies.y.iter())
        .any(|col| col.len() != m)
    {
        return Err(CoreError::InvalidParams(
            "energy progression columns differ in length".into(),
        ));
    }
    let mut values = Vec::with_capacity(m);
    let mut degenerate_rows = Vec::new();
    for i in 0..m {
        let num: f64 = energies
            .x
            .iter()
            .zip(&energies.y)
            .map(|(x, y)| y[i] * x[i])
            .sum();
        let den: f64 = energies.x.iter().map(|x| x[i] * x[i]).sum();
        if den == 0.0 {
            degenerate_rows.push(i);
            values.push(1.0);
        } else {
            values.push(num / den);
        }
    }
    Ok(MultiplierFit {
        values,
        degenerate_rows,
    })
}

/// Mirror-average a vector into a palindrome; the middle entry of an
/// odd-length input stays put.
pub fn symmetrize(n: &[f64]) -> Vec<f64> {
    let m = n.len();
    let mut out = n.to_vec();
    for i in 0..m / 2 {
        let avg = (n[i] + n[m - 1 - i]) / 2.0;
        out[i] = avg;
        out[m - 1 - i] = avg;
    }
    out
}

/// Spline the symmetrized amplitudes into a gain curve over the gap: value 1
/// and slope 0 at both gap edges, sampled at every gap position, floored
/// at 1.
pub fn build_curve(
    symmetrized: &[f64],
    centers: &[f64],
    gap: &GapSpec,
) -> Result<CompensationCurve> {
    if symmetrized.len() != centers.len() {
        return Err(CoreError::LengthMismatch {
            expected: centers.len(),
            got: symmetrized.len(),
        });
    }
    let s = gap.start as f64;
    let f = gap.end as f64;
    let mut xs = Vec::with_capacity(centers.len() + 2);
    let mut ys = Vec::with_capacity(centers.len() + 2);
    xs.push(s);
    ys.push(1.0);
    xs.extend_from_slice(centers);
    ys.extend_from_slice(symmetrized);
    xs.push(f);
    ys.push(1.0);
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CoreError::NonMonotoneKnots);
    }
    let spline = ClampedCubicSpline::new(&xs, &ys, 0.0, 0.0)?;
    let mut clamped = false;
    let samples: Vec<f64> = gap
        .range0()
        .map(|t| {
            let v = spline.eval((t + 1) as f64);
            if v < 1.0 {
                // Only material dips count as clamping; sub-ulp roundoff on
                // an all-ones curve does not.
                clamped |= v < 1.0 - 1e-12;
                1.0
            } else {
                v
            }
        })
        .collect();
    // Unimodal: rises to the peak, falls after it (ties allowed).
    let peak = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let tol = 1e-12;
    let unimodal = samples[..=peak].windows(2).all(|w| w[1] >= w[0] - tol)
        && samples[peak..].windows(2).all(|w| w[1] <= w[0] + tol);
    Ok(CompensationCurve {
        multipliers: Vec::new(),
        amplitudes: Vec::new(),
        symmetrized: symmetrized.to_vec(),
        samples,
        clamped,
        unimodal,
        degenerate_rows: Vec::new(),
    })
}

/// Full compensation run. `solve(mask, observed)` inpaints one configuration;
/// it is called once for the true gap and once per artificial gap (the true
/// gap stays unreliable in those runs). The compensated signal multiplies the
/// true gap's fill by the learned curve and leaves everything else untouched.
pub fn tdc_inpaint<F>(
    mask: &ReliableMask,
    gap: &GapSpec,
    observed: &[f64],
    window_length: usize,
    config: &TdcConfig,
    mut solve: F,
) -> Result<(SolverResult, CompensationCurve)>
where
    F: FnMut(&ReliableMask, &[f64]) -> Result<SolverResult>,
{
    config.validate()?;
    if mask.len() != observed.len() {
        return Err(CoreError::LengthMismatch {
            expected: mask.len(),
            got: observed.len(),
        });
    }
    let mut inner = solve(mask, observed)?;
    if config.num_artificial_gaps == 0 {
        let curve = CompensationCurve::identity(gap.len());
        return Ok((inner, curve));
    }

    let artificial = place_artificial_gaps(gap, config, mask.len(), window_length)?;
    for art in &artificial {
        if art.range0().any(|t| !mask.is_reliable(t)) {
            return Err(CoreError::InsufficientContext(format!(
                "artificial gap {}..={} overlaps unreliable samples",
                art.start, art.end
            )));
        }
    }

    let segment_length = config.segment_length_for(gap);
    let mut energies = EnergyMatrices {
        x: Vec::with_capacity(artificial.len()),
        y: Vec::with_capacity(artificial.len()),
    };
    let mut iterations = inner.iterations;
    let mut converged = inner.converged;
    let mut trace = inner.objective_trace.clone();
    for art in &artificial {
        let mut art_mask = mask.clone();
        art_mask.mark_gap(art)?;
        let mut art_observed = observed.to_vec();
        for t in art.range0() {
            art_observed[t] = 0.0;
        }
        let run = solve(&art_mask, &art_observed)?;
        iterations += run.iterations;
        converged &= run.converged;
        trace.extend_from_slice(&run.objective_trace);
        energies
            .x
            .push(energy_progression(&run.signal, art, config.num_segments, segment_length)?);
        energies
            .y
            .push(energy_progression(observed, art, config.num_segments, segment_length)?);
    }

    let fit = solve_multipliers(&energies)?;
    let amplitudes: Vec<f64> = fit.values.iter().map(|&m| m.sqrt()).collect();
    let symmetrized = symmetrize(&amplitudes);
    let (_, centers) = segment_layout(gap, config.num_segments, segment_length)?;
    let mut curve = build_curve(&symmetrized, &centers, gap)?;
    curve.multipliers = fit.values;
    curve.amplitudes = amplitudes;
    curve.degenerate_rows = fit.degenerate_rows;

    for (t, q) in gap.range0().zip(&curve.samples) {
        inner.signal[t] *= q;
    }
    inner.signal = project_feasible(mask, observed, &inner.signal)?;
    inner.iterations = iterations;
    inner.converged = converged;
    inner.objective_trace = trace;
    Ok((inner, curve))
}

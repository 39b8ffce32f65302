//! Gradual inpainting: solve, freeze a strip of samples at each gap edge,
//! shrink the gap, repeat.
//!
//! Freezing promotes solved edge samples to reliable ones, so later grades
//! work against a larger context. With constant weights the procedure is a
//! fixed point (each grade reproduces the previous solution); it only earns
//! its cost with a weighting scheme that reacts to the shrinking gap.

use crate::error::{CoreError, Result};
use crate::gap::{GapSpec, ReliableMask};
use crate::solver::SolverResult;
use crate::weights::WeightScheme;

#[derive(Debug, Clone, Copy)]
pub struct GradualConfig {
    /// Edge strip size r as a fraction of the original gap length; r is fixed
    /// across grades and floored to an integer, minimum 1.
    pub step_fraction: f64,
    /// Refuse constant-weight inner methods instead of running a no-op
    /// cascade.
    pub strict: bool,
    /// Weighting scheme of the inner method; recorded here for the strict
    /// check, the actual weighting happens inside the solve callback.
    pub inner_scheme: WeightScheme,
}

impl Default for GradualConfig {
    fn default() -> Self {
        GradualConfig {
            step_fraction: 0.125,
            strict: false,
            inner_scheme: WeightScheme::Energy,
        }
    }
}

impl GradualConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_fraction > 0.0 && self.step_fraction <= 0.5) {
            return Err(CoreError::InvalidConfig(format!(
                "step_fraction {} outside (0, 0.5]",
                self.step_fraction
            )));
        }
        if self.strict && self.inner_scheme == WeightScheme::None {
            return Err(CoreError::ConfigRejected(
                "gradual inpainting with constant weights reproduces the plain solution; \
                 pick a weighting scheme or disable strict mode"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// One shrinking gap: the live range plus its fixed edge strip.
struct Grade {
    start: usize,
    end: usize,
    step: usize,
}

/// Run gradual inpainting over `gaps`, calling `solve(mask, observed)` once
/// per grade. The callback sees the current reliability picture (shrunk gaps,
/// frozen edges already reliable with solved values) and must return a
/// feasible solution; weights for scheme-based methods are its business to
/// recompute from the mask it receives.
///
/// Extra unreliable samples in `mask` beyond `gaps` stay unreliable at every
/// grade; only the listed gaps shrink.
pub fn gradual_inpaint<F>(
    mask: &ReliableMask,
    gaps: &[GapSpec],
    observed: &[f64],
    config: &GradualConfig,
    mut solve: F,
) -> Result<SolverResult>
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
    if gaps.is_empty() {
        return Err(CoreError::InvalidGap("no gaps to inpaint".into()));
    }
    let mut grades = Vec::with_capacity(gaps.len());
    for gap in gaps {
        if gap.end > mask.len() {
            return Err(CoreError::InvalidGap(format!(
                "gap {}..={} exceeds signal length {}",
                gap.start,
                gap.end,
                mask.len()
            )));
        }
        for t in gap.range0() {
            if mask.is_reliable(t) {
                return Err(CoreError::InvalidGap(format!(
                    "gap {}..={} overlaps reliable samples",
                    gap.start, gap.end
                )));
            }
        }
        let step = ((gap.len() as f64 * config.step_fraction).floor() as usize).max(1);
        grades.push(Grade {
            start: gap.start,
            end: gap.end,
            step,
        });
    }

    let mut mask = mask.clone();
    let mut observed = observed.to_vec();
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut out: Option<SolverResult> = None;
    while grades.iter().any(|g| g.start <= g.end) {
        let result = solve(&mask, &observed)?;
        if result.signal.len() != observed.len() {
            return Err(CoreError::LengthMismatch {
                expected: observed.len(),
                got: result.signal.len(),
            });
        }
        iterations += result.iterations;
        trace.extend_from_slice(&result.objective_trace);
        for grade in grades.iter_mut().filter(|g| g.start <= g.end) {
            // Freeze up to `step` solved samples at each edge (1-based
            // inclusive bounds; short final grades freeze everything).
            let left_end = (grade.start + grade.step - 1).min(grade.end);
            let right_start = grade.end.saturating_sub(grade.step - 1).max(grade.start);
            let left = (grade.start - 1)..left_end;
            let right = (right_start - 1)..grade.end;
            for t in left.clone().chain(right.clone()) {
                observed[t] = result.signal[t];
            }
            mask.mark_reliable(left);
            mask.mark_reliable(right);
            grade.start += grade.step;
            grade.end = grade.end.saturating_sub(grade.step);
        }
        out = Some(result);
    }
    let mut result = out.expect("gaps are non-empty, at least one grade runs");
    result.iterations = iterations;
    result.objective_trace = trace;
    Ok(result)
}

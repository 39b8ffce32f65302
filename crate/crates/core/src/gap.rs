//! Gap bookkeeping: which samples are reliable, which are missing, and the
//! operations built on that split (masking, feasible projection, gap SNR).

use crate::error::{CoreError, Result};

/// SNR value reported when the reconstruction is exact over the gap.
pub const DEFAULT_SNR_CAP: f64 = 99.0;

/// A contiguous run of missing samples, in 1-based inclusive sample indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapSpec {
    pub start: usize,
    pub end: usize,
}

impl GapSpec {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 {
            return Err(CoreError::InvalidGap("start index is 1-based".into()));
        }
        if start > end {
            return Err(CoreError::InvalidGap(format!(
                "start {start} > end {end}"
            )));
        }
        Ok(GapSpec { start, end })
    }

    pub fn from_start_len(start: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(CoreError::InvalidGap("gap length must be positive".into()));
        }
        GapSpec::new(start, start + len - 1)
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Gap center ⌊(start + end) / 2⌋, 1-based.
    pub fn center(&self) -> usize {
        (self.start + self.end) / 2
    }

    /// The gap as a 0-based half-open range.
    pub fn range0(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }

    /// Translate by `shift` samples (used when moving between the full signal
    /// and a segment, or after an alignment shift).
    pub fn translated(&self, shift: i64) -> Result<Self> {
        let s = self.start as i64 + shift;
        let e = self.end as i64 + shift;
        if s < 1 {
            return Err(CoreError::InvalidGap(format!(
                "translation by {shift} moves gap start to {s}"
            )));
        }
        Ok(GapSpec {
            start: s as usize,
            end: e as usize,
        })
    }
}

/// Per-sample reliability flags for a signal; `true` marks a reliable sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliableMask {
    reliable: Vec<bool>,
}

impl ReliableMask {
    pub fn all_reliable(len: usize) -> Self {
        ReliableMask {
            reliable: vec![true; len],
        }
    }

    pub fn from_gaps(len: usize, gaps: &[GapSpec]) -> Result<Self> {
        let mut mask = ReliableMask::all_reliable(len);
        for gap in gaps {
            mask.mark_gap(gap)?;
        }
        Ok(mask)
    }

    pub fn mark_gap(&mut self, gap: &GapSpec) -> Result<()> {
        if gap.end > self.reliable.len() {
            return Err(CoreError::InvalidGap(format!(
                "gap {}..={} exceeds signal length {}",
                gap.start,
                gap.end,
                self.reliable.len()
            )));
        }
        for flag in &mut self.reliable[gap.range0()] {
            *flag = false;
        }
        Ok(())
    }

    pub fn mark_reliable(&mut self, range0: std::ops::Range<usize>) {
        for flag in &mut self.reliable[range0] {
            *flag = true;
        }
    }

    pub fn len(&self) -> usize {
        self.reliable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reliable.is_empty()
    }

    /// Reliability of the 0-based sample `i`.
    pub fn is_reliable(&self, i: usize) -> bool {
        self.reliable[i]
    }

    pub fn flags(&self) -> &[bool] {
        &self.reliable
    }

    pub fn reliable_count(&self) -> usize {
        self.reliable.iter().filter(|&&r| r).count()
    }

    pub fn unreliable_count(&self) -> usize {
        self.len() - self.reliable_count()
    }

    /// Extract the flags for a segment `[start0, start0 + len)` (no wrapping).
    pub fn slice(&self, start0: usize, len: usize) -> ReliableMask {
        ReliableMask {
            reliable: self.reliable[start0..start0 + len].to_vec(),
        }
    }

    /// Circularly shifted copy; entry `i` of the result is entry `(i + shift) mod len`.
    pub fn shifted(&self, shift: i64) -> ReliableMask {
        ReliableMask {
            reliable: circular_shift(&self.reliable, shift),
        }
    }
}

/// Circular shift used for alignment offsets: `out[i] = input[(i + shift) mod len]`,
/// so a positive shift moves content toward lower indices.
pub fn circular_shift<T: Copy>(input: &[T], shift: i64) -> Vec<T> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let s = shift.rem_euclid(n as i64) as usize;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&input[s..]);
    out.extend_from_slice(&input[..s]);
    out
}

/// Zero out unreliable samples.
pub fn mask_apply(mask: &ReliableMask, signal: &[f64]) -> Result<Vec<f64>> {
    check_len(mask, signal)?;
    Ok(signal
        .iter()
        .zip(mask.flags())
        .map(|(&x, &r)| if r { x } else { 0.0 })
        .collect())
}

/// Projection onto the feasible set: reliable samples are copied from
/// `observed` (bit-exactly), unreliable samples from `candidate`.
pub fn project_feasible(
    mask: &ReliableMask,
    observed: &[f64],
    candidate: &[f64],
) -> Result<Vec<f64>> {
    check_len(mask, observed)?;
    check_len(mask, candidate)?;
    Ok(mask
        .flags()
        .iter()
        .zip(observed.iter().zip(candidate.iter()))
        .map(|(&r, (&y, &c))| if r { y } else { c })
        .collect())
}

/// In-place variant of [`project_feasible`].
pub fn project_feasible_inplace(mask: &ReliableMask, observed: &[f64], candidate: &mut [f64]) {
    for ((c, &r), &y) in candidate.iter_mut().zip(mask.flags()).zip(observed) {
        if r {
            *c = y;
        }
    }
}

/// SNR in dB of `inpainted` against `original`, measured over gap samples only.
///
/// Returns `cap` when the reconstruction is exact (zero error energy) and an
/// error when the original is silent over the gaps.
pub fn snr(original: &[f64], inpainted: &[f64], gaps: &[GapSpec], cap: f64) -> Result<f64> {
    if original.len() != inpainted.len() {
        return Err(CoreError::LengthMismatch {
            expected: original.len(),
            got: inpainted.len(),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for gap in gaps {
        if gap.end > original.len() {
            return Err(CoreError::InvalidGap(format!(
                "gap {}..={} exceeds signal length {}",
                gap.start,
                gap.end,
                original.len()
            )));
        }
        for i in gap.range0() {
            num += original[i] * original[i];
            let e = original[i] - inpainted[i];
            den += e * e;
        }
    }
    if num == 0.0 {
        return Err(CoreError::ZeroEnergyOriginal);
    }
    if den == 0.0 {
        return Ok(cap);
    }
    Ok(10.0 * (num / den).log10())
}

fn check_len(mask: &ReliableMask, signal: &[f64]) -> Result<()> {
    if mask.len() != signal.len() {
        return Err(CoreError::LengthMismatch {
            expected: mask.len(),
            got: signal.len(),
        });
    }
    Ok(())
}

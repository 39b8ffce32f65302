//! Tight Gabor frames over C^L and their analysis/synthesis operators.
//!
//! Atoms are translates (by multiples of the hop `a`) and modulations (over `M`
//! channels) of one real window, circularly wrapped over the signal length `L`.
//! The window is normalized so the frame is Parseval tight: synthesis applied
//! after analysis reproduces the signal exactly. Operators run one FFT of
//! length `M` per time frame, which requires the painless condition `M >= w`.
//!
//! Conventions: the window of length `w` is centered on sample `k*a` (0-based)
//! for time frame `k`; modulation applies to the translated window, with phase
//! `exp(2*pi*i*m*t/M)` along the window's (unwrapped) sample positions `t`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::gap::{circular_shift, GapSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Hann,
    Rectangular,
}

/// Lattice and window parameters of a Gabor frame over signals of length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaborParams {
    /// Window length `w` in samples.
    pub window_length: usize,
    /// Time shift `a` between adjacent frames.
    pub hop: usize,
    /// Number of modulation channels `M`.
    pub channels: usize,
    pub window_kind: WindowKind,
    /// Signal length `L`; must be a multiple of `hop`.
    pub signal_length: usize,
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 {
            return Err(CoreError::InvalidParams("hop must be positive".into()));
        }
        if self.window_length < self.hop {
            return Err(CoreError::InvalidParams(format!(
                "window length {} smaller than hop {}",
                self.window_length, self.hop
            )));
        }
        if self.channels < self.window_length {
            return Err(CoreError::InvalidParams(format!(
                "channels {} < window length {}: frame operators need M >= w",
                self.channels, self.window_length
            )));
        }
        if self.signal_length < self.window_length {
            return Err(CoreError::InvalidParams(format!(
                "signal length {} shorter than window {}",
                self.signal_length, self.window_length
            )));
        }
        if self.signal_length % self.hop != 0 {
            return Err(CoreError::InvalidParams(format!(
                "signal length {} not a multiple of hop {}",
                self.signal_length, self.hop
            )));
        }
        Ok(())
    }

    pub fn num_frames(&self) -> usize {
        self.signal_length / self.hop
    }

    /// Total number of coefficients `N = (L / a) * M`.
    pub fn num_coefficients(&self) -> usize {
        self.num_frames() * self.channels
    }
}

/// Coefficients on the time-frequency lattice, stored frame-major:
/// entry `(k, m)` lives at `k * channels + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefGrid {
    values: Vec<Complex64>,
    num_frames: usize,
    channels: usize,
}

impl CoefGrid {
    pub fn zeros(num_frames: usize, channels: usize) -> Self {
        CoefGrid {
            values: vec![Complex64::ZERO; num_frames * channels],
            num_frames,
            channels,
        }
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, frame: usize, channel: usize) -> Complex64 {
        self.values[frame * self.channels + channel]
    }

    pub fn set(&mut self, frame: usize, channel: usize, value: Complex64) {
        self.values[frame * self.channels + channel] = value;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// l2 distance to another grid of the same shape.
    pub fn distance_l2(&self, other: &CoefGrid) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// A Parseval tight Gabor frame with precomputed window, FFT plans and
/// per-frame phase rotations. Immutable after construction; operator calls
/// take `&self` and are safe to run from several threads.
pub struct TightGaborFrame {
    params: GaborParams,
    tight_window: Vec<f64>,
    /// ⌊w/2⌋; frame `k` covers unwrapped positions `k*hop - center + [0, w)`.
    center: usize,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
    /// Index into `rotations` per time frame.
    rotation_of_frame: Vec<usize>,
    /// Distinct vectors `exp(-2*pi*i*m*rho/M)` for the residues `rho` that
    /// `k*hop - center` takes modulo `M`.
    rotations: Vec<Vec<Complex64>>,
    inv_sqrt_channels: f64,
}

impl TightGaborFrame {
    pub fn new(params: GaborParams) -> Result<Self> {
        params.validate()?;
        let w = params.window_length;
        let a = params.hop;
        let m = params.channels;

        let prototype: Vec<f64> = match params.window_kind {
            // Periodic Hann; peak 1 at w/2, zero at 0.
            WindowKind::Hann => (0..w)
                .map(|u| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * u as f64 / w as f64).cos())
                .collect(),
            WindowKind::Rectangular => vec![1.0; w],
        };

        // Sum of squared window values over all hop translates, which only
        // depends on the position modulo the hop.
        let mut shift_power = vec![0.0; a];
        for (u, &g) in prototype.iter().enumerate() {
            shift_power[u % a] += g * g;
        }
        if shift_power.iter().any(|&p| p <= 0.0) {
            return Err(CoreError::InvalidParams(
                "window translates do not cover the signal; increase window length".into(),
            ));
        }
        let tight_window: Vec<f64> = prototype
            .iter()
            .enumerate()
            .map(|(u, &g)| g / shift_power[u % a].sqrt())
            .collect();

        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(m);
        let fft_inverse = planner.plan_fft_inverse(m);

        let center = w / 2;
        let num_frames = params.num_frames();
        let mut rotation_of_frame = Vec::with_capacity(num_frames);
        let mut rotations: Vec<Vec<Complex64>> = Vec::new();
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for k in 0..num_frames {
            let base = k as i64 * a as i64 - center as i64;
            let rho = base.rem_euclid(m as i64) as usize;
            let idx = *seen.entry(rho).or_insert_with(|| {
                rotations.push(rotation_vector(rho, m));
                rotations.len() - 1
            });
            rotation_of_frame.push(idx);
        }

        Ok(TightGaborFrame {
            params,
            tight_window,
            center,
            fft_forward,
            fft_inverse,
            rotation_of_frame,
            rotations,
            inv_sqrt_channels: 1.0 / (m as f64).sqrt(),
        })
    }

    pub fn params(&self) -> &GaborParams {
        &self.params
    }

    /// The normalized window: prototype divided by the root of the summed
    /// squared hop translates.
    pub fn tight_window(&self) -> &[f64] {
        &self.tight_window
    }

    pub fn num_frames(&self) -> usize {
        self.params.num_frames()
    }

    pub fn num_coefficients(&self) -> usize {
        self.params.num_coefficients()
    }

    fn frame_base(&self, k: usize) -> i64 {
        k as i64 * self.params.hop as i64 - self.center as i64
    }

    fn check_signal_len(&self, len: usize) -> Result<()> {
        if len != self.params.signal_length {
            return Err(CoreError::LengthMismatch {
                expected: self.params.signal_length,
                got: len,
            });
        }
        Ok(())
    }

    fn check_grid(&self, grid: &CoefGrid) -> Result<()> {
        if grid.num_frames != self.num_frames() || grid.channels != self.params.channels {
            return Err(CoreError::LengthMismatch {
                expected: self.num_coefficients(),
                got: grid.len(),
            });
        }
        Ok(())
    }

    /// Analysis operator for real signals: inner products with every atom.
    pub fn analyze(&self, signal: &[f64]) -> Result<CoefGrid> {
        self.check_signal_len(signal.len())?;
        Ok(self.analyze_impl(|t| Complex64::new(signal[t], 0.0)))
    }

    /// Analysis operator for complex signals.
    pub fn analyze_complex(&self, signal: &[Complex64]) -> Result<CoefGrid> {
        self.check_signal_len(signal.len())?;
        Ok(self.analyze_impl(|t| signal[t]))
    }

    fn analyze_impl(&self, load: impl Fn(usize) -> Complex64) -> CoefGrid {
        let w = self.params.window_length;
        let m = self.params.channels;
        let l = self.params.signal_length;
        let mut grid = CoefGrid::zeros(self.num_frames(), m);
        let mut buf = vec![Complex64::ZERO; m];
        let mut scratch = vec![Complex64::ZERO; self.fft_forward.get_inplace_scratch_len()];
        for k in 0..self.num_frames() {
            let mut t = self.frame_base(k).rem_euclid(l as i64) as usize;
            for (u, slot) in buf[..w].iter_mut().enumerate() {
                *slot = load(t) * self.tight_window[u];
                t += 1;
                if t == l {
                    t = 0;
                }
            }
            for slot in buf[w..].iter_mut() {
                *slot = Complex64::ZERO;
            }
            self.fft_forward.process_with_scratch(&mut buf, &mut scratch);
            let rot = &self.rotations[self.rotation_of_frame[k]];
            let out = &mut grid.values[k * m..(k + 1) * m];
            for ((o, &b), &r) in out.iter_mut().zip(buf.iter()).zip(rot.iter()) {
                *o = b * r * self.inv_sqrt_channels;
            }
        }
        grid
    }

    /// Synthesis operator, returning the real part of the synthesized signal.
    ///
    /// Coefficient grids arising from real signals stay conjugate-symmetric
    /// across channels under all operations in this crate, so the imaginary
    /// part is rounding noise.
    pub fn synthesize(&self, grid: &CoefGrid) -> Result<Vec<f64>> {
        Ok(self.synthesize_complex(grid)?.iter().map(|v| v.re).collect())
    }

    /// Synthesis operator: weighted superposition of atoms.
    pub fn synthesize_complex(&self, grid: &CoefGrid) -> Result<Vec<Complex64>> {
        self.check_grid(grid)?;
        let w = self.params.window_length;
        let m = self.params.channels;
        let l = self.params.signal_length;
        let mut out = vec![Complex64::ZERO; l];
        let mut buf = vec![Complex64::ZERO; m];
        let mut scratch = vec![Complex64::ZERO; self.fft_inverse.get_inplace_scratch_len()];
        for k in 0..self.num_frames() {
            let rot = &self.rotations[self.rotation_of_frame[k]];
            let coefs = &grid.values[k * m..(k + 1) * m];
            for ((slot, &c), &r) in buf.iter_mut().zip(coefs.iter()).zip(rot.iter()) {
                *slot = c * r.conj();
            }
            self.fft_inverse.process_with_scratch(&mut buf, &mut scratch);
            let mut t = self.frame_base(k).rem_euclid(l as i64) as usize;
            for u in 0..w {
                out[t] += buf[u] * (self.tight_window[u] * self.inv_sqrt_channels);
                t += 1;
                if t == l {
                    t = 0;
                }
            }
        }
        Ok(out)
    }

    /// Direct construction of the atom for time frame `k` and channel `m`,
    /// without FFTs. Used as the reference in tests and for weight oracles.
    pub fn atom(&self, k: usize, channel: usize) -> Vec<Complex64> {
        let w = self.params.window_length;
        let m = self.params.channels as i64;
        let l = self.params.signal_length;
        let base = self.frame_base(k);
        let mut out = vec![Complex64::ZERO; l];
        for u in 0..w {
            let pos = base + u as i64;
            let t = pos.rem_euclid(l as i64) as usize;
            let phase_index = (channel as i64 * pos.rem_euclid(m)).rem_euclid(m);
            let angle = 2.0 * std::f64::consts::PI * phase_index as f64 / m as f64;
            out[t] += Complex64::from_polar(
                self.tight_window[u] * self.inv_sqrt_channels,
                angle,
            );
        }
        out
    }
}

/// `exp(-2*pi*i*m*rho/M)` for `m` in `[0, M)`, with the phase reduced in
/// integer arithmetic so large lattices lose no precision.
fn rotation_vector(rho: usize, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|ch| {
            let phase_index = (ch * rho) % m;
            let angle = -2.0 * std::f64::consts::PI * phase_index as f64 / m as f64;
            Complex64::from_polar(1.0, angle)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetKind {
    None,
    Half,
    Full,
}

/// A circular alignment shift, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffsetSpec {
    pub kind: OffsetKind,
    pub value: i64,
}

impl OffsetSpec {
    pub fn none() -> Self {
        OffsetSpec {
            kind: OffsetKind::None,
            value: 0,
        }
    }
}

/// Offset aligning the gap center with the window grid: `full` targets a
/// window center, `half` the midpoint between two adjacent window centers.
/// Window centers sit on 1-based positions `1 + k*hop`.
pub fn compute_offset(gap: &GapSpec, hop: usize, kind: OffsetKind) -> OffsetSpec {
    if kind == OffsetKind::None {
        return OffsetSpec::none();
    }
    let c = gap.center() as i64;
    let a = hop as i64;
    let k = (c - 1).div_euclid(a);
    let anchor = match kind {
        OffsetKind::Full => 1 + k * a,
        OffsetKind::Half => 1 + k * a + (a + 1) / 2,
        OffsetKind::None => unreachable!(),
    };
    OffsetSpec {
        kind,
        value: c - anchor,
    }
}

/// Apply an alignment offset: the sample at index `i` moves to `i - offset`
/// (circularly), so the gap center lands on its anchor.
pub fn apply_offset(signal: &[f64], offset: i64) -> Vec<f64> {
    circular_shift(signal, offset)
}

/// Undo [`apply_offset`].
pub fn undo_offset(signal: &[f64], offset: i64) -> Vec<f64> {
    circular_shift(signal, -offset)
}

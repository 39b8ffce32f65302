//! Per-atom weights measuring how much of an atom survives the reliable mask.
//!
//! Atom magnitudes do not depend on the modulation channel, so every scheme is
//! computed once per time frame on the window samples and broadcast across
//! channels. Weights are 1 for frames clear of the gap and decrease toward 0
//! as the window sinks into it.

use crate::error::{CoreError, Result};
use crate::frame::{CoefGrid, TightGaborFrame};
use crate::gap::ReliableMask;

/// Floor applied to every weight; frames entirely inside a gap would other-
/// wise get weight 0, which the solvers do not accept.
pub const WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// Unweighted: all ones.
    None,
    /// Surviving fraction of the window support (sample counts).
    Supp,
    /// Surviving fraction of the window l1 mass.
    Abs,
    /// Surviving fraction of the window l2 norm.
    Norm,
    /// Surviving fraction of the window energy; the square of `Norm`.
    Energy,
    /// Marker for weights produced by the reweighting driver; not computable
    /// from the mask alone.
    Iterative,
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::None => "none",
            WeightScheme::Supp => "supp",
            WeightScheme::Abs => "abs",
            WeightScheme::Norm => "norm",
            WeightScheme::Energy => "energy",
            WeightScheme::Iterative => "iterative",
        }
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(WeightScheme::None),
            "supp" => Ok(WeightScheme::Supp),
            "abs" => Ok(WeightScheme::Abs),
            "norm" => Ok(WeightScheme::Norm),
            "energy" => Ok(WeightScheme::Energy),
            "iterative" => Ok(WeightScheme::Iterative),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown weighting scheme '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One positive weight per coefficient, aligned with [`CoefGrid`] storage.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    scheme: WeightScheme,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, scheme: WeightScheme) -> Self {
        WeightVector { values, scheme }
    }

    pub fn uniform(len: usize) -> Self {
        WeightVector {
            values: vec![1.0; len],
            scheme: WeightScheme::None,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Compute mask-dependent weights for every atom of `frame`.
pub fn compute_weights(
    frame: &TightGaborFrame,
    mask: &ReliableMask,
    scheme: WeightScheme,
) -> Result<WeightVector> {
    let params = frame.params();
    if mask.len() != params.signal_length {
        return Err(CoreError::LengthMismatch {
            expected: params.signal_length,
            got: mask.len(),
        });
    }
    if scheme == WeightScheme::Iterative {
        return Err(CoreError::UnsupportedScheme("iterative".into()));
    }
    let n = params.num_coefficients();
    if scheme == WeightScheme::None {
        return Ok(WeightVector::uniform(n));
    }

    let w = params.window_length;
    let m = params.channels;
    let l = params.signal_length;
    let window = frame.tight_window();
    let mut values = Vec::with_capacity(n);
    for k in 0..params.num_frames() {
        let base = (k * params.hop) as i64 - (w / 2) as i64;
        let mut t = base.rem_euclid(l as i64) as usize;
        let mut num = 0.0;
        let mut den = 0.0;
        for &g in window.iter().take(w) {
            let reliable = mask.is_reliable(t);
            match scheme {
                WeightScheme::Supp => {
                    if g != 0.0 {
                        den += 1.0;
                        if reliable {
                            num += 1.0;
                        }
                    }
                }
                WeightScheme::Abs => {
                    den += g.abs();
                    if reliable {
                        num += g.abs();
                    }
                }
                WeightScheme::Norm | WeightScheme::Energy => {
                    den += g * g;
                    if reliable {
                        num += g * g;
                    }
                }
                WeightScheme::None | WeightScheme::Iterative => unreachable!(),
            }
            t += 1;
            if t == l {
                t = 0;
            }
        }
        // `Energy` is defined as the square of the `Norm` weight so the two
        // schemes agree exactly, not just up to rounding.
        let norm_ratio = (num / den).sqrt();
        let value = match scheme {
            WeightScheme::Norm => norm_ratio,
            WeightScheme::Energy => norm_ratio * norm_ratio,
            _ => num / den,
        };
        let value = value.max(WEIGHT_FLOOR);
        values.extend(std::iter::repeat(value).take(m));
    }
    Ok(WeightVector::new(values, scheme))
}

/// Weighted l1 norm of a coefficient grid.
pub fn weighted_l1(grid: &CoefGrid, weights: &WeightVector) -> f64 {
    debug_assert_eq!(grid.len(), weights.len());
    grid.values()
        .iter()
        .zip(weights.values())
        .map(|(v, &w)| v.norm() * w)
        .sum()
}

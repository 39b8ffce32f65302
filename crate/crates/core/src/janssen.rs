//! Autoregressive gap interpolation: alternate between fitting a prediction
//! filter to the current fill and re-solving the missing samples as the
//! minimizer of the prediction-error energy.

use crate::error::{CoreError, Result};
use crate::gap::ReliableMask;

#[derive(Debug, Clone, Copy)]
pub struct JanssenConfig {
    pub iterations: usize,
    /// Context segment length the pipeline cuts around a gap.
    pub frame_length: usize,
}

impl Default for JanssenConfig {
    fn default() -> Self {
        JanssenConfig {
            iterations: 50,
            frame_length: 2800,
        }
    }
}

impl JanssenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(CoreError::InvalidConfig(
                "janssen needs at least one iteration".into(),
            ));
        }
        if self.frame_length < 3 {
            return Err(CoreError::InvalidConfig(
                "frame_length must be at least 3".into(),
            ));
        }
        Ok(())
    }
}

/// Filter order for a frame: p = min(3H + 2, ⌊w/3⌋).
pub fn ar_order(missing: usize, frame_length: usize) -> usize {
    (3 * missing + 2).min(frame_length / 3)
}

/// Monic prediction-error filter of order `p` by the autocorrelation method
/// (Levinson-Durbin). A zero-energy segment yields the trivial filter.
pub fn estimate_ar(segment: &[f64], p: usize) -> Result<Vec<f64>> {
    if segment.len() <= p {
        return Err(CoreError::InvalidParams(format!(
            "segment of {} samples cannot support order {p}",
            segment.len()
        )));
    }
    let mut a = vec![0.0; p + 1];
    a[0] = 1.0;
    if p == 0 {
        return Ok(a);
    }
    let n = segment.len();
    let mut r: Vec<f64> = (0..=p)
        .map(|k| {
            segment[..n - k]
                .iter()
                .zip(&segment[k..])
                .map(|(x, y)| x * y)
                .sum()
        })
        .collect();
    if r[0] == 0.0 {
        return Ok(a);
    }
    // Tiny diagonal loading keeps the recursion positive definite when the
    // segment is an exact recursion (zero residual).
    r[0] *= 1.0 + 1e-9;
    let mut err = r[0];
    let mut prev = a.clone();
    for i in 1..=p {
        let acc: f64 = (0..i).map(|j| a[j] * r[i - j]).sum();
        let k = -acc / err;
        prev[..i].copy_from_slice(&a[..i]);
        for j in 1..i {
            a[j] += k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 {
            break;
        }
    }
    Ok(a)
}

/// Autocorrelation of the filter itself: b[k] = Σ_j a[j] a[j+k].
fn filter_autocorrelation(a: &[f64]) -> Vec<f64> {
    let p = a.len() - 1;
    (0..=p)
        .map(|k| a[..a.len() - k].iter().zip(&a[k..]).map(|(x, y)| x * y).sum())
        .collect()
}

/// (G v)[s] for the Gram matrix G = AᵀA of the full convolution by the
/// filter; G[s][t] = b[|s − t|] within the bandwidth.
fn gram_row_product(b: &[f64], v: &[f64], s: usize) -> f64 {
    let p = b.len() - 1;
    let lo = s.saturating_sub(p);
    let hi = (s + p).min(v.len() - 1);
    (lo..=hi).map(|t| b[s.abs_diff(t)] * v[t]).sum()
}

/// Solve T x = d for a symmetric positive-definite Toeplitz matrix with
/// first column `c`, in O(n²) by the Levinson recursion with a general
/// right-hand side.
fn levinson_solve(c: &[f64], d: &[f64]) -> Option<Vec<f64>> {
    let n = d.len();
    if c[0] <= 0.0 {
        return None;
    }
    // Normalize to unit diagonal.
    let r: Vec<f64> = c.iter().map(|v| v / c[0]).collect();
    let b: Vec<f64> = d.iter().map(|v| v / c[0]).collect();
    let mut x = vec![0.0; n];
    x[0] = b[0];
    if n == 1 {
        return Some(x);
    }
    let mut y = vec![0.0; n];
    y[0] = -r[1];
    let mut alpha = -r[1];
    let mut beta = 1.0;
    let mut prev = vec![0.0; n];
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if beta <= 0.0 {
            return None;
        }
        let dot: f64 = (0..k).map(|j| r[j + 1] * x[k - 1 - j]).sum();
        let mu = (b[k] - dot) / beta;
        for j in 0..k {
            x[j] += mu * y[k - 1 - j];
        }
        x[k] = mu;
        if k < n - 1 {
            let dot: f64 = (0..k).map(|j| r[j + 1] * y[k - 1 - j]).sum();
            alpha = -(r[k + 1] + dot) / beta;
            prev[..k].copy_from_slice(&y[..k]);
            for j in 0..k {
                y[j] += alpha * prev[k - 1 - j];
            }
            y[k] = alpha;
        }
    }
    Some(x)
}

/// In-place Cholesky solve of a dense SPD system.
fn cholesky_solve(mut g: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= g[i][k] * g[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                g[i][i] = s.sqrt();
            } else {
                g[i][j] = s / g[j][j];
            }
        }
    }
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= g[i][k] * rhs[k];
        }
        rhs[i] = s / g[i][i];
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= g[k][i] * rhs[k];
        }
        rhs[i] = s / g[i][i];
    }
    Some(rhs)
}

/// One inner step: with the filter fixed, replace the missing samples by the
/// exact minimizer of ‖A z‖₂² subject to the reliable samples.
fn solve_missing(a: &[f64], z: &mut [f64], missing: &[usize]) -> Result<()> {
    let b = filter_autocorrelation(a);
    let p = b.len() - 1;
    let h = missing.len();
    // RHS: −(G v) restricted to the missing positions, v = z with the
    // missing samples zeroed.
    let mut v = z.to_vec();
    for &t in missing {
        v[t] = 0.0;
    }
    let rhs: Vec<f64> = missing
        .iter()
        .map(|&s| -gram_row_product(&b, &v, s))
        .collect();
    let contiguous = missing.windows(2).all(|w| w[1] == w[0] + 1);
    let solution = if contiguous {
        let c: Vec<f64> = (0..h).map(|k| if k <= p { b[k] } else { 0.0 }).collect();
        levinson_solve(&c, &rhs)
    } else {
        None
    }
    .or_else(|| {
        let g: Vec<Vec<f64>> = missing
            .iter()
            .map(|&s| {
                missing
                    .iter()
                    .map(|&t| {
                        let d = s.abs_diff(t);
                        if d <= p {
                            b[d]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        cholesky_solve(g, rhs)
    })
    .ok_or_else(|| CoreError::InvalidParams("prediction-error system is singular".into()))?;
    for (&t, &u) in missing.iter().zip(&solution) {
        z[t] = u;
    }
    Ok(())
}

/// Inpaint the unreliable samples of a segment by iterated AR estimation and
/// least-squares refill. Reliable samples are returned bit-exactly.
pub fn janssen_inpaint(
    segment: &[f64],
    mask: &ReliableMask,
    config: &JanssenConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    if mask.len() != segment.len() {
        return Err(CoreError::LengthMismatch {
            expected: segment.len(),
            got: mask.len(),
        });
    }
    let missing: Vec<usize> = (0..segment.len())
        .filter(|&t| !mask.is_reliable(t))
        .collect();
    if missing.is_empty() {
        return Ok(segment.to_vec());
    }
    let n = segment.len();
    let h = missing.len();
    let p = ar_order(h, n);
    if p == 0 || p + h >= n {
        return Err(CoreError::OrderTooLarge {
            order: p,
            missing: h,
            segment: n,
        });
    }
    let mut z = segment.to_vec();
    for &t in &missing {
        z[t] = 0.0;
    }
    for _ in 0..config.iterations {
        let a = estimate_ar(&z, p)?;
        solve_missing(&a, &mut z, &missing)?;
    }
    Ok(z)
}

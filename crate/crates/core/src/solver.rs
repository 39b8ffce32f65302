//! Proximal solvers filling gaps under a weighted-sparsity model.
//!
//! Both solvers keep the iterate consistent with the observed samples through
//! the feasible-set projection and differ in where sparsity is imposed:
//! [`dr_synthesis`] runs Douglas-Rachford splitting on synthesis coefficients,
//! [`cp_analysis`] runs the Chambolle-Pock primal-dual scheme on the signal
//! with the analysis coefficients as the dual variable.

use crate::error::{CoreError, Result};
use crate::frame::{CoefGrid, TightGaborFrame};
use crate::gap::{mask_apply, project_feasible, project_feasible_inplace, ReliableMask};
use crate::prox::soft_entry;
use crate::weights::{weighted_l1, WeightVector};

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Douglas-Rachford proximal step.
    pub dr_tau: f64,
    /// Chambolle-Pock primal step.
    pub cp_tau: f64,
    /// Chambolle-Pock dual step; `cp_tau * cp_sigma` must stay below 1.
    pub cp_sigma: f64,
    /// Relative-change termination threshold; 0 disables early stopping.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dr_tau: 1.0,
            cp_tau: 0.9,
            cp_sigma: 0.9,
            tolerance: 1e-4,
            max_iterations: 1000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dr_tau > 0.0) || !(self.cp_tau > 0.0) || !(self.cp_sigma > 0.0) {
            return Err(CoreError::InvalidConfig(
                "solver step sizes must be positive".into(),
            ));
        }
        if !(self.tolerance >= 0.0) {
            return Err(CoreError::InvalidConfig(
                "tolerance must be non-negative".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Restored signal; reliable samples are copied from the observation
    /// bit-exactly.
    pub signal: Vec<f64>,
    /// Coefficients of the solution: the thresholded synthesis coefficients
    /// for [`dr_synthesis`], the analysis of the restored signal for
    /// [`cp_analysis`].
    pub coefficients: CoefGrid,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted l1 objective along the iteration.
    pub objective_trace: Vec<f64>,
}

fn check_problem(
    frame: &TightGaborFrame,
    mask: &ReliableMask,
    observed: &[f64],
    weights: &WeightVector,
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    let l = frame.params().signal_length;
    if mask.len() != l {
        return Err(CoreError::LengthMismatch {
            expected: l,
            got: mask.len(),
        });
    }
    if observed.len() != l {
        return Err(CoreError::LengthMismatch {
            expected: l,
            got: observed.len(),
        });
    }
    if weights.len() != frame.num_coefficients() {
        return Err(CoreError::LengthMismatch {
            expected: frame.num_coefficients(),
            got: weights.len(),
        });
    }
    Ok(())
}

/// Converged when the relative change dropped below the tolerance; exact
/// stagnation counts as converged even at tolerance 0.
fn small_change(diff: f64, prev_norm: f64, tolerance: f64) -> bool {
    diff < tolerance * prev_norm || diff == 0.0
}

/// Weighted-l1 inpainting in the synthesis formulation via Douglas-Rachford
/// splitting. Per iteration: soft-threshold the auxiliary coefficients, then
/// reflect through the projection onto coefficients whose synthesis matches
/// the observation on reliable samples.
pub fn dr_synthesis(
    frame: &TightGaborFrame,
    mask: &ReliableMask,
    observed: &[f64],
    weights: &WeightVector,
    config: &SolverConfig,
) -> Result<SolverResult> {
    dr_synthesis_from(frame, mask, observed, weights, config, None)
}

/// [`dr_synthesis`] with a warm-started auxiliary variable.
pub fn dr_synthesis_from(
    frame: &TightGaborFrame,
    mask: &ReliableMask,
    observed: &[f64],
    weights: &WeightVector,
    config: &SolverConfig,
    init: Option<&CoefGrid>,
) -> Result<SolverResult> {
    check_problem(frame, mask, observed, weights, config)?;
    let tau = config.dr_tau;
    let masked_observed = mask_apply(mask, observed)?;
    let b = frame.analyze(&masked_observed)?;
    let mut q = match init {
        Some(grid) => {
            if grid.len() != b.len() {
                return Err(CoreError::LengthMismatch {
                    expected: b.len(),
                    got: grid.len(),
                });
            }
            grid.clone()
        }
        None => b.clone(),
    };

    let mut trace = Vec::with_capacity(config.max_iterations);
    let mut x_prev: Option<CoefGrid> = None;
    let mut iterations = 0;
    let mut converged = false;
    for i in 1..=config.max_iterations {
        iterations = i;
        let mut x = q.clone();
        for (v, &w) in x.values_mut().iter_mut().zip(weights.values()) {
            *v = soft_entry(*v, tau * w);
        }
        trace.push(weighted_l1(&x, weights));
        if let Some(prev) = &x_prev {
            let diff = x.distance_l2(prev);
            if small_change(diff, prev.norm_l2(), config.tolerance) {
                converged = true;
                x_prev = Some(x);
                break;
            }
        }
        // q <- x - D* M_R D (2x - q) + D* M_R y
        let mut reflected = x.clone();
        for (r, &qv) in reflected.values_mut().iter_mut().zip(q.values()) {
            *r = 2.0 * *r - qv;
        }
        let synthesized = frame.synthesize(&reflected)?;
        let masked = mask_apply(mask, &synthesized)?;
        let correction = frame.analyze(&masked)?;
        for ((qv, &xv), (&cv, &bv)) in q
            .values_mut()
            .iter_mut()
            .zip(x.values())
            .zip(correction.values().iter().zip(b.values()))
        {
            *qv = xv - cv + bv;
        }
        x_prev = Some(x);
    }

    let x = x_prev.expect("at least one iteration runs");
    let signal = project_feasible(mask, observed, &frame.synthesize(&x)?)?;
    Ok(SolverResult {
        signal,
        coefficients: x,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Weighted-l1 inpainting in the analysis formulation via the Chambolle-Pock
/// primal-dual algorithm. The dual update clips analysis coefficients to the
/// weight magnitudes, the primal update projects onto the feasible set.
pub fn cp_analysis(
    frame: &TightGaborFrame,
    mask: &ReliableMask,
    observed: &[f64],
    weights: &WeightVector,
    config: &SolverConfig,
) -> Result<SolverResult> {
    cp_analysis_from(frame, mask, observed, weights, config, None)
}

/// [`cp_analysis`] with a warm-started primal variable.
pub fn cp_analysis_from(
    frame: &TightGaborFrame,
    mask: &ReliableMask,
    observed: &[f64],
    weights: &WeightVector,
    config: &SolverConfig,
    init: Option<&[f64]>,
) -> Result<SolverResult> {
    check_problem(frame, mask, observed, weights, config)?;
    if config.cp_tau * config.cp_sigma >= 1.0 {
        return Err(CoreError::InvalidConfig(format!(
            "cp_tau * cp_sigma = {} must be below 1 for a tight frame",
            config.cp_tau * config.cp_sigma
        )));
    }
    let tau = config.cp_tau;
    let sigma = config.cp_sigma;

    let mut p = match init {
        Some(signal) => {
            if signal.len() != observed.len() {
                return Err(CoreError::LengthMismatch {
                    expected: observed.len(),
                    got: signal.len(),
                });
            }
            signal.to_vec()
        }
        None => mask_apply(mask, observed)?,
    };
    let mut ybar = p.clone();
    let mut q = CoefGrid::zeros(frame.num_frames(), frame.params().channels);

    let mut trace = Vec::with_capacity(config.max_iterations);
    let mut iterations = 0;
    let mut converged = false;
    for i in 1..=config.max_iterations {
        iterations = i;
        let zbar = frame.analyze(&ybar)?;
        trace.push(weighted_l1(&zbar, weights));
        // q <- clip_w(q + sigma * D* ybar)
        for ((qv, &zv), &w) in q
            .values_mut()
            .iter_mut()
            .zip(zbar.values())
            .zip(weights.values())
        {
            let v = *qv + sigma * zv;
            *qv = v - soft_entry(v, w);
        }
        // p <- proj onto feasible set of (p - tau * D q)
        let dq = frame.synthesize(&q)?;
        let mut p_next: Vec<f64> = p.iter().zip(&dq).map(|(&pv, &dv)| pv - tau * dv).collect();
        project_feasible_inplace(mask, observed, &mut p_next);
        let mut ybar_next = Vec::with_capacity(p.len());
        for (pn, pv) in p_next.iter().zip(&p) {
            ybar_next.push(2.0 * pn - pv);
        }
        let diff = l2_distance(&ybar_next, &ybar);
        let prev_norm = l2_norm(&ybar);
        p = p_next;
        ybar = ybar_next;
        if small_change(diff, prev_norm, config.tolerance) {
            converged = true;
            break;
        }
    }

    let signal = project_feasible(mask, observed, &ybar)?;
    let coefficients = frame.analyze(&signal)?;
    Ok(SolverResult {
        signal,
        coefficients,
        iterations,
        converged,
        objective_trace: trace,
    })
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::sine;
    use crate::frame::{
        apply_offset, compute_offset, undo_offset, GaborParams, OffsetKind, TightGaborFrame,
        WindowKind,
    };
    use crate::gap::{snr, GapSpec, ReliableMask, DEFAULT_SNR_CAP};
    use crate::weights::{compute_weights, WeightScheme, WeightVector};

    fn small_frame(l: usize) -> TightGaborFrame {
        TightGaborFrame::new(GaborParams {
            window_length: 96,
            hop: 24,
            channels: 96,
            window_kind: WindowKind::Hann,
            signal_length: l,
        })
        .unwrap()
    }

    fn test_problem() -> (TightGaborFrame, Vec<f64>, Vec<f64>, ReliableMask, GapSpec) {
        let l = 960;
        let frame = small_frame(l);
        // Period-32 sine: well inside the frame's band.
        let original = sine(1378.125, 44100.0, l);
        let gap = GapSpec::new(451, 490).unwrap();
        let mask = ReliableMask::from_gaps(l, &[gap]).unwrap();
        let observed = mask_apply(&mask, &original).unwrap();
        (frame, original, observed, mask, gap)
    }

    #[test]
    fn both_solvers_restore_a_sine() {
        let l = 960;
        let frame = small_frame(l);
        let original = sine(1378.125, 44100.0, l);
        // Short gap relative to the window: both formulations essentially
        // nail it, which also makes their gap-SNRs comparable. On longer
        // gaps the synthesis and analysis optima drift apart (see
        // spec_scale_sinusoid below), so the 3 dB comparison only holds in
        // this regime.
        let gap = GapSpec::from_start_len(460, 16).unwrap();
        let mask = ReliableMask::from_gaps(l, &[gap]).unwrap();
        let observed = mask_apply(&mask, &original).unwrap();
        let weights = WeightVector::uniform(frame.num_coefficients());
        let config = SolverConfig::default();
        let dr = dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap();
        let cp = cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap();
        let snr_dr = snr(&original, &dr.signal, &[gap], DEFAULT_SNR_CAP).unwrap();
        let snr_cp = snr(&original, &cp.signal, &[gap], DEFAULT_SNR_CAP).unwrap();
        assert!(snr_dr > 40.0, "DR snr {snr_dr}");
        assert!(snr_cp > 40.0, "CP snr {snr_cp}");
        assert!((snr_dr - snr_cp).abs() < 3.0, "{snr_dr} vs {snr_cp}");
    }

    #[test]
    fn spec_scale_sinusoid_meets_twenty_db() {
        // 500 Hz / 44.1 kHz, 20 ms gap, production frame, norm weights,
        // half-offset alignment.
        let l = 44100;
        let frame = TightGaborFrame::new(GaborParams {
            window_length: 2800,
            hop: 700,
            channels: 2800,
            window_kind: WindowKind::Hann,
            signal_length: l,
        })
        .unwrap();
        let original = sine(500.0, 44100.0, l);
        let gap = GapSpec::from_start_len(21610, 882).unwrap();
        let offset = compute_offset(&gap, frame.params().hop, OffsetKind::Half);
        let shifted = apply_offset(&original, offset.value);
        let shifted_gap = gap.translated(-offset.value).unwrap();
        let mask = ReliableMask::from_gaps(l, &[shifted_gap]).unwrap();
        let observed = mask_apply(&mask, &shifted).unwrap();
        let weights = compute_weights(&frame, &mask, WeightScheme::Norm).unwrap();
        let config = SolverConfig::default();
        let dr = dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap();
        let cp = cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap();
        let snr_dr = snr(
            &original,
            &undo_offset(&dr.signal, offset.value),
            &[gap],
            DEFAULT_SNR_CAP,
        )
        .unwrap();
        let snr_cp = snr(
            &original,
            &undo_offset(&cp.signal, offset.value),
            &[gap],
            DEFAULT_SNR_CAP,
        )
        .unwrap();
        assert!(snr_dr >= 20.0, "DR snr {snr_dr}");
        assert!(snr_cp >= 20.0, "CP snr {snr_cp}");
    }

    #[test]
    fn restored_is_feasible_bit_exactly() {
        let (frame, _, observed, mask, _) = test_problem();
        let weights = compute_weights(&frame, &mask, WeightScheme::Energy).unwrap();
        let config = SolverConfig {
            max_iterations: 40,
            ..SolverConfig::default()
        };
        for result in [
            dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap(),
            cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap(),
        ] {
            for (i, (&r, &y)) in result.signal.iter().zip(&observed).enumerate() {
                if mask.is_reliable(i) {
                    assert_eq!(r.to_bits(), y.to_bits(), "sample {i}");
                }
            }
        }
    }

    #[test]
    fn gap_free_mask_returns_observation() {
        let (frame, original, _, _, _) = test_problem();
        let mask = ReliableMask::all_reliable(original.len());
        let weights = WeightVector::uniform(frame.num_coefficients());
        let config = SolverConfig {
            max_iterations: 3,
            ..SolverConfig::default()
        };
        let dr = dr_synthesis(&frame, &mask, &original, &weights, &config).unwrap();
        let cp = cp_analysis(&frame, &mask, &original, &weights, &config).unwrap();
        assert_eq!(dr.signal, original);
        assert_eq!(cp.signal, original);
    }

    #[test]
    fn zero_observation_stays_zero() {
        let (frame, _, _, mask, _) = test_problem();
        let observed = vec![0.0; mask.len()];
        let weights = WeightVector::uniform(frame.num_coefficients());
        let config = SolverConfig::default();
        let dr = dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap();
        let cp = cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap();
        assert!(dr.signal.iter().all(|&v| v == 0.0));
        assert!(cp.signal.iter().all(|&v| v == 0.0));
        assert!(dr.converged && dr.iterations <= 2);
        assert!(cp.converged && cp.iterations == 1);
    }

    #[test]
    fn identical_inputs_give_bit_identical_outputs() {
        let (frame, _, observed, mask, _) = test_problem();
        let weights = compute_weights(&frame, &mask, WeightScheme::Norm).unwrap();
        let config = SolverConfig {
            max_iterations: 25,
            ..SolverConfig::default()
        };
        let a = dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap();
        let b = dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap();
        assert_eq!(a.signal, b.signal);
        assert_eq!(a.coefficients.values(), b.coefficients.values());
        let c = cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap();
        let d = cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap();
        assert_eq!(c.signal, d.signal);
    }

    #[test]
    fn objective_trend_is_non_increasing_after_warmup() {
        let (frame, _, observed, mask, _) = test_problem();
        let weights = compute_weights(&frame, &mask, WeightScheme::Norm).unwrap();
        let config = SolverConfig {
            tolerance: 0.0,
            max_iterations: 300,
            ..SolverConfig::default()
        };
        for result in [
            dr_synthesis(&frame, &mask, &observed, &weights, &config).unwrap(),
            cp_analysis(&frame, &mask, &observed, &weights, &config).unwrap(),
        ] {
            let trace = &result.objective_trace;
            assert_eq!(trace.len(), 300);
            // Smooth with a 10-iteration window, require a non-increasing
            // trend from iteration 50 on. Even smoothed, the iterates keep a
            // small residual wobble near the fixed point, hence the relative
            // slack.
            let smoothed: Vec<f64> = (0..trace.len() - 10)
                .map(|i| trace[i..i + 10].iter().sum::<f64>() / 10.0)
                .collect();
            for i in 50..smoothed.len() - 1 {
                assert!(
                    smoothed[i + 1] <= smoothed[i] * (1.0 + 1e-3),
                    "trend rises at {i}: {} -> {}",
                    smoothed[i],
                    smoothed[i + 1]
                );
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let (frame, _, observed, mask, _) = test_problem();
        let weights = WeightVector::uniform(frame.num_coefficients());
        let bad = SolverConfig {
            cp_tau: 1.1,
            cp_sigma: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            cp_analysis(&frame, &mask, &observed, &weights, &bad),
            Err(CoreError::InvalidConfig(_))
        ));
        let bad = SolverConfig {
            dr_tau: 0.0,
            ..SolverConfig::default()
        };
        assert!(dr_synthesis(&frame, &mask, &observed, &weights, &bad).is_err());
        let short = WeightVector::uniform(3);
        assert!(dr_synthesis(&frame, &mask, &observed, &short, &SolverConfig::default()).is_err());
    }
}

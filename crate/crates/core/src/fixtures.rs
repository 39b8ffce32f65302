//! Deterministic synthetic signals for tests, benchmarks and examples.

use rand::Rng;

/// Pure sine at `freq_hz`, amplitude 0.8.
pub fn sine(freq_hz: f64, sample_rate: f64, len: usize) -> Vec<f64> {
    let w = 2.0 * std::f64::consts::PI * freq_hz / sample_rate;
    (0..len).map(|t| 0.8 * (w * t as f64).sin()).collect()
}

/// Harmonic tone: partials at multiples of `f0_hz` with the given amplitudes
/// and deterministic, non-degenerate phases.
pub fn harmonic(f0_hz: f64, amplitudes: &[f64], sample_rate: f64, len: usize) -> Vec<f64> {
    let components: Vec<(f64, f64, f64)> = amplitudes
        .iter()
        .enumerate()
        .map(|(j, &a)| (f0_hz * (j + 1) as f64, a, 0.61803398875 * (j * j + 1) as f64))
        .collect();
    sinusoid_mixture(&components, sample_rate, len)
}

/// Sum of sinusoids given as `(freq_hz, amplitude, phase)` triples. With `k`
/// distinct frequencies below Nyquist the result satisfies an exact linear
/// recurrence of order `2k`.
pub fn sinusoid_mixture(components: &[(f64, f64, f64)], sample_rate: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for &(freq, amp, phase) in components {
        let w = 2.0 * std::f64::consts::PI * freq / sample_rate;
        for (t, o) in out.iter_mut().enumerate() {
            *o += amp * (w * t as f64 + phase).sin();
        }
    }
    out
}

/// Autoregressive process driven by uniform white noise. `filter` is the
/// prediction-error filter `(1, a_1, ..., a_p)`; the recursion is
/// `y[t] = -sum_k a_k y[t-k] + noise_scale * e[t]`. A burn-in of 8 filter
/// lengths is discarded so the output is past initial transients.
pub fn ar_process(filter: &[f64], noise_scale: f64, len: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(!filter.is_empty() && filter[0] == 1.0, "filter must be monic");
    let p = filter.len() - 1;
    let burn = 8 * filter.len();
    let mut y = vec![0.0; len + burn];
    for t in 0..y.len() {
        let mut v = noise_scale * rng.random_range(-1.0..1.0);
        for k in 1..=p.min(t) {
            v -= filter[k] * y[t - k];
        }
        y[t] = v;
    }
    y.split_off(burn)
}

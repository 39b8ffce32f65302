//! Clamped cubic spline interpolation.
//!
//! Used to turn the handful of compensation multipliers into a smooth gain
//! curve over a gap: the clamped ends (prescribed slopes, zero for that use)
//! keep the curve from overshooting where it meets the reliable signal.

use crate::error::{CoreError, Result};

/// Cubic spline through `(x_i, y_i)` with prescribed first derivatives at
/// both ends, stored in moment form (`moments[i]` is the second derivative at
/// knot `i`).
#[derive(Debug, Clone)]
pub struct ClampedCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    moments: Vec<f64>,
}

impl ClampedCubicSpline {
    pub fn new(xs: &[f64], ys: &[f64], start_slope: f64, end_slope: f64) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(CoreError::LengthMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(CoreError::InvalidParams(
                "spline needs at least two knots".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CoreError::NonMonotoneKnots);
        }
        let n = xs.len() - 1;
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();

        // Tridiagonal system for the moments: rows are the C1 conditions at
        // interior knots plus the two clamped-end equations.
        let mut sub = vec![0.0; n + 1];
        let mut diag = vec![0.0; n + 1];
        let mut sup = vec![0.0; n + 1];
        let mut rhs = vec![0.0; n + 1];
        diag[0] = h[0] / 3.0;
        sup[0] = h[0] / 6.0;
        rhs[0] = (ys[1] - ys[0]) / h[0] - start_slope;
        for i in 1..n {
            sub[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        }
        sub[n] = h[n - 1] / 6.0;
        diag[n] = h[n - 1] / 3.0;
        rhs[n] = end_slope - (ys[n] - ys[n - 1]) / h[n - 1];

        // Thomas algorithm; the system is strictly diagonally dominant.
        let mut c = vec![0.0; n + 1];
        let mut d = vec![0.0; n + 1];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..=n {
            let denom = diag[i] - sub[i] * c[i - 1];
            c[i] = sup[i] / denom;
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
        }
        let mut moments = vec![0.0; n + 1];
        moments[n] = d[n];
        for i in (0..n).rev() {
            moments[i] = d[i] - c[i] * moments[i + 1];
        }
        Ok(ClampedCubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            moments,
        })
    }

    /// Index of the segment containing `x`; queries outside the knot range
    /// extrapolate with the nearest end segment.
    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len() - 1;
        self.xs[1..n].partition_point(|&k| k <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        self.moments[i] * a * a * a / (6.0 * h)
            + self.moments[i + 1] * b * b * b / (6.0 * h)
            + (self.ys[i] / h - self.moments[i] * h / 6.0) * a
            + (self.ys[i + 1] / h - self.moments[i + 1] * h / 6.0) * b
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        -self.moments[i] * a * a / (2.0 * h)
            + self.moments[i + 1] * b * b / (2.0 * h)
            + (self.ys[i + 1] - self.ys[i]) / h
            - (self.moments[i + 1] - self.moments[i]) * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interpolates_the_knots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(2usize..12);
            let mut xs = vec![0.0];
            for _ in 0..n {
                let last = *xs.last().unwrap();
                xs.push(last + rng.random_range(0.2..3.0));
            }
            let ys: Vec<f64> = (0..=n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = ClampedCubicSpline::new(&xs, &ys, 0.0, 0.0).unwrap();
            for (x, y) in xs.iter().zip(&ys) {
                assert!((s.eval(*x) - y).abs() < 1e-10, "{} vs {}", s.eval(*x), y);
            }
        }
    }

    #[test]
    fn end_slopes_are_met() {
        let xs = [0.0, 1.0, 2.5, 4.0, 7.0];
        let ys = [1.0, 2.0, -1.0, 0.5, 1.0];
        for (s0, s1) in [(0.0, 0.0), (1.5, -2.0), (-0.3, 0.7)] {
            let s = ClampedCubicSpline::new(&xs, &ys, s0, s1).unwrap();
            assert!((s.derivative(0.0) - s0).abs() < 1e-10);
            assert!((s.derivative(7.0) - s1).abs() < 1e-10);
            // Second-order one-sided finite differences agree with the
            // analytic slope.
            let d = 1e-3;
            let fd0 = (-3.0 * s.eval(0.0) + 4.0 * s.eval(d) - s.eval(2.0 * d)) / (2.0 * d);
            let fd1 =
                (3.0 * s.eval(7.0) - 4.0 * s.eval(7.0 - d) + s.eval(7.0 - 2.0 * d)) / (2.0 * d);
            assert!((fd0 - s0).abs() < 1e-4, "{fd0} vs {s0}");
            assert!((fd1 - s1).abs() < 1e-4, "{fd1} vs {s1}");
        }
    }

    #[test]
    fn smooth_at_the_knots() {
        let xs = [0.0, 0.7, 1.1, 3.0, 4.5, 5.0];
        let ys = [0.0, 1.0, -0.5, 2.0, 2.0, -1.0];
        let s = ClampedCubicSpline::new(&xs, &ys, 0.5, -0.5).unwrap();
        let eps = 1e-7;
        for &k in &xs[1..xs.len() - 1] {
            let dl = s.derivative(k - eps);
            let dr = s.derivative(k + eps);
            assert!((dl - dr).abs() < 1e-5, "C1 break at {k}: {dl} vs {dr}");
            // Second derivative via differences of the first.
            let ddl = (s.derivative(k) - s.derivative(k - eps)) / eps;
            let ddr = (s.derivative(k + eps) - s.derivative(k)) / eps;
            assert!((ddl - ddr).abs() < 1e-4, "C2 break at {k}: {ddl} vs {ddr}");
        }
    }

    #[test]
    fn constant_data_with_flat_ends_is_constant() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let ys = vec![1.0; 9];
        let s = ClampedCubicSpline::new(&xs, &ys, 0.0, 0.0).unwrap();
        for i in 0..80 {
            let x = i as f64 * 0.05;
            assert!((s.eval(x) - 1.0).abs() < 1e-13);
            assert!(s.derivative(x).abs() < 1e-13);
        }
    }

    #[test]
    fn reproduces_cubic_polynomials() {
        // A clamped cubic spline with matching end slopes is exact on cubics.
        let f = |x: f64| 0.5 * x * x * x - 2.0 * x * x + 3.0 * x + 1.0;
        let fp = |x: f64| 1.5 * x * x - 4.0 * x + 3.0;
        let xs: Vec<f64> = vec![-2.0, -0.5, 0.0, 1.0, 2.2, 4.0];
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let s = ClampedCubicSpline::new(&xs, &ys, fp(-2.0), fp(4.0)).unwrap();
        for i in 0..=60 {
            let x = -2.0 + 6.0 * i as f64 / 60.0;
            assert!((s.eval(x) - f(x)).abs() < 1e-9, "at {x}");
            assert!((s.derivative(x) - fp(x)).abs() < 1e-8, "slope at {x}");
        }
    }

    #[test]
    fn moments_match_dense_solve() {
        use nalgebra::{DMatrix, DVector};
        let xs = [0.0, 1.0, 1.5, 2.0, 3.5, 4.0, 6.0];
        let ys = [2.0, 0.0, 1.0, 1.0, -3.0, 0.5, 0.0];
        let (s0, s1) = (0.25, -1.0);
        let s = ClampedCubicSpline::new(&xs, &ys, s0, s1).unwrap();
        let n = xs.len() - 1;
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = DMatrix::zeros(n + 1, n + 1);
        let mut b = DVector::zeros(n + 1);
        a[(0, 0)] = h[0] / 3.0;
        a[(0, 1)] = h[0] / 6.0;
        b[0] = (ys[1] - ys[0]) / h[0] - s0;
        for i in 1..n {
            a[(i, i - 1)] = h[i - 1] / 6.0;
            a[(i, i)] = (h[i - 1] + h[i]) / 3.0;
            a[(i, i + 1)] = h[i] / 6.0;
            b[i] = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        }
        a[(n, n - 1)] = h[n - 1] / 6.0;
        a[(n, n)] = h[n - 1] / 3.0;
        b[n] = s1 - (ys[n] - ys[n - 1]) / h[n - 1];
        let solved = a.lu().solve(&b).unwrap();
        for (m, oracle) in s.moments.iter().zip(solved.iter()) {
            assert!((m - oracle).abs() < 1e-10, "{m} vs {oracle}");
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(matches!(
            ClampedCubicSpline::new(&[0.0, 1.0, 1.0], &[0.0, 1.0, 2.0], 0.0, 0.0),
            Err(CoreError::NonMonotoneKnots)
        ));
        assert!(matches!(
            ClampedCubicSpline::new(&[0.0, 2.0, 1.0], &[0.0, 1.0, 2.0], 0.0, 0.0),
            Err(CoreError::NonMonotoneKnots)
        ));
        assert!(ClampedCubicSpline::new(&[0.0], &[1.0], 0.0, 0.0).is_err());
        assert!(ClampedCubicSpline::new(&[0.0, 1.0], &[1.0], 0.0, 0.0).is_err());
    }
}

//! Piecewise-linear functions with exact Fourier integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::sinc;

/// (sin t - t cos t) / t³
pub fn odd_moment_factor(t: f64) -> f64 {
    if t.abs() < 0.2 {
        let t2 = t * t;
        1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0 - t2 * t2 * t2 / 45360.0 + t2 * t2 * t2 * t2 / 3991680.0
    } else {
        (t.sin() - t * t.cos()) / (t * t * t)
    }
}

/// ∫_{x0}^{x1} y(s) e^{-iωs} ds for the linear y through (x0, y0), (x1, y1).
pub fn segment_fourier(x0: f64, x1: f64, y0: Complex64, y1: Complex64, omega: f64) -> Complex64 {
    let h = x1 - x0;
    let c = 0.5 * h;
    let m = 0.5 * (x0 + x1);
    let ym = 0.5 * (y0 + y1);
    let beta = (y1 - y0) / h;
    let t = omega * c;
    let even = ym * (h * sinc(t));
    let odd = beta * Complex64::new(0.0, -2.0 * c * c * c * omega * odd_moment_factor(t));
    Complex64::new(0.0, -omega * m).exp() * (even + odd)
}

/// Linear interpolant through (x_i, y_i), zero outside [x_0, x_n].
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub x: Vec<f64>,
    pub y: Vec<Complex64>,
}

impl PiecewiseLinear {
    pub fn new(x: Vec<f64>, y: Vec<Complex64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 || x.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Invalid("piecewise-linear knots must increase strictly".into()));
        }
        Ok(PiecewiseLinear { x, y })
    }

    pub fn real(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(x, y.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples of `f` at `n` equispaced knots on [a, b].
    pub fn sample(a: f64, b: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let h = (b - a) / (n - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect();
        let y = x.iter().map(|&t| f(t)).collect();
        PiecewiseLinear { x, y }
    }

    /// Hat function of half-width `h` centred at `c`.
    pub fn hat(c: f64, h: f64) -> Self {
        PiecewiseLinear {
            x: vec![c - h, c, c + h],
            y: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.x.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        self.y[k - 1] + (self.y[k] - self.y[k - 1]) * ((t - x0) / (x1 - x0))
    }

    /// ∫ φ(s) e^{-iωs} ds, exact.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        (1..self.x.len())
            .map(|k| segment_fourier(self.x[k - 1], self.x[k], self.y[k - 1], self.y[k], omega))
            .sum()
    }

    pub fn integral(&self) -> Complex64 {
        self.fourier(0.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        PiecewiseLinear { x: self.x.clone(), y: self.y.iter().map(|v| v * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.y.iter().all(|v| v.norm() == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_transform_is_squared_sinc() {
        let h = PiecewiseLinear::hat(0.0, 0.5);
        for w in [0.0, 1e-9, 0.3, 7.0, 120.0] {
            let s = sinc(0.25 * w);
            let exact = 0.5 * s * s;
            assert!((h.fourier(w) - exact).norm() < 1e-15, "w={w}");
        }
    }

    #[test]
    fn segment_transform_matches_quadrature() {
        let rule = crate::quadrature::GaussRule::new(40);
        let (y0, y1) = (Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        for w in [0.0, 0.01, 0.9, 5.0, 40.0] {
            let q: Complex64 = rule.integrate(0.2, 1.1, |s| {
                (y0 + (y1 - y0) * ((s - 0.2) / 0.9)) * Complex64::new(0.0, -w * s).exp()
            });
            assert!((q - segment_fourier(0.2, 1.1, y0, y1, w)).norm() < 1e-14, "w={w}");
        }
    }
}

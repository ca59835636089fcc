//! The initial window `χ₀(x) = r⁻² φ((x − c)/r)`, a scaled and translated copy
//! of the bump supported in the sup-norm ball `B(c, r)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bump::BumpSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub bump: BumpSpec,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { center: [0.0, 0.0], radius: 1.0, bump: BumpSpec::default() }
    }
}

impl WindowSpec {
    pub fn new(center: [f64; 2], radius: f64, bump: BumpSpec) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(format!("invalid window ball center {center:?} radius {radius}")));
        }
        Ok(WindowSpec { center, radius, bump })
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = self.radius;
        self.bump.phi([(x[0] - self.center[0]) / r, (x[1] - self.center[1]) / r]) / (r * r)
    }

    /// One axis of `χ̂`: `e^{−2πi t cᵢ} φ̂₁(r t)`.
    pub fn chi_hat1(&self, axis: usize, t: f64) -> Result<Complex64> {
        let amp = self.bump.phi_hat1(self.radius * t)?;
        Ok(Complex64::cis(-2.0 * PI * t * self.center[axis]) * amp)
    }

    pub fn chi_hat(&self, xi: [f64; 2]) -> Result<Complex64> {
        Ok(self.chi_hat1(0, xi[0])? * self.chi_hat1(1, xi[1])?)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (x[0] - self.center[0]).abs() < self.radius && (x[1] - self.center[1]).abs() < self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gl_rule;

    #[test]
    fn transform_at_zero_and_translation() {
        let w = WindowSpec::default();
        assert!((w.chi_hat([0.0, 0.0]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let shifted = WindowSpec::new([0.3, -1.7], 1.0, w.bump).unwrap();
        for xi in [[0.5, 0.25], [3.0, -2.0], [10.25, 7.5]] {
            let a = w.chi_hat(xi).unwrap();
            let b = shifted.chi_hat(xi).unwrap();
            assert!((a.norm() - b.norm()).abs() < 1e-15);
            let phase = Complex64::cis(-2.0 * PI * (xi[0] * 0.3 - xi[1] * 1.7));
            assert!((a * phase - b).norm() < 1e-14);
        }
    }

    #[test]
    fn transform_matches_quadrature() {
        let w = WindowSpec::new([0.25, 0.5], 0.75, BumpSpec::default()).unwrap();
        let rule = gl_rule(20);
        for xi in [[0.0, 0.0], [1.25, -0.5], [4.0, 3.0]] {
            let mut acc = Complex64::new(0.0, 0.0);
            let (xs, wx) = rule.expand(-0.5, 1.0, 8);
            let (ys, wy) = rule.expand(-0.25, 1.25, 8);
            for (x, a) in xs.iter().zip(&wx) {
                for (y, b) in ys.iter().zip(&wy) {
                    acc += Complex64::cis(-2.0 * PI * (xi[0] * x + xi[1] * y)) * (w.eval([*x, *y]) * a * b);
                }
            }
            assert!((acc - w.chi_hat(xi).unwrap()).norm() < 1e-10, "xi={xi:?}");
        }
    }

    #[test]
    fn decay_on_log_grid() {
        let w = WindowSpec::default();
        let k = w.bump.k as i32;
        let mut t = 1.0f64;
        while t < 1e4 {
            let v = w.chi_hat([t, 0.0]).unwrap().norm();
            assert!(v * (1.0 + t).powi(k) < 50.0, "t={t}");
            t *= 1.3;
        }
    }

    #[test]
    fn support() {
        let w = WindowSpec::default();
        assert_eq!(w.eval([1.0, 0.0]), 0.0);
        assert!(w.eval([0.9, -0.9]) > 0.0);
        assert!(WindowSpec::new([0.0, 0.0], 0.0, w.bump).is_err());
    }
}

//! The separable polynomial bump
//!
//! ```text
//! φ(x) = φ₁(x₁) φ₁(x₂),   φ₁(t) = c₁ (1 − t²)₊^(K+1)
//! ```
//!
//! which is `C^K`, nonnegative, supported in `[-1, 1]²` and of unit mass.
//! Its transform factors as `φ̂(ξ) = φ̂₁(ξ₁) φ̂₁(ξ₂)`; `φ̂₁` is real and even
//! and is computed by composite Gauss-Legendre quadrature.
//!
//! [`DecayBound`] gives a rigorous majorant `|φ̂₁(t)| <= B(|t|)` obtained by
//! repeated integration by parts, with constants taken from exact integrals of
//! `|φ₁⁽ⁿ⁾|`.

use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gl_rule;

pub const DEFAULT_K: u32 = 5;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const PANEL_NODES: usize = 20;
const MAX_PANELS: usize = 1 << 22;
const PARTS_THRESHOLD: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub k: u32,
    /// `c₁²`, the constant in front of the two-dimensional product.
    pub norm_const: f64,
    /// Absolute tolerance for each `φ̂₁` evaluation.
    pub quad_tol: f64,
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec::new(DEFAULT_K).expect("default smoothness is valid")
    }
}

impl BumpSpec {
    pub fn new(k: u32) -> Result<Self> {
        Self::with_tol(k, DEFAULT_QUAD_TOL)
    }

    pub fn with_tol(k: u32, quad_tol: f64) -> Result<Self> {
        if k == 0 || k > 40 {
            return Err(Error::domain(format!("smoothness order K={k} outside 1..=40")));
        }
        if !(quad_tol > 0.0 && quad_tol < 1e-2) {
            return Err(Error::domain(format!("quadrature tolerance {quad_tol} out of range")));
        }
        let c1 = c1_for(k + 1);
        Ok(BumpSpec { k, norm_const: c1 * c1, quad_tol })
    }

    /// The exponent `K + 1` of `(1 − t²)`.
    pub fn power(&self) -> i32 {
        self.k as i32 + 1
    }

    pub fn c1(&self) -> f64 {
        self.norm_const.sqrt()
    }

    pub fn phi1(&self, t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            self.c1() * (1.0 - t * t).powi(self.power())
        }
    }

    pub fn phi(&self, x: [f64; 2]) -> f64 {
        if x[0].abs() >= 1.0 || x[1].abs() >= 1.0 {
            return 0.0;
        }
        let p = self.power();
        self.norm_const * (1.0 - x[0] * x[0]).powi(p) * (1.0 - x[1] * x[1]).powi(p)
    }

    /// `φ^ε(x) = ε⁻² φ(x/ε)`.
    pub fn phi_eps(&self, eps: f64, x: [f64; 2]) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.phi([x[0] / eps, x[1] / eps]) / (eps * eps))
    }

    /// The periodization `Φ^ε(x) = Σ_r φ^ε(x − r)`, summed over the lattice
    /// points within sup-distance `ε` of `x`. For `ε < 1/2` that is at most the
    /// nearest one.
    pub fn big_phi_eps(&self, eps: f64, x: [f64; 2]) -> Result<f64> {
        check_eps(eps)?;
        if eps < 0.5 {
            let d = [x[0] - x[0].round(), x[1] - x[1].round()];
            return Ok(self.phi([d[0] / eps, d[1] / eps]) / (eps * eps));
        }
        let mut total = 0.0;
        let lo = [(x[0] - eps).floor() as i64, (x[1] - eps).floor() as i64];
        let hi = [(x[0] + eps).ceil() as i64, (x[1] + eps).ceil() as i64];
        for r0 in lo[0]..=hi[0] {
            for r1 in lo[1]..=hi[1] {
                let d = [(x[0] - r0 as f64) / eps, (x[1] - r1 as f64) / eps];
                total += self.phi(d);
            }
        }
        Ok(total / (eps * eps))
    }

    /// `φ̂₁(t) = 2 ∫₀¹ φ₁(x) cos(2π t x) dx`.
    ///
    /// For `|t| < 4` this is adaptive composite quadrature, refined until two
    /// successive panel counts agree to `quad_tol`. Beyond that the integral is
    /// summed exactly by parts: only the `n >= K+1` derivatives at `x = 1`
    /// survive, so each term is `O(t^-(n+1))` and no cancellation occurs. That
    /// keeps the `|t|^-(K+2)` tail resolved far below any quadrature tolerance.
    pub fn phi_hat1(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Numeric(format!("transform requested at non-finite t={t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        if t.abs() >= PARTS_THRESHOLD {
            return Ok(self.phi_hat1_by_parts(t));
        }
        self.phi_hat1_quadrature(t)
    }

    pub fn phi_hat1_quadrature(&self, t: f64) -> Result<f64> {
        let rule = gl_rule(PANEL_NODES);
        let p = self.power();
        let c1 = self.c1();
        let w = 2.0 * PI * t;
        let f = |x: f64| (1.0 - x * x).powi(p) * (w * x).cos();
        let mut panels = (1.0 + t.abs()).ceil() as usize;
        let mut coarse = 2.0 * c1 * rule.composite(0.0, 1.0, panels, f);
        while panels <= MAX_PANELS {
            panels *= 2;
            let fine = 2.0 * c1 * rule.composite(0.0, 1.0, panels, f);
            if (fine - coarse).abs() <= self.quad_tol {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(Error::Numeric(format!(
            "transform quadrature at t={t} did not settle below {} with {panels} panels",
            self.quad_tol
        )))
    }

    /// `∫₀¹ P cos(wx) = Σ_j (−1)^j [P⁽²ʲ⁾ sin(wx)/w^(2j+1) + P⁽²ʲ⁺¹⁾ cos(wx)/w^(2j+2)]₀¹`
    /// for `P = (1 − x²)^p`; the lower limit vanishes because `P` is even.
    fn phi_hat1_by_parts(&self, t: f64) -> f64 {
        let p = self.power() as u32;
        let w = 2.0 * PI * t.abs();
        let (s, c) = w.sin_cos();
        let mut d = Poly::one_minus_t2_pow(p);
        let mut total = 0.0;
        let mut wpow = w;
        for n in 0..=2 * p {
            if n >= p {
                let v = d.eval(1.0);
                let j = n / 2;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let trig = if n % 2 == 0 { s } else { c };
                total += sign * v * trig / wpow;
            }
            d = d.derivative();
            wpow *= w;
        }
        2.0 * self.c1() * total
    }

    pub fn phi_hat(&self, xi: [f64; 2]) -> Result<f64> {
        Ok(self.phi_hat1(xi[0])? * self.phi_hat1(xi[1])?)
    }

    pub fn decay_bound(&self) -> DecayBound {
        DecayBound::new(self)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("bump scale ε must be positive, got {eps}")))
    }
}

/// `c₁ = 1 / ∫(1 − t²)^p`, with `∫_{-1}^{1} (1 − t²)^p = 2 Π_{j=1}^{p} 2j/(2j+1)`.
fn c1_for(p: u32) -> f64 {
    let prod: f64 = (1..=p).map(|j| (2 * j) as f64 / (2 * j + 1) as f64).product();
    1.0 / (2.0 * prod)
}

/// Polynomial with ascending coefficients.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn one_minus_t2_pow(p: u32) -> Self {
        let mut c = vec![0.0; 2 * p as usize + 1];
        let mut binom = 1.0;
        for k in 0..=p as usize {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            c[2 * k] = sign * binom;
            binom = binom * (p as usize - k) as f64 / (k + 1) as f64;
        }
        Poly(c)
    }

    fn derivative(&self) -> Self {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    fn antiderivative(&self) -> Self {
        let mut c = vec![0.0];
        c.extend(self.0.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        Poly(c)
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn scale(&self, s: f64) -> Self {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    /// `∫_{-1}^{1} |P|`, splitting at sign changes located by bisection.
    fn abs_integral(&self) -> f64 {
        const SAMPLES: usize = 20_000;
        let anti = self.antiderivative();
        let mut breaks = vec![-1.0];
        // Last sample with a nonzero value; exact zeros at sample points are skipped.
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=SAMPLES {
            let x = -1.0 + 2.0 * i as f64 / SAMPLES as f64;
            let v = self.eval(x);
            if v == 0.0 {
                continue;
            }
            if let Some((px, pv)) = prev {
                if (pv < 0.0) != (v < 0.0) {
                    let (mut lo, mut hi) = (px, x);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if (self.eval(mid) < 0.0) == (pv < 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    breaks.push(0.5 * (lo + hi));
                }
            }
            prev = Some((x, v));
        }
        breaks.push(1.0);
        breaks.windows(2).map(|w| (anti.eval(w[1]) - anti.eval(w[0])).abs()).sum()
    }
}

/// Rigorous majorant of `|φ̂₁|`:
///
/// ```text
/// B(t) = min( 1, V₁/(2πt), …, V_p/(2πt)^p, (V_{p+1} + J)/(2πt)^{p+1} )
/// ```
///
/// where `p = K + 1`, `Vₙ = ∫|φ₁⁽ⁿ⁾|` and `J = 2|φ₁⁽ᵖ⁾(1−)|` accounts for the
/// jumps of the `p`-th derivative at `±1`. `B` is nonincreasing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayBound {
    /// `(n, Cₙ)` with `|φ̂₁(t)| <= Cₙ / (2π|t|)ⁿ`.
    pub terms: Vec<(i32, f64)>,
}

impl DecayBound {
    /// Relative inflation of every constant, covering rounding in the exact integrals.
    const SAFETY: f64 = 1.0 + 1e-9;

    fn new(spec: &BumpSpec) -> Self {
        let p = spec.power() as u32;
        let mut d = Poly::one_minus_t2_pow(p).scale(spec.c1());
        let mut terms = Vec::new();
        for n in 1..=p + 1 {
            d = d.derivative();
            let mut c = d.abs_integral();
            if n == p + 1 {
                let jump = Poly::one_minus_t2_pow(p).scale(spec.c1());
                let mut dp = jump;
                for _ in 0..p {
                    dp = dp.derivative();
                }
                c += 2.0 * dp.eval(1.0).abs();
            }
            terms.push((n as i32, c * Self::SAFETY));
        }
        DecayBound { terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 1.0;
        }
        let w = 2.0 * PI * t;
        self.terms.iter().fold(1.0, |b, &(n, c)| b.min(c / w.powi(n)))
    }

    /// Highest decay order available.
    pub fn order(&self) -> i32 {
        self.terms.last().map_or(0, |t| t.0)
    }

    /// `|φ̂(u)| <= B(|u₁|) B(|u₂|)`.
    pub fn eval2(&self, u: [f64; 2]) -> f64 {
        self.eval(u[0]) * self.eval(u[1])
    }
}

/// Memo of `φ̂₁(scale · j)` for integer `j`, grown on demand and shared
/// between threads.
#[derive(Debug)]
pub struct ScaledTransform {
    spec: BumpSpec,
    scale: f64,
    table: RwLock<Arc<Vec<f64>>>,
}

impl ScaledTransform {
    pub fn new(spec: BumpSpec, scale: f64) -> Self {
        ScaledTransform { spec, scale, table: RwLock::new(Arc::new(Vec::new())) }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn get(&self, j: i64) -> Result<f64> {
        let idx = j.unsigned_abs() as usize;
        {
            let t = self.table.read().expect("transform memo poisoned");
            if idx < t.len() {
                return Ok(t[idx]);
            }
        }
        Ok(self.upto(idx.max(16))?[idx])
    }

    /// Snapshot holding at least `φ̂₁(scale·j)` for `0 <= j <= jmax`.
    pub fn upto(&self, jmax: usize) -> Result<Arc<Vec<f64>>> {
        {
            let t = self.table.read().expect("transform memo poisoned");
            if jmax < t.len() {
                return Ok(t.clone());
            }
        }
        let mut guard = self.table.write().expect("transform memo poisoned");
        let have = guard.len();
        if jmax < have {
            return Ok(guard.clone());
        }
        let target = (jmax + 1).max(2 * have);
        let fresh: Result<Vec<f64>> =
            (have..target).into_par_iter().map(|j| self.spec.phi_hat1(self.scale * j as f64)).collect();
        let mut next = Vec::with_capacity(target);
        next.extend_from_slice(&guard);
        next.extend(fresh?);
        *guard = Arc::new(next);
        Ok(guard.clone())
    }
}

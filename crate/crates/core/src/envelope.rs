//! Majorants for lattice sums of `|φ̂₁|` and radial bounds on coefficient
//! arrays, used to bound truncation tails and to certify stage differences
//! beyond the verification grid.

use crate::bump::DecayBound;
use crate::fm::FmOperator;

/// Terms summed explicitly before switching to the analytic tail.
const EXPLICIT_TERMS: u64 = 4096;

/// Sums of `B(scale · j)` over integer `j`.
#[derive(Clone, Debug)]
pub struct LatticeSums {
    bound: DecayBound,
    scale: f64,
}

impl LatticeSums {
    pub fn new(bound: DecayBound, scale: f64) -> Self {
        assert!(scale > 0.0, "lattice scale must be positive");
        LatticeSums { bound, scale }
    }

    pub fn bound(&self) -> &DecayBound {
        &self.bound
    }

    /// `Σ_{j >= j0} B(scale · j)`.
    pub fn sum_from(&self, j0: u64) -> f64 {
        let start = j0.max(1);
        let stop = start.max((64.0 / self.scale).ceil() as u64) + EXPLICIT_TERMS;
        let mut s = if j0 == 0 { 1.0 } else { 0.0 };
        for j in start..stop {
            s += self.bound.eval(self.scale * j as f64);
        }
        // Σ_{j >= J} c j^{−n} <= c J^{−n} + c J^{1−n}/(n−1) with the last term of B.
        let (n, c) = *self.bound.terms.last().expect("decay bound has terms");
        let cj = c / (2.0 * std::f64::consts::PI * self.scale).powi(n);
        let j = stop as f64;
        s + cj * j.powi(-n) + cj * j.powi(1 - n) / (n - 1) as f64
    }

    /// `sup_t Σ_j B(scale |t + j|)`.
    pub fn axis_total(&self) -> f64 {
        2.0 * self.sum_from(0)
    }

    /// `sup_t Σ_{|t + j| > ρ} B(scale |t + j|)`.
    pub fn axis_tail(&self, rho: f64) -> f64 {
        2.0 * self.sum_from(rho.floor().max(0.0) as u64)
    }

    /// Bound on `Σ_{u ∈ ξ − ℤ², |u|∞ > ρ} |φ̂₁(s u₁) φ̂₁(s u₂)|` for any `ξ`.
    pub fn plane_tail(&self, rho: f64) -> f64 {
        2.0 * self.axis_total() * self.axis_tail(rho)
    }
}

/// Nonincreasing majorant of `|c(m)|` as a function of `t = |m|∞`, stored on
/// integer knots (dense up to 128, then geometric), together with a bound on
/// `Σ_m |c(m)|`.
#[derive(Clone, Debug)]
pub struct RadialEnvelope {
    knots: Vec<f64>,
    /// `sup[i] >= |c(m)|` for every `|m|∞ >= knots[i]`.
    sup: Vec<f64>,
    l1: f64,
    /// Power-law exponent assumed beyond the last knot.
    decay: i32,
}

const DENSE_KNOTS: u64 = 128;
const KNOT_RATIO: f64 = 1.02;
const LAST_KNOT: f64 = 1e15;

fn knot_grid() -> Vec<f64> {
    let mut k: Vec<f64> = (0..DENSE_KNOTS).map(|j| j as f64).collect();
    let mut t = DENSE_KNOTS as f64;
    while t < LAST_KNOT {
        k.push(t);
        t = (t * KNOT_RATIO).ceil();
    }
    k.push(LAST_KNOT);
    k
}

/// Number of `m ∈ ℤ²` with `a <= |m|∞ < b`, for integers `1 <= a <= b`.
fn shell_count(a: f64, b: f64) -> f64 {
    let side = |t: f64| 2.0 * t - 1.0;
    side(b) * side(b) - side(a) * side(a)
}

impl RadialEnvelope {
    /// Envelope of a sequence with `|c(m)| <= pointwise(|m|∞)` where
    /// `pointwise` is nonincreasing on `t >= 1`.
    pub fn from_pointwise(c0: f64, pointwise: impl Fn(f64) -> f64, decay: i32) -> Self {
        let knots = knot_grid();
        let mut sup: Vec<f64> =
            knots.iter().map(|&t| if t == 0.0 { c0.max(pointwise(1.0)) } else { pointwise(t) }).collect();
        for i in (0..sup.len() - 1).rev() {
            sup[i] = sup[i].max(sup[i + 1]);
        }
        let mut l1 = c0;
        for w in knots.windows(2).skip(1) {
            l1 += pointwise(w[0]) * shell_count(w[0], w[1]);
        }
        let last = *knots.last().unwrap();
        l1 += pointwise(last) * tail_count(last, decay);
        RadialEnvelope { knots, sup, l1, decay }
    }

    /// Atom at the origin with mass `c0`.
    pub fn delta(c0: f64) -> Self {
        let knots = knot_grid();
        let mut sup = vec![0.0; knots.len()];
        sup[0] = c0;
        RadialEnvelope { knots, sup, l1: c0, decay: i32::MAX }
    }

    /// `|F̂_M(ℓ)|`: `1` at zero, `0` for `0 < |ℓ| <= M/4`, and otherwise at
    /// most `B(ε|ℓ|/(2M))` since each contributing `w = ℓ/q̄` has `|w|∞ >= |ℓ|∞/(2M)`.
    pub fn for_operator(op: &FmOperator) -> Self {
        let b = op.params().bump.decay_bound();
        let (m, eps) = (op.m(), op.eps());
        let decay = b.order();
        Self::from_pointwise(1.0, move |t| if t <= m / 4.0 { 0.0 } else { b.eval(eps * t / (2.0 * m)).min(1.0) }, decay)
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// Bound on `|c(m)|` over all `|m|∞ >= t`.
    pub fn sup_from(&self, t: f64) -> f64 {
        let last = *self.knots.last().unwrap();
        if t > last {
            return self.sup[self.sup.len() - 1] * (last / t).powi(self.decay.min(64));
        }
        let i = self.knots.partition_point(|&k| k <= t).saturating_sub(1);
        self.sup[i]
    }

    /// Majorant of the convolution `|a| * |b|`.
    pub fn convolve(&self, other: &Self) -> Self {
        let knots = self.knots.clone();
        let sup = knots
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    self.l1.min(self.sup[0] * other.l1).min(other.sup[0] * self.l1)
                } else {
                    other.sup_from(t / 2.0) * self.l1 + self.sup_from(t / 2.0) * other.l1
                }
            })
            .collect();
        RadialEnvelope { knots, sup, l1: self.l1 * other.l1, decay: self.decay.min(other.decay) }
    }

    /// Majorant of `|a| + |b|`.
    pub fn add(&self, other: &Self) -> Self {
        let sup = self.sup.iter().zip(&other.sup).map(|(a, b)| a + b).collect();
        RadialEnvelope { knots: self.knots.clone(), sup, l1: self.l1 + other.l1, decay: self.decay.min(other.decay) }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}

/// `Σ_{|m|∞ > T} (T/|m|)^n`, bounded by `8T²/(n−2)` plus one shell.
fn tail_count(t: f64, n: i32) -> f64 {
    if n == i32::MAX {
        return 0.0;
    }
    assert!(n > 2, "envelope tail needs decay faster than t^-2");
    8.0 * t * t / (n - 2) as f64 + 8.0 * t
}

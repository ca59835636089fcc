//! Exact Gaussian-integer arithmetic.
//!
//! Components are 64-bit signed integers. Every ring operation is checked;
//! overflow surfaces as [`Error::Overflow`] instead of wrapping. Norms are
//! computed in 128-bit arithmetic and never overflow.
//!
//! The lattice `ℤ²` is identified with `ℤ[i]`, so `(a, b)` is `a + bi`.
//! `sup_norm` is the max-norm `|z| = max(|re|, |im|)` used for every annulus
//! and frequency shell in the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{factor_trial, two_squares, SpfTable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

pub const UNITS: [GaussInt; 4] =
    [GaussInt { re: 1, im: 0 }, GaussInt { re: 0, im: 1 }, GaussInt { re: -1, im: 0 }, GaussInt { re: 0, im: -1 }];

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    pub const fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    /// `re² + im²`, exact.
    pub fn norm(self) -> i128 {
        let (a, b) = (self.re as i128, self.im as i128);
        a * a + b * b
    }

    pub fn sup_norm(self) -> u64 {
        self.re.unsigned_abs().max(self.im.unsigned_abs())
    }

    pub fn euclid_norm(self) -> f64 {
        (self.norm() as f64).sqrt()
    }

    pub fn conj(self) -> Self {
        GaussInt::new(self.re, -self.im)
    }

    pub fn checked_neg(self) -> Result<Self> {
        match (self.re.checked_neg(), self.im.checked_neg()) {
            (Some(re), Some(im)) => Ok(GaussInt::new(re, im)),
            _ => Err(Error::overflow(format!("negating {self}"))),
        }
    }

    pub fn checked_add(self, o: Self) -> Result<Self> {
        match (self.re.checked_add(o.re), self.im.checked_add(o.im)) {
            (Some(re), Some(im)) => Ok(GaussInt::new(re, im)),
            _ => Err(Error::overflow(format!("{self} + {o}"))),
        }
    }

    pub fn checked_sub(self, o: Self) -> Result<Self> {
        match (self.re.checked_sub(o.re), self.im.checked_sub(o.im)) {
            (Some(re), Some(im)) => Ok(GaussInt::new(re, im)),
            _ => Err(Error::overflow(format!("{self} - {o}"))),
        }
    }

    /// `(a·b).re = a.re·b.re − a.im·b.im`, `(a·b).im = a.re·b.im + a.im·b.re`.
    pub fn checked_mul(self, o: Self) -> Result<Self> {
        let (a, b, c, d) = (self.re as i128, self.im as i128, o.re as i128, o.im as i128);
        let re = a * c - b * d;
        let im = a * d + b * c;
        match (i64::try_from(re), i64::try_from(im)) {
            (Ok(re), Ok(im)) => Ok(GaussInt::new(re, im)),
            _ => Err(Error::overflow(format!("{self} * {o}"))),
        }
    }

    pub fn checked_pow(self, mut e: u32) -> Result<Self> {
        let mut acc = GaussInt::ONE;
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(base)?;
            }
        }
        Ok(acc)
    }

    /// The four unit multiples `u·self`.
    pub fn associates(self) -> [GaussInt; 4] {
        [self, GaussInt::new(-self.im, self.re), GaussInt::new(-self.re, -self.im), GaussInt::new(self.im, -self.re)]
    }

    /// The associate lying in the sector `re > 0, im >= 0` (zero maps to zero).
    pub fn canonical_associate(self) -> Self {
        if self.is_zero() {
            return self;
        }
        self.associates()
            .into_iter()
            .find(|z| z.re > 0 && z.im >= 0)
            .expect("every nonzero Gaussian integer has an associate in the first quadrant")
    }

    /// Complex product with a real point, `self · x` (used for `qx`).
    pub fn mul_point(self, x: [f64; 2]) -> [f64; 2] {
        let (a, b) = (self.re as f64, self.im as f64);
        [a * x[0] - b * x[1], a * x[1] + b * x[0]]
    }
}

impl std::ops::Mul for GaussInt {
    type Output = GaussInt;
    fn mul(self, o: GaussInt) -> GaussInt {
        self.checked_mul(o).expect("Gaussian integer overflow")
    }
}

impl std::ops::Add for GaussInt {
    type Output = GaussInt;
    fn add(self, o: GaussInt) -> GaussInt {
        self.checked_add(o).expect("Gaussian integer overflow")
    }
}

impl std::ops::Sub for GaussInt {
    type Output = GaussInt;
    fn sub(self, o: GaussInt) -> GaussInt {
        self.checked_sub(o).expect("Gaussian integer overflow")
    }
}

impl std::ops::Neg for GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        self.checked_neg().expect("Gaussian integer overflow")
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.re, self.im)
    }
}

impl FromStr for GaussInt {
    type Err = Error;
    /// Accepts `a,b` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut it = t.split(',');
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("expected `re,im`, got `{s}`")));
        };
        let re = a.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{a}: {e}")))?;
        let im = b.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{b}: {e}")))?;
        Ok(GaussInt::new(re, im))
    }
}

/// `w` with `q·w = ℓ` if it exists. Computed as `ℓ·conj(q)` with both
/// components tested for divisibility by `norm(q)`.
pub fn exact_divide(l: GaussInt, q: GaussInt) -> Result<Option<GaussInt>> {
    if q.is_zero() {
        return Err(Error::domain("division by the zero Gaussian integer"));
    }
    let n = q.norm();
    let (a, b, c, d) = (l.re as i128, l.im as i128, q.re as i128, q.im as i128);
    let re = a * c + b * d;
    let im = b * c - a * d;
    if re % n != 0 || im % n != 0 {
        return Ok(None);
    }
    match (i64::try_from(re / n), i64::try_from(im / n)) {
        (Ok(re), Ok(im)) => Ok(Some(GaussInt::new(re, im))),
        _ => Err(Error::overflow(format!("{l} / {q}"))),
    }
}

/// Divisibility test `q | ℓ` without materializing the quotient.
pub fn divides(q: GaussInt, l: GaussInt) -> bool {
    if q.is_zero() {
        return l.is_zero();
    }
    let n = q.norm();
    let (a, b, c, d) = (l.re as i128, l.im as i128, q.re as i128, q.im as i128);
    (a * c + b * d) % n == 0 && (b * c - a * d) % n == 0
}

/// `ℓ = unit · Π πⱼ^eⱼ` with pairwise non-associated Gaussian primes `πⱼ`
/// in canonical (first-quadrant) form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussFactorization {
    pub unit: GaussInt,
    pub factors: Vec<(GaussInt, u32)>,
}

impl GaussFactorization {
    /// `|D(ℓ)| = 4 · Π (eⱼ + 1)`.
    pub fn divisor_count(&self) -> u64 {
        4 * self.factors.iter().map(|&(_, e)| e as u64 + 1).product::<u64>()
    }

    pub fn expand(&self) -> Result<GaussInt> {
        let mut acc = self.unit;
        for &(p, e) in &self.factors {
            acc = acc.checked_mul(p.checked_pow(e)?)?;
        }
        Ok(acc)
    }
}

/// Factorization of the rational norm, by table when available.
fn factor_norm(n: u64, spf: Option<&SpfTable>) -> Vec<(u64, u32)> {
    spf.and_then(|t| t.factor(n)).unwrap_or_else(|| factor_trial(n))
}

/// Factor a nonzero Gaussian integer through the rational factorization of
/// its norm. Primes `p ≡ 1 (mod 4)` are split by two squares and the split
/// exponents are found by repeated exact division.
pub fn factorize(l: GaussInt, spf: Option<&SpfTable>) -> Result<GaussFactorization> {
    if l.is_zero() {
        return Err(Error::domain("cannot factor 0"));
    }
    let n = u64::try_from(l.norm()).map_err(|_| Error::overflow(format!("norm of {l} exceeds 64 bits")))?;
    let mut rest = l;
    let mut factors = Vec::new();
    for (p, e) in factor_norm(n, spf) {
        if p == 2 {
            let pi = GaussInt::new(1, 1);
            for _ in 0..e {
                rest = exact_divide(rest, pi)?.expect("1+i divides an element of even norm");
            }
            factors.push((pi, e));
        } else if p % 4 == 3 {
            let pi = GaussInt::new(p as i64, 0);
            let k = e / 2;
            for _ in 0..k {
                rest = exact_divide(rest, pi)?.expect("inert prime divides with half the norm exponent");
            }
            factors.push((pi, k));
        } else {
            let (a, b) = two_squares(p)?;
            let pi = GaussInt::new(a as i64, b as i64);
            let pi_bar = GaussInt::new(b as i64, a as i64); // associate of conj(pi), canonical
            let mut k = 0;
            while let Some(w) = exact_divide(rest, pi)? {
                rest = w;
                k += 1;
                if k == e {
                    break;
                }
            }
            for _ in k..e {
                rest = exact_divide(rest, pi_bar)?.expect("remaining norm exponent belongs to the conjugate prime");
            }
            if k > 0 {
                factors.push((pi, k));
            }
            if e > k {
                factors.push((pi_bar, e - k));
            }
        }
    }
    debug_assert!(rest.is_unit(), "leftover {rest} after factoring {l}");
    Ok(GaussFactorization { unit: rest, factors })
}

/// `|D(ℓ)|`, the number of Gaussian divisors of `ℓ` including unit multiples.
pub fn divisor_count(l: GaussInt, spf: Option<&SpfTable>) -> Result<u64> {
    Ok(factorize(l, spf)?.divisor_count())
}

/// Every divisor of `ℓ`, all four unit multiples included, sorted.
pub fn divisors(l: GaussInt) -> Result<Vec<GaussInt>> {
    divisors_with(l, None)
}

pub fn divisors_with(l: GaussInt, spf: Option<&SpfTable>) -> Result<Vec<GaussInt>> {
    let f = factorize(l, spf)?;
    let mut out = Vec::with_capacity(f.divisor_count() as usize);
    let mut base = vec![GaussInt::ONE];
    for &(p, e) in &f.factors {
        let mut next = Vec::with_capacity(base.len() * (e as usize + 1));
        for &d in &base {
            let mut acc = d;
            next.push(acc);
            for _ in 0..e {
                acc = acc.checked_mul(p)?;
                next.push(acc);
            }
        }
        base = next;
    }
    for d in base {
        out.extend_from_slice(&d.associates());
    }
    out.sort_unstable();
    Ok(out)
}

/// Divisor set by scanning every `q` whose norm divides `norm(ℓ)`, i.e. all
/// divisor pairs of the rational norm. Quadratic in `sqrt(norm(ℓ))`; kept as an
/// independent route for cross-checks on small inputs.
pub fn divisors_by_norm_scan(l: GaussInt) -> Result<Vec<GaussInt>> {
    if l.is_zero() {
        return Err(Error::domain("every nonzero q divides 0"));
    }
    let n = l.norm();
    let r = (n as f64).sqrt().ceil() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let q = GaussInt::new(a, b);
            let qn = q.norm();
            if qn == 0 || qn > n || n % qn != 0 {
                continue;
            }
            if divides(q, l) {
                out.push(q);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Gaussian primality: `norm(q)` is a rational prime, or `q` is a unit
/// multiple of a rational prime `p ≡ 3 (mod 4)`.
pub fn is_gaussian_prime(q: GaussInt) -> bool {
    if q.re == 0 || q.im == 0 {
        let p = q.re.unsigned_abs().max(q.im.unsigned_abs());
        return p % 4 == 3 && crate::primes::is_prime_u64(p);
    }
    match u64::try_from(q.norm()) {
        Ok(n) => crate::primes::is_prime_u64(n),
        Err(_) => false,
    }
}

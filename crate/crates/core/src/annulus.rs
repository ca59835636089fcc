//! The sup-norm annulus `{q : M/2 < |q| <= M}` and its prime and custom
//! sub-populations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{is_gaussian_prime, GaussInt};
use crate::primes::{sieve_primes, two_squares};

/// Which Gaussian integers populate an annulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind", content = "set")]
pub enum Mode {
    #[default]
    All,
    Primes,
    /// An explicit set `Q`; the annulus keeps the members whose sup-norm lies
    /// in `(M/2, M]`.
    Custom(Vec<GaussInt>),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::All => "all",
            Mode::Primes => "primes",
            Mode::Custom(_) => "custom",
        }
    }

    /// Smallest admissible `M`.
    pub fn min_m(&self) -> f64 {
        match self {
            Mode::All => 2.0,
            Mode::Primes => 4.0,
            Mode::Custom(_) => f64::MIN_POSITIVE,
        }
    }
}

#[inline]
pub fn in_shell(m: f64, q: GaussInt) -> bool {
    let s = q.sup_norm() as f64;
    s > 0.5 * m && s <= m
}

#[derive(Clone, Debug)]
pub struct Annulus {
    m: f64,
    mode: Mode,
    members: Vec<GaussInt>,
}

impl Annulus {
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    /// Members in increasing `(re, im)` order.
    pub fn members(&self) -> &[GaussInt] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, q: GaussInt) -> bool {
        if !in_shell(self.m, q) {
            return false;
        }
        match self.mode {
            Mode::All => true,
            Mode::Primes => is_gaussian_prime(q),
            Mode::Custom(_) => self.members.binary_search(&q).is_ok(),
        }
    }
}

/// Enumerate the annulus for `(M, mode)`.
pub fn annulus(m: f64, mode: Mode) -> Result<Annulus> {
    if !m.is_finite() || m < mode.min_m() {
        return Err(Error::domain(format!(
            "annulus radius {m} below the minimum {} for mode {}",
            mode.min_m(),
            mode.name()
        )));
    }
    let mut members = match &mode {
        Mode::All => box_scan(m, |_| true),
        Mode::Primes => gaussian_primes_in_shell(m),
        Mode::Custom(set) => set.iter().copied().filter(|&q| in_shell(m, q)).collect(),
    };
    members.sort_unstable();
    members.dedup();
    Ok(Annulus { m, mode, members })
}

fn box_scan(m: f64, keep: impl Fn(GaussInt) -> bool) -> Vec<GaussInt> {
    let r = m.floor() as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let q = GaussInt::new(a, b);
            if in_shell(m, q) && keep(q) {
                out.push(q);
            }
        }
    }
    out
}

/// Gaussian primes in the shell, assembled from rational primes: `1+i`
/// associates, inert primes `p ≡ 3 (mod 4)` on the axes, and the eight
/// sign/swap images of each two-squares split `p = a² + b²`.
fn gaussian_primes_in_shell(m: f64) -> Vec<GaussInt> {
    let r = m.floor() as u64;
    let mut out = Vec::new();
    let push_all = |cands: &[GaussInt], out: &mut Vec<GaussInt>| {
        out.extend(cands.iter().copied().filter(|&q| in_shell(m, q)));
    };
    for p in sieve_primes(2 * r * r) {
        if p == 2 {
            push_all(&GaussInt::new(1, 1).associates(), &mut out);
        } else if p % 4 == 3 {
            if p <= r {
                push_all(&GaussInt::new(p as i64, 0).associates(), &mut out);
            }
        } else {
            let (a, b) = two_squares(p).expect("p ≡ 1 (mod 4) is a sum of two squares");
            if a > r {
                continue;
            }
            let (a, b) = (a as i64, b as i64);
            push_all(&GaussInt::new(a, b).associates(), &mut out);
            push_all(&GaussInt::new(b, a).associates(), &mut out);
        }
    }
    out
}

/// Closed-form size of the full annulus for integer `M`.
pub fn full_annulus_count(m: u64) -> u64 {
    let outer = 2 * m + 1;
    let inner = 2 * (m / 2) + 1;
    outer * outer - inner * inner
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_counts() {
        assert_eq!(annulus(4.0, Mode::All).unwrap().len(), 56);
        assert_eq!(annulus(2.0, Mode::All).unwrap().len(), 16);
        for m in 2..=40u64 {
            assert_eq!(annulus(m as f64, Mode::All).unwrap().len() as u64, full_annulus_count(m));
        }
        // Non-integer radius: 2.5 keeps 1.25 < s <= 2.5, i.e. s = 2.
        assert_eq!(annulus(2.5, Mode::All).unwrap().len(), 16);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(annulus(1.5, Mode::All), Err(Error::Domain(_))));
        assert!(matches!(annulus(3.0, Mode::Primes), Err(Error::Domain(_))));
        assert!(matches!(annulus(f64::NAN, Mode::All), Err(Error::Domain(_))));
    }

    #[test]
    fn primes_match_box_scan() {
        for m in [4.0, 5.0, 7.5, 16.0, 33.0, 64.0] {
            let fast = annulus(m, Mode::Primes).unwrap();
            let slow = box_scan(m, is_gaussian_prime);
            assert_eq!(fast.members(), &slow[..], "M={m}");
            assert!(fast.members().iter().all(|&q| fast.contains(q)));
        }
        let a4 = annulus(4.0, Mode::Primes).unwrap();
        assert!(a4.contains(GaussInt::new(3, 0)));
        assert!(a4.contains(GaussInt::new(-3, 2)));
        assert!(a4.contains(GaussInt::new(4, 1)));
        assert!(!a4.contains(GaussInt::new(4, 2)));
        assert_eq!(a4.len(), 20);
    }

    #[test]
    fn custom_filters_by_shell() {
        let set = vec![GaussInt::new(1, 0), GaussInt::new(3, 1), GaussInt::new(0, -4), GaussInt::new(9, 9)];
        let a = annulus(4.0, Mode::Custom(set)).unwrap();
        assert_eq!(a.members(), &[GaussInt::new(0, -4), GaussInt::new(3, 1)]);
        assert!(a.contains(GaussInt::new(3, 1)));
        assert!(!a.contains(GaussInt::new(3, 2)));
    }
}

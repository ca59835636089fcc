//! Rational prime machinery: sieves, a smallest-prime-factor table,
//! deterministic Miller-Rabin for 64-bit inputs and the two-squares split of
//! primes `p = 2` or `p ≡ 1 (mod 4)`.

use crate::error::{Error, Result};

/// All primes `<= limit` by the sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Smallest-prime-factor table for fast factorization of every `n <= limit`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn new(limit: u64) -> Self {
        let n = limit.max(1) as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] != 0 {
                continue;
            }
            spf[i] = i as u32;
            let mut j = i.saturating_mul(i);
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        SpfTable { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Factor `n` into `(prime, exponent)` pairs in increasing prime order.
    /// Returns `None` when `n` exceeds the table.
    pub fn factor(&self, mut n: u64) -> Option<Vec<(u64, u32)>> {
        if n as usize >= self.spf.len() {
            return None;
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        Some(out)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for all `u64` (Miller-Rabin with the first
/// twelve prime bases).
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Factor `n` by trial division. Practical up to roughly `10^12`.
pub fn factor_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while n.is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Write a prime `p = 2` or `p ≡ 1 (mod 4)` as `a² + b²` with `a > b >= 0`
/// (for `p = 2`, `a = b = 1`). Uses Cornacchia's algorithm and verifies the
/// result exactly.
pub fn two_squares(p: u64) -> Result<(u64, u64)> {
    if p == 2 {
        return Ok((1, 1));
    }
    if p % 4 != 1 || !is_prime_u64(p) {
        return Err(Error::domain(format!("{p} is not a prime congruent to 1 mod 4")));
    }
    // x with x² ≡ -1 (mod p) from a quadratic non-residue c: x = c^((p-1)/4).
    let mut c = 2u64;
    let x = loop {
        if pow_mod(c, (p - 1) / 2, p) == p - 1 {
            break pow_mod(c, (p - 1) / 4, p);
        }
        c += 1;
    };
    let bound = isqrt(p);
    let (mut r0, mut r1) = (p, x.max(p - x));
    while r1 > bound {
        let r2 = r0 % r1;
        r0 = r1;
        r1 = r2;
    }
    let a = r1;
    let rest = p - a * a;
    let b = isqrt(rest);
    if b * b != rest {
        return Err(Error::Numeric(format!("two-squares split failed for {p}")));
    }
    Ok((a.max(b), a.min(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small() {
        assert_eq!(sieve_primes(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(sieve_primes(1).is_empty());
    }

    #[test]
    fn spf_factorization_matches_trial() {
        let t = SpfTable::new(100_000);
        for n in [1u64, 2, 12, 97, 360, 65_536, 99_991, 100_000] {
            assert_eq!(t.factor(n).unwrap(), factor_trial(n), "n={n}");
        }
        assert!(t.factor(100_001).is_none());
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = sieve_primes(20_000);
        let mut idx = 0;
        for n in 0..=20_000u64 {
            let expect = idx < primes.len() && primes[idx] == n;
            if expect {
                idx += 1;
            }
            assert_eq!(is_prime_u64(n), expect, "n={n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751));
    }

    #[test]
    fn two_squares_exact() {
        for &p in sieve_primes(50_000).iter().filter(|&&p| p % 4 == 1) {
            let (a, b) = two_squares(p).unwrap();
            assert_eq!(a * a + b * b, p);
            assert!(a > b);
        }
        assert_eq!(two_squares(2).unwrap(), (1, 1));
        assert!(two_squares(7).is_err());
        assert!(two_squares(21).is_err());
    }
}

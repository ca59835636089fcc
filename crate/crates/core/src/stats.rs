//! Empirical growth statistics for Gaussian divisor counts and prime annuli.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{annulus, Mode};
use crate::error::{Error, Result};
use crate::gauss::{factorize, GaussInt};
use crate::primes::SpfTable;

/// One dyadic range `lo <= |ℓ| <= hi` of the divisor statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorStatRow {
    pub lo: u64,
    pub hi: u64,
    pub max_stat: f64,
    pub argmax: GaussInt,
    /// Symmetry-class representatives scanned in this range.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorStats {
    pub rows: Vec<DivisorStatRow>,
    pub global_max: f64,
    pub global_argmax: GaussInt,
}

/// `ln|D(ℓ)| · ln ln|ℓ| / ln|ℓ|` with `|ℓ|` the sup-norm.
pub fn zeta_stat(divisor_count: u64, sup: u64) -> f64 {
    let s = sup as f64;
    (divisor_count as f64).ln() * s.ln().ln() / s.ln()
}

/// Scan every `ℓ` with `3 <= |ℓ| <= L` and report the statistic per dyadic
/// range `[2^j, 2^(j+1))`.
///
/// `|D(ℓ)|` and `|ℓ|` are invariant under the eight symmetries generated by
/// the units and conjugation, so only `re >= 3, 0 <= im <= re` is visited.
pub fn divisor_bound_stat(l: u64) -> Result<DivisorStats> {
    if l < 3 {
        return Err(Error::domain(format!("divisor scan needs L >= 3, got {l}")));
    }
    let spf = SpfTable::new(2 * l * l);
    // Per re-value: (stat, argmax) maxima; sup-norm of the whole row is re.
    let per_row: Vec<(u64, f64, GaussInt, u64)> = (3..=l)
        .into_par_iter()
        .map(|re| {
            let mut best = (f64::NEG_INFINITY, GaussInt::ZERO);
            for im in 0..=re {
                let z = GaussInt::new(re as i64, im as i64);
                let d = factorize(z, Some(&spf)).expect("nonzero input within table range").divisor_count();
                let s = zeta_stat(d, re);
                if s > best.0 {
                    best = (s, z);
                }
            }
            (re, best.0, best.1, re + 1)
        })
        .collect();

    let mut rows: Vec<DivisorStatRow> = Vec::new();
    for (re, s, z, n) in per_row {
        let base = 1u64 << (63 - re.leading_zeros());
        let (lo, hi) = (base.max(3), (2 * base - 1).min(l));
        match rows.last_mut() {
            Some(row) if row.lo == lo => {
                row.count += n;
                if s > row.max_stat {
                    row.max_stat = s;
                    row.argmax = z;
                }
            }
            _ => rows.push(DivisorStatRow { lo, hi, max_stat: s, argmax: z, count: n }),
        }
    }
    let best = rows.iter().max_by(|a, b| a.max_stat.total_cmp(&b.max_stat)).expect("at least one row");
    Ok(DivisorStats { global_max: best.max_stat, global_argmax: best.argmax, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeCountRow {
    pub m: f64,
    pub count: u64,
    /// `|P(M)| · ln M / M²`.
    pub ratio: f64,
}

pub fn prime_count_stat(ms: &[f64]) -> Result<Vec<PrimeCountRow>> {
    ms.iter()
        .map(|&m| {
            let a = annulus(m, Mode::Primes)?;
            let count = a.len() as u64;
            Ok(PrimeCountRow { m, count, ratio: count as f64 * m.ln() / (m * m) })
        })
        .collect()
}

/// `max/min` of the ratios; `1` means perfectly flat.
pub fn prime_ratio_spread(rows: &[PrimeCountRow]) -> f64 {
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    max / min
}

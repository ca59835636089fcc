//! The decay envelope `g`, with `|ξ|` the sup-norm:
//!
//! ```text
//! standard: g(ξ) = |ξ|^{−a} exp(ln|ξ| / ln ln|ξ|)   for |ξ| > e
//! prime:    g(ξ) = |ξ|^{−a} ln|ξ| ln ln|ξ|          for |ξ| > e
//! ```
//!
//! and `g = 1` on the closed ball `|ξ| <= e`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::annulus::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GVariant {
    #[default]
    Standard,
    Prime,
}

impl GVariant {
    pub fn for_mode(mode: &Mode) -> Self {
        match mode {
            Mode::Primes => GVariant::Prime,
            _ => GVariant::Standard,
        }
    }
}

/// `g` as a function of the sup-norm `s = |ξ|`.
pub fn g_radial(s: f64, a: f64, variant: GVariant) -> f64 {
    if s <= E {
        return 1.0;
    }
    let l = s.ln();
    let ll = l.ln();
    let base = s.powf(-a);
    match variant {
        GVariant::Standard => base * (l / ll).exp(),
        GVariant::Prime => base * l * ll,
    }
}

pub fn g_weight(xi: [f64; 2], a: f64, variant: GVariant) -> f64 {
    g_radial(xi[0].abs().max(xi[1].abs()), a, variant)
}

//! Fourier coefficients of a product `P_{k−1} · F_{M_k}` of periodic
//! factors, by quadrature over the support tiles of the top factor.
//!
//! On the torus, `Φ^ε(qx − θ)` is a sum of `N(q)` disjoint bumps centred at
//! `(r + θ)/q`, one per residue `r ∈ ℤ²/qℤ²`. Substituting
//! `x = (εz + r + θ) q̄ / N(q)` with `z ∈ [-1, 1]²` turns each into
//! `φ(z) dz / N(q)`, so
//!
//! ```text
//! (P F)^(m) = (1/|Q|) Σ_{q, r} (1/N(q)) ∫ P(x(z)) φ(z) e^{−2πi⟨m, x(z)⟩} dz
//! ```
//!
//! The inner integrals are Gauss-Legendre sums; all nodes then go through one
//! type-1 NUFFT. Tiles on which some lower factor vanishes identically are
//! skipped by a sup-norm distance test.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::fm::{CoeffBox, FmOperator};
use crate::gauss::GaussInt;
use crate::nufft::{nufft2d_type1, NUFFT_REL_TOL};
use crate::quadrature::gl_rule;

const FINE_NODES: usize = 10;
const COARSE_NODES: usize = 8;
const MAX_SUBPANELS: usize = 16;

#[derive(Clone, Debug)]
pub struct TiledCoeffs {
    pub coeffs: CoeffBox,
    /// Estimated uniform bound on the coefficient error (quadrature plus NUFFT).
    pub quad_err: f64,
    /// Tiles that intersect the support of every lower factor.
    pub tiles: usize,
    pub nodes: usize,
    /// `Σ` of the node strengths, the `m = 0` coefficient summed directly.
    pub mass: f64,
}

/// Residues of `ℤ²` modulo `qℤ²`: with `g = gcd(re, im)` the lattice has
/// basis `(g, ·), (0, N/g)`, so `(i, j)` with `0 <= i < g`, `0 <= j < N/g`.
pub fn residues(q: GaussInt) -> impl Iterator<Item = GaussInt> {
    let g = gcd(q.re.unsigned_abs(), q.im.unsigned_abs()) as i64;
    let n = q.norm() as i64;
    (0..g).flat_map(move |i| (0..n / g).map(move |j| GaussInt::new(i, j)))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `y q̄ / N(q)`, i.e. `y / q` for a real point `y`.
fn div_point(y: [f64; 2], q: GaussInt) -> [f64; 2] {
    let n = q.norm() as f64;
    let (a, b) = (q.re as f64, q.im as f64);
    [(y[0] * a + y[1] * b) / n, (y[1] * a - y[0] * b) / n]
}

fn lattice_dist(y: [f64; 2]) -> f64 {
    (y[0] - y[0].round()).abs().max((y[1] - y[1].round()).abs())
}

struct TileBatch {
    points: Vec<[f64; 2]>,
    strengths: Vec<Complex64>,
    err: f64,
    tiles: usize,
}

/// Coefficients of `Π_{j} F_j · F_top` on `|m| <= radius`.
pub fn tiled_coefficients(lower: &[&FmOperator], top: &FmOperator, radius: i64) -> Result<TiledCoeffs> {
    let eps = top.eps();
    let theta = top.params().theta;
    let n_top = top.len() as f64;
    let bump = top.params().bump;
    let r = radius as f64;
    let probes = [[0.0, 0.0], [r, r], [r, -r], [r, 0.0], [0.0, r]];

    let batches: Vec<TileBatch> = top
        .annulus()
        .members()
        .par_iter()
        .map(|&q| {
            let mut batch = TileBatch { points: Vec::new(), strengths: Vec::new(), err: 0.0, tiles: 0 };
            let nq = q.norm() as f64;
            let tile_radius = SQRT_2 * eps / q.euclid_norm();
            let mut active: Vec<Vec<GaussInt>> = vec![Vec::new(); lower.len()];
            'tiles: for res in residues(q) {
                let y0 = [res.re as f64 + theta[0], res.im as f64 + theta[1]];
                let center = div_point(y0, q);
                let mut ratio: f64 = 0.0;
                for (op, list) in lower.iter().zip(active.iter_mut()) {
                    list.clear();
                    let th = op.params().theta;
                    for &qj in op.annulus().members() {
                        let y = qj.mul_point(center);
                        let reach = qj.euclid_norm() * tile_radius;
                        if lattice_dist([y[0] - th[0], y[1] - th[1]]) < op.eps() + reach {
                            list.push(qj);
                            ratio = ratio.max(reach / op.eps());
                        }
                    }
                    if list.is_empty() {
                        continue 'tiles;
                    }
                }
                batch.tiles += 1;
                // Phase swing of the highest mode across one tile, per axis.
                let swing = 4.0 * PI * r * eps / q.euclid_norm();
                let sub = ((4.0 * ratio).max(0.5 * swing).ceil() as usize).clamp(1, MAX_SUBPANELS);
                let lower_product = |x: [f64; 2]| -> f64 {
                    let mut p = 1.0;
                    for (op, list) in lower.iter().zip(&active) {
                        let s: f64 = list.iter().map(|&qj| op.term(qj, x)).sum();
                        p *= s / op.len() as f64;
                        if p == 0.0 {
                            break;
                        }
                    }
                    p
                };
                let integrate = |nodes: usize, keep: bool, batch: &mut TileBatch| -> [Complex64; 5] {
                    let (zs, ws) = gl_rule(nodes).expand(-1.0, 1.0, sub);
                    let mut probe_sums = [Complex64::new(0.0, 0.0); 5];
                    for (z0, w0) in zs.iter().zip(&ws) {
                        for (z1, w1) in zs.iter().zip(&ws) {
                            let y = [eps * z0 + y0[0], eps * z1 + y0[1]];
                            let x = div_point(y, q);
                            let w = w0 * w1 * bump.phi([*z0, *z1]) / (n_top * nq);
                            let c = w * lower_product(x);
                            if c == 0.0 {
                                continue;
                            }
                            for (acc, m) in probe_sums.iter_mut().zip(&probes) {
                                *acc += Complex64::cis(-2.0 * PI * (m[0] * x[0] + m[1] * x[1])) * c;
                            }
                            if keep {
                                batch.points.push(x);
                                batch.strengths.push(Complex64::new(c, 0.0));
                            }
                        }
                    }
                    probe_sums
                };
                let fine = integrate(FINE_NODES, true, &mut batch);
                let coarse = integrate(COARSE_NODES, false, &mut batch);
                batch.err += fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            }
            batch
        })
        .collect();

    let mut points = Vec::new();
    let mut strengths = Vec::new();
    let mut quad_err = 0.0;
    let mut tiles = 0;
    for b in batches {
        points.extend(b.points);
        strengths.extend(b.strengths);
        quad_err += b.err;
        tiles += b.tiles;
    }
    let mass: f64 = strengths.iter().map(|c| c.re).sum();
    let l1: f64 = strengths.iter().map(|c| c.norm()).sum();
    let data = nufft2d_type1(&points, &strengths, radius);
    Ok(TiledCoeffs {
        coeffs: CoeffBox::from_data(radius, data),
        quad_err: quad_err + NUFFT_REL_TOL * l1,
        tiles,
        nodes: points.len(),
        mass,
    })
}

//! Two-dimensional type-1 non-uniform FFT by Gaussian gridding.
//!
//! Computes
//!
//! ```text
//! f(m) = Σ_j c_j e^{−2πi⟨m, x_j⟩},   |m|_∞ <= R
//! ```
//!
//! for arbitrary points `x_j ∈ ℝ²`. Each point is spread onto a twice
//! oversampled periodic grid with a Gaussian of width `τ`, the grid is
//! transformed with an FFT, and the Gaussian's Fourier coefficients
//! `√(τ/π) e^{−τk²}` are divided out.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Kernel half-width in fine-grid cells; with twofold oversampling this
/// gives roughly twelve correct digits.
const SPREAD: i64 = 12;
const OVERSAMPLE: usize = 2;

/// Relative accuracy of the transform, as a multiple of `Σ|c_j|`.
pub const NUFFT_REL_TOL: f64 = 1e-11;

pub fn nufft2d_type1(points: &[[f64; 2]], strengths: &[Complex64], radius: i64) -> Vec<Complex64> {
    assert_eq!(points.len(), strengths.len(), "one strength per point");
    let modes = (2 * radius + 1) as usize;
    let mut grid_n = OVERSAMPLE * modes;
    grid_n += grid_n % 2;
    grid_n = grid_n.max(2 * SPREAD as usize + 2);
    let n = modes as f64;
    let r = grid_n as f64 / n;
    let tau = PI * SPREAD as f64 / (n * n * r * (r - 0.5));
    let h = 2.0 * PI / grid_n as f64;
    let width = (2 * SPREAD) as usize;

    let mut grid = vec![Complex64::new(0.0, 0.0); grid_n * grid_n];
    let mut wx = vec![0.0; width];
    let mut wy = vec![0.0; width];
    for (p, &c) in points.iter().zip(strengths) {
        let ix = kernel_row(p[0], h, tau, &mut wx);
        let iy = kernel_row(p[1], h, tau, &mut wy);
        for (a, &wa) in wx.iter().enumerate() {
            let gx = (ix + a as i64).rem_euclid(grid_n as i64) as usize;
            let ca = c * wa;
            let row = &mut grid[gx * grid_n..(gx + 1) * grid_n];
            for (b, &wb) in wy.iter().enumerate() {
                let gy = (iy + b as i64).rem_euclid(grid_n as i64) as usize;
                row[gy] += ca * wb;
            }
        }
    }

    fft2_forward(&mut grid, grid_n);

    // F_τ(k) = (1/grid_n) Σ f_τ e^{−ikξ} per axis, then undo the Gaussian.
    let mut deconv = vec![0.0; modes];
    for (i, d) in deconv.iter_mut().enumerate() {
        let k = i as f64 - radius as f64;
        *d = (PI / tau).sqrt() * (k * k * tau).exp() / grid_n as f64;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); modes * modes];
    for i in 0..modes {
        let k0 = (i as i64 - radius).rem_euclid(grid_n as i64) as usize;
        for j in 0..modes {
            let k1 = (j as i64 - radius).rem_euclid(grid_n as i64) as usize;
            out[i * modes + j] = grid[k0 * grid_n + k1] * (deconv[i] * deconv[j]);
        }
    }
    out
}

/// Gaussian weights `exp(−(ξ_m − X)²/(4τ))` at the `2·SPREAD` fine-grid
/// nodes nearest to `X = 2πx`; returns the first node index.
fn kernel_row(x: f64, h: f64, tau: f64, w: &mut [f64]) -> i64 {
    let xr = 2.0 * PI * x.rem_euclid(1.0);
    let base = (xr / h).floor() as i64 - SPREAD + 1;
    for (a, v) in w.iter_mut().enumerate() {
        let d = (base + a as i64) as f64 * h - xr;
        *v = (-d * d / (4.0 * tau)).exp();
    }
    base
}

fn fft2_forward(data: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Direct `O(points · modes²)` evaluation of the same sum.
pub fn direct2d_type1(points: &[[f64; 2]], strengths: &[Complex64], radius: i64) -> Vec<Complex64> {
    let modes = (2 * radius + 1) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); modes * modes];
    for (p, &c) in points.iter().zip(strengths) {
        for i in 0..modes {
            let m0 = i as f64 - radius as f64;
            for j in 0..modes {
                let m1 = j as f64 - radius as f64;
                out[i * modes + j] += c * Complex64::cis(-2.0 * PI * (m0 * p[0] + m1 * p[1]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (npts, radius) in [(1usize, 0i64), (50, 3), (400, 17), (300, 40)] {
            let pts: Vec<[f64; 2]> = (0..npts).map(|_| [rng.random_range(-2.0..2.0), rng.random::<f64>()]).collect();
            let cs: Vec<Complex64> =
                (0..npts).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let fast = nufft2d_type1(&pts, &cs, radius);
            let slow = direct2d_type1(&pts, &cs, radius);
            let scale: f64 = cs.iter().map(|c| c.norm()).sum();
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= NUFFT_REL_TOL * scale, "n={npts} R={radius}: err {err:e}");
        }
    }

    #[test]
    fn empty_input_gives_zeros() {
        let out = nufft2d_type1(&[], &[], 2);
        assert_eq!(out.len(), 25);
        assert!(out.iter().all(|c| c.norm() == 0.0));
    }
}

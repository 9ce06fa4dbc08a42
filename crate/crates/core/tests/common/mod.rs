#![allow(dead_code)]

use std::sync::Arc;

use ionflow::{SpectralField, SpectralGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Real field with random coefficients on the dealiased band.
pub fn random_band_field(g: &Arc<SpectralGrid>, rng: &mut ChaCha8Rng, mean: f64) -> SpectralField {
    let mut f = SpectralField::from_physical(g, &random_values(g.n(), rng)).unwrap();
    f.dealias();
    let c = f.coeffs_mut();
    c[0] = Complex64::new(mean, 0.0);
    f
}

/// Integer wavevectors `k` with `3 max(|k₁|, |k₂|) < n`.
pub fn band(n: usize) -> Vec<(i64, i64)> {
    let kmax = (n as i64 - 1) / 3;
    let mut out = Vec::new();
    for k2 in -kmax..=kmax {
        for k1 in -kmax..=kmax {
            out.push((k1, k2));
        }
    }
    out
}

pub fn in_band(n: usize, k: (i64, i64)) -> bool {
    3 * k.0.abs().max(k.1.abs()) < n as i64
}

/// Brute-force `Σ_{p+q=l} a(p) b(q)` over band modes `p, q`, for every band `l`.
pub fn triad<A, B>(n: usize, a: A, b: B) -> Vec<((i64, i64), Complex64)>
where
    A: Fn((i64, i64)) -> Complex64,
    B: Fn((i64, i64)) -> Complex64,
{
    let modes = band(n);
    modes
        .iter()
        .map(|&l| {
            let mut s = Complex64::default();
            for &p in &modes {
                let q = (l.0 - p.0, l.1 - p.1);
                if in_band(n, q) {
                    s += a(p) * b(q);
                }
            }
            (l, s)
        })
        .collect()
}

/// Pads a field's coefficients onto a finer grid.
pub fn refine(f: &SpectralField, fine: &Arc<SpectralGrid>) -> SpectralField {
    let mut out = SpectralField::zeros(fine);
    for (k1, k2) in band(f.grid().n()) {
        out.set_coeff(k1, k2, f.coeff(k1, k2));
    }
    out
}

pub fn ik(k: i64, c: Complex64) -> Complex64 {
    Complex64::new(0.0, k as f64) * c
}

pub fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

//! Fourier-multiplier operators on the torus: fractional Laplacian, Gevrey
//! filter, Poisson inversion, gradients, Leray projection and the dealiased
//! pseudo-spectral product.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::{times_i, SpectralField, VectorField};
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Which first-order operator [`gradient`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    /// `∇f = (∂₁f, ∂₂f)`
    Grad,
    /// `∇⊥f = (−∂₂f, ∂₁f)`
    Perp,
}

/// `|k|^s` on a lattice whose squared magnitudes are `kmag2`.
#[inline]
fn kpow(kmag2: f64, kmag: f64, s: f64) -> f64 {
    if s == 1.0 {
        kmag
    } else if s == 2.0 {
        kmag2
    } else if s == 0.0 {
        1.0
    } else {
        kmag2.powf(0.5 * s)
    }
}

/// `Λˢ f`: multiplies `f_k` by `|k|^s` and annihilates the mean.
pub fn frac_laplacian(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if s < 0.0 && !f.is_mean_zero() {
        return Err(Error::Domain(format!(
            "negative power s = {s} applied to a field with mean {}",
            f.mean()
        )));
    }
    let grid = Arc::clone(f.grid());
    let mut out = f.clone();
    out.apply_real_symbol(|i| {
        if i == 0 {
            0.0
        } else {
            kpow(grid.kmag2()[i], grid.kmag()[i], s)
        }
    });
    Ok(out)
}

/// Largest admissible exponent for `exp`.
pub fn max_exponent() -> f64 {
    f64::MAX.ln()
}

/// Fails when `tau · max|k|^s` over the lattice would overflow `exp`.
pub fn check_gevrey_overflow(grid: &SpectralGrid, tau: f64, s: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("gevrey tau must be finite and >= 0, got {tau}")));
    }
    let half = grid.n() as i64 / 2;
    let kmax2 = (2 * half * half) as f64;
    let exponent = tau * kpow(kmax2, kmax2.sqrt(), s);
    let limit = max_exponent();
    if exponent > limit {
        return Err(Error::Overflow {
            k1: half,
            k2: half,
            exponent,
            limit,
        });
    }
    Ok(())
}

/// `e^{τΛˢ} f`. The zero mode is left unchanged.
pub fn gevrey_filter(f: &SpectralField, tau: f64, s: f64) -> Result<SpectralField> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("gevrey exponent s must be > 0, got {s}")));
    }
    check_gevrey_overflow(f.grid(), tau, s)?;
    let grid = Arc::clone(f.grid());
    let mut out = f.clone();
    if tau == 0.0 {
        return Ok(out);
    }
    out.apply_real_symbol(|i| {
        if i == 0 {
            1.0
        } else {
            (tau * kpow(grid.kmag2()[i], grid.kmag()[i], s)).exp()
        }
    });
    Ok(out)
}

/// Per-mode weight `e^{τ|k|} |k|^m` (zero at `k = 0`), the symbol of `e^{τΛ}Λ^m`.
pub fn gevrey_weights(grid: &SpectralGrid, tau: f64, m: f64) -> Result<Vec<f64>> {
    check_gevrey_overflow(grid, tau, 1.0)?;
    Ok((0..grid.len())
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                let k = grid.kmag()[i];
                (tau * k).exp() * kpow(grid.kmag2()[i], k, m)
            }
        })
        .collect())
}

/// Solves `−ΔΦ = ρ` for the mean-zero potential; the mean of `ρ` is dropped.
pub fn solve_poisson(rho: &SpectralField) -> SpectralField {
    let grid = Arc::clone(rho.grid());
    let mut phi = rho.clone();
    phi.apply_real_symbol(|i| if i == 0 { 0.0 } else { 1.0 / grid.kmag2()[i] });
    phi
}

/// `−Δf`, i.e. multiplication by `|k|²`.
pub fn neg_laplacian(f: &SpectralField) -> SpectralField {
    let grid = Arc::clone(f.grid());
    let mut out = f.clone();
    out.apply_real_symbol(|i| grid.kmag2()[i]);
    out
}

/// Spectral gradient or perpendicular gradient.
pub fn gradient(f: &SpectralField, kind: GradientKind) -> VectorField {
    let grid = f.grid();
    let (dk1, dk2) = grid.derivative_symbols();
    let mut gx = Vec::with_capacity(grid.len());
    let mut gy = Vec::with_capacity(grid.len());
    for (i, c) in f.coeffs().iter().enumerate() {
        let d1 = times_i(*c, dk1[i]);
        let d2 = times_i(*c, dk2[i]);
        match kind {
            GradientKind::Grad => {
                gx.push(d1);
                gy.push(d2);
            }
            GradientKind::Perp => {
                gx.push(-d2);
                gy.push(d1);
            }
        }
    }
    VectorField {
        x: SpectralField::from_coeffs(grid, gx).expect("sized from grid"),
        y: SpectralField::from_coeffs(grid, gy).expect("sized from grid"),
    }
}

/// Leray–Hodge projection `v_k − (v_k·k) k/|k|²` onto divergence-free fields.
///
/// The zero mode and the unpaired Nyquist modes are set to zero.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v.grid();
    let mut px = Vec::with_capacity(grid.len());
    let mut py = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        if i == 0 || grid.is_nyquist(i) {
            px.push(Complex64::default());
            py.push(Complex64::default());
            continue;
        }
        let (k1, k2) = grid.wavevector(i);
        let (k1, k2) = (k1 as f64, k2 as f64);
        let a = v.x.coeffs()[i];
        let b = v.y.coeffs()[i];
        let proj = (a * k1 + b * k2) / grid.kmag2()[i];
        px.push(a - proj * k1);
        py.push(b - proj * k2);
    }
    VectorField {
        x: SpectralField::from_coeffs(grid, px).expect("sized from grid"),
        y: SpectralField::from_coeffs(grid, py).expect("sized from grid"),
    }
}

/// Grid values of the band-limited part of `f`.
pub fn band_limited_values(f: &SpectralField) -> Vec<f64> {
    if f.is_band_limited() {
        f.to_physical()
    } else {
        f.dealiased().to_physical()
    }
}

/// Forward transform of a grid product followed by the 2/3 mask.
pub fn dealiased_from_values(grid: &Arc<SpectralGrid>, values: &[f64]) -> SpectralField {
    let mut f = SpectralField::from_physical(grid, values).expect("sized from grid");
    f.dealias();
    f
}

/// Pseudo-spectral product `fg` restricted to the 2/3 band.
///
/// Both factors are truncated to the dealiasing band first, which makes the
/// result equal to the convolution `Σ_{j+k=l} f_j g_k` over band modes,
/// evaluated at every band mode `l`.
pub fn multiply_dealiased(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_grid(g)?;
    let a = band_limited_values(f);
    let b = band_limited_values(g);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(dealiased_from_values(f.grid(), &prod))
}

/// `f ∇g`-type products of one scalar against both components of a vector.
pub fn multiply_vector(f: &SpectralField, v: &VectorField) -> Result<VectorField> {
    Ok(VectorField {
        x: multiply_dealiased(f, &v.x)?,
        y: multiply_dealiased(f, &v.y)?,
    })
}

use std::f64::consts::PI;

use super::field::SpectralField;
use super::ops::gevrey_weights;
use crate::error::Result;

/// `4π²`, the torus area; `‖f‖²_{L²} = 4π² Σ |f_k|²`.
pub const TORUS_AREA: f64 = 4.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// Grid maximum of `|f|`.
    Linf,
    /// Grid quadrature of `|f|⁴`.
    L4,
    /// `(4π² Σ (1 + |k|^m)² |f_k|²)^{1/2}`.
    Sobolev(f64),
    /// `‖e^{τΛ} Λ^m f‖_{L²}`; the mean is excluded.
    Gevrey { tau: f64, m: f64 },
}

pub fn norm(f: &SpectralField, kind: NormKind) -> Result<f64> {
    Ok(match kind {
        NormKind::L2 => l2(f),
        NormKind::Linf => linf_values(&f.to_physical()),
        NormKind::L4 => l4_values(&f.to_physical()),
        NormKind::Sobolev(m) => sobolev(f, m),
        NormKind::Gevrey { tau, m } => weighted_l2(f, &gevrey_weights(f.grid(), tau, m)?),
    })
}

pub fn l2(f: &SpectralField) -> f64 {
    l2_squared(f).sqrt()
}

pub fn l2_squared(f: &SpectralField) -> f64 {
    TORUS_AREA * f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

pub fn sobolev(f: &SpectralField, m: f64) -> f64 {
    let grid = f.grid();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let w = 1.0 + grid.kmag2()[i].powf(0.5 * m);
            w * w * c.norm_sqr()
        })
        .sum();
    (TORUS_AREA * sum).sqrt()
}

/// `(4π² Σ w_k² |f_k|²)^{1/2}` for a per-mode weight.
pub fn weighted_l2(f: &SpectralField, weights: &[f64]) -> f64 {
    weighted_l2_squared(f, weights).sqrt()
}

pub fn weighted_l2_squared(f: &SpectralField, weights: &[f64]) -> f64 {
    TORUS_AREA
        * f.coeffs()
            .iter()
            .zip(weights)
            .map(|(c, w)| (c * *w).norm_sqr())
            .sum::<f64>()
}

/// `(f, g)_{L²} = 4π² Re Σ f_k conj(g_k)`.
pub fn inner(f: &SpectralField, g: &SpectralField) -> f64 {
    TORUS_AREA
        * f.coeffs()
            .iter()
            .zip(g.coeffs())
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>()
}

/// `(W f, W g)_{L²}` for a real per-mode weight `W`.
pub fn weighted_inner(f: &SpectralField, g: &SpectralField, weights: &[f64]) -> f64 {
    TORUS_AREA
        * f.coeffs()
            .iter()
            .zip(g.coeffs())
            .zip(weights)
            .map(|((a, b), w)| w * w * (a * b.conj()).re)
            .sum::<f64>()
}

pub fn linf_values(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn l4_values(values: &[f64]) -> f64 {
    let mean4 = values.iter().map(|v| v.powi(4)).sum::<f64>() / values.len() as f64;
    (TORUS_AREA * mean4).powf(0.25)
}

/// Grid quadrature `∫ |f|² dx ≈ (4π²/n²) Σ f(x)²`.
pub fn l2_squared_values(values: &[f64]) -> f64 {
    TORUS_AREA * values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;

    #[test]
    fn cosine_norms() {
        let g = SpectralGrid::new(16).unwrap();
        let f = SpectralField::from_fn(&g, |x, _| x.cos());
        let l2v = norm(&f, NormKind::L2).unwrap();
        assert!((l2v - (2.0 * PI * PI).sqrt()).abs() < 1e-13);
        let gv = norm(&f, NormKind::Gevrey { tau: 0.4, m: 3.0 }).unwrap();
        assert!((gv - 0.4f64.exp() * l2v).abs() < 1e-13);
        let h = SpectralField::from_fn(&g, |x, _| 2.0 + x.cos());
        assert!((norm(&h, NormKind::Linf).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn sobolev_weights_mean_by_one() {
        let g = SpectralGrid::new(8).unwrap();
        let c = SpectralField::constant(&g, 1.5);
        // (1 + 0)·|1.5|·2π
        assert!((norm(&c, NormKind::Sobolev(2.0)).unwrap() - 3.0 * PI).abs() < 1e-14);
        assert_eq!(norm(&SpectralField::zeros(&g), NormKind::Sobolev(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn l4_of_cosine() {
        // ∫cos⁴ = 4π² · 3/8
        let g = SpectralGrid::new(16).unwrap();
        let f = SpectralField::from_fn(&g, |x, _| x.cos());
        let expect = (TORUS_AREA * 3.0 / 8.0).powf(0.25);
        assert!((norm(&f, NormKind::L4).unwrap() - expect).abs() < 1e-13);
    }
}

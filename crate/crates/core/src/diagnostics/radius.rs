//! Spectral radius-of-analyticity estimation and the NPD lower bound.
//!
//! A field analytic in a strip of width `τ` has Fourier coefficients that
//! decay like `|k|^{−β} e^{−τ|k|}`. The estimator takes, for every integer
//! shell `s = round(|k|)` inside a fitting band, the mode of largest
//! amplitude and fits `log|f_k| ≈ a − β log|k| − τ|k|` by least squares.

use crate::error::{Error, Result};
use crate::models::SimState;
use crate::spectral::norm::weighted_l2_squared;
use crate::spectral::{gevrey_weights, SpectralField, SpectralGrid};

pub const DEFAULT_NOISE_FLOOR: f64 = 1e-14;
pub const MIN_SHELLS: usize = 4;

/// Amplitude statistics of one integer shell `round(|k|) = shell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellStat {
    pub shell: i64,
    pub modes: usize,
    pub max_amplitude: f64,
    /// `|k|` of the mode attaining `max_amplitude`.
    pub k_at_max: f64,
    /// `Σ_{shell} |f_k|²`.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusFit {
    pub tau: f64,
    /// Coefficient of determination of the log-amplitude fit, in `[0, 1]`.
    pub fit_quality: f64,
    /// Fitted algebraic exponent `β`.
    pub algebraic_exponent: f64,
    pub shells_used: usize,
}

/// Radius data recorded at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRecord {
    pub time: f64,
    pub tau_estimated: f64,
    pub tau_theory: f64,
    pub fit_quality: f64,
    /// `(Σᵢ ‖e^{τΛ}Λ^m cᵢ‖²)^{1/2}` at `τ = tau_estimated`.
    pub gevrey_norm_at_tau: f64,
}

/// Shell statistics of a set of coefficient amplitudes (mean excluded).
pub fn shell_spectrum_of(grid: &SpectralGrid, amplitudes: &[f64]) -> Vec<ShellStat> {
    let max_shell = (grid.kmag().iter().copied().fold(0.0, f64::max)).round() as i64;
    let mut shells: Vec<ShellStat> = (0..=max_shell)
        .map(|s| ShellStat {
            shell: s,
            modes: 0,
            max_amplitude: 0.0,
            k_at_max: s as f64,
            energy: 0.0,
        })
        .collect();
    for (i, &a) in amplitudes.iter().enumerate().skip(1) {
        let k = grid.kmag()[i];
        let st = &mut shells[k.round() as usize];
        st.modes += 1;
        st.energy += a * a;
        if a > st.max_amplitude || (a == st.max_amplitude && k < st.k_at_max) {
            st.max_amplitude = a;
            st.k_at_max = k;
        }
    }
    shells
}

pub fn shell_spectrum(f: &SpectralField) -> Vec<ShellStat> {
    let amps: Vec<f64> = f.coeffs().iter().map(|c| c.norm()).collect();
    shell_spectrum_of(f.grid(), &amps)
}

fn check_band(grid: &SpectralGrid, k_min: i64, k_max: i64) -> Result<()> {
    if k_min < 1 || k_max <= k_min {
        return Err(Error::Config(format!(
            "fit band must satisfy 1 <= k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }
    if 3 * k_max > grid.n() as i64 {
        return Err(Error::Config(format!(
            "k_max = {k_max} exceeds the dealiased band n/3 for n = {}",
            grid.n()
        )));
    }
    Ok(())
}

/// Fits the decay rate from per-mode amplitudes.
pub fn radius_from_amplitudes(
    grid: &SpectralGrid,
    amplitudes: &[f64],
    band: (i64, i64),
    noise_floor: f64,
) -> Result<RadiusFit> {
    let (k_min, k_max) = band;
    check_band(grid, k_min, k_max)?;
    // round-off noise scales with the whole field, mean included
    let scale = amplitudes.iter().copied().fold(0.0, f64::max);
    let floor = noise_floor * scale;
    let points: Vec<(f64, f64)> = shell_spectrum_of(grid, amplitudes)
        .into_iter()
        .filter(|s| s.shell >= k_min && s.shell <= k_max && s.modes > 0)
        .filter(|s| s.max_amplitude > floor && s.max_amplitude > 0.0)
        .map(|s| (s.k_at_max, s.max_amplitude.ln()))
        .collect();
    if points.len() < MIN_SHELLS {
        return Err(Error::InsufficientData {
            usable: points.len(),
            required: MIN_SHELLS,
        });
    }
    let (beta, tau, r2) = fit_log_amplitude(&points);
    Ok(RadiusFit {
        tau: tau.max(0.0),
        fit_quality: r2,
        algebraic_exponent: beta,
        shells_used: points.len(),
    })
}

/// Least-squares fit of `y = a − β ln k − τ k`; returns `(β, τ, R²)`.
fn fit_log_amplitude(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean = |f: &dyn Fn(&(f64, f64)) -> f64| points.iter().map(f).sum::<f64>() / n;
    let ml = mean(&|p| p.0.ln());
    let mk = mean(&|p| p.0);
    let my = mean(&|p| p.1);
    let (mut sll, mut slk, mut skk, mut sly, mut sky, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(k, y) in points {
        let l = k.ln() - ml;
        let kk = k - mk;
        let yy = y - my;
        sll += l * l;
        slk += l * kk;
        skk += kk * kk;
        sly += l * yy;
        sky += kk * yy;
        syy += yy * yy;
    }
    let det = sll * skk - slk * slk;
    // y − ȳ ≈ p (l − l̄) + q (k − k̄) with p = −β, q = −τ
    let (p, q) = if det.abs() > 1e-300 {
        ((sly * skk - sky * slk) / det, (sky * sll - sly * slk) / det)
    } else {
        (0.0, if skk > 0.0 { sky / skk } else { 0.0 })
    };
    let ss_res: f64 = points
        .iter()
        .map(|&(k, y)| {
            let pred = my + p * (k.ln() - ml) + q * (k - mk);
            (y - pred).powi(2)
        })
        .sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (-p, -q, r2)
}

/// Radius estimate of one field over shells `[k_min, k_max]`.
pub fn radius_estimate(f: &SpectralField, band: (i64, i64)) -> Result<RadiusFit> {
    radius_estimate_with_floor(f, band, DEFAULT_NOISE_FLOOR)
}

pub fn radius_estimate_with_floor(f: &SpectralField, band: (i64, i64), noise_floor: f64) -> Result<RadiusFit> {
    let amps: Vec<f64> = f.coeffs().iter().map(|c| c.norm()).collect();
    radius_from_amplitudes(f.grid(), &amps, band, noise_floor)
}

/// Uniform radius of a state: per mode, the largest amplitude over all
/// concentrations (and the vorticity for Euler), so the slowest-decaying
/// component governs the fit.
pub fn state_radius_estimate(state: &SimState, band: (i64, i64), noise_floor: f64) -> Result<RadiusFit> {
    let grid = state.grid();
    let mut amps = vec![0.0f64; grid.len()];
    let mut absorb = |f: &SpectralField| {
        for (a, c) in amps.iter_mut().zip(f.coeffs()) {
            *a = a.max(c.norm());
        }
    };
    for s in state.species() {
        absorb(&s.concentration);
    }
    if let Some(w) = state.vorticity() {
        absorb(w);
    }
    radius_from_amplitudes(grid, &amps, band, noise_floor)
}

/// `τ(t) = ½ min{Dᵢ} · min{t, T₀/2}`.
pub fn npd_radius_bound(t: f64, diffusivities: &[f64], t0: f64) -> Result<f64> {
    if diffusivities.is_empty() {
        return Err(Error::Config("empty diffusivity list".into()));
    }
    if !(t0 > 0.0) {
        return Err(Error::Config(format!("T0 must be positive, got {t0}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Config(format!("t must be >= 0, got {t}")));
    }
    let dmin = diffusivities.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(0.5 * dmin * t.min(0.5 * t0))
}

/// `Σᵢ ‖e^{τΛ}Λ^m cᵢ‖²_{L²}`.
pub fn species_gevrey_sum(state: &SimState, tau: f64, m: f64) -> Result<f64> {
    let w = gevrey_weights(state.grid(), tau, m)?;
    Ok(state
        .species()
        .iter()
        .map(|s| weighted_l2_squared(&s.concentration, &w))
        .sum())
}

/// Local Gevrey doubling check behind the NPD radius: along
/// `τ(t) = ½ min{Dᵢ} t`, is `Σ‖e^{τΛ}Λ^m cᵢ(t)‖² ≤ 2(1 + Σ‖Λ^m cᵢ(0)‖²)`?
#[derive(Debug, Clone, Default)]
pub struct T0Calibrator {
    samples: Vec<(f64, f64)>,
    threshold: Option<f64>,
    m: f64,
}

impl T0Calibrator {
    pub fn new(m: f64) -> Self {
        Self {
            samples: Vec::new(),
            threshold: None,
            m,
        }
    }

    pub fn push(&mut self, state: &SimState) -> Result<()> {
        let dmin = state.params().min_diffusivity();
        if self.threshold.is_none() {
            self.threshold = Some(2.0 * (1.0 + species_gevrey_sum(state, 0.0, self.m)?));
        }
        let tau = 0.5 * dmin * state.time();
        self.samples.push((state.time(), species_gevrey_sum(state, tau, self.m)?));
        Ok(())
    }

    /// Largest sampled `T₀` such that the doubling bound holds on `[0, T₀]`.
    /// Equals the last sample time when the bound never fails.
    pub fn t0(&self) -> Result<f64> {
        let threshold = self
            .threshold
            .ok_or_else(|| Error::Data("T0 calibration needs at least one sample".into()))?;
        let mut t0 = 0.0;
        for &(t, y) in &self.samples {
            if y > threshold {
                break;
            }
            t0 = t;
        }
        Ok(t0)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
}

/// Estimated radius, NPD theory value and Gevrey norm for one state.
pub fn radius_record(
    state: &SimState,
    band: (i64, i64),
    tau_theory: f64,
    m: f64,
) -> Result<RadiusRecord> {
    let fit = state_radius_estimate(state, band, DEFAULT_NOISE_FLOOR)?;
    Ok(RadiusRecord {
        time: state.time(),
        tau_estimated: fit.tau,
        tau_theory,
        fit_quality: fit.fit_quality,
        gevrey_norm_at_tau: species_gevrey_sum(state, fit.tau, m)?.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn constructed(g: &Arc<SpectralGrid>, amp: impl Fn(f64) -> f64) -> SpectralField {
        let coeffs = (0..g.len())
            .map(|i| {
                if i == 0 || !g.dealias_mask()[i] {
                    Complex64::default()
                } else {
                    Complex64::new(amp(g.kmag()[i]), 0.0)
                }
            })
            .collect();
        SpectralField::from_coeffs(g, coeffs).unwrap()
    }

    #[test]
    fn recovers_exponential_decay() {
        let g = SpectralGrid::new(32).unwrap();
        let f = constructed(&g, |k| (-0.3 * k).exp());
        let fit = radius_estimate(&f, (4, 10)).unwrap();
        assert!((fit.tau - 0.3).abs() <= 0.02, "{fit:?}");
        assert!(fit.fit_quality > 0.999);
    }

    #[test]
    fn polynomial_decay_has_no_radius() {
        let g = SpectralGrid::new(32).unwrap();
        let f = constructed(&g, |k| k.powi(-4));
        let fit = radius_estimate(&f, (4, 10)).unwrap();
        assert!(fit.tau <= 0.02, "{fit:?}");
        assert!((fit.algebraic_exponent - 4.0).abs() < 1e-6);
    }

    #[test]
    fn single_mode_is_insufficient() {
        let g = SpectralGrid::new(32).unwrap();
        let f = SpectralField::from_fn(&g, |x, _| x.cos());
        assert!(matches!(
            radius_estimate(&f, (1, 10)),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn band_beyond_dealias_is_rejected() {
        let g = SpectralGrid::new(32).unwrap();
        let f = constructed(&g, |k| (-k).exp());
        assert!(matches!(radius_estimate(&f, (2, 11)), Err(Error::Config(_))));
    }

    #[test]
    fn npd_bound_values() {
        assert_eq!(npd_radius_bound(0.0, &[2.0, 4.0], 4.0).unwrap(), 0.0);
        assert_eq!(npd_radius_bound(1.0, &[2.0, 4.0], 4.0).unwrap(), 1.0);
        assert_eq!(npd_radius_bound(10.0, &[2.0, 4.0], 4.0).unwrap(), 2.0);
        assert!(npd_radius_bound(1.0, &[], 4.0).is_err());
        assert!(npd_radius_bound(1.0, &[1.0], 0.0).is_err());
    }
}

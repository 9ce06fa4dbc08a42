//! Discrete check of the Gevrey energy identity.
//!
//! For `E(t) = ½(Σᵢ ‖e^{τΛ}Λ^m c̃ᵢ‖² + ‖e^{τΛ}Λ^{m−1}ω‖²)` along a linear
//! radius `τ(t) = τ_a + τ′(t − t_a)`, the rate `dE/dt` equals
//!
//! ```text
//!   − Σ Dᵢ‖e^{τΛ}Λ^{m+1}cᵢ‖²
//!   + τ′(Σ ‖e^{τΛ}Λ^{m+1/2}cᵢ‖² + ‖e^{τΛ}Λ^{m−1/2}ω‖²)
//!   − Σ (e^{τΛ}Λ^m(u·∇c̃ᵢ), e^{τΛ}Λ^m c̃ᵢ)
//!   + Σ Dᵢzᵢ (e^{τΛ}Λ^m ∇·(c̃ᵢ∇Φ), e^{τΛ}Λ^m c̃ᵢ)
//!   + Σ Dᵢzᵢc̄ᵢ (e^{τΛ}Λ^m ΔΦ, e^{τΛ}Λ^m c̃ᵢ)
//!   − (e^{τΛ}Λ^{m−1}(u·∇ω), e^{τΛ}Λ^{m−1}ω)
//!   − (e^{τΛ}Λ^{m−1}∇⊥·(ρ∇Φ), e^{τΛ}Λ^{m−1}ω).
//! ```
//!
//! The residual compares the centred difference of `E` across one step with
//! the trapezoid average of the right-hand side, so it is `O(Δt²)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::SimState;
use crate::spectral::norm::{weighted_inner, weighted_l2_squared};
use crate::spectral::{
    band_limited_values, dealiased_from_values, gevrey_weights, gradient, GradientKind, SpectralField,
    SpectralGrid, VectorField,
};

/// `u·∇f`, formed on the grid from band-limited values and dealiased.
fn advect(grid: &Arc<SpectralGrid>, u: &[Vec<f64>; 2], f: &SpectralField) -> SpectralField {
    let g = gradient(f, GradientKind::Grad);
    let gx = band_limited_values(&g.x);
    let gy = band_limited_values(&g.y);
    let vals: Vec<f64> = (0..gx.len()).map(|i| u[0][i] * gx[i] + u[1][i] * gy[i]).collect();
    dealiased_from_values(grid, &vals)
}

/// `∇·(f∇Φ)` from grid values.
fn drift_divergence(grid: &Arc<SpectralGrid>, f: &SpectralField, grad_phi: &[Vec<f64>; 2]) -> SpectralField {
    let fv = band_limited_values(f);
    let fx: Vec<f64> = fv.iter().zip(&grad_phi[0]).map(|(a, b)| a * b).collect();
    let fy: Vec<f64> = fv.iter().zip(&grad_phi[1]).map(|(a, b)| a * b).collect();
    VectorField {
        x: dealiased_from_values(grid, &fx),
        y: dealiased_from_values(grid, &fy),
    }
    .divergence()
}

/// Gevrey energy `E` at radius `tau`.
pub fn gevrey_energy(state: &SimState, tau: f64, m: f64) -> Result<f64> {
    let grid = state.grid();
    let wc = gevrey_weights(grid, tau, m)?;
    let mut e: f64 = state
        .species()
        .iter()
        .map(|s| weighted_l2_squared(&s.concentration, &wc))
        .sum();
    if let Some(w) = state.vorticity() {
        e += weighted_l2_squared(w, &gevrey_weights(grid, tau, m - 1.0)?);
    }
    Ok(0.5 * e)
}

/// Right-hand side of the energy identity at one state.
pub fn gevrey_energy_rate(state: &SimState, tau: f64, tau_rate: f64, m: f64) -> Result<f64> {
    let grid = state.grid();
    let derived = state.derived()?;
    let u = derived.velocity_values();
    let grad_phi = derived.grad_phi_values();
    let w_m = gevrey_weights(grid, tau, m)?;
    let w_m1 = gevrey_weights(grid, tau, m + 1.0)?;
    let w_mh = gevrey_weights(grid, tau, m + 0.5)?;
    let mut lap_phi = derived.rho.without_mean();
    lap_phi.scale(-1.0);

    let mut rate = 0.0;
    for s in state.species() {
        let c = &s.concentration;
        let mean = c.mean();
        let fluct = c.without_mean();
        let dz = s.diffusivity * s.valence;
        rate -= s.diffusivity * weighted_l2_squared(c, &w_m1);
        rate += tau_rate * weighted_l2_squared(c, &w_mh);
        rate -= weighted_inner(&advect(grid, u, &fluct), &fluct, &w_m);
        rate += dz * weighted_inner(&drift_divergence(grid, &fluct, grad_phi), &fluct, &w_m);
        rate += dz * mean * weighted_inner(&lap_phi, &fluct, &w_m);
    }
    if let Some(omega) = state.vorticity() {
        let w_w = gevrey_weights(grid, tau, m - 1.0)?;
        let w_wh = gevrey_weights(grid, tau, m - 0.5)?;
        rate += tau_rate * weighted_l2_squared(omega, &w_wh);
        rate -= weighted_inner(&advect(grid, u, omega), omega, &w_w);
        rate -= weighted_inner(&derived.rho_grad_phi.curl(), omega, &w_w);
    }
    Ok(rate)
}

/// Normalised residual of the energy identity across one step with fixed `τ`.
pub fn gevrey_balance_residual(before: &SimState, after: &SimState, tau: f64, m: f64) -> Result<f64> {
    gevrey_balance_residual_with_rate(before, after, tau, 0.0, m)
}

/// As [`gevrey_balance_residual`] along `τ(t) = tau + tau_rate (t − t_before)`.
pub fn gevrey_balance_residual_with_rate(
    before: &SimState,
    after: &SimState,
    tau: f64,
    tau_rate: f64,
    m: f64,
) -> Result<f64> {
    let dt = after.time() - before.time();
    if !(dt > 0.0) {
        return Err(Error::Data(format!(
            "balance residual needs increasing times, got {} then {}",
            before.time(),
            after.time()
        )));
    }
    if !Arc::ptr_eq(before.grid(), after.grid()) && before.grid().n() != after.grid().n() {
        return Err(Error::Domain("states live on different grids".into()));
    }
    let tau_after = tau + tau_rate * dt;
    if tau < 0.0 || tau_after < 0.0 {
        return Err(Error::Domain(format!("tau must stay >= 0 over the step, got {tau} -> {tau_after}")));
    }
    let lhs = (gevrey_energy(after, tau_after, m)? - gevrey_energy(before, tau, m)?) / dt;
    let rhs = 0.5
        * (gevrey_energy_rate(before, tau, tau_rate, m)? + gevrey_energy_rate(after, tau_after, tau_rate, m)?);
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok((lhs - rhs).abs() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::IonSpecies;

    #[test]
    fn pure_diffusion_rate() {
        // c = 1 + cos x₁ with z = 0: dE/dt = −D ‖e^{τΛ}Λ^{m+1}c‖² = −D e^{2τ} 2π²
        let g = SpectralGrid::new(16).unwrap();
        let c = SpectralField::from_fn(&g, |x, _| 1.0 + x.cos());
        let d = 0.7;
        let state = SimState::npd(vec![IonSpecies::new(0.0, d, c).unwrap()]).unwrap();
        let tau = 0.2;
        let rate = gevrey_energy_rate(&state, tau, 0.0, 2.0).unwrap();
        let expect = -d * (2.0 * tau).exp() * 2.0 * std::f64::consts::PI.powi(2);
        assert!((rate - expect).abs() < 1e-12, "{rate} vs {expect}");
    }

    #[test]
    fn zero_state_has_zero_residual() {
        let g = SpectralGrid::new(16).unwrap();
        let a = SimState::npe(
            vec![IonSpecies::new(1.0, 1.0, SpectralField::constant(&g, 1.0)).unwrap()],
            SpectralField::zeros(&g),
        )
        .unwrap();
        let mut b = a.clone();
        b.set_time(0.1);
        assert_eq!(gevrey_balance_residual(&a, &b, 0.1, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_reversed_times() {
        let g = SpectralGrid::new(16).unwrap();
        let a = SimState::npd(vec![IonSpecies::new(1.0, 1.0, SpectralField::constant(&g, 1.0)).unwrap()])
            .unwrap();
        assert!(gevrey_balance_residual(&a, &a, 0.1, 3.0).is_err());
    }
}

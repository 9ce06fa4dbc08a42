use std::collections::BTreeMap;

use crate::error::Result;
use crate::models::{electric_force_mean, velocity_from_vorticity, Derived, SimState};
use crate::spectral::norm::{l2, l2_squared, l4_values, linf_values, sobolev};
use crate::spectral::{SpectralField, TORUS_AREA};

/// Norms recorded for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSet {
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub h1: f64,
    pub h2: f64,
    /// `H^m` with the tracker's `norm_order`.
    pub hm: f64,
}

impl NormSet {
    pub fn of(f: &SpectralField, m: f64) -> Self {
        let values = f.to_physical();
        Self {
            l2: l2(f),
            l4: l4_values(&values),
            linf: linf_values(&values),
            h1: sobolev(f, 1.0),
            h2: sobolev(f, 2.0),
            hm: sobolev(f, m),
        }
    }

    pub fn all_nonnegative(&self) -> bool {
        [self.l2, self.l4, self.linf, self.h1, self.h2, self.hm]
            .iter()
            .all(|v| *v >= 0.0)
    }
}

/// Conserved and bounded quantities at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub time: f64,
    pub mass_per_species: Vec<f64>,
    /// Zero-mode coefficients of the velocity.
    pub mean_velocity: [f64; 2],
    /// `∫ ρ∇Φ dx`.
    pub force_mean: [f64; 2],
    pub min_concentration_per_species: Vec<f64>,
    /// Keys `c0, c1, …` for species and `omega` for the fluid vorticity.
    pub norms: BTreeMap<String, NormSet>,
    /// `Σᵢ Dᵢ ∫₀ᵗ ‖∇cᵢ‖²_{L²} ds`, trapezoid rule over reported times.
    pub dissipation: f64,
    /// `‖ρ‖²_{L²}`, the natural scale for `force_mean`.
    pub rho_l2_squared: f64,
    pub norm_order: f64,
}

impl InvariantReport {
    pub fn species_key(i: usize) -> String {
        format!("c{i}")
    }
}

/// Dissipation rate `Σᵢ Dᵢ ‖∇cᵢ‖²_{L²}`.
pub fn dissipation_rate(state: &SimState) -> f64 {
    let grid = state.grid();
    state
        .species()
        .iter()
        .map(|s| {
            let sum: f64 = s
                .concentration
                .coeffs()
                .iter()
                .zip(grid.kmag2())
                .map(|(c, k2)| k2 * c.norm_sqr())
                .sum();
            s.diffusivity * TORUS_AREA * sum
        })
        .sum()
}

fn fluid_vorticity(state: &SimState, derived: &Derived) -> SpectralField {
    match state.vorticity() {
        Some(w) => w.clone(),
        None => derived.velocity.curl(),
    }
}

/// Builds [`InvariantReport`]s along a run, carrying the dissipation integral.
#[derive(Debug, Clone)]
pub struct InvariantTracker {
    norm_order: f64,
    last: Option<(f64, f64)>,
    accumulated: f64,
}

impl InvariantTracker {
    pub fn new(norm_order: f64) -> Self {
        Self {
            norm_order,
            last: None,
            accumulated: 0.0,
        }
    }

    pub fn accumulated(&self) -> f64 {
        self.accumulated
    }

    pub fn report(&mut self, state: &SimState) -> Result<InvariantReport> {
        let derived = state.derived()?;
        let rate = dissipation_rate(state);
        if let Some((t0, r0)) = self.last {
            let dt = state.time() - t0;
            self.accumulated += 0.5 * dt * (r0 + rate);
        }
        self.last = Some((state.time(), rate));

        let m = self.norm_order;
        let mut norms = BTreeMap::new();
        for (i, s) in state.species().iter().enumerate() {
            norms.insert(InvariantReport::species_key(i), NormSet::of(&s.concentration, m));
        }
        norms.insert("omega".to_string(), NormSet::of(&fluid_vorticity(state, derived), m));

        Ok(InvariantReport {
            time: state.time(),
            mass_per_species: state.species().iter().map(|s| s.mass()).collect(),
            mean_velocity: derived.velocity.mean(),
            force_mean: electric_force_mean(&derived.rho),
            min_concentration_per_species: state.min_concentrations(),
            norms,
            dissipation: self.accumulated,
            rho_l2_squared: l2_squared(&derived.rho),
            norm_order: m,
        })
    }
}

/// One-shot report with no dissipation history.
pub fn invariant_report(state: &SimState, norm_order: f64) -> Result<InvariantReport> {
    InvariantTracker::new(norm_order).report(state)
}

/// Vorticity of whatever velocity the state carries (Euler or Darcy).
pub fn vorticity_of(state: &SimState) -> Result<SpectralField> {
    Ok(fluid_vorticity(state, state.derived()?))
}

/// Velocity implied by a stored vorticity (helper for snapshot tooling).
pub fn velocity_of_vorticity(omega: &SpectralField) -> [Vec<f64>; 2] {
    let u = velocity_from_vorticity(omega);
    [u.x.to_physical(), u.y.to_physical()]
}

//! Nernst–Planck–Euler and Nernst–Planck–Darcy right-hand sides.
//!
//! Concentrations obey `∂t cᵢ + u·∇cᵢ − DᵢΔcᵢ = Dᵢzᵢ∇·(cᵢ∇Φ)` with
//! `−ΔΦ = ρ = Σ zᵢcᵢ`. The fluid is either inviscid Euler, carried as the
//! vorticity `ω = ∇⊥·u` with `∂tω + u·∇ω = −∇⊥·(ρ∇Φ)`, or Darcy flow
//! `u = −P(ρ∇Φ)`. Pressure never appears; the Leray projection removes it.
//!
//! All quantities are nondimensional.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{
    band_limited_values, dealiased_from_values, gradient, leray_project, solve_poisson, GradientKind, SpectralField,
    SpectralGrid, VectorField, TORUS_AREA,
};

/// Default tolerance below zero tolerated for concentrations on the grid.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub valence: f64,
    pub diffusivity: f64,
    pub concentration: SpectralField,
}

impl IonSpecies {
    pub fn new(valence: f64, diffusivity: f64, concentration: SpectralField) -> Result<Self> {
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::Config(format!(
                "diffusivity must be positive and finite, got {diffusivity}"
            )));
        }
        if !valence.is_finite() {
            return Err(Error::Config(format!("valence must be finite, got {valence}")));
        }
        Ok(Self {
            valence,
            diffusivity,
            concentration,
        })
    }

    /// Grid minimum of the concentration.
    pub fn min_value(&self) -> f64 {
        self.concentration
            .to_physical()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// `∫ cᵢ dx`.
    pub fn mass(&self) -> f64 {
        TORUS_AREA * self.concentration.mean()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Nernst–Planck–Euler
    Npe,
    /// Nernst–Planck–Darcy
    Npd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fluid {
    Euler { vorticity: SpectralField },
    Darcy,
}

impl Fluid {
    pub fn model(&self) -> Model {
        match self {
            Fluid::Euler { .. } => Model::Npe,
            Fluid::Darcy => Model::Npd,
        }
    }
}

/// Static coefficients of a run: model kind plus `(zᵢ, Dᵢ)` per species.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub model: Model,
    pub valences: Vec<f64>,
    pub diffusivities: Vec<f64>,
}

impl ModelParams {
    pub fn species_count(&self) -> usize {
        self.valences.len()
    }

    pub fn min_diffusivity(&self) -> f64 {
        self.diffusivities.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Prognostic fields as a flat list: concentrations first, then the
/// vorticity when the fluid is Euler.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub components: Vec<SpectralField>,
}

impl StateVector {
    pub fn concentrations<'a>(&'a self, params: &ModelParams) -> &'a [SpectralField] {
        &self.components[..params.species_count()]
    }

    pub fn vorticity(&self, params: &ModelParams) -> Option<&SpectralField> {
        match params.model {
            Model::Npe => self.components.get(params.species_count()),
            Model::Npd => None,
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(alpha, b);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.components.iter().all(SpectralField::all_finite)
    }
}

/// Quantities slaved to the prognostic fields: `ρ`, `Φ`, `u`, and the grid
/// values the tendencies reuse.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub rho: SpectralField,
    pub phi: SpectralField,
    pub velocity: VectorField,
    /// Dealiased `ρ∇Φ`.
    pub rho_grad_phi: VectorField,
    velocity_values: [Vec<f64>; 2],
    grad_phi_values: [Vec<f64>; 2],
}

impl Derived {
    pub fn velocity_values(&self) -> &[Vec<f64>; 2] {
        &self.velocity_values
    }

    pub fn grad_phi_values(&self) -> &[Vec<f64>; 2] {
        &self.grad_phi_values
    }
}

/// Full simulation state. Derived fields are valid only while
/// [`SimState::is_fresh`] is true; any mutation of the prognostic fields
/// clears the flag until [`SimState::refresh`] runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    time: f64,
    grid: Arc<SpectralGrid>,
    species: Vec<IonSpecies>,
    fluid: Fluid,
    derived: Option<Derived>,
}

impl SimState {
    pub fn new(species: Vec<IonSpecies>, fluid: Fluid, time: f64) -> Result<Self> {
        let first = species
            .first()
            .ok_or_else(|| Error::Config("at least one ion species is required".into()))?;
        let grid = Arc::clone(first.concentration.grid());
        for (i, s) in species.iter().enumerate() {
            if s.concentration.grid().n() != grid.n() {
                return Err(Error::Config(format!(
                    "species[{i}] lives on n = {}, expected n = {}",
                    s.concentration.grid().n(),
                    grid.n()
                )));
            }
        }
        if let Fluid::Euler { vorticity } = &fluid {
            if vorticity.grid().n() != grid.n() {
                return Err(Error::Config("vorticity grid differs from species grid".into()));
            }
            if !vorticity.is_mean_zero() {
                return Err(Error::Domain(format!(
                    "vorticity must be mean-zero, mean = {}",
                    vorticity.mean()
                )));
            }
        }
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::Config(format!("time must be finite and >= 0, got {time}")));
        }
        let mut state = Self {
            time,
            grid,
            species,
            fluid,
            derived: None,
        };
        state.refresh();
        Ok(state)
    }

    pub fn npd(species: Vec<IonSpecies>) -> Result<Self> {
        Self::new(species, Fluid::Darcy, 0.0)
    }

    pub fn npe(species: Vec<IonSpecies>, vorticity: SpectralField) -> Result<Self> {
        Self::new(species, Fluid::Euler { vorticity }, 0.0)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn model(&self) -> Model {
        self.fluid.model()
    }

    pub fn species(&self) -> &[IonSpecies] {
        &self.species
    }

    /// Mutable access to the species; marks derived fields stale.
    pub fn species_mut(&mut self) -> &mut [IonSpecies] {
        self.derived = None;
        &mut self.species
    }

    pub fn fluid(&self) -> &Fluid {
        &self.fluid
    }

    /// Mutable access to the fluid; marks derived fields stale.
    pub fn fluid_mut(&mut self) -> &mut Fluid {
        self.derived = None;
        &mut self.fluid
    }

    pub fn vorticity(&self) -> Option<&SpectralField> {
        match &self.fluid {
            Fluid::Euler { vorticity } => Some(vorticity),
            Fluid::Darcy => None,
        }
    }

    pub fn is_fresh(&self) -> bool {
        self.derived.is_some()
    }

    pub fn refresh(&mut self) {
        let params = self.params();
        let derived = derive(&params, &self.state_vector());
        self.derived = Some(derived);
    }

    pub fn derived(&self) -> Result<&Derived> {
        self.derived
            .as_ref()
            .ok_or_else(|| Error::Usage("derived fields are stale; call refresh()".into()))
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            model: self.model(),
            valences: self.species.iter().map(|s| s.valence).collect(),
            diffusivities: self.species.iter().map(|s| s.diffusivity).collect(),
        }
    }

    pub fn state_vector(&self) -> StateVector {
        let mut components: Vec<SpectralField> =
            self.species.iter().map(|s| s.concentration.clone()).collect();
        if let Fluid::Euler { vorticity } = &self.fluid {
            components.push(vorticity.clone());
        }
        StateVector { components }
    }

    /// New state sharing this one's coefficients `(zᵢ, Dᵢ)` with the given
    /// fields at time `time`; derived fields are rebuilt.
    pub fn with_state_vector(&self, fields: StateVector, time: f64) -> Result<Self> {
        let expected = self.species.len() + usize::from(self.vorticity().is_some());
        if fields.components.len() != expected {
            return Err(Error::Config(format!(
                "state vector has {} components, expected {expected}",
                fields.components.len()
            )));
        }
        let mut comps = fields.components.into_iter();
        let species = self
            .species
            .iter()
            .map(|s| IonSpecies {
                valence: s.valence,
                diffusivity: s.diffusivity,
                concentration: comps.next().expect("length checked"),
            })
            .collect();
        let fluid = match self.fluid {
            Fluid::Euler { .. } => Fluid::Euler {
                vorticity: comps.next().expect("length checked"),
            },
            Fluid::Darcy => Fluid::Darcy,
        };
        let mut state = Self {
            time,
            grid: Arc::clone(&self.grid),
            species,
            fluid,
            derived: None,
        };
        state.refresh();
        Ok(state)
    }

    /// Smallest grid value over all concentrations, per species.
    pub fn min_concentrations(&self) -> Vec<f64> {
        self.species.iter().map(IonSpecies::min_value).collect()
    }

    /// Checks `min cᵢ ≥ −tol` for every species.
    pub fn check_positivity(&self, tol: f64) -> Result<()> {
        for (i, m) in self.min_concentrations().into_iter().enumerate() {
            if m < -tol {
                return Err(Error::Domain(format!(
                    "species[{i}] has grid minimum {m:e} below -{tol:e}"
                )));
            }
        }
        Ok(())
    }
}

/// `ρ = Σ zᵢcᵢ`.
pub fn charge_density(species: &[IonSpecies]) -> Result<SpectralField> {
    let first = species
        .first()
        .ok_or_else(|| Error::Config("charge density of an empty species list".into()))?;
    let mut rho = SpectralField::zeros(first.concentration.grid());
    for (i, s) in species.iter().enumerate() {
        if !rho.same_grid(&s.concentration) {
            return Err(Error::Config(format!("species[{i}] is on a different grid")));
        }
        rho.axpy(s.valence, &s.concentration);
    }
    Ok(rho)
}

fn charge_density_of(valences: &[f64], concentrations: &[SpectralField]) -> SpectralField {
    let mut rho = SpectralField::zeros(concentrations[0].grid());
    for (z, c) in valences.iter().zip(concentrations) {
        rho.axpy(*z, c);
    }
    rho
}

/// Biot–Savart: `u = ∇⊥ψ` with `Δψ = ω`.
pub fn velocity_from_vorticity(omega: &SpectralField) -> VectorField {
    let psi = solve_poisson(omega).scaled(-1.0);
    gradient(&psi, GradientKind::Perp)
}

fn product_values(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn grad_values(f: &SpectralField) -> [Vec<f64>; 2] {
    let g = gradient(f, GradientKind::Grad);
    [band_limited_values(&g.x), band_limited_values(&g.y)]
}

/// Dealiased `ρ∇Φ` from grid values.
fn rho_grad_phi(grid: &Arc<SpectralGrid>, rho_values: &[f64], grad_phi: &[Vec<f64>; 2]) -> VectorField {
    VectorField {
        x: dealiased_from_values(grid, &product_values(rho_values, &grad_phi[0])),
        y: dealiased_from_values(grid, &product_values(rho_values, &grad_phi[1])),
    }
}

/// Darcy velocity `u = −P(ρ∇Φ)`.
pub fn darcy_velocity(rho: &SpectralField, phi: &SpectralField) -> Result<VectorField> {
    if !rho.same_grid(phi) {
        return Err(Error::Config("rho and phi are on different grids".into()));
    }
    let rho_values = band_limited_values(rho);
    let force = rho_grad_phi(rho.grid(), &rho_values, &grad_values(phi));
    let mut u = leray_project(&force);
    u.scale(-1.0);
    Ok(u)
}

/// `∫ ρ∇Φ dx` by grid quadrature, with `Φ` solved from `ρ`.
pub fn electric_force_mean(rho: &SpectralField) -> [f64; 2] {
    let phi = solve_poisson(rho);
    let rho_values = rho.to_physical();
    let grad = grad_values(&phi);
    let npts = rho_values.len() as f64;
    let mut out = [0.0; 2];
    for (d, g) in grad.iter().enumerate() {
        out[d] = TORUS_AREA * rho_values.iter().zip(g).map(|(r, p)| r * p).sum::<f64>() / npts;
    }
    out
}

/// Builds `ρ`, `Φ`, `u` and grid caches for one set of prognostic fields.
pub fn derive(params: &ModelParams, fields: &StateVector) -> Derived {
    let concentrations = fields.concentrations(params);
    let grid = Arc::clone(concentrations[0].grid());
    let rho = charge_density_of(&params.valences, concentrations);
    let phi = solve_poisson(&rho);
    let grad_phi_values = grad_values(&phi);
    let rho_values = band_limited_values(&rho);
    let rho_grad_phi = rho_grad_phi(&grid, &rho_values, &grad_phi_values);
    let velocity = match fields.vorticity(params) {
        Some(omega) => velocity_from_vorticity(omega),
        None => {
            let mut u = leray_project(&rho_grad_phi);
            u.scale(-1.0);
            u
        }
    };
    let velocity_values = [
        band_limited_values(&velocity.x),
        band_limited_values(&velocity.y),
    ];
    Derived {
        rho,
        phi,
        velocity,
        rho_grad_phi,
        velocity_values,
        grad_phi_values,
    }
}

/// `∇·(f v)` with the product formed on the grid and dealiased.
fn flux_divergence(grid: &Arc<SpectralGrid>, f_values: &[f64], v: [&[f64]; 2]) -> SpectralField {
    let flux = VectorField {
        x: dealiased_from_values(grid, &product_values(f_values, v[0])),
        y: dealiased_from_values(grid, &product_values(f_values, v[1])),
    };
    flux.divergence()
}

/// `−∇·(uω)`, the unforced Euler vorticity tendency given grid velocity values.
pub fn vorticity_advection(omega: &SpectralField, velocity_values: &[Vec<f64>; 2]) -> SpectralField {
    let omega_values = band_limited_values(omega);
    let mut t = flux_divergence(
        omega.grid(),
        &omega_values,
        [&velocity_values[0], &velocity_values[1]],
    );
    t.scale(-1.0);
    t
}

/// Unforced 2D Euler tendency `−u·∇ω` with `u` recovered from `ω`.
pub fn euler_tendency(omega: &SpectralField) -> SpectralField {
    let u = velocity_from_vorticity(omega);
    vorticity_advection(omega, &[band_limited_values(&u.x), band_limited_values(&u.y)])
}

/// Everything except the diffusion `DᵢΔcᵢ`: the part the integrating factor
/// does not absorb.
pub fn nonlinear_tendency(params: &ModelParams, fields: &StateVector, derived: &Derived) -> StateVector {
    let grid = Arc::clone(fields.components[0].grid());
    let [ux, uy] = derived.velocity_values();
    let [px, py] = derived.grad_phi_values();
    let mut out = Vec::with_capacity(fields.components.len());
    for ((z, d), c) in params
        .valences
        .iter()
        .zip(&params.diffusivities)
        .zip(fields.concentrations(params))
    {
        // −∇·(u c) + D z ∇·(c ∇Φ) = ∇·(c w), w = −u + D z ∇Φ
        let dz = d * z;
        let wx: Vec<f64> = ux.iter().zip(px).map(|(u, p)| -u + dz * p).collect();
        let wy: Vec<f64> = uy.iter().zip(py).map(|(u, p)| -u + dz * p).collect();
        out.push(flux_divergence(&grid, &band_limited_values(c), [&wx, &wy]));
    }
    if let Some(omega) = fields.vorticity(params) {
        let mut t = vorticity_advection(omega, derived.velocity_values());
        // −∇⊥·(ρ∇Φ)
        t.axpy(-1.0, &derived.rho_grad_phi.curl());
        out.push(t);
    }
    StateVector { components: out }
}

/// Adds `DᵢΔcᵢ` to the concentration components of a nonlinear tendency.
fn add_diffusion(params: &ModelParams, fields: &StateVector, tendency: &mut StateVector) {
    for (i, d) in params.diffusivities.iter().enumerate() {
        let grid = Arc::clone(fields.components[i].grid());
        let mut lap = fields.components[i].clone();
        lap.apply_real_symbol(|j| -grid.kmag2()[j]);
        tendency.components[i].axpy(*d, &lap);
    }
}

/// Full right-hand side `∂t cᵢ` for every species.
pub fn np_tendency(state: &SimState) -> Result<Vec<SpectralField>> {
    let derived = state.derived()?;
    let params = state.params();
    let fields = state.state_vector();
    let mut t = nonlinear_tendency(&params, &fields, derived);
    add_diffusion(&params, &fields, &mut t);
    t.components.truncate(params.species_count());
    Ok(t.components)
}

/// `−u·∇ω − ∇⊥ρ·∇Φ` for an Euler state.
pub fn vorticity_tendency(state: &SimState) -> Result<SpectralField> {
    let omega = state
        .vorticity()
        .ok_or_else(|| Error::Usage("vorticity tendency requested on a Darcy state".into()))?;
    let derived = state.derived()?;
    let mut t = vorticity_advection(omega, derived.velocity_values());
    t.axpy(-1.0, &derived.rho_grad_phi.curl());
    Ok(t)
}

/// Full right-hand side of every prognostic component.
pub fn full_tendency(state: &SimState) -> Result<StateVector> {
    let derived = state.derived()?;
    let params = state.params();
    let fields = state.state_vector();
    let mut t = nonlinear_tendency(&params, &fields, derived);
    add_diffusion(&params, &fields, &mut t);
    Ok(t)
}

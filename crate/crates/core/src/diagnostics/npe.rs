//! Time-dependent lower bound on the NPE radius of analyticity.
//!
//! With `g(t) = exp(C ∫₀ᵗ B)` the bound reads
//!
//! ```text
//! A(t) = g(t) (√y(0) + C(1+τ₀) ∫₀ᵗ ‖Λ^{m−1}ω‖² g⁻¹ ds)
//! Ã(t) = A(t) + χ A(t)²
//! τ(t) = 1 / (g(t) (1/τ₀ + C ∫₀ᵗ (‖Λ^{m−1}ω‖ + Ã) g⁻¹ ds))
//! ```
//!
//! where `χ = 1` when ions are present. All integrals use the trapezoid rule
//! on the sample times, and every quantity at `t` depends only on samples up
//! to `t`, so the budget can be advanced during a run.

use crate::error::{Error, Result};
use crate::models::{Model, SimState};
use crate::spectral::norm::{linf_values, weighted_l2, weighted_l2_squared};
use crate::spectral::{band_limited_values, gevrey_weights, gradient, GradientKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeRadiusParams {
    pub tau0: f64,
    /// User constant `C`; the analysis leaves it unspecified.
    pub c: f64,
    /// Regularity index `m` of the Gevrey class.
    pub m: f64,
}

impl NpeRadiusParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::Config(format!("tau0 must be positive, got {}", self.tau0)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !self.m.is_finite() {
            return Err(Error::Config("m must be finite".into()));
        }
        Ok(())
    }
}

/// Scalars fed to the budget at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeSample {
    pub time: f64,
    /// `‖Λ^{m−1}ω‖_{L²}`.
    pub omega_norm: f64,
    /// `B(t)`.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeBudgetRow {
    pub time: f64,
    pub b: f64,
    /// `C ∫₀ᵗ B ds`, the log of `g`.
    pub log_g: f64,
    pub g: f64,
    pub a: f64,
    pub a_tilde: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy)]
struct Last {
    sample: NpeSample,
    inv_g: f64,
    a_tilde: f64,
}

/// Incremental evaluation of the NPE radius bound.
#[derive(Debug, Clone)]
pub struct NpeRadiusBudget {
    params: NpeRadiusParams,
    sqrt_y0: f64,
    charged: bool,
    int_b: f64,
    int_omega_sq: f64,
    int_growth: f64,
    last: Option<Last>,
    rows: Vec<NpeBudgetRow>,
}

impl NpeRadiusBudget {
    pub fn new(params: NpeRadiusParams, sqrt_y0: f64, charged: bool) -> Result<Self> {
        params.validate()?;
        if !(sqrt_y0 >= 0.0 && sqrt_y0.is_finite()) {
            return Err(Error::Data(format!("sqrt(y(0)) must be finite and >= 0, got {sqrt_y0}")));
        }
        Ok(Self {
            params,
            sqrt_y0,
            charged,
            int_b: 0.0,
            int_omega_sq: 0.0,
            int_growth: 0.0,
            last: None,
            rows: Vec::new(),
        })
    }

    pub fn params(&self) -> &NpeRadiusParams {
        &self.params
    }

    pub fn rows(&self) -> &[NpeBudgetRow] {
        &self.rows
    }

    pub fn push(&mut self, s: NpeSample) -> Result<NpeBudgetRow> {
        if !(s.time.is_finite() && s.omega_norm.is_finite() && s.b.is_finite()) {
            return Err(Error::Data(format!("non-finite budget sample at t = {}", s.time)));
        }
        let c = self.params.c;
        let tau0 = self.params.tau0;
        let inv_g = match self.last {
            None => 1.0,
            Some(last) => {
                let dt = s.time - last.sample.time;
                if !(dt > 0.0) {
                    return Err(Error::Data(format!(
                        "time grid is not strictly increasing: {} then {}",
                        last.sample.time, s.time
                    )));
                }
                self.int_b += 0.5 * dt * (last.sample.b + s.b);
                let inv_g = (-c * self.int_b).exp();
                self.int_omega_sq +=
                    0.5 * dt * (last.sample.omega_norm.powi(2) * last.inv_g + s.omega_norm.powi(2) * inv_g);
                inv_g
            }
        };
        let log_g = c * self.int_b;
        let g = log_g.exp();
        let a = g * (self.sqrt_y0 + c * (1.0 + tau0) * self.int_omega_sq);
        let a_tilde = if self.charged { a + a * a } else { a };
        if let Some(last) = self.last {
            let dt = s.time - last.sample.time;
            self.int_growth +=
                0.5 * dt * ((last.sample.omega_norm + last.a_tilde) * last.inv_g + (s.omega_norm + a_tilde) * inv_g);
        }
        let tau = 1.0 / (g * (1.0 / tau0 + c * self.int_growth));
        self.last = Some(Last {
            sample: s,
            inv_g,
            a_tilde,
        });
        let row = NpeBudgetRow {
            time: s.time,
            b: s.b,
            log_g,
            g,
            a,
            a_tilde,
            tau: if tau.is_finite() { tau } else { 0.0 },
        };
        self.rows.push(row);
        Ok(row)
    }
}

/// Batch form of [`NpeRadiusBudget`].
pub fn npe_radius_bound(
    params: NpeRadiusParams,
    sqrt_y0: f64,
    charged: bool,
    samples: &[NpeSample],
) -> Result<Vec<NpeBudgetRow>> {
    let mut budget = NpeRadiusBudget::new(params, sqrt_y0, charged)?;
    for s in samples {
        budget.push(*s)?;
    }
    Ok(budget.rows)
}

/// `‖∇u‖_{L∞}` on the grid, with the Frobenius norm pointwise.
pub fn velocity_gradient_linf(state: &SimState) -> Result<f64> {
    let u = &state.derived()?.velocity;
    let mut sq = vec![0.0; state.grid().len()];
    for comp in [&u.x, &u.y] {
        let g = gradient(comp, GradientKind::Grad);
        for d in [&g.x, &g.y] {
            for (s, v) in sq.iter_mut().zip(band_limited_values(d)) {
                *s += v * v;
            }
        }
    }
    Ok(linf_values(&sq).sqrt())
}

/// `√y` with `y = Σᵢ ‖e^{τΛ}Λ^m cᵢ‖² + ‖e^{τΛ}Λ^{m−1}ω‖²`.
pub fn npe_gevrey_energy_sqrt(state: &SimState, tau: f64, m: f64) -> Result<f64> {
    let grid = state.grid();
    let wc = gevrey_weights(grid, tau, m)?;
    let mut y: f64 = state
        .species()
        .iter()
        .map(|s| weighted_l2_squared(&s.concentration, &wc))
        .sum();
    if let Some(w) = state.vorticity() {
        y += weighted_l2_squared(w, &gevrey_weights(grid, tau, m - 1.0)?);
    }
    Ok(y.sqrt())
}

/// Budget inputs drawn from a run, starting at its initial state.
#[derive(Debug, Clone)]
pub struct NpeTracker {
    budget: NpeRadiusBudget,
    initial_mean_sq: f64,
}

impl NpeTracker {
    pub fn from_initial(initial: &SimState, params: NpeRadiusParams) -> Result<Self> {
        if initial.model() != Model::Npe {
            return Err(Error::Usage("NPE radius budget needs an Euler state".into()));
        }
        let sqrt_y0 = npe_gevrey_energy_sqrt(initial, params.tau0, params.m)?;
        let charged = initial.species().iter().any(|s| !s.concentration.is_zero());
        let initial_mean_sq = initial.species().iter().map(|s| s.concentration.mean().powi(2)).sum();
        Ok(Self {
            budget: NpeRadiusBudget::new(params, sqrt_y0, charged)?,
            initial_mean_sq,
        })
    }

    pub fn budget(&self) -> &NpeRadiusBudget {
        &self.budget
    }

    /// `B(t) = ‖Λ^{m−1}ρ‖ + ‖Λ^{m−1}ρ‖² + χ(‖Λ^{m−1}u‖² + 1) + ‖∇u‖_{L∞} + Σ|c̄ᵢ(0)|²`.
    pub fn b_term(&self, state: &SimState) -> Result<f64> {
        let derived = state.derived()?;
        let w = gevrey_weights(state.grid(), 0.0, self.budget.params.m - 1.0)?;
        let rho = weighted_l2(&derived.rho, &w);
        let chi = if self.budget.charged {
            weighted_l2_squared(&derived.velocity.x, &w) + weighted_l2_squared(&derived.velocity.y, &w) + 1.0
        } else {
            0.0
        };
        Ok(rho + rho * rho + chi + velocity_gradient_linf(state)? + self.initial_mean_sq)
    }

    pub fn sample(&self, state: &SimState) -> Result<NpeSample> {
        let omega = state
            .vorticity()
            .ok_or_else(|| Error::Usage("NPE radius budget needs an Euler state".into()))?;
        let w = gevrey_weights(state.grid(), 0.0, self.budget.params.m - 1.0)?;
        Ok(NpeSample {
            time: state.time(),
            omega_norm: weighted_l2(omega, &w),
            b: self.b_term(state)?,
        })
    }

    pub fn push(&mut self, state: &SimState) -> Result<NpeBudgetRow> {
        let s = self.sample(state)?;
        self.budget.push(s)
    }
}

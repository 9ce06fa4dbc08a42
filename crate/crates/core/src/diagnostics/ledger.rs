//! Gronwall bookkeeping: evaluates the a priori bounds along a computed
//! trajectory and records the margin between bound and observed quantity.
//!
//! NPD: `Σ‖Λ^m cᵢ(t)‖² ≤ e^{L(t)} Σ‖Λ^m cᵢ(0)‖²` with
//! `L(t) = C sup_{s≤t}‖∇ρ‖² Σ∫₀ᵗ‖Δcᵢ‖² + ∫₀ᵗ‖∇ρ‖² + Σ∫₀ᵗ‖cᵢ‖²_{L⁴}`.
//!
//! NPE: `√y(t) ≤ A(t)` at the radius `τ(t)` of [`super::npe`].

use crate::error::{Error, Result};
use crate::models::{Model, SimState};
use crate::spectral::norm::{l4_values, weighted_l2_squared};
use crate::spectral::{band_limited_values, gevrey_weights, TORUS_AREA};

use super::npe::{npe_gevrey_energy_sqrt, NpeRadiusParams, NpeTracker};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub time: f64,
    /// `L(t)` for NPD, `C∫₀ᵗB` for NPE.
    pub exponent: f64,
    pub observed: f64,
    pub bound: f64,
    /// `bound − observed`.
    pub margin: f64,
    /// NPE radius at this time; `None` for NPD.
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub model: Model,
    pub c: f64,
    pub m: f64,
    pub rows: Vec<LedgerRow>,
}

impl GronwallReport {
    pub fn negative_margins(&self) -> usize {
        self.rows.iter().filter(|r| r.margin < 0.0).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    /// Whether the exponent (hence the bound factor) never decreases.
    pub fn exponent_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].exponent >= w[0].exponent)
    }
}

#[derive(Debug, Clone, Copy)]
struct NpdSample {
    time: f64,
    grad_rho_sq: f64,
    lap_sum: f64,
    l4_sq_sum: f64,
}

fn npd_sample(state: &SimState) -> Result<NpdSample> {
    let grid = state.grid();
    let derived = state.derived()?;
    let grad_rho_sq = TORUS_AREA
        * derived
            .rho
            .coeffs()
            .iter()
            .zip(grid.kmag2())
            .map(|(c, k2)| k2 * c.norm_sqr())
            .sum::<f64>();
    let mut lap_sum = 0.0;
    let mut l4_sq_sum = 0.0;
    for s in state.species() {
        lap_sum += TORUS_AREA
            * s.concentration
                .coeffs()
                .iter()
                .zip(grid.kmag2())
                .map(|(c, k2)| k2 * k2 * c.norm_sqr())
                .sum::<f64>();
        l4_sq_sum += l4_values(&band_limited_values(&s.concentration)).powi(2);
    }
    Ok(NpdSample {
        time: state.time(),
        grad_rho_sq,
        lap_sum,
        l4_sq_sum,
    })
}

/// Incremental NPD ledger.
#[derive(Debug, Clone)]
pub struct NpdLedger {
    c: f64,
    m: f64,
    initial: Option<f64>,
    sup_grad_rho: f64,
    int_lap: f64,
    int_grad_rho: f64,
    int_l4: f64,
    last: Option<NpdSample>,
}

impl NpdLedger {
    pub fn new(c: f64, m: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {c}")));
        }
        Ok(Self {
            c,
            m,
            initial: None,
            sup_grad_rho: 0.0,
            int_lap: 0.0,
            int_grad_rho: 0.0,
            int_l4: 0.0,
            last: None,
        })
    }

    fn hm_sum(&self, state: &SimState) -> Result<f64> {
        let w = gevrey_weights(state.grid(), 0.0, self.m)?;
        Ok(state
            .species()
            .iter()
            .map(|s| weighted_l2_squared(&s.concentration, &w))
            .sum())
    }

    pub fn push(&mut self, state: &SimState) -> Result<LedgerRow> {
        let s = npd_sample(state)?;
        if let Some(last) = self.last {
            let dt = s.time - last.time;
            if !(dt > 0.0) {
                return Err(Error::Data(format!(
                    "time grid is not strictly increasing: {} then {}",
                    last.time, s.time
                )));
            }
            self.int_lap += 0.5 * dt * (last.lap_sum + s.lap_sum);
            self.int_grad_rho += 0.5 * dt * (last.grad_rho_sq + s.grad_rho_sq);
            self.int_l4 += 0.5 * dt * (last.l4_sq_sum + s.l4_sq_sum);
        }
        self.sup_grad_rho = self.sup_grad_rho.max(s.grad_rho_sq);
        self.last = Some(s);
        let observed = self.hm_sum(state)?;
        let initial = *self.initial.get_or_insert(observed);
        let exponent = self.c * self.sup_grad_rho * self.int_lap + self.int_grad_rho + self.int_l4;
        let bound = exponent.exp() * initial;
        Ok(LedgerRow {
            time: s.time,
            exponent,
            observed,
            bound,
            margin: bound - observed,
            tau: None,
        })
    }
}

/// Incremental NPE ledger.
#[derive(Debug, Clone)]
pub struct NpeLedger {
    tracker: NpeTracker,
    m: f64,
}

impl NpeLedger {
    pub fn new(initial: &SimState, params: NpeRadiusParams) -> Result<Self> {
        Ok(Self {
            tracker: NpeTracker::from_initial(initial, params)?,
            m: params.m,
        })
    }

    pub fn tracker(&self) -> &NpeTracker {
        &self.tracker
    }

    pub fn push(&mut self, state: &SimState) -> Result<LedgerRow> {
        let row = self.tracker.push(state)?;
        let observed = npe_gevrey_energy_sqrt(state, row.tau, self.m)?;
        Ok(LedgerRow {
            time: row.time,
            exponent: row.log_g,
            observed,
            bound: row.a,
            margin: row.a - observed,
            tau: Some(row.tau),
        })
    }
}

/// Ledger for whichever model the first pushed state belongs to.
#[derive(Debug, Clone)]
pub enum GronwallLedger {
    Npd(NpdLedger),
    Npe(NpeLedger),
}

impl GronwallLedger {
    /// `tau0` is used only for NPE.
    pub fn new(initial: &SimState, c: f64, m: f64, tau0: f64) -> Result<Self> {
        Ok(match initial.model() {
            Model::Npd => Self::Npd(NpdLedger::new(c, m)?),
            Model::Npe => Self::Npe(NpeLedger::new(initial, NpeRadiusParams { tau0, c, m })?),
        })
    }

    pub fn push(&mut self, state: &SimState) -> Result<LedgerRow> {
        match self {
            Self::Npd(l) => l.push(state),
            Self::Npe(l) => l.push(state),
        }
    }
}

/// Evaluates the ledger over a sequence of states ordered in time.
pub fn gronwall_ledger(states: &[SimState], c: f64, m: f64, tau0: f64) -> Result<GronwallReport> {
    let first = states
        .first()
        .ok_or_else(|| Error::Data("ledger needs at least one state".into()))?;
    let mut ledger = GronwallLedger::new(first, c, m, tau0)?;
    let rows = states.iter().map(|s| ledger.push(s)).collect::<Result<Vec<_>>>()?;
    Ok(GronwallReport {
        model: first.model(),
        c,
        m,
        rows,
    })
}

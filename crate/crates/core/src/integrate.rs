//! Integrating-factor Runge–Kutta time stepping.
//!
//! Diffusion `DᵢΔcᵢ` is diagonal in Fourier space and is integrated exactly
//! through the factor `e^{−Dᵢ|k|²h}`; everything else goes through explicit
//! Runge–Kutta stages (Lawson form). The Euler vorticity has no dissipation,
//! so its factor is one and its step is a plain explicit RK step.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{derive, euler_tendency, nonlinear_tendency, ModelParams, SimState, StateVector};
use crate::spectral::{band_limited_values, dealiased_from_values, SpectralField, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    IfRk2,
    IfRk4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::IfRk2 => 2,
            Scheme::IfRk4 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Fixed step, or the upper bound on the step when `adaptive` is set.
    pub dt: f64,
    pub adaptive: bool,
    pub cfl: f64,
    pub t_end: f64,
    pub positivity_clip: bool,
    pub positivity_tol: f64,
    /// Hooks fire every `cadence` steps (and always at the first and last state).
    pub cadence: usize,
    /// Keep a snapshot every this many steps; 0 keeps only the endpoints.
    pub snapshot_every: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::IfRk4,
            dt: 1e-2,
            adaptive: false,
            cfl: 0.5,
            t_end: 1.0,
            positivity_clip: false,
            positivity_tol: crate::models::DEFAULT_POSITIVITY_TOL,
            cadence: 1,
            snapshot_every: 0,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-mode factors `e^{−D|k|²h}`, cached by `(D, h)`.
#[derive(Debug, Default)]
struct FactorCache {
    factors: HashMap<(u64, u64), Arc<Vec<f64>>>,
}

impl FactorCache {
    fn get(&mut self, grid: &SpectralGrid, d: f64, h: f64) -> Arc<Vec<f64>> {
        if self.factors.len() > 64 {
            self.factors.clear();
        }
        let key = (d.to_bits(), h.to_bits());
        Arc::clone(self.factors.entry(key).or_insert_with(|| {
            Arc::new(grid.kmag2().iter().map(|k2| (-d * k2 * h).exp()).collect())
        }))
    }
}

/// Applies the per-component integrating factor over an interval `h`.
struct Propagator {
    factors: Vec<Option<Arc<Vec<f64>>>>,
}

impl Propagator {
    fn new(cache: &mut FactorCache, grid: &SpectralGrid, rates: &[f64], h: f64) -> Self {
        Self {
            factors: rates
                .iter()
                .map(|&d| (d != 0.0).then(|| cache.get(grid, d, h)))
                .collect(),
        }
    }

    fn apply(&self, v: &mut StateVector) {
        for (comp, factor) in v.components.iter_mut().zip(&self.factors) {
            if let Some(f) = factor {
                for (c, e) in comp.coeffs_mut().iter_mut().zip(f.iter()) {
                    *c *= *e;
                }
            }
        }
    }

    fn applied(&self, v: &StateVector) -> StateVector {
        let mut out = v.clone();
        self.apply(&mut out);
        out
    }
}

/// One Lawson integrating-factor RK step of `∂t v = −Lv + N(v)`, where `L`
/// is diagonal with per-component rates `rates[j]·|k|²`.
fn if_rk_step(
    cache: &mut FactorCache,
    grid: &SpectralGrid,
    rates: &[f64],
    scheme: Scheme,
    h: f64,
    v: &StateVector,
    rhs: &mut dyn FnMut(&StateVector) -> StateVector,
) -> StateVector {
    match scheme {
        Scheme::IfRk2 => {
            let full = Propagator::new(cache, grid, rates, h);
            let a = rhs(v);
            let mut stage = v.clone();
            stage.axpy(h, &a);
            full.apply(&mut stage);
            let b = rhs(&stage);
            let mut out = v.clone();
            out.axpy(0.5 * h, &a);
            full.apply(&mut out);
            out.axpy(0.5 * h, &b);
            out
        }
        Scheme::IfRk4 => {
            let half = Propagator::new(cache, grid, rates, 0.5 * h);
            let full = Propagator::new(cache, grid, rates, h);
            let a = rhs(v);
            let ev = half.applied(v);

            let mut s2 = v.clone();
            s2.axpy(0.5 * h, &a);
            half.apply(&mut s2);
            let b = rhs(&s2);

            let mut s3 = ev.clone();
            s3.axpy(0.5 * h, &b);
            let c = rhs(&s3);

            let mut s4 = half.applied(&ev);
            s4.axpy(h, &half.applied(&c));
            let d = rhs(&s4);

            // e^{-Lh}(v + h/6 a) + h/3 e^{-Lh/2}(b + c) + h/6 d
            let mut out = v.clone();
            out.axpy(h / 6.0, &a);
            full.apply(&mut out);
            let mut bc = b;
            bc.axpy(1.0, &c);
            half.apply(&mut bc);
            out.axpy(h / 3.0, &bc);
            out.axpy(h / 6.0, &d);
            out
        }
    }
}

fn decay_rates(params: &ModelParams, components: usize) -> Vec<f64> {
    let mut rates = params.diffusivities.clone();
    rates.resize(components, 0.0);
    rates
}

/// Advances states with a reusable integrating-factor cache.
#[derive(Debug, Default)]
pub struct Stepper {
    cache: FactorCache,
    steps_taken: usize,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances `state` by exactly `h`.
    pub fn step_by(&mut self, state: &SimState, cfg: &StepperConfig, h: f64) -> Result<SimState> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("step size must be positive and finite, got {h}")));
        }
        let params = state.params();
        let v = state.state_vector();
        let rates = decay_rates(&params, v.components.len());
        let mut rhs = |x: &StateVector| {
            let derived = derive(&params, x);
            nonlinear_tendency(&params, x, &derived)
        };
        let next = if_rk_step(&mut self.cache, state.grid(), &rates, cfg.scheme, h, &v, &mut rhs);
        self.steps_taken += 1;
        if !next.all_finite() {
            return Err(Error::Divergence {
                step: self.steps_taken,
                time: state.time() + h,
                detail: "non-finite Fourier coefficient".into(),
            });
        }
        let mut out = state.with_state_vector(next, state.time() + h)?;
        if cfg.positivity_clip {
            clip_positivity(&mut out, cfg.positivity_tol);
        }
        Ok(out)
    }

    /// Advances `state` by the step [`adaptive_dt`] selects (or `cfg.dt`).
    pub fn step(&mut self, state: &SimState, cfg: &StepperConfig) -> Result<SimState> {
        let h = if cfg.adaptive {
            adaptive_dt(state, cfg)?
        } else {
            cfg.dt
        };
        self.step_by(state, cfg, h)
    }
}

/// One step with a fresh stepper.
pub fn step(state: &SimState, cfg: &StepperConfig) -> Result<SimState> {
    Stepper::new().step(state, cfg)
}

/// One step of unforced 2D Euler in vorticity form, sharing the vorticity
/// core of the coupled model but with no charge terms on the call path.
pub fn step_euler(omega: &SpectralField, scheme: Scheme, h: f64) -> SpectralField {
    let mut cache = FactorCache::default();
    let v = StateVector {
        components: vec![omega.clone()],
    };
    let mut rhs = |x: &StateVector| StateVector {
        components: vec![euler_tendency(&x.components[0])],
    };
    let mut out = if_rk_step(&mut cache, omega.grid(), &[0.0], scheme, h, &v, &mut rhs);
    out.components.pop().expect("one component")
}

/// Clamps grid negatives of each concentration to zero when they lie above
/// `−tol`, then rescales to restore the species mass.
fn clip_positivity(state: &mut SimState, tol: f64) {
    let mut changed = false;
    let grid = Arc::clone(state.grid());
    for s in state.species_mut() {
        let mut values = band_limited_values(&s.concentration);
        if values.iter().all(|&v| v >= 0.0) {
            continue;
        }
        let mass_before = s.concentration.mean();
        for v in values.iter_mut() {
            if *v < 0.0 && *v >= -tol {
                *v = 0.0;
            }
        }
        let mut clipped = dealiased_from_values(&grid, &values);
        let mass_after = clipped.mean();
        if mass_after != 0.0 {
            clipped.scale(mass_before / mass_after);
        }
        s.concentration = clipped;
        changed = true;
    }
    if changed {
        state.refresh();
    }
}

/// CFL-limited step `cfl · h_grid / v_max`, capped by `cfg.dt`.
///
/// `v_max` is the largest grid speed among the fluid velocity `|u|` and the
/// electromigration velocities `|Dᵢzᵢ∇Φ|`. When both vanish, `cfg.dt` is returned.
pub fn adaptive_dt(state: &SimState, cfg: &StepperConfig) -> Result<f64> {
    let derived = state.derived()?;
    let [ux, uy] = derived.velocity_values();
    let umax = ux
        .iter()
        .zip(uy)
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max);
    let [px, py] = derived.grad_phi_values();
    let gmax = px
        .iter()
        .zip(py)
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max);
    let drift = state
        .species()
        .iter()
        .map(|s| (s.diffusivity * s.valence).abs())
        .fold(0.0, f64::max)
        * gmax;
    let vmax = umax.max(drift);
    if vmax == 0.0 {
        return Ok(cfg.dt);
    }
    Ok((cfg.cfl * state.grid().spacing() / vmax).min(cfg.dt))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    Diverged { step: usize, time: f64, detail: String },
}

/// Result of [`run`]: step times plus retained snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Time after each step, starting with the initial time.
    pub times: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub snapshots: Vec<SimState>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.step_sizes.len()
    }

    pub fn final_state(&self) -> &SimState {
        self.snapshots.last().expect("trajectory holds the initial snapshot")
    }

    pub fn diverged(&self) -> bool {
        matches!(self.outcome, Outcome::Diverged { .. })
    }
}

/// Per-step callback; receives the step index and the state after that step.
pub type Hook<'a> = dyn FnMut(usize, &SimState) -> Result<()> + 'a;

/// Integrates from `initial.time()` to `cfg.t_end`.
///
/// Hooks fire on the initial state, every `cfg.cadence` steps and on the
/// final state. The last step is shortened to land exactly on `t_end`. A
/// divergence stops the run and is recorded in [`Trajectory::outcome`]
/// with everything up to the failing step preserved.
pub fn run(initial: &SimState, cfg: &StepperConfig, hooks: &mut [&mut Hook<'_>]) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.t_end < initial.time() {
        return Err(Error::Config(format!(
            "t_end = {} precedes initial time {}",
            cfg.t_end,
            initial.time()
        )));
    }
    let mut state = initial.clone();
    if !state.is_fresh() {
        state.refresh();
    }
    for hook in hooks.iter_mut() {
        hook(0, &state)?;
    }
    let mut traj = Trajectory {
        times: vec![state.time()],
        step_sizes: Vec::new(),
        snapshots: vec![state.clone()],
        outcome: Outcome::Completed,
    };
    let mut stepper = Stepper::new();
    let mut step = 0usize;
    // relative slack so round-off in accumulated time does not add a sliver step
    let slack = 1e-12 * cfg.t_end.abs().max(1.0);
    while state.time() < cfg.t_end - slack {
        let mut h = if cfg.adaptive {
            adaptive_dt(&state, cfg)?
        } else {
            cfg.dt
        };
        let last = state.time() + h >= cfg.t_end - slack;
        if last {
            h = cfg.t_end - state.time();
        }
        let next = match stepper.step_by(&state, cfg, h) {
            Ok(mut s) => {
                if last {
                    s.set_time(cfg.t_end);
                }
                s
            }
            Err(Error::Divergence { time, detail, .. }) => {
                traj.outcome = Outcome::Diverged {
                    step: step + 1,
                    time,
                    detail,
                };
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        step += 1;
        state = next;
        traj.times.push(state.time());
        traj.step_sizes.push(h);
        let at_end = state.time() >= cfg.t_end - slack;
        if step.is_multiple_of(cfg.cadence) || at_end {
            for hook in hooks.iter_mut() {
                hook(step, &state)?;
            }
        }
        if at_end || (cfg.snapshot_every > 0 && step.is_multiple_of(cfg.snapshot_every)) {
            traj.snapshots.push(state.clone());
        }
    }
    Ok(traj)
}

//! Pseudo-spectral simulation of Nernst–Planck ion transport coupled to 2D
//! Euler or Darcy flow on the periodic square `[0, 2π]²`, with diagnostics
//! for the radius of spatial analyticity.
//!
//! ```
//! use ionflow::{integrate, IonSpecies, SimState, SpectralField, SpectralGrid, StepperConfig};
//!
//! let grid = SpectralGrid::new(16).unwrap();
//! let c = SpectralField::from_fn(&grid, |x, _| 1.0 + 0.1 * x.cos());
//! let state = SimState::npd(vec![IonSpecies::new(0.0, 1.0, c).unwrap()]).unwrap();
//! let next = integrate::step(&state, &StepperConfig { dt: 0.01, ..Default::default() }).unwrap();
//! assert!((next.time() - 0.01).abs() < 1e-15);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod integrate;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use integrate::{run, Outcome, Scheme, Stepper, StepperConfig, Trajectory};
pub use models::{Fluid, IonSpecies, Model, ModelParams, SimState};
pub use spectral::{NormKind, SpectralField, SpectralGrid, VectorField};

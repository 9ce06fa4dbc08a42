//! Fixed benchmark inputs: smooth two-species states on a given grid.

use ionflow::{IonSpecies, SimState, SpectralField, SpectralGrid};

pub const SIZES: [usize; 3] = [32, 64, 128];

pub fn smooth_field(grid: &std::sync::Arc<SpectralGrid>, phase: f64) -> SpectralField {
    SpectralField::from_fn(grid, |x, y| 1.0 + 0.3 * (x + 2.0 * y + phase).cos() + 0.2 * (3.0 * x - y).sin())
}

pub fn npd_state(n: usize) -> SimState {
    let g = SpectralGrid::new(n).expect("benchmark grid");
    SimState::npd(vec![
        IonSpecies::new(1.0, 0.5, smooth_field(&g, 0.0)).expect("species"),
        IonSpecies::new(-1.0, 1.0, smooth_field(&g, 1.3)).expect("species"),
    ])
    .expect("state")
}

pub fn npe_state(n: usize) -> SimState {
    let species = npd_state(n).species().to_vec();
    let g = species[0].concentration.grid().clone();
    let omega = SpectralField::from_fn(&g, |x, y| x.sin() * y.cos() + 0.5 * (2.0 * x + y).cos());
    SimState::npe(species, omega).expect("state")
}

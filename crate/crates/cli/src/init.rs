//! Initial-condition generators.
//!
//! Random draws come from a ChaCha8 stream keyed by the run seed and a
//! per-field stream id (species index, or [`VORTICITY_STREAM`]), so a field's
//! draws do not depend on how many other fields were generated before it.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use ionflow::{IonSpecies, SimState, SpectralField, SpectralGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{band_cutoff, parse_field_name, AmplitudeLaw, FieldName, InitialSpec, ModelKind, RunConfig};
use crate::error::{CliError, Result};
use crate::snapshot::read_snapshot;

pub const VORTICITY_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Shifted up to be nonnegative on the grid.
    Concentration,
    /// Made mean-zero.
    Vorticity,
}

/// Band-limited field described by `spec`, before role adjustments.
/// Relative file paths resolve against `base_dir`.
pub fn generate(spec: &InitialSpec, grid: &Arc<SpectralGrid>, seed: u64, stream: u64, base_dir: &Path) -> Result<SpectralField> {
    let mut f = match spec {
        InitialSpec::Constant { value } => SpectralField::constant(grid, *value),
        InitialSpec::Modes { mean, modes } => {
            let mut f = SpectralField::constant(grid, *mean);
            let cutoff = band_cutoff(grid.n());
            for m in modes {
                let [k1, k2] = m.k;
                if k1.abs().max(k2.abs()) > cutoff {
                    return Err(CliError::validation("modes.k", format!("mode ({k1}, {k2}) is outside the band")));
                }
                if (k1, k2) == (0, 0) {
                    let c = f.coeff(0, 0) + m.amplitude * m.phase.cos();
                    f.set_coeff(0, 0, c);
                    continue;
                }
                let half = Complex64::from_polar(0.5 * m.amplitude, m.phase);
                let a = f.coeff(k1, k2) + half;
                let b = f.coeff(-k1, -k2) + half.conj();
                f.set_coeff(k1, k2, a);
                f.set_coeff(-k1, -k2, b);
            }
            f
        }
        InitialSpec::RandomBand {
            mean,
            shells,
            amplitude,
            law,
            decay,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut f = SpectralField::constant(grid, *mean);
            let (lo, hi) = (shells[0] as f64, shells[1] as f64);
            for i in 0..grid.len() {
                let (k1, k2) = grid.wavevector(i);
                let upper = k2 > 0 || (k2 == 0 && k1 > 0);
                let k = grid.kmag()[i];
                if !upper || !grid.dealias_mask()[i] || k < lo || k > hi {
                    continue;
                }
                let weight = match law {
                    AmplitudeLaw::Flat => 1.0,
                    AmplitudeLaw::Power => k.powf(-decay),
                    AmplitudeLaw::Exp => (-decay * k).exp(),
                };
                let theta = rng.random::<f64>() * TAU;
                let c = Complex64::from_polar(amplitude * weight, theta);
                f.set_coeff(k1, k2, c);
                f.set_coeff(-k1, -k2, c.conj());
            }
            f
        }
        InitialSpec::AnalyticBump {
            mean,
            amplitude,
            sigma,
            center,
        } => {
            let mut f = SpectralField::constant(grid, *mean);
            for i in 1..grid.len() {
                if !grid.dealias_mask()[i] {
                    continue;
                }
                let (k1, k2) = grid.wavevector(i);
                let phase = -(k1 as f64 * center[0] + k2 as f64 * center[1]);
                f.coeffs_mut()[i] = Complex64::from_polar(amplitude * (-sigma * grid.kmag()[i]).exp(), phase);
            }
            f
        }
        InitialSpec::Gaussian {
            mean,
            amplitude,
            width,
            center,
        } => {
            let w2 = width * width;
            SpectralField::from_fn(grid, |x, y| {
                mean + amplitude * (((x - center[0]).cos() + (y - center[1]).cos() - 2.0) / w2).exp()
            })
        }
        InitialSpec::File { path, field } => {
            let full = base_dir.join(path);
            let state = read_snapshot(&full)?;
            if state.grid().n() != grid.n() {
                return Err(CliError::Data {
                    path: full,
                    detail: format!("snapshot grid n = {} does not match n = {}", state.grid().n(), grid.n()),
                });
            }
            let missing = || CliError::Data {
                path: full.clone(),
                detail: format!("snapshot has no field `{field}`"),
            };
            let src = match parse_field_name(field).ok_or_else(missing)? {
                FieldName::Species(i) => state.species().get(i).map(|s| &s.concentration),
                FieldName::Omega => state.vorticity(),
            }
            .ok_or_else(missing)?;
            SpectralField::from_coeffs(grid, src.coeffs().to_vec())?
        }
    };
    f.dealias();
    Ok(f)
}

/// Applies the invariants of `role`, logging any adjustment under `label`.
pub fn enforce_role(mut f: SpectralField, role: Role, label: &str) -> SpectralField {
    match role {
        Role::Concentration => {
            let min = f.to_physical().into_iter().fold(f64::INFINITY, f64::min);
            if min < 0.0 {
                log::warn!("{label}: grid minimum {min:.3e} < 0; adding {:.3e} to make it nonnegative", -min);
                let c = f.coeff(0, 0) - min;
                f.set_coeff(0, 0, c);
            }
        }
        Role::Vorticity => {
            if f.mean() != 0.0 {
                log::warn!("{label}: removing mean {:.3e} to make the vorticity mean-zero", f.mean());
                f.set_coeff(0, 0, Complex64::default());
            }
        }
    }
    f
}

/// Initial field for one role: generated, dealiased and adjusted.
pub fn initial_condition(
    spec: &InitialSpec,
    grid: &Arc<SpectralGrid>,
    seed: u64,
    stream: u64,
    role: Role,
    base_dir: &Path,
) -> Result<SpectralField> {
    let label = match role {
        Role::Concentration => format!("species[{stream}]"),
        Role::Vorticity => "vorticity".to_string(),
    };
    Ok(enforce_role(generate(spec, grid, seed, stream, base_dir)?, role, &label))
}

/// Initial state of a validated config.
pub fn initial_state(cfg: &RunConfig, base_dir: &Path) -> Result<SimState> {
    let grid = SpectralGrid::new(cfg.n)?;
    let mut species = Vec::with_capacity(cfg.species.len());
    for (i, sp) in cfg.species.iter().enumerate() {
        let c = initial_condition(&sp.initial, &grid, cfg.seed, i as u64, Role::Concentration, base_dir)?;
        species.push(IonSpecies::new(sp.z, sp.d, c)?);
    }
    let state = match (cfg.model, &cfg.vorticity) {
        (ModelKind::Npd, _) => SimState::npd(species)?,
        (ModelKind::Npe, Some(spec)) => {
            let w = initial_condition(spec, &grid, cfg.seed, VORTICITY_STREAM, Role::Vorticity, base_dir)?;
            SimState::npe(species, w)?
        }
        (ModelKind::Npe, None) => return Err(CliError::validation("vorticity", "NPE config needs an initial vorticity")),
    };
    Ok(state)
}

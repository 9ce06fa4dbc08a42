mod common;

use std::sync::Arc;

use common::*;
use ionflow::models::{darcy_velocity, electric_force_mean, np_tendency, velocity_from_vorticity, vorticity_tendency};
use ionflow::spectral::{solve_poisson, SpectralGrid};
use ionflow::{IonSpecies, SimState, SpectralField};
use num_complex::Complex64;

fn two_species(g: &Arc<SpectralGrid>, seed: u64) -> Vec<IonSpecies> {
    let mut r = rng(seed);
    vec![
        IonSpecies::new(1.0, 0.5, random_band_field(g, &mut r, 3.0)).unwrap(),
        IonSpecies::new(-1.0, 1.0, random_band_field(g, &mut r, 3.0)).unwrap(),
    ]
}

/// `f ↦ ∂_d f` on coefficients, written out independently of the library.
fn deriv(f: &SpectralField, d: usize) -> SpectralField {
    let mut out = f.clone();
    let g = Arc::clone(f.grid());
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = g.wavevector(i);
        *c = ik(if d == 0 { k.0 } else { k.1 }, *c);
    }
    out
}

/// Coarse-band modes of a fine-grid field.
fn restrict(fine: &SpectralField, coarse: &Arc<SpectralGrid>) -> SpectralField {
    let mut out = SpectralField::zeros(coarse);
    for (k1, k2) in band(coarse.n()) {
        out.set_coeff(k1, k2, fine.coeff(k1, k2));
    }
    out
}

fn project(vx: &SpectralField, vy: &SpectralField) -> (SpectralField, SpectralField) {
    let g = Arc::clone(vx.grid());
    let mut px = vx.clone();
    let mut py = vy.clone();
    for i in 0..g.len() {
        let (k1, k2) = g.wavevector(i);
        let k2sum = (k1 * k1 + k2 * k2) as f64;
        if k2sum == 0.0 {
            px.coeffs_mut()[i] = Complex64::default();
            py.coeffs_mut()[i] = Complex64::default();
            continue;
        }
        let dot = (vx.coeffs()[i] * k1 as f64 + vy.coeffs()[i] * k2 as f64) / k2sum;
        px.coeffs_mut()[i] -= dot * k1 as f64;
        py.coeffs_mut()[i] -= dot * k2 as f64;
    }
    (px, py)
}

/// Nernst–Planck right-hand side with every product formed exactly on a
/// 3×-refined grid, in advective (non-divergence) form.
fn refined_np_oracle(state: &SimState, velocity: Option<(SpectralField, SpectralField)>) -> Vec<SpectralField> {
    let coarse = Arc::clone(state.grid());
    let fine = SpectralGrid::new(3 * coarse.n()).unwrap();
    let rho: SpectralField = state
        .species()
        .iter()
        .fold(SpectralField::zeros(&coarse), |acc, s| acc.add(&s.concentration.scaled(s.valence)));
    let mut phi = rho.clone();
    for (i, c) in phi.coeffs_mut().iter_mut().enumerate() {
        let k2 = coarse.kmag2()[i];
        *c = if k2 == 0.0 { Complex64::default() } else { *c / k2 };
    }
    let on_fine = |f: &SpectralField| refine(f, &fine).to_physical();
    let px = on_fine(&deriv(&phi, 0));
    let py = on_fine(&deriv(&phi, 1));
    let rho_v = on_fine(&rho);
    let (ux, uy) = match velocity {
        Some(u) => u,
        None => {
            let fx = SpectralField::from_physical(&fine, &rho_v.iter().zip(&px).map(|(a, b)| a * b).collect::<Vec<_>>()).unwrap();
            let fy = SpectralField::from_physical(&fine, &rho_v.iter().zip(&py).map(|(a, b)| a * b).collect::<Vec<_>>()).unwrap();
            let (a, b) = project(&restrict(&fx, &coarse), &restrict(&fy, &coarse));
            (a.scaled(-1.0), b.scaled(-1.0))
        }
    };
    let uxv = on_fine(&ux);
    let uyv = on_fine(&uy);
    state
        .species()
        .iter()
        .map(|s| {
            let c = on_fine(&s.concentration);
            let cx = on_fine(&deriv(&s.concentration, 0));
            let cy = on_fine(&deriv(&s.concentration, 1));
            let dz = s.diffusivity * s.valence;
            let vals: Vec<f64> = (0..c.len())
                .map(|i| -(uxv[i] * cx[i] + uyv[i] * cy[i]) + dz * (cx[i] * px[i] + cy[i] * py[i] - c[i] * rho_v[i]))
                .collect();
            let mut t = restrict(&SpectralField::from_physical(&fine, &vals).unwrap(), &coarse);
            let lap = deriv(&deriv(&s.concentration, 0), 0).add(&deriv(&deriv(&s.concentration, 1), 1));
            t.axpy(s.diffusivity, &lap);
            t
        })
        .collect()
}

#[test]
fn np_tendency_matches_refined_grid_oracle_darcy() {
    let g = SpectralGrid::new(16).unwrap();
    let state = SimState::npd(two_species(&g, 21)).unwrap();
    let got = np_tendency(&state).unwrap();
    let want = refined_np_oracle(&state, None);
    for (a, b) in got.iter().zip(&want) {
        assert!(max_diff(a, b) < 1e-9, "{}", max_diff(a, b));
    }
}

#[test]
fn np_tendency_matches_refined_grid_oracle_euler() {
    let g = SpectralGrid::new(16).unwrap();
    let mut r = rng(8);
    let omega = random_band_field(&g, &mut r, 0.0);
    let state = SimState::npe(two_species(&g, 22), omega.clone()).unwrap();
    let u = velocity_from_vorticity(&omega);
    let got = np_tendency(&state).unwrap();
    let want = refined_np_oracle(&state, Some((u.x, u.y)));
    for (a, b) in got.iter().zip(&want) {
        assert!(max_diff(a, b) < 1e-9, "{}", max_diff(a, b));
    }
}

#[test]
fn vorticity_tendency_matches_triad_oracle() {
    let g = SpectralGrid::new(16).unwrap();
    let mut r = rng(9);
    let omega = random_band_field(&g, &mut r, 0.0);
    let state = SimState::npe(two_species(&g, 23), omega.clone()).unwrap();
    let rho = state.derived().unwrap().rho.clone();
    let phi = solve_poisson(&rho);
    // ψ with Δψ = ω, u = ∇⊥ψ = (−∂₂ψ, ∂₁ψ)
    let psi = |k: (i64, i64)| {
        let k2 = (k.0 * k.0 + k.1 * k.1) as f64;
        if k2 == 0.0 { Complex64::default() } else { -omega.coeff(k.0, k.1) / k2 }
    };
    let ux = |k: (i64, i64)| -ik(k.1, psi(k));
    let uy = |k: (i64, i64)| ik(k.0, psi(k));
    let adv_x = triad(16, ux, |k| ik(k.0, omega.coeff(k.0, k.1)));
    let adv_y = triad(16, uy, |k| ik(k.1, omega.coeff(k.0, k.1)));
    // ∇⊥ρ·∇Φ = (−∂₂ρ)(∂₁Φ) + (∂₁ρ)(∂₂Φ)
    let f1 = triad(16, |k| -ik(k.1, rho.coeff(k.0, k.1)), |k| ik(k.0, phi.coeff(k.0, k.1)));
    let f2 = triad(16, |k| ik(k.0, rho.coeff(k.0, k.1)), |k| ik(k.1, phi.coeff(k.0, k.1)));
    let got = vorticity_tendency(&state).unwrap();
    let scale = got.max_abs_coeff();
    for i in 0..adv_x.len() {
        let l = adv_x[i].0;
        let want = -(adv_x[i].1 + adv_y[i].1) - (f1[i].1 + f2[i].1);
        assert!((got.coeff(l.0, l.1) - want).norm() < 1e-10 * scale.max(1.0), "mode {l:?}");
    }
    assert!(got.mean().abs() <= 1e-12 * scale);
}

#[test]
fn darcy_velocity_matches_triad_then_project() {
    let g = SpectralGrid::new(16).unwrap();
    let rho = SpectralField::from_fn(&g, |x, y| x.cos() + (x + 2.0 * y).cos());
    let phi = solve_poisson(&rho);
    let u = darcy_velocity(&rho, &phi).unwrap();
    let fx = triad(16, |k| rho.coeff(k.0, k.1), |k| ik(k.0, phi.coeff(k.0, k.1)));
    let fy = triad(16, |k| rho.coeff(k.0, k.1), |k| ik(k.1, phi.coeff(k.0, k.1)));
    let mut vx = SpectralField::zeros(&g);
    let mut vy = SpectralField::zeros(&g);
    for (a, b) in fx.iter().zip(&fy) {
        vx.set_coeff(a.0 .0, a.0 .1, a.1);
        vy.set_coeff(b.0 .0, b.0 .1, b.1);
    }
    let (px, py) = project(&vx, &vy);
    assert!(max_diff(&u.x, &px.scaled(-1.0)) < 1e-12);
    assert!(max_diff(&u.y, &py.scaled(-1.0)) < 1e-12);
    assert!(!u.x.is_zero() || !u.y.is_zero());
    assert!(u.divergence().max_abs_coeff() <= 1e-12);
}

#[test]
fn biot_savart_round_trip_on_random_vorticity() {
    let g = SpectralGrid::new(32).unwrap();
    let mut r = rng(4);
    let omega = random_band_field(&g, &mut r, 0.0);
    let u = velocity_from_vorticity(&omega);
    assert!(max_diff(&u.curl(), &omega) < 1e-12);
    assert!(u.divergence().max_abs_coeff() <= 1e-13 * omega.max_abs_coeff());
    assert_eq!(u.mean(), [0.0, 0.0]);
}

#[test]
fn tendency_mass_flux_vanishes() {
    let g = SpectralGrid::new(32).unwrap();
    let state = SimState::npd(two_species(&g, 30)).unwrap();
    for t in np_tendency(&state).unwrap() {
        assert!(t.mean().abs() * 4.0 * std::f64::consts::PI.powi(2) <= 1e-10);
    }
}

#[test]
fn electric_force_mean_vanishes_on_random_rho() {
    let g = SpectralGrid::new(32).unwrap();
    let mut r = rng(31);
    let rho = random_band_field(&g, &mut r, 0.0);
    let [fx, fy] = electric_force_mean(&rho);
    assert!(fx.abs() <= 1e-10 && fy.abs() <= 1e-10);
}

#[test]
fn drift_term_scales_quadratically() {
    // z ≠ 0, D tiny relative to the drift: compare tendencies minus diffusion.
    let g = SpectralGrid::new(16).unwrap();
    let mut r = rng(12);
    let c1 = random_band_field(&g, &mut r, 1.0);
    let c2 = random_band_field(&g, &mut r, 1.0);
    let drift = |lambda: f64| {
        let s = vec![
            IonSpecies::new(1.0, 1.0, c1.scaled(lambda)).unwrap(),
            IonSpecies::new(-1.0, 1.0, c2.scaled(lambda)).unwrap(),
        ];
        // NPE with zero vorticity removes advection entirely
        let state = SimState::npe(s, SpectralField::zeros(&g)).unwrap();
        let t = np_tendency(&state).unwrap();
        let lap = |c: &SpectralField| deriv(&deriv(c, 0), 0).add(&deriv(&deriv(c, 1), 1));
        (t[0].sub(&lap(&c1.scaled(lambda))), t[1].sub(&lap(&c2.scaled(lambda))))
    };
    let (a1, a2) = drift(1.0);
    let (b1, b2) = drift(3.0);
    assert!(max_diff(&b1, &a1.scaled(9.0)) < 1e-11 * b1.max_abs_coeff());
    assert!(max_diff(&b2, &a2.scaled(9.0)) < 1e-11 * b2.max_abs_coeff());
}

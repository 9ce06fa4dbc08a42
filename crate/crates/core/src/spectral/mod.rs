//! Fourier transforms and multiplier operators on the periodic square `[0, 2π]²`.

mod field;
mod grid;
pub mod norm;
mod ops;

pub use field::{transform, Direction, Representation, SpectralField, VectorField};
pub use grid::SpectralGrid;
pub use norm::{inner, norm, NormKind, TORUS_AREA};
pub use ops::{
    band_limited_values, check_gevrey_overflow, dealiased_from_values, frac_laplacian,
    gevrey_filter, gevrey_weights, gradient, leray_project, max_exponent, multiply_dealiased,
    multiply_vector, neg_laplacian, solve_poisson, GradientKind,
};

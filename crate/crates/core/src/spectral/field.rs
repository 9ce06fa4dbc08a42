use std::sync::Arc;

use num_complex::Complex64;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// A real scalar field on the torus, held as its Fourier-series coefficients
/// `f_k` so that `f(x) = Σ f_k e^{ik·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Arc<SpectralGrid>,
    coeffs: Vec<Complex64>,
}

/// Forward or inverse Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Input/output of [`transform`].
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Physical(Vec<f64>),
    Spectral(SpectralField),
}

/// Transform between a physical array and Fourier coefficients.
///
/// `Forward` takes a row-major `n × n` real array, `Inverse` takes a field.
pub fn transform(
    grid: &Arc<SpectralGrid>,
    input: Representation,
    direction: Direction,
) -> Result<Representation> {
    match (input, direction) {
        (Representation::Physical(values), Direction::Forward) => Ok(Representation::Spectral(
            SpectralField::from_physical(grid, &values)?,
        )),
        (Representation::Spectral(field), Direction::Inverse) => {
            if field.grid.n() != grid.n() {
                return Err(Error::Config(format!(
                    "field on n = {} passed to transform on n = {}",
                    field.grid.n(),
                    grid.n()
                )));
            }
            Ok(Representation::Physical(field.to_physical()))
        }
        (Representation::Physical(_), Direction::Inverse) => Err(Error::Usage(
            "inverse transform expects spectral input".into(),
        )),
        (Representation::Spectral(_), Direction::Forward) => Err(Error::Usage(
            "forward transform expects physical input".into(),
        )),
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    /// Field equal to `value` everywhere.
    pub fn constant(grid: &Arc<SpectralGrid>, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Wraps raw coefficients without symmetrizing them.
    pub fn from_coeffs(grid: &Arc<SpectralGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} coefficients for n = {}, got {}",
                grid.len(),
                grid.n(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Forward transform of real grid values (divides by `n²`). The result is
    /// projected onto exact Hermitian symmetry.
    pub fn from_physical(grid: &Arc<SpectralGrid>, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "physical array has {} values, grid n = {} needs {}",
                values.len(),
                grid.n(),
                grid.len()
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft2_forward(&mut buf);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        let mut f = Self {
            grid: Arc::clone(grid),
            coeffs: buf,
        };
        f.symmetrize();
        Ok(f)
    }

    /// Builds a field by sampling `f(x₁, x₂)` on the grid.
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (x1, x2) = grid.point(i);
                f(x1, x2)
            })
            .collect();
        Self::from_physical(grid, &values).expect("sized from grid")
    }

    /// Inverse transform to grid values (real part).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft2_inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k1, k2)]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let idx = self.grid.index_of(k1, k2);
        self.coeffs[idx] = value;
    }

    /// Spatial average (the `k = 0` coefficient).
    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `|f_0| ≤ 1e-12 · max |f_k|`.
    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].norm() <= 1e-12 * self.max_abs_coeff()
    }

    pub fn all_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|f_{-k} - conj(f_k)|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.negated_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Projects onto the real-field subspace: `f_k ← (f_k + conj f_{-k}) / 2`.
    /// Afterwards `f_{-k} == conj(f_k)` holds bit-for-bit.
    pub fn symmetrize(&mut self) {
        for i in 0..self.coeffs.len() {
            let j = self.grid.negated_index(i);
            if j < i {
                continue;
            }
            if i == j {
                self.coeffs[i].im = 0.0;
            } else {
                let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
    }

    /// Zeroes every mode outside the 2/3 dealiasing band.
    pub fn dealias(&mut self) {
        for (c, &keep) in self.coeffs.iter_mut().zip(self.grid.dealias_mask()) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    pub fn dealiased(&self) -> Self {
        let mut f = self.clone();
        f.dealias();
        f
    }

    /// True when every mode outside the dealiasing band is exactly zero.
    pub fn is_band_limited(&self) -> bool {
        self.coeffs
            .iter()
            .zip(self.grid.dealias_mask())
            .all(|(c, &keep)| keep || (c.re == 0.0 && c.im == 0.0))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.n() == other.grid.n()
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "grid mismatch: n = {} vs n = {}",
                self.grid.n(),
                other.grid.n()
            )))
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut f = self.clone();
        f.scale(factor);
        f
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        debug_assert!(self.same_grid(other));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b * alpha;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut f = self.clone();
        f.axpy(1.0, other);
        f
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut f = self.clone();
        f.axpy(-1.0, other);
        f
    }

    /// Multiplies each coefficient by a real symbol evaluated per mode index.
    pub fn apply_real_symbol(&mut self, symbol: impl Fn(usize) -> f64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= symbol(i);
        }
    }

    /// Returns a copy with the zero mode removed.
    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f.coeffs[0] = Complex64::default();
        f
    }
}

/// Two-component vector field on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: SpectralField,
    pub y: SpectralField,
}

impl VectorField {
    pub fn new(x: SpectralField, y: SpectralField) -> Result<Self> {
        x.check_grid(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        Self {
            x: SpectralField::zeros(grid),
            y: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.x.grid()
    }

    /// `∇·v` in coefficient space.
    pub fn divergence(&self) -> SpectralField {
        let (dk1, dk2) = self.grid().derivative_symbols();
        let coeffs = self
            .x
            .coeffs()
            .iter()
            .zip(self.y.coeffs())
            .enumerate()
            .map(|(i, (a, b))| times_i(*a, dk1[i]) + times_i(*b, dk2[i]))
            .collect();
        SpectralField::from_coeffs(self.grid(), coeffs).expect("same grid")
    }

    /// Scalar curl `∇⊥·v = ∂₁v₂ − ∂₂v₁`.
    pub fn curl(&self) -> SpectralField {
        let (dk1, dk2) = self.grid().derivative_symbols();
        let coeffs = self
            .x
            .coeffs()
            .iter()
            .zip(self.y.coeffs())
            .enumerate()
            .map(|(i, (a, b))| times_i(*b, dk1[i]) - times_i(*a, dk2[i]))
            .collect();
        SpectralField::from_coeffs(self.grid(), coeffs).expect("same grid")
    }

    /// Zero-mode coefficients `(v₁)₀, (v₂)₀`.
    pub fn mean(&self) -> [f64; 2] {
        [self.x.mean(), self.y.mean()]
    }

    pub fn scale(&mut self, factor: f64) {
        self.x.scale(factor);
        self.y.scale(factor);
    }
}

/// `i·k·c`, written out so that conjugate pairs stay exact conjugates.
#[inline]
pub(crate) fn times_i(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(-k * c.im, k * c.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = SpectralGrid::new(8).unwrap();
        let f = SpectralField::from_fn(&g, |x1, _| x1.cos());
        for i in 0..g.len() {
            let expected = match g.wavevector(i) {
                (1, 0) | (-1, 0) => 0.5,
                _ => 0.0,
            };
            assert!((f.coeffs()[i] - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zeros_transform_to_zeros() {
        let g = SpectralGrid::new(8).unwrap();
        let f = SpectralField::from_physical(&g, &vec![0.0; 64]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let g = SpectralGrid::new(8).unwrap();
        assert!(matches!(
            SpectralField::from_physical(&g, &[0.0; 63]),
            Err(Error::Config(_))
        ));
        let h = SpectralGrid::new(10).unwrap();
        let f = SpectralField::zeros(&h);
        assert!(matches!(
            transform(&g, Representation::Spectral(f), Direction::Inverse),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn symmetrize_is_exact() {
        let g = SpectralGrid::new(8).unwrap();
        let f = SpectralField::from_fn(&g, |x, y| (x + 2.0 * y).sin() + 0.3 * (3.0 * x).cos() * y.sin());
        for i in 0..g.len() {
            assert_eq!(f.coeffs()[g.negated_index(i)], f.coeffs()[i].conj());
        }
        assert_eq!(f.hermitian_defect(), 0.0);
    }

    #[test]
    fn sampled_points_cover_torus() {
        let g = SpectralGrid::new(8).unwrap();
        assert_eq!(g.point(0), (0.0, 0.0));
        let (x1, x2) = g.point(9);
        assert!((x1 - PI / 4.0).abs() < 1e-15 && (x2 - PI / 4.0).abs() < 1e-15);
    }
}

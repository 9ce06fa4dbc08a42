use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Square collocation grid on `[0, 2π]²` together with its integer wavenumber
/// lattice `{-n/2+1, …, n/2}²`.
///
/// Coefficients are stored row-major in FFT order: the row index carries `k₂`
/// and the column index carries `k₁`, with index `i` mapping to wavenumber
/// `i` for `i ≤ n/2` and `i - n` otherwise. Physical arrays use the same
/// layout with rows along `x₂` and columns along `x₁`.
pub struct SpectralGrid {
    n: usize,
    k1: Vec<i64>,
    k2: Vec<i64>,
    kmag2: Vec<f64>,
    kmag: Vec<f64>,
    // derivative symbols with the unpaired Nyquist wavenumber removed
    dk1: Vec<f64>,
    dk2: Vec<f64>,
    nyquist: Vec<bool>,
    dealias: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid").field("n", &self.n).finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl SpectralGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize) -> Result<Arc<Self>> {
        if n < Self::MIN_POINTS {
            return Err(Error::Config(format!(
                "n must be at least {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::Config(format!("n must be even, got {n}")));
        }
        let len = n * n;
        let half = n as i64 / 2;
        let mut k1 = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        for row in 0..n {
            for col in 0..n {
                k1.push(wavenumber(col, n));
                k2.push(wavenumber(row, n));
            }
        }
        let kmag2: Vec<f64> = k1
            .iter()
            .zip(&k2)
            .map(|(&a, &b)| (a * a + b * b) as f64)
            .collect();
        let kmag = kmag2.iter().map(|v| v.sqrt()).collect();
        let nyquist: Vec<bool> = k1
            .iter()
            .zip(&k2)
            .map(|(&a, &b)| a == half || b == half)
            .collect();
        let dk1 = k1
            .iter()
            .map(|&a| if a == half { 0.0 } else { a as f64 })
            .collect();
        let dk2 = k2
            .iter()
            .map(|&b| if b == half { 0.0 } else { b as f64 })
            .collect();
        // 3·max(|k₁|,|k₂|) < n; identical to |k| ≤ n/3 unless 3 divides n,
        // where the boundary shell would alias onto itself.
        let dealias = k1
            .iter()
            .zip(&k2)
            .map(|(&a, &b)| 3 * a.abs().max(b.abs()) < n as i64)
            .collect();

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        Ok(Arc::new(Self {
            n,
            k1,
            k2,
            kmag2,
            kmag,
            dk1,
            dk2,
            nyquist,
            dealias,
            fwd,
            inv,
        }))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice modes (= number of grid points).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Largest wavenumber magnitude retained by the dealiasing mask.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n as i64 - 1) / 3
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        (self.k1[idx], self.k2[idx])
    }

    #[inline]
    pub fn kmag2(&self) -> &[f64] {
        &self.kmag2
    }

    #[inline]
    pub fn kmag(&self) -> &[f64] {
        &self.kmag
    }

    #[inline]
    pub(crate) fn derivative_symbols(&self) -> (&[f64], &[f64]) {
        (&self.dk1, &self.dk2)
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.nyquist[idx]
    }

    #[inline]
    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias
    }

    /// Flat index of wavevector `(k1, k2)`; wavenumbers are reduced modulo `n`.
    pub fn index_of(&self, k1: i64, k2: i64) -> usize {
        let n = self.n as i64;
        let col = k1.rem_euclid(n) as usize;
        let row = k2.rem_euclid(n) as usize;
        row * self.n + col
    }

    /// Flat index of `-k` (with wrap-around, so the Nyquist row maps onto itself).
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n;
        let row = idx / n;
        let col = idx % n;
        ((n - row) % n) * n + (n - col) % n
    }

    /// Physical coordinates `(x₁, x₂)` of grid point `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = self.spacing();
        ((idx % self.n) as f64 * h, (idx / self.n) as f64 * h)
    }

    /// In-place unnormalized 2D forward DFT on a row-major `n × n` buffer.
    pub(crate) fn fft2_forward(&self, buf: &mut [Complex64]) {
        self.fft2(buf, &self.fwd);
    }

    /// In-place unnormalized 2D inverse DFT on a row-major `n × n` buffer.
    pub(crate) fn fft2_inverse(&self, buf: &mut [Complex64]) {
        self.fft2(buf, &self.inv);
    }

    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(buf.len(), self.len());
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // rustfft transforms every contiguous chunk of length n
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, self.n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, self.n);
    }
}

#[inline]
fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for row in 0..n {
        for col in (row + 1)..n {
            buf.swap(row * n + col, col * n + row);
        }
    }
}

//! Uniform grids on the unit torus, the spectral Coulomb solve, norms and
//! quadratic functionals.
//!
//! Cells are centered at `x_i = (i + 1/2) h`. In two dimensions the flat index
//! is `i1 + n * i2`, so the first axis is contiguous.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("unsupported dimension {0}: only 1 and 2 are supported")]
    UnsupportedDimension(usize),
    #[error("a grid needs at least 8 cells per axis, got {0}")]
    TooFewCells(usize),
    #[error("field has {got} values but the grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("L^p norm needs p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self, FieldError> {
        if dim != 1 && dim != 2 {
            return Err(FieldError::UnsupportedDimension(dim));
        }
        if n < 8 {
            return Err(FieldError::TooFewCells(n));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell-center coordinate along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n as f64
    }

    /// Per-axis indices of a flat cell index. Unused axes are 0.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat % self.n, flat / self.n]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] + self.n * idx[1]
        }
    }

    /// Cell-center coordinates. The second entry is 0 in one dimension.
    pub fn center(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(flat);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    /// Flat index of the periodic neighbour shifted by `+1` or `-1` along `axis`.
    pub fn neighbor(&self, flat: usize, axis: usize, forward: bool) -> usize {
        let mut idx = self.multi_index(flat);
        idx[axis] = if forward {
            (idx[axis] + 1) % self.n
        } else {
            (idx[axis] + self.n - 1) % self.n
        };
        self.flat_index(idx)
    }

    /// Integer wavenumber vector of a flat spectral index.
    pub fn wavenumber(&self, flat: usize) -> [i64; 2] {
        let [i, j] = self.multi_index(flat);
        [signed_mode(i, self.n), if self.dim == 1 { 0 } else { signed_mode(j, self.n) }]
    }

    fn is_nyquist(&self, mode: i64) -> bool {
        mode.unsigned_abs() as usize * 2 == self.n
    }
}

fn signed_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub fn make_grid(dim: usize, n: usize) -> Result<TorusGrid, FieldError> {
    TorusGrid::new(dim, n)
}

/// Cell-centered samples of a scalar function on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at cell centers. `f` receives `[x1, x2]` (with `x2 = 0` in 1-D).
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.center(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Cellwise `self - other`.
    pub fn sub(&self, other: &ScalarField) -> Result<Self, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Staggering {
    Cell,
    /// Component `a` lives on the face between cell `i` and its `+1` neighbour along axis `a`.
    Face,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: TorusGrid,
    pub staggering: Staggering,
    pub components: Vec<Vec<f64>>,
}

/// Cached FFT plans for one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        // Rows: first axis is contiguous.
        for row in data.chunks_exact_mut(n) {
            fft.process(row);
        }
        if self.grid.dim() == 2 {
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    column[j] = data[i + n * j];
                }
                fft.process(&mut column);
                for j in 0..n {
                    data[i + n * j] = column[j];
                }
            }
        }
    }

    /// Discrete Fourier coefficients, normalized so that mode 0 is the mean.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        data
    }

    /// Inverse of [`Spectral::forward`], keeping the real part.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut coeffs, &self.inverse);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    fn k_squared(&self, flat: usize) -> f64 {
        let [k1, k2] = self.grid.wavenumber(flat);
        (k1 * k1 + k2 * k2) as f64
    }

    /// Green multiplier `1/(4π²|k|²)`, zero on the mean mode.
    fn green(&self, flat: usize) -> f64 {
        let k2 = self.k_squared(flat);
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / (4.0 * PI * PI * k2)
        }
    }

    pub fn potential_from_hat(&self, uhat: &[Complex64]) -> Vec<f64> {
        let coeffs = uhat.iter().enumerate().map(|(i, c)| c * self.green(i)).collect();
        self.inverse(coeffs)
    }

    /// Component `axis` of `∇g∗u`. The Nyquist mode along `axis` is dropped so
    /// the output stays real.
    pub fn gradient_from_hat(&self, uhat: &[Complex64], axis: usize, staggering: Staggering) -> Vec<f64> {
        let h = self.grid.h();
        let coeffs = uhat
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.grid.wavenumber(i)[axis];
                if k == 0 || self.grid.is_nyquist(k) {
                    return Complex64::new(0.0, 0.0);
                }
                let mut mult = Complex64::new(0.0, 2.0 * PI * k as f64) * self.green(i);
                if staggering == Staggering::Face {
                    mult *= Complex64::from_polar(1.0, PI * k as f64 * h);
                }
                c * mult
            })
            .collect();
        self.inverse(coeffs)
    }

    pub fn energy_from_hat(&self, uhat: &[Complex64]) -> f64 {
        0.5 * uhat.iter().enumerate().map(|(i, c)| c.norm_sqr() * self.green(i)).sum::<f64>()
    }

    /// Spectral `−Δ`.
    pub fn neg_laplacian(&self, values: &[f64]) -> Vec<f64> {
        let coeffs = self
            .forward(values)
            .into_iter()
            .enumerate()
            .map(|(i, c)| c * (4.0 * PI * PI * self.k_squared(i)))
            .collect();
        self.inverse(coeffs)
    }
}

/// Zero-mean solution of `−Δφ = u − mean(u)`.
pub fn coulomb_potential(u: &ScalarField) -> ScalarField {
    let spec = Spectral::new(u.grid);
    let values = spec.potential_from_hat(&spec.forward(&u.values));
    ScalarField { grid: u.grid, values }
}

/// `∇g∗u` at cell centers or at the `+1/2` faces.
pub fn coulomb_field(u: &ScalarField, staggering: Staggering) -> VectorField {
    let spec = Spectral::new(u.grid);
    let uhat = spec.forward(&u.values);
    let components = (0..u.grid.dim()).map(|a| spec.gradient_from_hat(&uhat, a, staggering)).collect();
    VectorField { grid: u.grid, staggering, components }
}

pub fn lp_norm(u: &ScalarField, p: f64) -> Result<f64, FieldError> {
    if p.is_nan() || p < 1.0 {
        return Err(FieldError::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(u.values.iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    let cm = u.grid.cell_measure();
    let sum: f64 = if p == 1.0 {
        u.values.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        u.values.iter().map(|v| v * v).sum()
    } else {
        u.values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((sum * cm).powf(1.0 / p))
}

pub fn mean(u: &ScalarField) -> f64 {
    u.values.iter().sum::<f64>() * u.grid.cell_measure()
}

/// `½∫ g∗u u`, evaluated in Fourier space.
pub fn interaction_energy(u: &ScalarField) -> f64 {
    let spec = Spectral::new(u.grid);
    spec.energy_from_hat(&spec.forward(&u.values))
}

/// `‖u − ū‖_{Ḣ⁻¹}` with the convention `‖f‖² = Σ_{k≠0} |f̂(k)|²/(4π²|k|²)`.
pub fn hminus1_norm(u: &ScalarField) -> f64 {
    (2.0 * interaction_energy(u)).sqrt()
}

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use super::grid::{Grid, Mode};
use crate::error::{Error, Result};
use crate::numeric::{complex_gaussian, pairwise_sum};
use crate::roparam::RoParam;

/// A function on the n-torus stored as its Fourier coefficients `ŵ(ξ)`.
///
/// The convention is `w(x) = Σ_ξ ŵ(ξ) e^{i x·ξ}`, so the forward transform of
/// samples divides by `Nⁿ` and is unitary for the mean-square inner product
/// on samples: `Σ|ŵ|² = mean |w(x_j)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn single_mode(grid: Grid, mode: Mode, value: Complex64) -> Result<Self> {
        let idx = grid
            .index_of(&mode)
            .ok_or_else(|| Error::Domain(format!("mode {mode:?} outside lattice of {grid:?}")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] = value;
        Ok(f)
    }

    /// Build a field from coefficient values per lattice mode.
    pub fn from_fn<F: FnMut(&Mode) -> Complex64>(grid: Grid, mut f: F) -> Self {
        let coeffs = grid.modes().map(|(_, m)| f(&m)).collect();
        SpectralField { grid, coeffs }
    }

    /// Forward transform of physical samples (row-major over `x_j = 2πj/N`).
    pub fn from_samples(grid: Grid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut data = samples.to_vec();
        fft_nd(&mut data, &grid, false);
        let scale = 1.0 / grid.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
        Ok(SpectralField { grid, coeffs: data })
    }

    /// Sample a function of `x` on the physical grid and transform.
    pub fn from_physical<F: Fn(&[f64; 3]) -> Complex64>(grid: Grid, f: F) -> Self {
        let samples: Vec<Complex64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    /// Inverse transform to physical samples.
    pub fn to_samples(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft_nd(&mut data, &self.grid, true);
        data
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, mode: &Mode) -> Complex64 {
        self.grid
            .index_of(mode)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// `(Σ|ŵ|²)^{1/2}`, equal to the mean-square norm of the samples.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&sq).sqrt()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grid(self.grid, other.grid)?;
        Ok(SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_grid(self.grid, other.grid)?;
        Ok(SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Zero-pad (or truncate) the coefficients onto another grid of the same
    /// dimension. Truncation is the orthogonal projection onto the smaller lattice.
    pub fn resample(&self, target: Grid) -> Result<Self> {
        if target.dim() != self.grid.dim() {
            return Err(Error::GridMismatch(format!(
                "cannot move a {}-d field to a {}-d grid",
                self.grid.dim(),
                target.dim()
            )));
        }
        let mut out = Self::zeros(target);
        for (i, m) in self.grid.modes() {
            if let Some(j) = target.index_of(&m) {
                out.coeffs[j] = self.coeffs[i];
            }
        }
        Ok(out)
    }

    /// Exact pointwise product, returned on the grid with twice the modes per
    /// axis (the product of two band-limited fields fits there without aliasing).
    pub fn product_padded(&self, other: &Self) -> Result<Self> {
        check_grid(self.grid, other.grid)?;
        let big = self.grid.refined(2);
        let a = self.resample(big)?.to_samples();
        let b = other.resample(big)?.to_samples();
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::from_samples(big, &prod)
    }

    /// Multiply each coefficient by `g(ξ)`.
    pub fn map_modes<F: Fn(&Mode, Complex64) -> Complex64>(&self, g: F) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self
                .grid
                .modes()
                .map(|(i, m)| g(&m, self.coeffs[i]))
                .collect(),
        }
    }

    /// Random coefficients: i.i.d. complex Gaussian times `⟨ξ⟩^{-(n+1)/2}`.
    pub fn random<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> Self {
        let decay = -((grid.dim() + 1) as f64) / 2.0;
        let coeffs = (0..grid.len())
            .map(|i| complex_gaussian(rng) * grid.bracket(i).powf(decay))
            .collect();
        SpectralField { grid, coeffs }
    }
}

pub(crate) fn check_grid(a: Grid, b: Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Column `u = col(u_1, …, u_p)` of fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("vector field needs at least one component".into()));
        }
        let g = components[0].grid();
        for c in &components[1..] {
            check_grid(g, c.grid())?;
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Grid, p: usize) -> Self {
        VectorField {
            components: vec![SpectralField::zeros(grid); p],
        }
    }

    pub fn random<R: Rng + ?Sized>(grid: Grid, p: usize, rng: &mut R) -> Self {
        VectorField {
            components: (0..p).map(|_| SpectralField::random(grid, rng)).collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &SpectralField {
        &self.components[k]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut SpectralField {
        &mut self.components[k]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_p(self.p(), other.p())?;
        let c = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components: c })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_p(self.p(), other.p())?;
        let c = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components: c })
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        VectorField {
            components: self.components.iter().map(|c| c.scaled(a)).collect(),
        }
    }

    /// Coefficient vector `û(ξ)` at storage index `i`.
    pub fn at(&self, i: usize) -> Vec<Complex64> {
        self.components.iter().map(|c| c.coeffs()[i]).collect()
    }
}

pub(crate) fn check_p(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch { expected: a, got: b });
    }
    Ok(())
}

/// `φ(⟨ξ⟩)` tabulated by the integer `|ξ|²`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    values: Vec<f64>,
}

impl WeightTable {
    pub fn new(param: &RoParam, grid: Grid) -> Result<Self> {
        let max = grid.max_norm_sq() as usize;
        let values = (0..=max)
            .map(|k| param.eval((1.0 + k as f64).sqrt()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightTable { values })
    }

    pub fn get(&self, norm_sq: u64) -> f64 {
        self.values[norm_sq as usize]
    }
}

fn fft_nd(data: &mut [Complex64], grid: &Grid, inverse: bool) {
    let n = grid.size();
    let dim = grid.dim();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = data.len() / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for k in 0..n {
                    line[k] = data[base + k * stride];
                }
                fft.process(&mut line);
                for k in 0..n {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice point `ξ ∈ ℤⁿ`, padded with zeros beyond the grid dimension.
pub type Mode = [i64; 3];

/// Discretization of the n-torus: `N` modes per axis with lattice
/// `{ξ : -N/2 ≤ ξ_i < N/2}`.
///
/// Coefficients are stored row-major (axis 0 slowest) in FFT order: index
/// `k` along an axis holds frequency `k` for `k < N/2` and `k - N` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    size: usize,
}

impl Grid {
    pub fn new(dim: usize, size: usize) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("grid dimension must be 1..=3, got {dim}")));
        }
        if size < 4 || size % 2 != 0 {
            return Err(Error::Config(format!("modes per axis must be even and >= 4, got {size}")));
        }
        Ok(Grid { dim, size })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Modes per axis, `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Total mode count `Nⁿ`.
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The grid with `factor` times as many modes per axis.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid {
            dim: self.dim,
            size: self.size * factor,
        }
    }

    fn freq(&self, k: usize) -> i64 {
        let n = self.size as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn mode(&self, index: usize) -> Mode {
        let mut out = [0i64; 3];
        let mut rest = index;
        for axis in (0..self.dim).rev() {
            out[axis] = self.freq(rest % self.size);
            rest /= self.size;
        }
        out
    }

    pub fn index_of(&self, mode: &Mode) -> Option<usize> {
        let half = (self.size / 2) as i64;
        let mut idx = 0usize;
        for (axis, &m) in mode.iter().enumerate() {
            if axis >= self.dim {
                if m != 0 {
                    return None;
                }
                continue;
            }
            if m < -half || m >= half {
                return None;
            }
            let k = if m >= 0 { m } else { m + self.size as i64 };
            idx = idx * self.size + k as usize;
        }
        Some(idx)
    }

    pub fn norm_sq(&self, index: usize) -> u64 {
        self.mode(index)
            .iter()
            .map(|&m| (m * m) as u64)
            .sum()
    }

    /// Largest `|ξ|²` on the lattice.
    pub fn max_norm_sq(&self) -> u64 {
        let half = (self.size / 2) as u64;
        self.dim as u64 * half * half
    }

    /// Smoothed modulus `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
    pub fn bracket(&self, index: usize) -> f64 {
        (1.0 + self.norm_sq(index) as f64).sqrt()
    }

    /// Physical sample point `x_j = 2π j / N` for the row-major index.
    pub fn point(&self, index: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut rest = index;
        let h = std::f64::consts::TAU / self.size as f64;
        for axis in (0..self.dim).rev() {
            out[axis] = (rest % self.size) as f64 * h;
            rest /= self.size;
        }
        out
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, Mode)> + '_ {
        (0..self.len()).map(move |i| (i, self.mode(i)))
    }
}

pub fn bracket_of(mode: &[f64]) -> f64 {
    (1.0 + mode.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

//! Discrete Hörmander spaces `H^φ` on the n-torus.
//!
//! The norm of a field is `(Σ_ξ φ²(⟨ξ⟩)|ŵ(ξ)|²)^{1/2}` over the lattice cube;
//! for `φ(t) = t^s` this is the Sobolev norm of order `s`.

mod field;
mod grid;
pub mod io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use field::{SpectralField, VectorField, WeightTable};
pub use grid::{bracket_of, Grid, Mode};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, pairwise_sum, pairwise_sum_complex};
use crate::report::{Report, Verdict};
use crate::roparam::{effective_indices, RoParam};

pub(crate) use field::{check_grid, check_p};

/// `‖w‖_φ`.
pub fn hnorm(w: &SpectralField, param: &RoParam) -> Result<f64> {
    let table = WeightTable::new(param, w.grid())?;
    Ok(hnorm_sq_with(w, &table).sqrt())
}

pub(crate) fn hnorm_sq_with(w: &SpectralField, table: &WeightTable) -> f64 {
    let g = w.grid();
    let terms: Vec<f64> = w
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let phi = table.get(g.norm_sq(i));
            phi * phi * c.norm_sqr()
        })
        .collect();
    pairwise_sum(&terms)
}

/// Norm on `⊕_k H^{φ_k}`: `(Σ_k ‖u_k‖²_{φ_k})^{1/2}`.
pub fn vector_hnorm(u: &VectorField, params: &[RoParam]) -> Result<f64> {
    check_p(u.p(), params.len())?;
    let mut parts = Vec::with_capacity(u.p());
    for (c, p) in u.components().iter().zip(params) {
        let t = WeightTable::new(p, u.grid())?;
        parts.push(hnorm_sq_with(c, &t));
    }
    Ok(pairwise_sum(&parts).sqrt())
}

pub(crate) fn vector_hnorm_with(u: &VectorField, tables: &[WeightTable]) -> f64 {
    let parts: Vec<f64> = u
        .components()
        .iter()
        .zip(tables)
        .map(|(c, t)| hnorm_sq_with(c, t))
        .collect();
    pairwise_sum(&parts).sqrt()
}

pub(crate) fn weight_tables(params: &[RoParam], grid: Grid) -> Result<Vec<WeightTable>> {
    params.iter().map(|p| WeightTable::new(p, grid)).collect()
}

/// Sesquilinear pairing `(u, v) = Σ_ξ û(ξ) conj(v̂(ξ))`, the torus analogue
/// of `∫ u(x) conj(v(x)) dx` normalized by the torus volume.
pub fn duality_pair(u: &SpectralField, v: &SpectralField) -> Result<Complex64> {
    check_grid(u.grid(), v.grid())?;
    let terms: Vec<Complex64> = u
        .coeffs()
        .iter()
        .zip(v.coeffs())
        .map(|(a, b)| a * b.conj())
        .collect();
    Ok(pairwise_sum_complex(&terms))
}

pub fn vector_pair(u: &VectorField, v: &VectorField) -> Result<Complex64> {
    check_p(u.p(), v.p())?;
    let mut parts = Vec::with_capacity(u.p());
    for (a, b) in u.components().iter().zip(v.components()) {
        parts.push(duality_pair(a, b)?);
    }
    Ok(pairwise_sum_complex(&parts))
}

/// All multi-indices `μ ∈ ℕⁿ` with `|μ| ≤ order`, in graded lexicographic order.
pub fn multi_indices(dim: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = vec![0u32; dim];
        fill_exact(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill_exact(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, axis: usize, left: u32) {
    if axis + 1 == cur.len() {
        cur[axis] = left;
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[axis] = k;
        fill_exact(out, cur, axis + 1, left - k);
    }
    cur[axis] = 0;
}

/// `ξ^μ` as a real number.
pub fn monomial(mode: &[f64], mu: &[u32]) -> f64 {
    mu.iter()
        .zip(mode)
        .map(|(&k, &x)| x.powi(k as i32))
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convergence {
    Converges,
    Diverges,
    Inconclusive,
}

/// Verdict on `∫₁^∞ t^{2λ+n-1} ω^{-2}(t) dt < ∞` and the discrete embedding
/// constant `C` with `sup|D^μ w| ≤ C ‖w‖_ω` for `|μ| ≤ λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConstant {
    pub convergence: Convergence,
    pub constant: f64,
    /// `2λ + n - 2σ₀(ω)`; negative means convergence by the index test.
    pub margin_lower: f64,
    /// `2λ + n - 2σ₁(ω)`; positive means divergence by the index test.
    pub margin_upper: f64,
    /// "index" or "doubling".
    pub method: String,
    pub estimated_indices: bool,
    pub grid_size: usize,
}

impl EmbeddingConstant {
    pub fn converges(&self) -> bool {
        self.convergence == Convergence::Converges
    }

    pub fn to_report(&self, omega: &RoParam, lambda: u32, dim: usize) -> Report {
        let mut r = Report::new("embedding").with_config(serde_json::json!({
            "omega": omega.label(),
            "lambda": lambda,
            "n": dim,
        }));
        r.grid_sizes.push(self.grid_size);
        r.constant("C", self.constant);
        r.constant("margin_lower", self.margin_lower);
        r.constant("margin_upper", self.margin_upper);
        let verdict = match self.convergence {
            Convergence::Converges => Verdict::Pass,
            Convergence::Diverges => Verdict::Fail,
            Convergence::Inconclusive => Verdict::Inconclusive,
        };
        r.check(
            "integral_condition",
            format!("hspace: integral test for H^omega in C^lambda_b ({})", self.method),
            self.margin_lower,
            0.0,
            verdict,
        );
        if self.estimated_indices {
            r.note("estimated preconditions: omega has no declared indices");
        }
        r
    }
}

/// Tail blocks with ratio at most this are taken as geometric decay.
const DOUBLING_DECAY: f64 = 0.9;
/// Tail blocks with ratio at least this are taken as growth.
const DOUBLING_GROWTH: f64 = 1.1;
const DOUBLING_BLOCKS: usize = 48;

pub fn embedding_constant(omega: &RoParam, lambda: u32, grid: Grid) -> Result<EmbeddingConstant> {
    let dim = grid.dim();
    let (sigma0, sigma1, estimated) = effective_indices(omega)?;
    let exponent = (2 * lambda as usize + dim) as f64;
    let margin_lower = exponent - 2.0 * sigma0;
    let margin_upper = exponent - 2.0 * sigma1;
    let (convergence, method) = if margin_lower < 0.0 {
        (Convergence::Converges, "index")
    } else if margin_upper > 0.0 {
        (Convergence::Diverges, "index")
    } else {
        (doubling_test(omega, lambda, dim)?, "doubling")
    };

    let table = WeightTable::new(omega, grid)?;
    let mus = multi_indices(dim, lambda);
    let terms: Vec<f64> = grid
        .modes()
        .map(|(i, m)| {
            let xi: Vec<f64> = m[..dim].iter().map(|&v| v as f64).collect();
            let w = table.get(grid.norm_sq(i));
            let best = mus
                .iter()
                .map(|mu| monomial(&xi, mu).powi(2))
                .fold(0.0, f64::max);
            best / (w * w)
        })
        .collect();
    Ok(EmbeddingConstant {
        convergence,
        constant: pairwise_sum(&terms).sqrt(),
        margin_lower,
        margin_upper,
        method: method.to_string(),
        estimated_indices: estimated,
        grid_size: grid.size(),
    })
}

/// Integral test on dyadic blocks `[2^k, 2^{k+1}]` of `t^{2λ+n-1} ω^{-2}(t)`.
fn doubling_test(omega: &RoParam, lambda: u32, dim: usize) -> Result<Convergence> {
    let power = (2 * lambda as usize + dim) as f64;
    let ln2 = std::f64::consts::LN_2;
    // In u = ln t the integrand is t^{2λ+n} ω^{-2}(t), evaluated in log form.
    let mut failure = None;
    let integrand = |u: f64| -> f64 {
        match omega.ln_eval(u.exp()) {
            Ok(l) => (power * u - 2.0 * l).exp(),
            Err(_) => f64::NAN,
        }
    };
    let mut blocks = Vec::with_capacity(DOUBLING_BLOCKS);
    for k in 0..DOUBLING_BLOCKS {
        let (a, b) = (k as f64 * ln2, (k + 1) as f64 * ln2);
        let v = adaptive_simpson(&integrand, a, b, 1e-12);
        if !v.is_finite() {
            failure = Some(k);
            break;
        }
        blocks.push(v);
    }
    if let Some(k) = failure {
        omega.eval(2f64.powi(k as i32))?;
        return Ok(Convergence::Inconclusive);
    }
    let tail = &blocks[DOUBLING_BLOCKS / 2..];
    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if max <= DOUBLING_DECAY {
        Convergence::Converges
    } else if min >= DOUBLING_GROWTH {
        Convergence::Diverges
    } else {
        Convergence::Inconclusive
    })
}

/// `max_{x_j, |μ| ≤ λ} |D^μ w(x_j)|`, derivatives taken spectrally.
pub fn sup_derivative_norm(w: &SpectralField, lambda: u32) -> f64 {
    let g = w.grid();
    let dim = g.dim();
    let mut best: f64 = 0.0;
    for mu in multi_indices(dim, lambda) {
        let d = w.map_modes(|m, c| {
            let xi: Vec<f64> = m[..dim].iter().map(|&v| v as f64).collect();
            c * monomial(&xi, &mu)
        });
        for s in d.to_samples() {
            best = best.max(s.norm());
        }
    }
    best
}

/// `‖χ w‖_φ`, the seminorms that define interior regularity.
///
/// The product is formed exactly on the doubled grid before the norm is taken.
pub fn localized_norm(w: &SpectralField, chi: &SpectralField, param: &RoParam) -> Result<f64> {
    check_grid(w.grid(), chi.grid())?;
    let samples = chi.to_samples();
    let scale = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let imag = samples.iter().map(|s| s.im.abs()).fold(0.0, f64::max);
    if imag > 1e-10 * scale.max(1.0) {
        return Err(Error::Precondition(format!(
            "cutoff must be real-valued (max imaginary part {imag:e})"
        )));
    }
    hnorm(&w.product_padded(chi)?, param)
}

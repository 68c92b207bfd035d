//! Interpolation with a function parameter between weighted `ℓ₂` spaces on
//! the lattice.
//!
//! For a pair `[X₀, X₁]` with weights `w₀, w₁` the generating operator is the
//! multiplier `j(ξ) = w₁(⟨ξ⟩)/w₀(⟨ξ⟩)`, and `‖w‖_{X_ψ} = ‖ψ(J) w‖_{X₀}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hspace::{check_grid, check_p, hnorm_sq_with, Grid, SpectralField, VectorField, WeightTable};
use crate::linalg::CMat;
use crate::numeric::{pairwise_sum, trial_rng};
use crate::report::{Report, Verdict};
use crate::roparam::{interp_psi, InterpParam, RoParam};

pub const NORM_EQUALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    x0: RoParam,
    x1: RoParam,
    grid: Grid,
    w0: WeightTable,
    spectrum: Vec<f64>,
}

impl AdmissiblePair {
    pub fn new(x0: RoParam, x1: RoParam, grid: Grid) -> Result<Self> {
        let w0 = WeightTable::new(&x0, grid)?;
        let w1 = WeightTable::new(&x1, grid)?;
        let spectrum: Vec<f64> = (0..grid.len())
            .map(|i| {
                let k = grid.norm_sq(i);
                w1.get(k) / w0.get(k)
            })
            .collect();
        if let Some(i) = spectrum.iter().position(|j| !(*j > 0.0) || !j.is_finite()) {
            return Err(Error::Precondition(format!(
                "generating operator is not positive at mode {:?}: j = {}",
                grid.mode(i),
                spectrum[i]
            )));
        }
        Ok(AdmissiblePair {
            x0,
            x1,
            grid,
            w0,
            spectrum,
        })
    }

    /// The Sobolev pair `[H^{(s0)}, H^{(s1)}]`.
    pub fn sobolev(s0: f64, s1: f64, grid: Grid) -> Result<Self> {
        Self::new(RoParam::power(s0), RoParam::power(s1), grid)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn x0(&self) -> &RoParam {
        &self.x0
    }

    pub fn x1(&self) -> &RoParam {
        &self.x1
    }

    /// `δ = min_ξ j(ξ)`, the embedding constant of `X₁` into `X₀`.
    pub fn delta(&self) -> f64 {
        self.spectrum.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `j(ξ)` per lattice mode in storage order.
pub fn generating_spectrum(pair: &AdmissiblePair) -> &[f64] {
    &pair.spectrum
}

/// Apply the generating operator: `(Jw)^(ξ) = j(ξ) ŵ(ξ)`.
pub fn apply_generator(pair: &AdmissiblePair, w: &SpectralField) -> Result<SpectralField> {
    check_grid(pair.grid, w.grid())?;
    let coeffs = w
        .coeffs()
        .iter()
        .zip(&pair.spectrum)
        .map(|(c, j)| c * j)
        .collect();
    SpectralField::from_coeffs(pair.grid, coeffs)
}

pub type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An interpolation parameter. Parameters built from RO inputs are
/// interpolation parameters by construction; arbitrary functions are marked
/// unverified.
#[derive(Clone)]
pub enum Psi {
    FromParam(InterpParam),
    Custom(PsiFn),
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::FromParam(p) => write!(f, "Psi({p:?})"),
            Psi::Custom(_) => write!(f, "Psi(custom)"),
        }
    }
}

impl Psi {
    pub fn from_param(phi: &RoParam, s0: f64, s1: f64) -> Result<Self> {
        Ok(Psi::FromParam(interp_psi(phi, s0, s1)?))
    }

    pub fn custom(f: PsiFn) -> Self {
        Psi::Custom(f)
    }

    pub fn is_verified(&self) -> bool {
        matches!(self, Psi::FromParam(_))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = match self {
            Psi::FromParam(p) => p.eval(t)?,
            Psi::Custom(f) => f(t),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Evaluation(format!("psi({t}) = {v} is not positive and finite")));
        }
        Ok(v)
    }
}

fn psi_table(pair: &AdmissiblePair, psi: &Psi) -> Result<Vec<f64>> {
    pair.spectrum.iter().map(|&j| psi.eval(j)).collect()
}

fn interp_norm_with(pair: &AdmissiblePair, psi_vals: &[f64], w: &SpectralField) -> f64 {
    let g = pair.grid;
    let terms: Vec<f64> = w
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let a = pair.w0.get(g.norm_sq(i)) * psi_vals[i];
            a * a * c.norm_sqr()
        })
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// `‖w‖_{X_ψ} = (Σ_ξ w₀²(⟨ξ⟩) ψ²(j(ξ)) |ŵ(ξ)|²)^{1/2}`.
pub fn interp_norm(pair: &AdmissiblePair, psi: &Psi, w: &SpectralField) -> Result<f64> {
    check_grid(pair.grid, w.grid())?;
    Ok(interp_norm_with(pair, &psi_table(pair, psi)?, w))
}

/// `max_ξ 1/ψ(j(ξ))`: the constant of `‖w‖_{X₀} ≤ C ‖w‖_{X_ψ}`.
pub fn x0_embedding_constant(pair: &AdmissiblePair, psi: &Psi) -> Result<f64> {
    Ok(psi_table(pair, psi)?
        .into_iter()
        .map(|v| 1.0 / v)
        .fold(0.0, f64::max))
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Norm equality `[H^{(s0)}, H^{(s1)}]_ψ = H^φ` for ψ built from φ.
pub fn verify_prop1(
    phi: &RoParam,
    s0: f64,
    s1: f64,
    grids: &[Grid],
    trials: usize,
    seed: u64,
) -> Result<Report> {
    if trials == 0 || grids.is_empty() {
        return Err(Error::Precondition("need at least one trial and one grid".into()));
    }
    let psi = Psi::from_param(phi, s0, s1)?;
    let mut report = Report::new("interpolation-norm-equality").with_config(serde_json::json!({
        "phi": phi.label(),
        "s0": s0,
        "s1": s1,
        "trials": trials,
    }));
    report.seeds.push(seed);
    let mut max_dev: f64 = 0.0;
    for &grid in grids {
        report.grid_sizes.push(grid.size());
        let pair = AdmissiblePair::sobolev(s0, s1, grid)?;
        let table = WeightTable::new(phi, grid)?;
        let psi_vals = psi_table(&pair, &psi)?;
        let devs = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let w = SpectralField::random(grid, &mut trial_rng(seed, t));
                rel_dev(interp_norm_with(&pair, &psi_vals, &w), hnorm_sq_with(&w, &table).sqrt())
            })
            .collect::<Vec<f64>>();
        max_dev = devs.into_iter().fold(max_dev, f64::max);
        // The boundary branch ψ(t) = φ(1) for t < 1 meets the lattice only at j(0) = 1.
        let zero = SpectralField::single_mode(grid, [0, 0, 0], Complex64::new(1.0, 0.0))?;
        let a = interp_norm_with(&pair, &psi_vals, &zero);
        max_dev = max_dev.max(rel_dev(a, phi.eval(1.0)?));
    }
    report.constant("max_rel_dev", max_dev);
    report.check(
        "max_rel_dev",
        "interp: interpolation norm of the Sobolev pair equals the H^phi norm",
        max_dev,
        NORM_EQUALITY_TOL,
        Verdict::from_bool(max_dev <= NORM_EQUALITY_TOL),
    );
    if let Psi::FromParam(p) = &psi {
        if p.estimated_preconditions {
            report.note("estimated preconditions: phi has no declared indices");
        }
    }
    Ok(report)
}

/// Interpolation norm of the direct sum, with `ψ(J)` formed per mode from the
/// block-diagonal generating matrix by Hermitian eigendecomposition.
pub fn direct_sum_norm(pairs: &[AdmissiblePair], psi: &Psi, u: &VectorField) -> Result<f64> {
    check_p(pairs.len(), u.p())?;
    let grid = u.grid();
    for pair in pairs {
        check_grid(pair.grid, grid)?;
    }
    let p = pairs.len();
    let mut terms = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let j = CMat::from_fn(p, p, |a, b| {
            if a == b {
                Complex64::new(pairs[a].spectrum[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let eig = j.symmetric_eigen();
        let mut fvals = Vec::with_capacity(p);
        for &lam in eig.eigenvalues.iter() {
            fvals.push(Complex64::new(psi.eval(lam)?, 0.0));
        }
        let q = &eig.eigenvectors;
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(fvals));
        let psi_j = q * d * q.adjoint();
        let v = nalgebra::DVector::from_vec(u.at(i));
        let out = psi_j * v;
        let k = grid.norm_sq(i);
        for (a, pair) in pairs.iter().enumerate() {
            let w = pair.w0.get(k);
            terms.push(w * w * out[a].norm_sqr());
        }
    }
    Ok(pairwise_sum(&terms).sqrt())
}

/// Interpolation commutes with finite direct sums, with equality of norms.
pub fn verify_prop3(pairs: &[AdmissiblePair], psi: &Psi, trials: usize, seed: u64) -> Result<Report> {
    if pairs.is_empty() || trials == 0 {
        return Err(Error::Precondition("need at least one pair and one trial".into()));
    }
    let grid = pairs[0].grid;
    for pair in pairs {
        check_grid(grid, pair.grid)?;
    }
    let tables = pairs
        .iter()
        .map(|pair| psi_table(pair, psi))
        .collect::<Result<Vec<_>>>()?;
    let devs = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let u = VectorField::random(grid, pairs.len(), &mut trial_rng(seed, t));
            let whole = direct_sum_norm(pairs, psi, &u)?;
            let parts: Vec<f64> = pairs
                .iter()
                .zip(&tables)
                .zip(u.components())
                .map(|((pair, vals), c)| interp_norm_with(pair, vals, c).powi(2))
                .collect();
            Ok(rel_dev(whole, pairwise_sum(&parts).sqrt()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_dev = devs.into_iter().fold(0.0, f64::max);
    let mut report = Report::new("interpolation-direct-sum").with_config(serde_json::json!({
        "pairs": pairs.iter().map(|p| [p.x0.label().to_string(), p.x1.label().to_string()]).collect::<Vec<_>>(),
        "trials": trials,
    }));
    report.grid_sizes.push(grid.size());
    report.seeds.push(seed);
    report.constant("max_rel_dev", max_dev);
    report.check(
        "max_rel_dev",
        "interp: norm of the interpolated direct sum equals the l2 sum of component norms",
        max_dev,
        NORM_EQUALITY_TOL,
        Verdict::from_bool(max_dev <= NORM_EQUALITY_TOL),
    );
    if !psi.is_verified() {
        report.note("unverified parameter: psi was supplied directly");
    }
    Ok(report)
}

//! Theorem-level experiments on the torus: a priori estimate, regularity
//! lifting, continuity of derivatives, and Fredholm analysis.

mod apriori;
mod continuity;
mod fredholm;
mod regularity;

pub use apriori::{apriori_check, AprioriOptions};
pub use continuity::continuity_check;
pub use fredholm::{
    fredholm_analysis, fredholm_check, projectors, FredholmAnalysis, KernelMode, Projectors,
};
pub use regularity::{bump, regularity_check, RegularityOptions};

use serde::{Deserialize, Serialize};

use crate::dnsystem::{DnNumbers, DnSystem};
use crate::error::{Error, Result};
use crate::hspace::{Grid, SpectralField, VectorField, WeightTable};
use crate::numeric::mode_phase;
use crate::roparam::RoParam;

pub const DEFAULT_GRIDS: [usize; 3] = [16, 32, 64];
/// Allowed spread of a constant across grid refinements.
pub const STABILITY_RATIO: f64 = 1.1;
/// Residual tolerance for exact discrete identities.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Successive increments shrinking at least this fast indicate a bounded sequence.
pub const TREND_DECAY: f64 = 0.9;
/// Successive increments shrinking no faster than this indicate growth.
pub const TREND_GROWTH: f64 = 0.95;

pub(crate) fn require_constant(sys: &DnSystem) -> Result<()> {
    if !sys.is_constant() {
        return Err(Error::Precondition("experiment needs constant coefficients".into()));
    }
    Ok(())
}

/// `(φρ^{m_k})_k`, `(φρ^{-l_j})_j`: weights of the solution and data spaces.
pub(crate) fn dn_weights(dn: &DnNumbers, phi: &RoParam) -> (Vec<RoParam>, Vec<RoParam>) {
    (
        dn.m.iter().map(|&m| phi.scale_power(m)).collect(),
        dn.l.iter().map(|&l| phi.scale_power(-l)).collect(),
    )
}

/// `f̂_j(ξ) = ⟨ξ⟩^{-n/2-ε} / w_j(⟨ξ⟩) · e^{iθ_j(ξ)}` with phases fixed per mode,
/// so that `Σ_j ‖f_j‖²_{w_j} = Σ_ξ p ⟨ξ⟩^{-n-2ε}` converges as the grid grows.
///
/// Negative `eps` gives a field whose norm diverges under refinement.
pub fn calibrated_field(grid: Grid, weights: &[RoParam], eps: f64, seed: u64) -> Result<VectorField> {
    let dim = grid.dim();
    let comps = weights
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let table = WeightTable::new(w, grid)?;
            Ok(SpectralField::from_fn(grid, |m| {
                let ns = m.iter().map(|v| (v * v) as u64).sum::<u64>();
                let b = (1.0 + ns as f64).sqrt();
                mode_phase(seed.wrapping_add(j as u64), &m[..dim]) * (b.powf(-(dim as f64) / 2.0 - eps) / table.get(ns))
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// Classify partial sums `S_N` over successive refinements.
///
/// Increments `S_{2N} - S_N` that shrink geometrically (ratio at most 0.9)
/// mean a finite limit; ratios of at least 0.95 mean growth. With only two
/// values the spread `max/min ≤ 1.1` decides.
pub fn refinement_trend(values: &[f64]) -> Trend {
    if values.len() < 2 {
        return Trend::Inconclusive;
    }
    let top = values.iter().cloned().fold(0.0, f64::max);
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.iter().all(|d| d.abs() <= 1e-10 * top) {
        return Trend::Bounded;
    }
    if values.len() == 2 {
        let low = values.iter().cloned().fold(f64::INFINITY, f64::min);
        return if top <= STABILITY_RATIO * low {
            Trend::Bounded
        } else {
            Trend::Unbounded
        };
    }
    let ratios: Vec<f64> = inc
        .windows(2)
        .map(|w| if w[0].abs() <= 1e-10 * top { 0.0 } else { w[1] / w[0] })
        .collect();
    let tail = inc.last().unwrap().abs() <= 1e-10 * top;
    if tail || ratios.iter().all(|r| r.abs() <= TREND_DECAY) {
        Trend::Bounded
    } else if ratios.iter().all(|&r| r >= TREND_GROWTH) && inc.iter().all(|&d| d > 0.0) {
        Trend::Unbounded
    } else {
        Trend::Inconclusive
    }
}

pub(crate) fn grids_from(dim: usize, sizes: &[usize]) -> Result<Vec<Grid>> {
    if sizes.is_empty() {
        return Err(Error::Config("need at least one grid size".into()));
    }
    sizes.iter().map(|&n| Grid::new(dim, n)).collect()
}

pub(crate) fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi == 0.0 && lo == 0.0 {
        1.0
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hspace::vector_hnorm;

    #[test]
    fn trend_classification() {
        let conv: Vec<f64> = (0..4).map(|k| 2.0 - 0.5f64.powi(k)).collect();
        assert_eq!(refinement_trend(&conv), Trend::Bounded);
        let log: Vec<f64> = (0..4).map(|k| 1.0 + k as f64).collect();
        assert_eq!(refinement_trend(&log), Trend::Unbounded);
        assert_eq!(refinement_trend(&[1.0, 1.0, 1.0]), Trend::Bounded);
        assert_eq!(refinement_trend(&[1.0, 1.05]), Trend::Bounded);
        assert_eq!(refinement_trend(&[1.0, 2.0]), Trend::Unbounded);
        assert_eq!(refinement_trend(&[1.0, 2.0, 2.92, 3.9]), Trend::Inconclusive);
    }

    #[test]
    fn calibrated_field_norm_converges() {
        let phi = RoParam::power_sin_log(0.5, 1.0);
        let sums: Vec<f64> = DEFAULT_GRIDS
            .iter()
            .map(|&n| {
                let g = Grid::new(2, n).unwrap();
                let f = calibrated_field(g, &[phi.clone()], 0.5, 3).unwrap();
                vector_hnorm(&f, &[phi.clone()]).unwrap().powi(2)
            })
            .collect();
        assert_eq!(refinement_trend(&sums), Trend::Bounded, "{sums:?}");
        let rough: Vec<f64> = DEFAULT_GRIDS
            .iter()
            .map(|&n| {
                let g = Grid::new(2, n).unwrap();
                let f = calibrated_field(g, &[phi.clone()], -0.25, 3).unwrap();
                vector_hnorm(&f, &[phi.clone()]).unwrap().powi(2)
            })
            .collect();
        assert_eq!(refinement_trend(&rough), Trend::Unbounded, "{rough:?}");
    }

    #[test]
    fn calibrated_field_is_consistent_across_grids() {
        let w = [RoParam::power(1.0)];
        let a = calibrated_field(Grid::new(1, 8).unwrap(), &w, 0.5, 0).unwrap();
        let b = calibrated_field(Grid::new(1, 16).unwrap(), &w, 0.5, 0).unwrap();
        for m in [[-4, 0, 0], [0, 0, 0], [3, 0, 0]] {
            assert_eq!(a.component(0).coeff(&m), b.component(0).coeff(&m));
        }
    }
}

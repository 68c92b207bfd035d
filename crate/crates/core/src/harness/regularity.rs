//! Regularity lifting: data in `⊕ H^{φρ^{-l_j}}` gives solutions in
//! `⊕ H^{φρ^{m_k}}`, globally and after localization by cutoffs.

use super::{
    calibrated_field, dn_weights, fredholm_analysis, grids_from, projectors, refinement_trend, spread,
    FredholmAnalysis, Trend, RESIDUAL_TOL, STABILITY_RATIO,
};
use crate::dnsystem::DnSystem;
use crate::error::{Error, Result};
use crate::hspace::{localized_norm, vector_hnorm_with, weight_tables, Grid, SpectralField, VectorField, WeightTable};
use crate::linalg::{spectral_norm, CMat};
use crate::report::{Report, Verdict};
use crate::roparam::{effective_indices, RoParam};
use num_complex::Complex64;

/// Fine grid per dimension on which cutoffs are sampled before truncation,
/// so every lattice sees the same coefficients.
const CUTOFF_FINE: [usize; 3] = [1024, 512, 128];

#[derive(Debug, Clone)]
pub struct RegularityOptions {
    pub grids: Vec<usize>,
    /// Decay margin of the synthesized data: `‖f‖²` behaves like `Σ ⟨ξ⟩^{-n-2ε}`.
    pub eps: f64,
    /// Margin of the rough remainder in the localized variant (negative: divergent).
    pub rough_eps: f64,
    pub seed: u64,
    /// Project the data onto the range instead of reporting it unsolvable.
    pub project: bool,
    pub localized: bool,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            grids: super::DEFAULT_GRIDS.to_vec(),
            eps: 0.5,
            rough_eps: -0.25,
            seed: 0,
            project: false,
            localized: true,
        }
    }
}

/// Order of the piecewise-polynomial step used by the cutoffs. Each step is
/// `C^k` with Fourier coefficients decaying like `|ξ|^{-k-2}`, so cutoffs act
/// boundedly on weights of order below `k + 1/2` and stay resolved at `N = 16`.
pub const CUTOFF_SMOOTHNESS: i32 = 4;

/// `C^k` step from 0 at `s ≤ 0` to 1 at `s ≥ 1`: the regularized incomplete
/// beta function `I_s(k+1, k+1)`.
fn smooth_step(s: f64) -> f64 {
    let k = CUTOFF_SMOOTHNESS;
    let s = s.clamp(0.0, 1.0);
    let n = 2 * k + 1;
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=n {
        if j > k {
            acc += binom * s.powi(j) * (1.0 - s).powi(n - j);
        }
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Periodic distance from `x` to `c`.
fn wrap(x: f64, c: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (x - c).rem_euclid(tau);
    d.min(tau - d)
}

/// `Π_i h(|x_i - c|)` with `h = 1` on `[0, inner]`, `h = 0` beyond `outer`.
pub fn bump(grid: Grid, center: f64, inner: f64, outer: f64) -> Result<SpectralField> {
    if !(0.0 <= inner && inner < outer && outer <= std::f64::consts::PI) {
        return Err(Error::Precondition(format!(
            "cutoff radii must satisfy 0 <= inner < outer <= pi, got {inner}, {outer}"
        )));
    }
    let dim = grid.dim();
    let fine = Grid::new(dim, CUTOFF_FINE[dim - 1].max(grid.size()))?;
    let field = SpectralField::from_physical(fine, |x| {
        let v: f64 = x[..dim]
            .iter()
            .map(|&xi| 1.0 - smooth_step((wrap(xi, center) - inner) / (outer - inner)))
            .product();
        Complex64::new(v, 0.0)
    });
    field.resample(grid)
}

fn one_minus(w: &SpectralField) -> SpectralField {
    let mut out = w.scaled(Complex64::new(-1.0, 0.0));
    let i = w.grid().index_of(&[0, 0, 0]).expect("zero mode");
    out.coeffs_mut()[i] += Complex64::new(1.0, 0.0);
    out
}

/// Low frequencies of the rough remainder carry no roughness; dropping them
/// keeps the cutoff's spectral tail from masking the growth of the remainder.
const ROUGH_LOW_CUT: i64 = 4;

fn high_pass(f: &VectorField) -> Result<VectorField> {
    VectorField::new(
        f.components()
            .iter()
            .map(|c| {
                c.map_modes(|m, v| {
                    if m.iter().map(|x| x * x).sum::<i64>() < ROUGH_LOW_CUT * ROUGH_LOW_CUT {
                        Complex64::new(0.0, 0.0)
                    } else {
                        v
                    }
                })
            })
            .collect(),
    )
}

/// `χ·f` formed exactly on the doubled grid and truncated back.
fn multiply(chi: &SpectralField, f: &VectorField) -> Result<VectorField> {
    let g = f.grid();
    let comps = f
        .components()
        .iter()
        .map(|c| c.product_padded(chi)?.resample(g))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// A cutoff family: `χ` with plateau radius `inner` and support radius
/// `outer`, the data cutoff `χ'` equal to 1 on a neighborhood of `supp χ`, and
/// the remainder cutoff `η = 1 - χ'`.
struct Cutoffs {
    chi: SpectralField,
    chi_data: SpectralField,
    eta: SpectralField,
}

fn cutoff_family(grid: Grid, inner: f64, outer: f64) -> Result<Cutoffs> {
    let c = std::f64::consts::PI;
    let data = bump(grid, c, outer + CUTOFF_GAP, c)?;
    Ok(Cutoffs {
        chi: bump(grid, c, inner, outer)?,
        chi_data: data.clone(),
        eta: one_minus(&data),
    })
}

/// Distance between `supp χ` and `supp η`.
const CUTOFF_GAP: f64 = 0.2;

/// Default cutoff battery as `(inner, outer)` radii around the torus center.
pub const CUTOFF_BATTERY: [(f64, f64); 2] = [(0.2, 1.2), (0.0, 0.8)];

struct Solved {
    u: VectorField,
    f: VectorField,
}

fn prepare(
    analysis: &FredholmAnalysis,
    f: VectorField,
    project: bool,
    report: &mut Report,
    label: &str,
) -> Result<Option<Solved>> {
    let f = if project {
        projectors(analysis)?.p_plus(&f)?
    } else {
        let ob = analysis.obstruction(&f)?;
        if ob > RESIDUAL_TOL {
            report.check(
                format!("{label}.solvable"),
                "harness: right-hand side orthogonal to N+ (pass --project to project it)",
                ob,
                RESIDUAL_TOL,
                Verdict::Fail,
            );
            return Ok(None);
        }
        f
    };
    let u = analysis.solve(&f)?;
    Ok(Some(Solved { u, f }))
}

pub fn regularity_check(sys: &DnSystem, phi: &RoParam, opts: &RegularityOptions) -> Result<Report> {
    let dn = sys.require_dn()?.clone();
    let (sol, data) = dn_weights(&dn, phi);
    let grids = grids_from(sys.dim(), &opts.grids)?;
    if opts.localized {
        for w in &sol {
            let (_, upper, _) = effective_indices(w)?;
            if upper >= CUTOFF_SMOOTHNESS as f64 + 0.5 {
                return Err(Error::Precondition(format!(
                    "solution weight {} has upper index {upper} beyond the cutoff smoothness {}",
                    w.label(),
                    CUTOFF_SMOOTHNESS
                )));
            }
        }
    }
    let mut report = Report::new("regularity").with_config(serde_json::json!({
        "p": sys.p(),
        "n": sys.dim(),
        "phi": phi.label(),
        "eps": opts.eps,
        "rough_eps": opts.rough_eps,
        "project": opts.project,
        "localized": opts.localized,
    }));
    report.seeds.push(opts.seed);

    let mut u_sq = Vec::new();
    let mut f_sq = Vec::new();
    let mut bounds = Vec::new();
    let mut excess: f64 = 0.0;
    let mut loc_sq: Vec<Vec<f64>> = vec![Vec::new(); CUTOFF_BATTERY.len()];
    let mut loc_global: Vec<Vec<f64>> = vec![Vec::new(); CUTOFF_BATTERY.len()];
    let mut residual: f64 = 0.0;
    for &grid in &grids {
        report.grid_sizes.push(grid.size());
        let analysis = fredholm_analysis(sys, phi, grid)?;
        let sol_t = weight_tables(&sol, grid)?;
        let data_t = weight_tables(&data, grid)?;
        let f0 = calibrated_field(grid, &data, opts.eps, opts.seed)?;
        let Some(s) = prepare(&analysis, f0.clone(), opts.project, &mut report, "global")? else {
            return Ok(report);
        };
        residual = residual.max(analysis.relative_residual(&s.u, &s.f)?);
        let un = vector_hnorm_with(&s.u, &sol_t);
        let fn_ = vector_hnorm_with(&s.f, &data_t);
        let k = solve_bound(&analysis, &sol_t, &data_t);
        excess = excess.max(un / (k * fn_));
        report.constant(format!("ratio.N{}", grid.size()), un / fn_);
        report.constant(format!("bound.N{}", grid.size()), k);
        u_sq.push(un * un);
        f_sq.push(fn_ * fn_);
        bounds.push(k);

        if opts.localized {
            let rough = high_pass(&calibrated_field(grid, &data, opts.rough_eps, opts.seed.wrapping_add(1000))?)?;
            for (c, &(inner, outer)) in CUTOFF_BATTERY.iter().enumerate() {
                let cut = cutoff_family(grid, inner, outer)?;
                let f = multiply(&cut.chi_data, &f0)?.add(&multiply(&cut.eta, &rough)?)?;
                let label = format!("localized{c}");
                let Some(s) = prepare(&analysis, f, opts.project, &mut report, &label)? else {
                    return Ok(report);
                };
                residual = residual.max(analysis.relative_residual(&s.u, &s.f)?);
                let mut total = 0.0;
                for (k, w) in sol.iter().enumerate() {
                    total += localized_norm(s.u.component(k), &cut.chi, w)?.powi(2);
                }
                loc_sq[c].push(total);
                let fr = projectors(&analysis)?.p_plus(&multiply(&cut.eta, &rough)?)?;
                loc_global[c].push(vector_hnorm_with(&analysis.solve(&fr)?, &sol_t).powi(2));
            }
        }
    }

    report.check(
        "solve_residual",
        "harness: computed u solves Au = f on the lattice",
        residual,
        RESIDUAL_TOL,
        Verdict::from_bool(residual <= RESIDUAL_TOL),
    );
    report.check(
        "global_bound",
        "harness: |u|_{phi rho^m} <= K |f|_{phi rho^-l} with K the exact per-mode solve bound",
        excess,
        1.0 + 1e-8,
        Verdict::from_bool(excess <= 1.0 + 1e-8),
    );
    let s = spread(&bounds);
    report.check(
        "bound_stable",
        "harness: solve bound K stable across refinement (max/min)",
        s,
        STABILITY_RATIO,
        Verdict::from_bool(s <= STABILITY_RATIO),
    );
    let t = refinement_trend(&u_sq);
    report.constant("u_norm_sq_last", *u_sq.last().unwrap());
    report.constant("f_norm_sq_last", *f_sq.last().unwrap());
    report.check(
        "global_uniform",
        "harness: |u|_{phi rho^m} bounded uniformly across refinements",
        trend_value(&u_sq),
        super::TREND_DECAY,
        trend_verdict(t),
    );
    if opts.localized {
        for (c, &(inner, outer)) in CUTOFF_BATTERY.iter().enumerate() {
            let t = refinement_trend(&loc_sq[c]);
            report.constant(format!("localized{c}.norm_sq_last"), *loc_sq[c].last().unwrap());
            report.check(
                format!("localized{c}.uniform"),
                format!("harness: |chi u|_{{phi rho^m}} bounded across refinements for cutoff ({inner}, {outer}) with data regular only near supp chi"),
                trend_value(&loc_sq[c]),
                super::TREND_DECAY,
                trend_verdict(t),
            );
            if grids.len() > 2 {
                let g = refinement_trend(&loc_global[c]);
                report.check(
                    format!("localized{c}.control"),
                    "harness: the solution of the rough remainder alone has growing norm",
                    trend_value(&loc_global[c]),
                    super::TREND_GROWTH,
                    Verdict::from_bool(g == Trend::Unbounded),
                );
            }
        }
    }
    Ok(report)
}

/// `sup_ξ ‖diag(w_sol) A(ξ)⁺ diag(1/w_data)‖₂` for the pseudo-inverse used by the solver.
fn solve_bound(analysis: &FredholmAnalysis, sol_t: &[WeightTable], data_t: &[WeightTable]) -> f64 {
    let grid = analysis.grid();
    let mut best: f64 = 0.0;
    for (i, m) in analysis.pinv.iter().enumerate() {
        let ns = grid.norm_sq(i);
        let w = CMat::from_fn(m.nrows(), m.ncols(), |k, j| m[(k, j)] * (sol_t[k].get(ns) / data_t[j].get(ns)));
        best = best.max(spectral_norm(&w));
    }
    best
}

/// Largest ratio of successive increments, the statistic behind [`refinement_trend`].
fn trend_value(values: &[f64]) -> f64 {
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    inc.windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max)
}

fn trend_verdict(t: Trend) -> Verdict {
    match t {
        Trend::Bounded => Verdict::Pass,
        Trend::Unbounded => Verdict::Fail,
        Trend::Inconclusive => Verdict::Inconclusive,
    }
}

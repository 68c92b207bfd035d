//! The a priori estimate
//! `‖u‖_{φρ^m} ≤ c (‖Au‖_{φρ^{-l}} + ‖u‖_{φρ^{m-σ}})`.

use rayon::prelude::*;

use super::{dn_weights, grids_from, spread, STABILITY_RATIO};
use crate::dnsystem::DnSystem;
use crate::error::{Error, Result};
use crate::hspace::{vector_hnorm_with, weight_tables, Grid, VectorField, WeightTable};
use crate::numeric::trial_rng;
use crate::pdo::{build_parametrix, default_cutoff};
use crate::report::{Report, Verdict};
use crate::roparam::RoParam;

/// Relative slack when comparing empirical and predicted constants.
pub const CONSTANT_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AprioriOptions {
    pub sigma: f64,
    pub grids: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Parametrix cutoff; `None` uses the default scan.
    pub radius: Option<f64>,
}

impl Default for AprioriOptions {
    fn default() -> Self {
        AprioriOptions {
            sigma: 1.0,
            grids: super::DEFAULT_GRIDS.to_vec(),
            trials: 100,
            seed: 0,
            radius: None,
        }
    }
}

struct GridResult {
    size: usize,
    ratio_emp: f64,
    c_emp: f64,
    c_pred: Option<f64>,
    norm_b: Option<f64>,
    norm_t1: Option<f64>,
}

/// Divide component `k` by its solution weight, so `‖u‖` in the solution
/// space is a convergent `Σ ⟨ξ⟩^{-n-1}` and every ratio has a grid-independent limit.
fn shaped(u: VectorField, tables: &[WeightTable]) -> Result<VectorField> {
    VectorField::new(
        u.into_components()
            .into_iter()
            .zip(tables)
            .map(|(c, t)| c.map_modes(|m, v| v / t.get(m.iter().map(|&x| (x * x) as u64).sum())))
            .collect(),
    )
}

fn truncate(u: &VectorField, grid: Grid) -> Result<VectorField> {
    VectorField::new(u.components().iter().map(|c| c.resample(grid)).collect::<Result<Vec<_>>>()?)
}

/// For each grid: `ratio_emp = max LHS/(F + L)` over random `u` with `f = Au`,
/// and, when a parametrix exists, `c_emp = max(‖Bf‖/‖f‖, ‖T₁u‖/‖u‖_{φρ^{m-σ}})`
/// against `c_pred = max(‖B‖, ‖T₁‖)` computed exactly per mode.
pub fn apriori_check(sys: &DnSystem, phi: &RoParam, opts: &AprioriOptions) -> Result<Report> {
    if !(opts.sigma > 0.0) {
        return Err(Error::Precondition(format!("sigma must be > 0, got {}", opts.sigma)));
    }
    if opts.trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    let dn = sys.require_dn()?.clone();
    let (sol, data) = dn_weights(&dn, phi);
    let lower: Vec<RoParam> = sol.iter().map(|w| w.scale_power(-opts.sigma)).collect();
    let empirical_only = !sys.is_constant();
    let p = sys.p();

    let mut results = Vec::new();
    let grids = grids_from(sys.dim(), &opts.grids)?;
    let finest = *grids.iter().max_by_key(|g| g.size()).unwrap();
    for grid in grids {
        let sol_t = weight_tables(&sol, grid)?;
        let data_t = weight_tables(&data, grid)?;
        let low_t = weight_tables(&lower, grid)?;
        let parts = if empirical_only {
            None
        } else {
            let r = match opts.radius {
                Some(r) => r,
                None => default_cutoff(sys, grid)?,
            };
            let bundle = build_parametrix(sys, r, grid)?;
            let b = bundle.b.tabulate(grid)?;
            let t1 = bundle.t1.tabulate(grid)?;
            let nb = b.weighted_norm(&data_t, &sol_t);
            let nt = t1.weighted_norm(&low_t, &sol_t);
            Some((b, t1, nb, nt))
        };
        let per_trial = (0..opts.trials as u64)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64)> {
                // Drawn on the finest grid and truncated, so refinement only adds modes.
                let raw = VectorField::random(finest, p, &mut trial_rng(opts.seed, t));
                let u = shaped(truncate(&raw, grid)?, &sol_t)?;
                let f = sys.apply(&u)?;
                let lhs = vector_hnorm_with(&u, &sol_t);
                let fn_ = vector_hnorm_with(&f, &data_t);
                let low = vector_hnorm_with(&u, &low_t);
                let ratio = lhs / (fn_ + low);
                let split = match &parts {
                    None => ratio,
                    Some((b, t1, _, _)) => {
                        let bf = if fn_ > 0.0 { vector_hnorm_with(&b.apply(&f)?, &sol_t) / fn_ } else { 0.0 };
                        let tu = if low > 0.0 { vector_hnorm_with(&t1.apply(&u)?, &sol_t) / low } else { 0.0 };
                        bf.max(tu)
                    }
                };
                Ok((ratio, split))
            })
            .collect::<Result<Vec<_>>>()?;
        let ratio_emp = per_trial.iter().map(|r| r.0).fold(0.0, f64::max);
        let c_emp = per_trial.iter().map(|r| r.1).fold(0.0, f64::max);
        results.push(GridResult {
            size: grid.size(),
            ratio_emp,
            c_emp,
            c_pred: parts.as_ref().map(|p| p.2.max(p.3)),
            norm_b: parts.as_ref().map(|p| p.2),
            norm_t1: parts.as_ref().map(|p| p.3),
        });
    }

    let mut report = Report::new("apriori-estimate").with_config(serde_json::json!({
        "p": p,
        "n": sys.dim(),
        "phi": phi.label(),
        "sigma": opts.sigma,
        "trials": opts.trials,
        "l": dn.l,
        "m": dn.m,
        "mode": if empirical_only { "empirical" } else { "parametrix" },
    }));
    report.seeds.push(opts.seed);
    for r in &results {
        report.grid_sizes.push(r.size);
        report.constant(format!("c_emp.N{}", r.size), r.c_emp);
        report.constant(format!("ratio_emp.N{}", r.size), r.ratio_emp);
        if let (Some(c), Some(b), Some(t)) = (r.c_pred, r.norm_b, r.norm_t1) {
            report.constant(format!("c_pred.N{}", r.size), c);
            report.constant(format!("norm_B.N{}", r.size), b);
            report.constant(format!("norm_T1.N{}", r.size), t);
        }
    }
    let c_emp = results.iter().map(|r| r.c_emp).fold(0.0, f64::max);
    let ratio_emp = results.iter().map(|r| r.ratio_emp).fold(0.0, f64::max);
    report.constant("c_emp", c_emp);
    report.constant("ratio_emp", ratio_emp);

    if !empirical_only {
        let mut excess: f64 = 0.0;
        let mut c_pred: f64 = 0.0;
        for r in &results {
            let cp = r.c_pred.unwrap();
            c_pred = c_pred.max(cp);
            excess = excess.max(r.c_emp.max(r.ratio_emp) / cp);
        }
        report.constant("c_pred", c_pred);
        report.check(
            "c_emp_le_c_pred",
            "harness: a priori estimate holds with c = max(|B|, |T1|); empirical constants at most c_pred (1 + 1e-8)",
            excess,
            1.0 + CONSTANT_SLACK,
            Verdict::from_bool(excess <= 1.0 + CONSTANT_SLACK),
        );
    } else {
        report.note("empirical mode: variable coefficients, no parametrix constant");
    }
    if results.len() > 1 {
        let s = spread(&results.iter().map(|r| r.c_emp).collect::<Vec<_>>());
        report.check(
            "c_emp_stable",
            "harness: c_emp stable across grid refinement (max/min)",
            s,
            STABILITY_RATIO,
            Verdict::from_bool(s <= STABILITY_RATIO),
        );
    }
    Ok(report)
}

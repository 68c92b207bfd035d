//! Continuity of derivatives: `u_k ∈ C^λ_b` whenever
//! `∫₁^∞ t^{2λ+n-1-2m_k} φ^{-2}(t) dt < ∞`.

use super::{
    calibrated_field, dn_weights, fredholm_analysis, grids_from, projectors, refinement_trend, Trend,
    RESIDUAL_TOL,
};
use crate::dnsystem::DnSystem;
use crate::error::{Error, Result};
use crate::hspace::{embedding_constant, hnorm, sup_derivative_norm, Convergence};
use crate::report::{Report, Verdict};
use crate::roparam::RoParam;

/// Decay margin of the synthesized data.
const DATA_EPS: f64 = 0.5;

/// With `ω = φρ^{m_k}`: when the integral condition holds, solve `Au = f` for
/// calibrated data and check `sup_{|μ|≤λ} |D^μ u_k| ≤ C ‖u_k‖_ω` with the
/// discrete embedding constant `C`, which must stay bounded under refinement.
/// When the condition fails, `C` must grow instead. Data is projected onto the
/// range, since only the solution's smoothness is in question.
pub fn continuity_check(
    sys: &DnSystem,
    phi: &RoParam,
    lambda: u32,
    k: usize,
    grids: &[usize],
    seed: u64,
) -> Result<Report> {
    let dn = sys.require_dn()?.clone();
    if k >= sys.p() {
        return Err(Error::Precondition(format!(
            "component index {k} out of range for p = {}",
            sys.p()
        )));
    }
    let (sol, data) = dn_weights(&dn, phi);
    let omega = sol[k].clone();
    let grids = grids_from(sys.dim(), grids)?;
    let mut report = Report::new("continuity").with_config(serde_json::json!({
        "p": sys.p(),
        "n": sys.dim(),
        "phi": phi.label(),
        "omega": omega.label(),
        "lambda": lambda,
        "k": k,
    }));
    report.seeds.push(seed);

    let mut c_sq = Vec::new();
    let mut convergence = None;
    let mut excess: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for &grid in &grids {
        report.grid_sizes.push(grid.size());
        let ec = embedding_constant(&omega, lambda, grid)?;
        report.constant(format!("C.N{}", grid.size()), ec.constant);
        if convergence.is_none() {
            report.constant("margin_lower", ec.margin_lower);
            report.constant("margin_upper", ec.margin_upper);
            if ec.estimated_indices {
                report.note("estimated preconditions: omega has no declared indices");
            }
        }
        convergence = Some(ec.convergence);
        c_sq.push(ec.constant * ec.constant);
        if ec.convergence != Convergence::Converges {
            continue;
        }
        let analysis = fredholm_analysis(sys, phi, grid)?;
        let f = calibrated_field(grid, &data, DATA_EPS, seed)?;
        let f = projectors(&analysis)?.p_plus(&f)?;
        let u = analysis.solve(&f)?;
        residual = residual.max(analysis.relative_residual(&u, &f)?);
        let uk = u.component(k);
        let sup = sup_derivative_norm(uk, lambda);
        let norm = hnorm(uk, &omega)?;
        report.constant(format!("sup.N{}", grid.size()), sup);
        report.constant(format!("norm.N{}", grid.size()), norm);
        if norm > 0.0 {
            excess = excess.max(sup / (ec.constant * norm));
        } else if sup > 0.0 {
            excess = f64::INFINITY;
        }
    }

    let trend = refinement_trend(&c_sq);
    match convergence.expect("at least one grid") {
        Convergence::Converges => {
            report.check(
                "integral_condition",
                "hspace: integral test for H^omega in C^lambda_b",
                report.get("margin_lower").unwrap(),
                0.0,
                Verdict::Pass,
            );
            report.check(
                "solve_residual",
                "harness: computed u solves Au = f on the lattice",
                residual,
                RESIDUAL_TOL,
                Verdict::from_bool(residual <= RESIDUAL_TOL),
            );
            report.check(
                "sup_le_c_norm",
                "harness: sup |D^mu u_k| <= C |u_k|_omega for |mu| <= lambda",
                excess,
                1.0 + 1e-10,
                Verdict::from_bool(excess <= 1.0 + 1e-10),
            );
            report.check(
                "constant_bounded",
                "harness: embedding constant C bounded across refinements",
                *c_sq.last().unwrap(),
                0.0,
                match trend {
                    Trend::Bounded => Verdict::Pass,
                    Trend::Unbounded => Verdict::Fail,
                    Trend::Inconclusive => Verdict::Inconclusive,
                },
            );
        }
        Convergence::Diverges => {
            report.check(
                "constant_diverges",
                "harness: integral condition fails and C grows under refinement",
                *c_sq.last().unwrap(),
                0.0,
                match trend {
                    Trend::Unbounded => Verdict::Pass,
                    Trend::Bounded => Verdict::Fail,
                    Trend::Inconclusive => Verdict::Inconclusive,
                },
            );
        }
        Convergence::Inconclusive => {
            report.check(
                "integral_condition",
                "hspace: integral test for H^omega in C^lambda_b undecided at the boundary",
                report.get("margin_lower").unwrap(),
                0.0,
                Verdict::Inconclusive,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnsystem::library::*;

    const GRIDS: [usize; 3] = [16, 32, 64];

    #[test]
    fn one_minus_laplacian_gives_c1() {
        let r = continuity_check(&one_minus_laplacian(1).unwrap(), &RoParam::power(0.0), 1, 0, &GRIDS, 0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.to_json());
        assert!(r.get("sup.N64").unwrap() > 0.0);
    }

    #[test]
    fn sobolev_threshold_shifted_by_m() {
        // ω = Power(s + 2) embeds in C^λ iff s + 2 > λ + n/2.
        let sys = one_minus_laplacian(1).unwrap();
        let pass = continuity_check(&sys, &RoParam::power(1.0), 2, 0, &GRIDS, 0).unwrap();
        assert_eq!(pass.verdict, Verdict::Pass, "{}", pass.to_json());
        let fail = continuity_check(&sys, &RoParam::power(-1.0), 2, 0, &GRIDS, 0).unwrap();
        assert_eq!(fail.verdict, Verdict::Pass, "{}", fail.to_json());
        assert!(fail.checks.iter().any(|c| c.name == "constant_diverges"));
    }

    #[test]
    fn boundary_is_inconclusive() {
        let r = continuity_check(&one_minus_laplacian(1).unwrap(), &RoParam::power(-0.5), 1, 0, &GRIDS, 0).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive, "{}", r.to_json());
    }

    #[test]
    fn kernel_systems_and_components() {
        let r = continuity_check(&cauchy_riemann().unwrap(), &RoParam::power(1.5), 1, 1, &GRIDS, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.to_json());
        assert!(continuity_check(&cauchy_riemann().unwrap(), &RoParam::power(1.5), 1, 2, &GRIDS, 3).is_err());
    }
}

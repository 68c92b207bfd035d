//! Kernel, cokernel, index and solvability of a constant-coefficient system.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{dn_weights, require_constant, RESIDUAL_TOL};
use crate::dnsystem::DnSystem;
use crate::error::{Error, Result};
use crate::hspace::{vector_pair, weight_tables, vector_hnorm_with, Grid, Mode, SpectralField, VectorField, WeightTable};
use crate::linalg::{null_spaces, pseudo_inverse, singular_values, CMat, CVec, RANK_TOL};
use crate::numeric::trial_rng;
use crate::pdo::mode_vec;
use crate::report::{Report, Verdict};
use crate::roparam::RoParam;

/// Rank decisions with `σ_min/σ_max` inside `(1e-9, 1e-6]` are reported as close calls.
const CLOSE_CALL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct KernelMode {
    pub mode: Mode,
    pub kernel: Vec<CVec>,
    pub cokernel: Vec<CVec>,
    /// `σ_min/σ_max` of the symbol at this mode.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct FredholmAnalysis {
    sys: DnSystem,
    grid: Grid,
    pub kernel_modes: Vec<KernelMode>,
    pub n_basis: Vec<VectorField>,
    pub nplus_basis: Vec<VectorField>,
    pub index: i64,
    pub dims: (usize, usize),
    pub(super) pinv: Vec<CMat>,
    data_weights: Vec<WeightTable>,
    pub report: Report,
}

fn mode_field(grid: Grid, mode: Mode, v: &CVec) -> Result<VectorField> {
    let comps = v
        .iter()
        .map(|&c| SpectralField::single_mode(grid, mode, c))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

fn residual_norm(a: &VectorField) -> f64 {
    a.components().iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
}

pub fn fredholm_analysis(sys: &DnSystem, phi: &RoParam, grid: Grid) -> Result<FredholmAnalysis> {
    require_constant(sys)?;
    let dn = sys.require_dn()?;
    let (_, data) = dn_weights(dn, phi);
    let data_weights = weight_tables(&data, grid)?;
    let dim = sys.dim();
    let x0 = vec![0.0; dim];
    let scanned: Vec<(CMat, Option<KernelMode>, f64)> = grid
        .modes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, m)| {
            let a = sys.full_symbol(&x0, &mode_vec(m, dim));
            let s = singular_values(&a);
            let hi = s[0];
            let ratio = if hi == 0.0 { 0.0 } else { s[s.len() - 1] / hi };
            let km = if ratio <= RANK_TOL {
                let (kernel, cokernel) = null_spaces(&a, RANK_TOL);
                Some(KernelMode {
                    mode: *m,
                    kernel,
                    cokernel,
                    ratio,
                })
            } else {
                None
            };
            (pseudo_inverse(&a, RANK_TOL), km, ratio)
        })
        .collect();
    let mut pinv = Vec::with_capacity(grid.len());
    let mut kernel_modes = Vec::new();
    let mut close_calls = 0usize;
    let mut inexact = 0usize;
    for (p, km, ratio) in scanned {
        pinv.push(p);
        if ratio > RANK_TOL && ratio <= CLOSE_CALL {
            close_calls += 1;
        }
        if let Some(km) = km {
            if ratio > 0.0 {
                inexact += 1;
            }
            kernel_modes.push(km);
        }
    }
    let mut n_basis = Vec::new();
    let mut nplus_basis = Vec::new();
    for km in &kernel_modes {
        for v in &km.kernel {
            n_basis.push(mode_field(grid, km.mode, v)?);
        }
        for w in &km.cokernel {
            nplus_basis.push(mode_field(grid, km.mode, w)?);
        }
    }
    let dims = (n_basis.len(), nplus_basis.len());
    let index = dims.0 as i64 - dims.1 as i64;

    let mut report = Report::new("fredholm").with_config(serde_json::json!({
        "p": sys.p(),
        "n": dim,
        "phi": phi.label(),
    }));
    report.grid_sizes.push(grid.size());
    report.constant("dim_N", dims.0 as f64);
    report.constant("dim_N_plus", dims.1 as f64);
    report.constant("index", index as f64);
    report.constant("close_calls", close_calls as f64);
    if close_calls > 0 || inexact > 0 {
        report.note(format!(
            "rank decisions: {inexact} singular modes below 1e-9 with nonzero sigma_min, {close_calls} modes with ratio in (1e-9, 1e-6]"
        ));
    }

    let adj = sys.formal_adjoint();
    let mut worst: f64 = 0.0;
    for u in &n_basis {
        worst = worst.max(residual_norm(&sys.apply(u)?));
    }
    for v in &nplus_basis {
        worst = worst.max(residual_norm(&adj.apply(v)?));
    }
    report.check(
        "basis_residual",
        "harness: A u = 0 on the N basis and A+ v = 0 on the N+ basis",
        worst,
        RESIDUAL_TOL,
        Verdict::from_bool(worst <= RESIDUAL_TOL),
    );
    report.check(
        "index_zero",
        "harness: index = dim N - dim N+ vanishes for constant coefficients on the torus",
        index as f64,
        0.0,
        Verdict::from_bool(index == 0),
    );

    // N+ against the kernel of the formal adjoint, per mode.
    let mut angle: f64 = 0.0;
    for km in &kernel_modes {
        let a_adj = adj.full_symbol(&x0, &mode_vec(&km.mode, dim));
        let (adj_kernel, _) = null_spaces(&a_adj, RANK_TOL);
        angle = angle.max(subspace_distance(&km.cokernel, &adj_kernel, sys.p()));
    }
    report.check(
        "adjoint_consistency",
        "harness: N+ equals the kernel of the formal adjoint (projector distance)",
        angle,
        1e-8,
        Verdict::from_bool(angle <= 1e-8),
    );

    Ok(FredholmAnalysis {
        sys: sys.clone(),
        grid,
        kernel_modes,
        n_basis,
        nplus_basis,
        index,
        dims,
        pinv,
        data_weights,
        report,
    })
}

fn projector(basis: &[CVec], p: usize) -> CMat {
    let mut out = CMat::zeros(p, p);
    for v in basis {
        out += v * v.adjoint();
    }
    out
}

/// Spectral norm distance between the orthogonal projectors onto two spans.
fn subspace_distance(a: &[CVec], b: &[CVec], p: usize) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    crate::linalg::spectral_norm(&(projector(a, p) - projector(b, p)))
}

impl FredholmAnalysis {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn system(&self) -> &DnSystem {
        &self.sys
    }

    /// `max_v |(f, v)|` over the N+ basis, relative to the plain norm of `f`.
    pub fn obstruction(&self, f: &VectorField) -> Result<f64> {
        let scale = residual_norm(f).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for v in &self.nplus_basis {
            worst = worst.max(vector_pair(f, v)?.norm());
        }
        Ok(worst / scale)
    }

    /// `(f, v) = 0` for every `v` in N+.
    pub fn is_solvable(&self, f: &VectorField, tol: f64) -> Result<bool> {
        Ok(self.obstruction(f)? <= tol)
    }

    /// Minimum-norm least-squares solution of `Au = f`, mode by mode.
    pub fn solve(&self, f: &VectorField) -> Result<VectorField> {
        crate::hspace::check_grid(self.grid, f.grid())?;
        crate::hspace::check_p(self.sys.p(), f.p())?;
        let p = self.sys.p();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; p];
        for (i, m) in self.pinv.iter().enumerate() {
            for k in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..p {
                    acc += m[(k, j)] * f.component(j).coeffs()[i];
                }
                out[k][i] = acc;
            }
        }
        VectorField::new(
            out.into_iter()
                .map(|c| SpectralField::from_coeffs(self.grid, c))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Solve, failing with [`Error::Unsolvable`] when `f` violates the
    /// orthogonality conditions.
    pub fn solve_exact(&self, f: &VectorField) -> Result<VectorField> {
        let ob = self.obstruction(f)?;
        if ob > RESIDUAL_TOL {
            return Err(Error::Unsolvable(format!(
                "right-hand side has a component {ob:e} along N+"
            )));
        }
        self.solve(f)
    }

    /// `‖Au - f‖ / ‖f‖` in the data-space norm.
    pub fn relative_residual(&self, u: &VectorField, f: &VectorField) -> Result<f64> {
        let r = self.sys.apply(u)?.sub(f)?;
        let nf = vector_hnorm_with(f, &self.data_weights);
        Ok(vector_hnorm_with(&r, &self.data_weights) / nf.max(f64::MIN_POSITIVE))
    }
}

/// `P` projects onto `{u : (u, w) = 0 for w in N}` along N, `P+` onto the
/// range `{f : (f, v) = 0 for v in N+}` along N+.
#[derive(Debug, Clone)]
pub struct Projectors {
    n_basis: Vec<VectorField>,
    nplus_basis: Vec<VectorField>,
}

fn remove_span(u: &VectorField, basis: &[VectorField]) -> Result<VectorField> {
    let mut out = u.clone();
    for e in basis {
        let c = vector_pair(u, e)?;
        out = out.sub(&e.scaled(c))?;
    }
    Ok(out)
}

impl Projectors {
    pub fn p(&self, u: &VectorField) -> Result<VectorField> {
        remove_span(u, &self.n_basis)
    }

    pub fn p_plus(&self, f: &VectorField) -> Result<VectorField> {
        remove_span(f, &self.nplus_basis)
    }
}

/// Projectors built from the orthonormal bases; their Gram matrices are the
/// identity, which is asserted.
pub fn projectors(analysis: &FredholmAnalysis) -> Result<Projectors> {
    for basis in [&analysis.n_basis, &analysis.nplus_basis] {
        for (a, u) in basis.iter().enumerate() {
            for (b, v) in basis.iter().enumerate() {
                let g = vector_pair(u, v)?;
                let want = if a == b { 1.0 } else { 0.0 };
                if (g - Complex64::new(want, 0.0)).norm() > 1e-12 {
                    return Err(Error::Precondition(format!(
                        "kernel basis is not orthonormal: Gram({a},{b}) = {g}"
                    )));
                }
            }
        }
    }
    Ok(Projectors {
        n_basis: analysis.n_basis.clone(),
        nplus_basis: analysis.nplus_basis.clone(),
    })
}

fn plain_norm(u: &VectorField) -> f64 {
    residual_norm(u)
}

/// Full Fredholm experiment: analysis for each φ in the battery, kernel and
/// index independence of φ, the solvability biconditional on random data,
/// and the projector identities.
pub fn fredholm_check(
    sys: &DnSystem,
    battery: &[RoParam],
    grid: Grid,
    trials: usize,
    seed: u64,
) -> Result<(FredholmAnalysis, Report)> {
    if battery.is_empty() || trials == 0 {
        return Err(Error::Precondition("need a non-empty battery and at least one trial".into()));
    }
    let first = fredholm_analysis(sys, &battery[0], grid)?;
    let mut report = Report::new("fredholm").with_config(serde_json::json!({
        "p": sys.p(),
        "n": sys.dim(),
        "battery": battery.iter().map(|b| b.label().to_string()).collect::<Vec<_>>(),
        "trials": trials,
    }));
    report.seeds.push(seed);
    report.absorb("analysis", &first.report);

    // φ-independence.
    let mut max_dist: f64 = 0.0;
    let mut same_index = true;
    for phi in &battery[1..] {
        let other = fredholm_analysis(sys, phi, grid)?;
        same_index &= other.index == first.index && other.dims == first.dims;
        if other.kernel_modes.len() != first.kernel_modes.len() {
            max_dist = f64::INFINITY;
            continue;
        }
        for (a, b) in first.kernel_modes.iter().zip(&other.kernel_modes) {
            if a.mode != b.mode {
                max_dist = f64::INFINITY;
                continue;
            }
            max_dist = max_dist
                .max(subspace_distance(&a.kernel, &b.kernel, sys.p()))
                .max(subspace_distance(&a.cokernel, &b.cokernel, sys.p()));
        }
    }
    report.check(
        "phi_independence",
        "harness: kernels, cokernels and index do not depend on phi",
        max_dist,
        RESIDUAL_TOL,
        Verdict::from_bool(same_index && max_dist <= RESIDUAL_TOL),
    );

    let proj = projectors(&first)?;
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<[f64; 6]> {
            let mut rng = trial_rng(seed, t);
            let f = VectorField::random(grid, sys.p(), &mut rng);
            // Range side: P+ f is solvable and solved exactly.
            let g = proj.p_plus(&f)?;
            let u = first.solve(&g)?;
            let res = first.relative_residual(&u, &g)?;
            let ob = first.obstruction(&g)?;
            // Obstructed side: adding an N+ component leaves a residual of that size.
            let (gap, ob_bad) = if first.nplus_basis.is_empty() {
                (f64::INFINITY, f64::INFINITY)
            } else {
                let k = (t as usize) % first.nplus_basis.len();
                let amp = plain_norm(&g).max(1.0);
                let bad = g.add(&first.nplus_basis[k].scaled(Complex64::new(amp, 0.0)))?;
                let ub = first.solve(&bad)?;
                let r = sys.apply(&ub)?.sub(&bad)?;
                (plain_norm(&r) / amp, first.obstruction(&bad)?)
            };
            // Projector identities and the round trip through the restricted inverse.
            let pu = proj.p(&f)?;
            let idem_p = plain_norm(&proj.p(&pu)?.sub(&pu)?) / plain_norm(&f);
            let idem_q = plain_norm(&proj.p_plus(&g)?.sub(&g)?) / plain_norm(&f);
            let back = first.solve(&sys.apply(&pu)?)?;
            let round = plain_norm(&back.sub(&pu)?) / plain_norm(&pu).max(f64::MIN_POSITIVE);
            Ok([res.max(ob), gap, ob_bad, idem_p.max(idem_q), round, plain_norm(&proj.p(&u)?.sub(&u)?)])
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |k: usize, min: bool| {
        results.iter().map(|r| r[k]).fold(if min { f64::INFINITY } else { 0.0 }, |a, b| {
            if min {
                a.min(b)
            } else {
                a.max(b)
            }
        })
    };
    let solvable = col(0, false);
    report.constant("range_residual", solvable);
    report.check(
        "range_solvable",
        "harness: (f, v) = 0 for all v in N+ implies Au = f is solved exactly",
        solvable,
        RESIDUAL_TOL,
        Verdict::from_bool(solvable <= RESIDUAL_TOL),
    );
    if !first.nplus_basis.is_empty() {
        let gap = col(1, true);
        let ob = col(2, true);
        report.constant("obstructed_residual_min", gap);
        report.check(
            "obstructed_unsolvable",
            "harness: a component along N+ leaves a residual bounded away from zero",
            gap.min(ob),
            0.5,
            Verdict::from_bool(gap >= 0.5 && ob >= 0.5),
        );
    } else {
        report.note("N+ is trivial: every right-hand side is solvable");
    }
    let idem = col(3, false);
    report.check(
        "projector_idempotent",
        "harness: P^2 = P and P+^2 = P+",
        idem,
        RESIDUAL_TOL,
        Verdict::from_bool(idem <= RESIDUAL_TOL),
    );
    let round = col(4, false).max(col(5, false));
    report.check(
        "restricted_bijection",
        "harness: A restricted to P-range onto P+-range inverts exactly",
        round,
        RESIDUAL_TOL,
        Verdict::from_bool(round <= RESIDUAL_TOL),
    );
    Ok((first, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnsystem::library::*;

    fn battery() -> Vec<RoParam> {
        vec![
            RoParam::power(1.5),
            RoParam::power(-1.5),
            RoParam::power_log(0.0, 1.0),
            RoParam::power_log(2.0, 3.0),
            RoParam::power_sin_log(0.0, 1.0),
        ]
    }

    #[test]
    fn one_minus_laplacian_is_invertible() {
        let g = Grid::new(2, 16).unwrap();
        let (a, r) = fredholm_check(&one_minus_laplacian(2).unwrap(), &battery(), g, 20, 0).unwrap();
        assert_eq!(a.dims, (0, 0));
        assert_eq!(a.index, 0);
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn laplacian_has_constants() {
        let g = Grid::new(2, 16).unwrap();
        let sys = neg_laplacian(2).unwrap();
        let (a, r) = fredholm_check(&sys, &battery(), g, 20, 0).unwrap();
        assert_eq!(a.dims, (1, 1));
        assert_eq!(a.kernel_modes[0].mode, [0, 0, 0]);
        assert!(r.passed(), "{}", r.to_json());
        let f = VectorField::new(vec![SpectralField::single_mode(g, [0, 0, 0], Complex64::new(1.0, 0.0)).unwrap()]).unwrap();
        assert!(!a.is_solvable(&f, 1e-12).unwrap());
        assert!(matches!(a.solve_exact(&f), Err(Error::Unsolvable(_))));
        let f = VectorField::new(vec![SpectralField::single_mode(g, [1, 2, 0], Complex64::new(1.0, 0.0)).unwrap()]).unwrap();
        assert!(a.is_solvable(&f, 1e-12).unwrap());
        let u = a.solve_exact(&f).unwrap();
        assert!((u.component(0).coeff(&[1, 2, 0]) - Complex64::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_system_touches_one_component() {
        let g = Grid::new(2, 16).unwrap();
        let (a, r) = fredholm_check(&diag_laplacians(2).unwrap(), &battery(), g, 20, 1).unwrap();
        assert_eq!(a.dims, (1, 1));
        let v = &a.nplus_basis[0];
        assert!((v.component(0).coeff(&[0, 0, 0]).norm() - 1.0).abs() < 1e-14);
        assert_eq!(v.component(1).l2_norm(), 0.0);
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn cauchy_riemann_kernel_is_constants() {
        let g = Grid::new(2, 16).unwrap();
        let (a, r) = fredholm_check(&cauchy_riemann().unwrap(), &battery(), g, 20, 2).unwrap();
        assert_eq!(a.dims, (2, 2));
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn projectors_for_trivial_kernel_are_identity() {
        let g = Grid::new(1, 8).unwrap();
        let a = fredholm_analysis(&mixed(1).unwrap(), &RoParam::power(0.0), g).unwrap();
        let p = projectors(&a).unwrap();
        let u = VectorField::random(g, 2, &mut trial_rng(0, 0));
        assert_eq!(p.p(&u).unwrap(), u);
        assert_eq!(p.p_plus(&u).unwrap(), u);
    }

    #[test]
    fn variable_coefficients_are_rejected() {
        let sys = DnSystem::new(
            1,
            vec![vec![crate::dnsystem::DiffOp::new([(
                vec![0],
                crate::dnsystem::TrigPoly::new([([1, 0, 0], Complex64::new(1.0, 0.0))]),
            )])]],
            None,
        )
        .unwrap()
        .with_computed_dn()
        .unwrap();
        assert!(fredholm_analysis(&sys, &RoParam::power(0.0), Grid::new(1, 8).unwrap()).is_err());
    }
}

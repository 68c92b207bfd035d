//! Property tests for the module invariants.

use hormander::dnsystem::library::*;
use hormander::dnsystem::{default_sphere, default_x_samples, lattice_samples, solve_dn_numbers, DiffOp, DnSystem, TrigPoly};
use hormander::harness::{apriori_check, fredholm_analysis, AprioriOptions};
use hormander::hspace::{hnorm, localized_norm, vector_hnorm, vector_pair, Grid, SpectralField, VectorField};
use hormander::interp::{interp_norm, AdmissiblePair, Psi};
use hormander::numeric::trial_rng;
use hormander::pdo::{build_parametrix, default_cutoff, op_norm_estimate, system_as_op};
use hormander::roparam::{estimate_indices, interp_psi, verify_ro, RoParam};
use hormander::Complex64;
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = RoParam> {
    prop_oneof![
        (-10.0..10.0f64).prop_map(RoParam::power),
        (-10.0..10.0f64, -5.0..5.0f64).prop_map(|(s, r)| RoParam::power_log(s, r)),
        (-10.0..10.0f64, 0.05..1.0f64).prop_map(|(s, d)| RoParam::power_sin_log(s, d)),
    ]
}

fn moderate() -> impl Strategy<Value = RoParam> {
    prop_oneof![
        (-2.0..2.0f64).prop_map(RoParam::power),
        (-2.0..2.0f64, -3.0..3.0f64).prop_map(|(s, r)| RoParam::power_log(s, r)),
        (-2.0..2.0f64, 0.05..1.0f64).prop_map(|(s, d)| RoParam::power_sin_log(s, d)),
    ]
}

fn geometric(start: i32, count: i32) -> Vec<f64> {
    (start..start + count).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

fn random_field(grid: Grid, seed: u64) -> SpectralField {
    SpectralField::random(grid, &mut trial_rng(seed, 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn builtin_params_positive_and_finite(phi in builtin(), e in 0.0..8.0f64) {
        let v = phi.eval(10f64.powf(e)).unwrap();
        prop_assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn power_indices_exact(s in -10.0..10.0f64) {
        let est = estimate_indices(&RoParam::power(s), &geometric(0, 40), &[2.0, 4.0, 8.0]).unwrap();
        prop_assert!((est.sigma0_hat - s).abs() <= 1e-9);
        prop_assert!((est.sigma1_hat - s).abs() <= 1e-9);
    }

    #[test]
    fn scale_power_shifts_indices(phi in builtin(), r in -4.0..4.0f64) {
        let t = geometric(0, 60);
        let lam = [2.0, 4.0, 16.0];
        let a = estimate_indices(&phi, &t, &lam).unwrap();
        let b = estimate_indices(&phi.scale_power(r), &t, &lam).unwrap();
        prop_assert!((b.sigma0_hat - a.sigma0_hat - r).abs() <= 1e-9);
        prop_assert!((b.sigma1_hat - a.sigma1_hat - r).abs() <= 1e-9);
    }

    #[test]
    fn interp_psi_of_power_is_power(s in -3.0..3.0f64, lo in 0.1..3.0f64, hi in 0.1..3.0f64, e in 0.0..6.0f64) {
        let (s0, s1) = (s - lo, s + hi);
        let psi = interp_psi(&RoParam::power(s), s0, s1).unwrap();
        let t = 10f64.powf(e);
        let want = t.powf((s - s0) / (s1 - s0));
        prop_assert!((psi.eval(t).unwrap() / want - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ro_constant_submultiplicative(phi in builtin(), j in 1i32..6) {
        // λ grid 2^{k/4} for k ≤ j; t grid closed under those steps.
        let lam_a = geometric(0, j + 1);
        let lam_a2 = geometric(0, 2 * j + 1);
        let a = *lam_a.last().unwrap();
        let ca = verify_ro(&phi, a, &geometric(0, 40 + 2 * j), &lam_a).unwrap().get("c_hat").unwrap();
        let ca2 = verify_ro(&phi, *lam_a2.last().unwrap(), &geometric(0, 40), &lam_a2).unwrap().get("c_hat").unwrap();
        prop_assert!(ca2 <= ca * ca * (1.0 + 1e-12), "{ca2} > {ca}^2");
    }

    #[test]
    fn sandwich_by_sobolev_norms(phi in moderate(), seed in any::<u64>()) {
        let grid = Grid::new(2, 16).unwrap();
        let w = random_field(grid, seed);
        let (s0, s1) = (-3.0, 3.0);
        let mut c = 0.0f64;
        let mut c2 = 0.0f64;
        for (i, _) in grid.modes() {
            let t = grid.bracket(i);
            let f = phi.eval(t).unwrap();
            c = c.max(t.powf(s0) / f);
            c2 = c2.max(f / t.powf(s1));
        }
        let n0 = hnorm(&w, &RoParam::power(s0)).unwrap();
        let n = hnorm(&w, &phi).unwrap();
        let n1 = hnorm(&w, &RoParam::power(s1)).unwrap();
        prop_assert!(n0 <= c * n * (1.0 + 1e-12));
        prop_assert!(n <= c2 * n1 * (1.0 + 1e-12));
    }

    #[test]
    fn hnorm_is_a_norm(phi in moderate(), seed in any::<u64>(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let grid = Grid::new(1, 32).unwrap();
        let u = random_field(grid, seed);
        let v = random_field(grid, seed.wrapping_add(1));
        let a = Complex64::new(re, im);
        let nu = hnorm(&u, &phi).unwrap();
        prop_assert!((hnorm(&u.scaled(a), &phi).unwrap() - a.norm() * nu).abs() <= 1e-12 * (1.0 + a.norm() * nu));
        prop_assert!(hnorm(&u.add(&v).unwrap(), &phi).unwrap() <= nu + hnorm(&v, &phi).unwrap() + 1e-12);
    }

    #[test]
    fn localized_norm_bounded_by_shift_constant(phi in moderate(), seed in any::<u64>()) {
        // ‖χw‖_φ ≤ Σ_η |χ̂(η)| max_ξ φ(⟨ξ+η⟩)/φ(⟨ξ⟩) · ‖w‖_φ.
        let grid = Grid::new(1, 32).unwrap();
        let chi = SpectralField::from_physical(grid, |x| Complex64::new((x[0].cos() + 1.0).powi(3) / 8.0, 0.0));
        let w = random_field(grid, seed);
        let mut k = 0.0;
        for (_, eta) in grid.modes() {
            let c = chi.coeff(&eta).norm();
            if c < 1e-15 {
                continue;
            }
            let mut worst = 0.0f64;
            for (_, xi) in grid.modes() {
                let shifted = ((xi[0] + eta[0]) as f64).hypot(1.0);
                let base = (xi[0] as f64).hypot(1.0);
                worst = worst.max(phi.eval(shifted).unwrap() / phi.eval(base).unwrap());
            }
            k += c * worst;
        }
        let lhs = localized_norm(&w, &chi, &phi).unwrap();
        prop_assert!(lhs <= k * hnorm(&w, &phi).unwrap() * (1.0 + 1e-10));
    }
}

fn random_system(seed: u64) -> DnSystem {
    // 2×2 on the circle with trigonometric coefficients in every block.
    let mut rng = trial_rng(seed, 1);
    let mut coeff = || {
        use rand::Rng;
        TrigPoly::new([
            ([0, 0, 0], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
            ([1, 0, 0], Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))),
            ([-2, 0, 0], Complex64::new(rng.gen_range(-0.5..0.5), 0.0)),
        ])
    };
    let ops = vec![
        vec![DiffOp::new([(vec![2], coeff()), (vec![1], coeff())]), DiffOp::new([(vec![1], coeff())])],
        vec![DiffOp::new([(vec![1], coeff()), (vec![0], coeff())]), DiffOp::new([(vec![0], coeff())])],
    ];
    DnSystem::new(1, ops, None).unwrap().with_computed_dn().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dn_numbers_satisfy_condition_i(rows in prop::collection::vec(prop::collection::vec(prop::option::weighted(0.8, 0i64..5), 3), 3)) {
        if let Ok(dn) = solve_dn_numbers(&rows) {
            prop_assert!(dn.satisfies(&rows));
            prop_assert_eq!(dn.l[0], 0.0);
        }
    }

    #[test]
    fn principal_determinant_homogeneous(tau in 0.1..10.0f64, angle in 0.0..std::f64::consts::TAU) {
        for sys in [cauchy_riemann().unwrap(), mixed(2).unwrap(), mixed_laplacian().unwrap()] {
            let q = sys.q().unwrap();
            let xi = [angle.cos(), angle.sin()];
            let d1 = hormander::linalg::determinant(&sys.principal_symbol(&[0.0, 0.0], &xi).unwrap());
            let d2 = hormander::linalg::determinant(&sys.principal_symbol(&[0.0, 0.0], &[tau * xi[0], tau * xi[1]]).unwrap());
            prop_assert!((d2 - d1 * tau.powf(q)).norm() <= 1e-10 * (1.0 + d2.norm()));
        }
    }

    #[test]
    fn adjoint_pairing_and_involution(seed in any::<u64>()) {
        let sys = random_system(seed);
        let adj = sys.formal_adjoint();
        let grid = Grid::new(1, 32).unwrap();
        let u = VectorField::random(grid, 2, &mut trial_rng(seed, 2));
        let v = VectorField::random(grid, 2, &mut trial_rng(seed, 3));
        let lhs = vector_pair(&sys.apply(&u).unwrap(), &v).unwrap();
        let rhs = vector_pair(&u, &adj.apply(&v).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        let back = adj.formal_adjoint().apply(&u).unwrap();
        let direct = sys.apply(&u).unwrap();
        let diff = vector_hnorm(&back.sub(&direct).unwrap(), &[RoParam::power(0.0), RoParam::power(0.0)]).unwrap();
        let scale = vector_hnorm(&direct, &[RoParam::power(0.0), RoParam::power(0.0)]).unwrap();
        prop_assert!(diff <= 1e-10 * scale);
    }

    #[test]
    fn ellipticity_margin_matches_adjoint(seed in any::<u64>()) {
        let sys = random_system(seed);
        let adj = sys.formal_adjoint();
        let x = default_x_samples(&sys);
        let sphere = default_sphere(1);
        let a = sys.ellipticity_margin(&x, &sphere).unwrap().get("c_hat").unwrap();
        let b = adj.ellipticity_margin(&x, &sphere).unwrap().get("c_hat").unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn condition_b_implies_ellipticity(seed in any::<u64>()) {
        let sys = random_system(seed);
        let grid = Grid::new(1, 64).unwrap();
        let x = default_x_samples(&sys);
        let b = sys.condition_b_margin(1.0, &x, &lattice_samples(grid)).unwrap();
        let e = sys.ellipticity_margin(&x, &default_sphere(1)).unwrap();
        if b.passed() {
            prop_assert!(e.passed(), "{}", e.to_json());
        }
    }

    #[test]
    fn parametrix_identities(seed in any::<u64>(), which in 0usize..4) {
        let sys = [one_minus_laplacian(2), neg_laplacian(2), cauchy_riemann(), mixed(2)][which].as_ref().unwrap().clone();
        let grid = Grid::new(2, 16).unwrap();
        let bundle = build_parametrix(&sys, default_cutoff(&sys, grid).unwrap(), grid).unwrap();
        let u = VectorField::random(grid, sys.p(), &mut trial_rng(seed, 0));
        let l2 = vec![RoParam::power(0.0); sys.p()];
        let scale = vector_hnorm(&u, &l2).unwrap();
        let a = system_as_op(&sys);
        let bau = bundle.b.apply(&a.apply(&u).unwrap()).unwrap();
        let r1 = bau.sub(&u).unwrap().sub(&bundle.t1.apply(&u).unwrap()).unwrap();
        prop_assert!(vector_hnorm(&r1, &l2).unwrap() <= 1e-10 * scale);
        let abu = a.apply(&bundle.b.apply(&u).unwrap()).unwrap();
        let r2 = abu.sub(&u).unwrap().sub(&bundle.t2.apply(&u).unwrap()).unwrap();
        prop_assert!(vector_hnorm(&r2, &l2).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn smoothing_remainder_bounded(s in -4.0..4.0f64, s2 in -4.0..4.0f64) {
        let sys = neg_laplacian(2).unwrap();
        let norms: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let grid = Grid::new(2, n).unwrap();
                let b = build_parametrix(&sys, default_cutoff(&sys, grid).unwrap(), grid).unwrap();
                op_norm_estimate(&b.t1, &[RoParam::power(s)], &[RoParam::power(s2)], grid, 4, 0).unwrap().exact.unwrap()
            })
            .collect();
        prop_assert!(norms.iter().all(|&v| (v - norms[0]).abs() <= 1e-12 * norms[0]), "{norms:?}");
    }

    #[test]
    fn interpolation_norm_equality(phi in moderate(), seed in any::<u64>()) {
        let grid = Grid::new(2, 16).unwrap();
        let pair = AdmissiblePair::sobolev(-3.0, 3.0, grid).unwrap();
        let psi = Psi::from_param(&phi, -3.0, 3.0).unwrap();
        let w = random_field(grid, seed);
        let a = interp_norm(&pair, &psi, &w).unwrap();
        let b = hnorm(&w, &phi).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b);
        // X_ψ ↪ X₀ with constant min ψ(j(ξ))^{-1}.
        let x0 = hnorm(&w, &RoParam::power(-3.0)).unwrap();
        let c = hormander::interp::x0_embedding_constant(&pair, &psi).unwrap();
        prop_assert!(x0 <= c * a * (1.0 + 1e-12));
    }

    #[test]
    fn apriori_inequality_holds(seed in any::<u64>(), which in 0usize..4, phi in moderate(), sigma in 0.25..2.5f64) {
        let sys = [one_minus_laplacian(2), neg_laplacian(2), cauchy_riemann(), mixed(2)][which].as_ref().unwrap().clone();
        let opts = AprioriOptions { sigma, grids: vec![16], trials: 8, seed, radius: None };
        let r = apriori_check(&sys, &phi, &opts).unwrap();
        prop_assert!(r.get("ratio_emp").unwrap() <= r.get("c_pred").unwrap() * (1.0 + 1e-8), "{}", r.to_json());
    }

    #[test]
    fn shift_covariance(c in -3i32..3, which in 0usize..4, phi in moderate()) {
        let sys = [one_minus_laplacian(2), neg_laplacian(2), cauchy_riemann(), mixed(2)][which].as_ref().unwrap().clone();
        let c = c as f64;
        let shifted = sys.clone().with_dn(sys.dn().unwrap().shifted(c)).unwrap();
        let grid = Grid::new(2, 16).unwrap();
        let a = fredholm_analysis(&sys, &phi, grid).unwrap();
        let b = fredholm_analysis(&shifted, &phi.scale_power(c), grid).unwrap();
        prop_assert_eq!(a.index, b.index);
        prop_assert_eq!(a.dims, b.dims);
        let opts = AprioriOptions { sigma: 1.0, grids: vec![16, 32], trials: 6, seed: 1, radius: None };
        let ra = apriori_check(&sys, &phi, &opts).unwrap();
        let rb = apriori_check(&shifted, &phi.scale_power(c), &opts).unwrap();
        prop_assert_eq!(ra.verdict, rb.verdict);
    }

    #[test]
    fn kernels_independent_of_phi(which in 0usize..3, a in moderate(), b in moderate()) {
        let sys = [neg_laplacian(2), cauchy_riemann(), diag_laplacians(2)][which].as_ref().unwrap().clone();
        let grid = Grid::new(2, 16).unwrap();
        let x = fredholm_analysis(&sys, &a, grid).unwrap();
        let y = fredholm_analysis(&sys, &b, grid).unwrap();
        prop_assert_eq!(x.n_basis.len(), y.n_basis.len());
        for (u, v) in x.n_basis.iter().zip(&y.n_basis) {
            let d = u.sub(v).unwrap();
            prop_assert!(vector_hnorm(&d, &vec![RoParam::power(0.0); sys.p()]).unwrap() <= 1e-10);
        }
        for v in &x.nplus_basis {
            prop_assert!((vector_pair(v, v).unwrap().re - 1.0).abs() <= 1e-12);
        }
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hormander::dnsystem::library::{cauchy_riemann, mixed, neg_laplacian, non_elliptic, one_minus_laplacian};
use hormander::dnsystem::{default_sphere, default_x_samples, DnSystem};
use hormander::harness::{
    apriori_check, fredholm_check, regularity_check, AprioriOptions, RegularityOptions,
};
use hormander::hspace::{embedding_constant, vector_hnorm, Convergence, Grid, VectorField};
use hormander::interp::verify_prop1;
use hormander::numeric::trial_rng;
use hormander::pdo::{build_parametrix, default_cutoff, system_as_op};
use hormander::report::Report;
use hormander::roparam::{default_t_grid, estimate_indices, estimate_indices_default, RoParam, DEFAULT_LAMBDAS};
use hormander::{Complex64, Result};

fn battery() -> Vec<RoParam> {
    vec![
        RoParam::power(1.5),
        RoParam::power(-1.5),
        RoParam::power_log(0.0, 1.0),
        RoParam::power_log(2.0, 3.0),
        RoParam::power_sin_log(0.0, 1.0),
    ]
}

fn systems() -> Vec<(&'static str, DnSystem)> {
    vec![
        ("1-Δ", one_minus_laplacian(2).unwrap()),
        ("-Δ", neg_laplacian(2).unwrap()),
        ("Cauchy-Riemann", cauchy_riemann().unwrap()),
        ("mixed", mixed(2).unwrap()),
    ]
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { ok, detail: detail.into() })
}

fn failed_checks(r: &Report) -> String {
    r.checks
        .iter()
        .filter(|c| c.verdict != hormander::report::Verdict::Pass)
        .map(|c| format!("{}={:.3e}", c.name, c.value))
        .collect::<Vec<_>>()
        .join(",")
}

fn c1_embedding() -> Result<Outcome> {
    let mut mismatches = Vec::new();
    let mut scanned = 0;
    for dim in [1usize, 2] {
        let grid = Grid::new(dim, 32)?;
        for lambda in [0u32, 1] {
            let threshold = lambda as f64 + dim as f64 / 2.0;
            for k in -12..=12 {
                let s = threshold + 0.25 * k as f64;
                let e = embedding_constant(&RoParam::power(s), lambda, grid)?;
                scanned += 1;
                let ok = match k {
                    0 => e.convergence != Convergence::Converges,
                    k if k > 0 => e.convergence == Convergence::Converges,
                    _ => e.convergence == Convergence::Diverges,
                };
                if !ok {
                    mismatches.push(format!("n={dim} λ={lambda} s={s}: {:?}", e.convergence));
                }
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{scanned} points, mismatches {mismatches:?}"))
}

fn c2_interpolation() -> Result<Outcome> {
    let grids = [Grid::new(2, 16)?, Grid::new(2, 32)?];
    let mut worst: f64 = 0.0;
    for (i, phi) in battery().iter().enumerate() {
        for (j, (s0, s1)) in [(-3.0, 3.0), (-2.0, 4.5)].into_iter().enumerate() {
            let r = verify_prop1(phi, s0, s1, &grids, 200, (10 * i + j) as u64)?;
            worst = worst.max(r.get("max_rel_dev").unwrap_or(f64::INFINITY));
        }
    }
    outcome(worst <= 1e-10, format!("max relative deviation {worst:.3e}"))
}

fn c3_parametrix() -> Result<Outcome> {
    let grid = Grid::new(2, 32)?;
    let mut worst: f64 = 0.0;
    for (i, (_, sys)) in systems().iter().enumerate() {
        let dn = sys.dn().unwrap().clone();
        let bundle = build_parametrix(sys, default_cutoff(sys, grid)?, grid)?;
        let a = system_as_op(sys);
        for (k, phi) in battery().iter().enumerate() {
            let sol: Vec<RoParam> = dn.m.iter().map(|&m| phi.scale_power(m)).collect();
            let data: Vec<RoParam> = dn.l.iter().map(|&l| phi.scale_power(-l)).collect();
            for t in 0..20u64 {
                let u = VectorField::random(grid, sys.p(), &mut trial_rng((100 * i + k) as u64, t));
                let r1 = bundle.b.apply(&a.apply(&u)?)?.sub(&u)?.sub(&bundle.t1.apply(&u)?)?;
                worst = worst.max(vector_hnorm(&r1, &sol)? / vector_hnorm(&u, &sol)?);
                let r2 = a.apply(&bundle.b.apply(&u)?)?.sub(&u)?.sub(&bundle.t2.apply(&u)?)?;
                worst = worst.max(vector_hnorm(&r2, &data)? / vector_hnorm(&u, &data)?);
            }
        }
    }
    outcome(worst <= 1e-10, format!("max residual ratio {worst:.3e} over 100 fields per system"))
}

fn c4_apriori() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut per_system = 0;
    for (name, sys) in systems() {
        let mut total = 0;
        for (i, phi) in battery().iter().enumerate() {
            for sigma in [0.5, 1.0, 2.0] {
                let opts = AprioriOptions {
                    sigma,
                    grids: vec![16, 32, 64],
                    trials: 70,
                    seed: i as u64,
                    radius: None,
                };
                let r = apriori_check(&sys, phi, &opts)?;
                total += opts.trials;
                if !r.passed() {
                    bad.push(format!("{name} {} σ={sigma}: {}", phi.label(), failed_checks(&r)));
                }
            }
        }
        per_system = total;
    }
    outcome(bad.is_empty() && per_system >= 1000, format!("{per_system} trials per system, failures {bad:?}"))
}

fn c5_regularity() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut runs = 0;
    for (name, sys) in systems() {
        for phi in battery() {
            let opts = RegularityOptions {
                project: true,
                ..RegularityOptions::default()
            };
            let r = regularity_check(&sys, &phi, &opts)?;
            runs += 1;
            if !r.passed() {
                bad.push(format!("{name} {}: {}", phi.label(), failed_checks(&r)));
            }
        }
    }
    outcome(bad.is_empty(), format!("{runs} global+localized runs, failures {bad:?}"))
}

fn c6_fredholm() -> Result<Outcome> {
    let grid = Grid::new(2, 16)?;
    let mut bad = Vec::new();
    for (i, (name, sys)) in systems().iter().enumerate() {
        let (a, r) = fredholm_check(sys, &battery(), grid, 100, i as u64)?;
        if !r.passed() {
            bad.push(format!("{name}: {}", failed_checks(&r)));
        }
        let expected = match *name {
            "1-Δ" | "mixed" => Some((0, 0)),
            "-Δ" => Some((1, 1)),
            _ => None,
        };
        if let Some(d) = expected {
            if a.dims != d || a.index != 0 {
                bad.push(format!("{name}: dims {:?} index {}", a.dims, a.index));
            }
        }
        if *name == "-Δ" {
            // N+ is spanned by the constant, so solvability means mean zero.
            let v = a.nplus_basis[0].component(0);
            let c = v.coeff(&[0, 0, 0]).norm();
            if (c - 1.0).abs() > 1e-12 || (v.l2_norm() - c).abs() > 1e-12 {
                bad.push("-Δ: cokernel is not the constant mode".into());
            }
            let f = VectorField::random(grid, 1, &mut trial_rng(7, 0));
            let mut g = f.clone();
            let mean = g.component(0).coeff(&[0, 0, 0]);
            let idx = grid.index_of(&[0, 0, 0]).unwrap();
            g.component_mut(0).coeffs_mut()[idx] -= mean;
            if a.is_solvable(&f, 1e-12)? || !a.is_solvable(&g, 1e-12)? || g.component(0).coeff(&[0, 0, 0]) != Complex64::new(0.0, 0.0) {
                bad.push("-Δ: mean-zero solvability".into());
            }
        }
    }
    outcome(bad.is_empty(), format!("failures {bad:?}"))
}

fn c7_margins() -> Result<Outcome> {
    let c_hat = |sys: &DnSystem| -> Result<f64> {
        let r = sys.ellipticity_margin(&default_x_samples(sys), &default_sphere(sys.dim()))?;
        Ok(r.get("c_hat").unwrap_or(f64::NAN))
    };
    let lap = c_hat(&neg_laplacian(2)?)?;
    let cr = c_hat(&cauchy_riemann()?)?;
    let ne = c_hat(&non_elliptic()?)?;
    let ok = (lap - 1.0).abs() <= 1e-9 && (cr - 1.0).abs() <= 1e-9 && ne <= 1e-3;
    outcome(ok, format!("-Δ {lap:.12}, Cauchy-Riemann {cr:.12}, non-elliptic {ne:.3e}"))
}

fn c8_indices() -> Result<Outcome> {
    let mut errs = Vec::new();
    let mut ok = true;
    for s in [-1.5, 0.0, 1.5, 2.25] {
        let e = estimate_indices_default(&RoParam::power(s))?;
        let err = (e.sigma0_hat - s).abs().max((e.sigma1_hat - s).abs());
        ok &= err <= 1e-9;
        errs.push(format!("power({s}) {err:.1e}"));
    }
    let long: Vec<f64> = (0..400).map(|i| 10f64.powf(8.0 * i as f64 / 399.0)).collect();
    for (s, r) in [(0.0, 1.0), (2.0, 3.0)] {
        let e = estimate_indices(&RoParam::power_log(s, r), &long, &DEFAULT_LAMBDAS)?;
        let err = (e.sigma0_hat - s).abs().max((e.sigma1_hat - s).abs());
        ok &= err <= 0.1;
        errs.push(format!("powerlog({s},{r}) {err:.3}"));
    }
    let e = estimate_indices(&RoParam::power_sin_log(0.0, 1.0), &default_t_grid(), &DEFAULT_LAMBDAS)?;
    let target = 1.0 / 3f64.sqrt();
    let err = (e.sigma1_hat - target).abs().max((e.sigma0_hat + target).abs());
    ok &= err <= 0.02;
    errs.push(format!("powersinlog(0,1) ({:.3}, {:.3}) vs ±{target:.3}", e.sigma0_hat, e.sigma1_hat));
    outcome(ok, errs.join("; "))
}

fn determinism_reports() -> Result<Vec<String>> {
    let phi = RoParam::power_sin_log(0.0, 1.0);
    let opts = AprioriOptions {
        trials: 40,
        seed: 3,
        ..AprioriOptions::default()
    };
    let mut out = vec![apriori_check(&mixed(2)?, &phi, &opts)?.to_json()];
    let reg = RegularityOptions {
        project: true,
        seed: 5,
        ..RegularityOptions::default()
    };
    out.push(regularity_check(&cauchy_riemann()?, &RoParam::power_log(2.0, 3.0), &reg)?.to_json());
    out.push(fredholm_check(&neg_laplacian(2)?, &battery(), Grid::new(2, 16)?, 50, 11)?.1.to_json());
    out.push(verify_prop1(&phi, -3.0, 3.0, &[Grid::new(2, 16)?], 50, 13)?.to_json());
    Ok(out)
}

fn c9_determinism() -> Result<Outcome> {
    let max = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut runs = Vec::new();
    for threads in [1, 2, max, 1] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        runs.push(pool.install(determinism_reports)?);
    }
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(same, format!("{} reports at 1, 2, {max} threads and repeated", runs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>, u64); 9] = [
        ("1 embedding verdict matches s > λ + n/2", c1_embedding, 10),
        ("2 interpolation norm equals H^φ norm", c2_interpolation, 30),
        ("3 parametrix identities", c3_parametrix, 30),
        ("4 a priori estimate", c4_apriori, 300),
        ("5 regularity, global and localized", c5_regularity, 120),
        ("6 Fredholm structure", c6_fredholm, 60),
        ("7 ellipticity margins", c7_margins, 5),
        ("8 index estimation", c8_indices, 5),
        ("9 determinism across thread counts", c9_determinism, 600),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (ok, detail) = match result {
            Ok(o) => (o.ok && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2}s / {limit}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

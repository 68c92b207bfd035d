//! Standard constant-coefficient systems.

use num_complex::Complex64;

use super::{DiffOp, DnSystem, TrigPoly};
use crate::error::Result;

fn c(re: f64) -> TrigPoly {
    TrigPoly::real(re)
}

fn unit(dim: usize, axis: usize, power: u32) -> Vec<u32> {
    let mut mu = vec![0; dim];
    mu[axis] = power;
    mu
}

/// `D_axis` scaled by `a`.
pub fn d(dim: usize, axis: usize, a: f64) -> DiffOp {
    DiffOp::new([(unit(dim, axis, 1), c(a))])
}

/// `-Δ = Σ D_i²`.
pub fn neg_laplacian_op(dim: usize) -> DiffOp {
    DiffOp::new((0..dim).map(|i| (unit(dim, i, 2), c(1.0))))
}

pub fn one_minus_laplacian_op(dim: usize) -> DiffOp {
    neg_laplacian_op(dim).add(&DiffOp::scalar(dim, Complex64::new(1.0, 0.0)))
}

fn build(dim: usize, ops: Vec<Vec<DiffOp>>) -> Result<DnSystem> {
    DnSystem::new(dim, ops, None)?.with_computed_dn()
}

pub fn identity(dim: usize, p: usize) -> Result<DnSystem> {
    let ops = (0..p)
        .map(|j| {
            (0..p)
                .map(|k| {
                    if j == k {
                        DiffOp::scalar(dim, Complex64::new(1.0, 0.0))
                    } else {
                        DiffOp::zero()
                    }
                })
                .collect()
        })
        .collect();
    build(dim, ops)
}

pub fn neg_laplacian(dim: usize) -> Result<DnSystem> {
    build(dim, vec![vec![neg_laplacian_op(dim)]])
}

pub fn one_minus_laplacian(dim: usize) -> Result<DnSystem> {
    build(dim, vec![vec![one_minus_laplacian_op(dim)]])
}

/// `[[D₁, -D₂], [D₂, D₁]]` on the plane.
pub fn cauchy_riemann() -> Result<DnSystem> {
    build(2, vec![vec![d(2, 0, 1.0), d(2, 1, -1.0)], vec![d(2, 1, 1.0), d(2, 0, 1.0)]])
}

/// `[[1-Δ, D₁], [-D₁, 1]]`, orders `[[2,1],[1,0]]`.
pub fn mixed(dim: usize) -> Result<DnSystem> {
    build(
        dim,
        vec![
            vec![one_minus_laplacian_op(dim), d(dim, 0, 1.0)],
            vec![d(dim, 0, -1.0), DiffOp::scalar(dim, Complex64::new(1.0, 0.0))],
        ],
    )
}

/// `[[-Δ, D₁], [D₁, 1]]`: principal determinant `ξ₂²` on the plane.
pub fn non_elliptic() -> Result<DnSystem> {
    build(
        2,
        vec![
            vec![neg_laplacian_op(2), d(2, 0, 1.0)],
            vec![d(2, 0, 1.0), DiffOp::scalar(2, Complex64::new(1.0, 0.0))],
        ],
    )
}

/// `[[-Δ, D₁], [-D₁, 1]]`.
pub fn mixed_laplacian() -> Result<DnSystem> {
    build(
        2,
        vec![
            vec![neg_laplacian_op(2), d(2, 0, 1.0)],
            vec![d(2, 0, -1.0), DiffOp::scalar(2, Complex64::new(1.0, 0.0))],
        ],
    )
}

/// `diag(-Δ, 1-Δ)`.
pub fn diag_laplacians(dim: usize) -> Result<DnSystem> {
    build(
        dim,
        vec![
            vec![neg_laplacian_op(dim), DiffOp::zero()],
            vec![DiffOp::zero(), one_minus_laplacian_op(dim)],
        ],
    )
}

/// Look a system up by name: `identity`, `neg-laplacian`, `one-minus-laplacian`,
/// `cauchy-riemann`, `mixed`, `non-elliptic`, `mixed-laplacian`, `diag`.
pub fn by_name(name: &str, dim: usize) -> Option<Result<DnSystem>> {
    Some(match name {
        "identity" => identity(dim, 1),
        "neg-laplacian" => neg_laplacian(dim),
        "one-minus-laplacian" => one_minus_laplacian(dim),
        "cauchy-riemann" => cauchy_riemann(),
        "mixed" => mixed(dim),
        "non-elliptic" => non_elliptic(),
        "mixed-laplacian" => mixed_laplacian(),
        "diag" => diag_laplacians(dim),
        _ => return None,
    })
}

//! Per-mode complex matrix helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Singular values at or below `RANK_TOL * s_max` count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Modes whose symbol condition number exceeds this are flagged.
pub const CONDITION_FLAG: f64 = 1e12;

pub fn czero(p: usize) -> CMat {
    CMat::zeros(p, p)
}

pub fn cidentity(p: usize) -> CMat {
    CMat::identity(p, p)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// 2-norm condition number; infinite for singular matrices.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal bases of the right null space (`A v = 0`) and of the left
/// null space (`A* w = 0`) under the relative rank tolerance.
pub fn null_spaces(m: &CMat, tol: f64) -> (Vec<CVec>, Vec<CVec>) {
    let p = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let mut right = Vec::new();
    let mut left = Vec::new();
    for i in 0..p {
        if s[i] <= tol * s_max || s_max == 0.0 {
            right.push(v_t.row(i).adjoint());
            left.push(u.column(i).into_owned());
        }
    }
    (right, left)
}

/// Inverse by partial-pivot LU together with the condition number.
pub fn inverse_with_condition(m: &CMat) -> Option<(CMat, f64)> {
    let cond = condition_number(m);
    if !cond.is_finite() {
        return None;
    }
    m.clone().lu().try_inverse().map(|inv| (inv, cond))
}

/// Moore-Penrose pseudo-inverse with the relative rank tolerance.
pub fn pseudo_inverse(m: &CMat, tol: f64) -> CMat {
    let p = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let mut out = CMat::zeros(m.ncols(), p);
    for i in 0..s.len() {
        if s_max > 0.0 && s[i] > tol * s_max {
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui) * Complex64::new(1.0 / s[i], 0.0);
        }
    }
    out
}

pub fn determinant(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

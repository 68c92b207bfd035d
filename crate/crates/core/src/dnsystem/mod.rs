//! Douglis-Nirenberg systems `A = (A_jk(x, D))` of linear differential operators.
//!
//! `D^μ` is the operator with symbol `ξ^μ`, so on the torus `D_j = -i ∂_j`
//! acting on `e^{i x·ξ}`. Coefficients are trigonometric polynomials in `x`
//! (constants being the single-mode case), which keeps every product exact.

mod adjoint;
mod dn;
pub mod library;
pub mod schema;

use std::collections::BTreeMap;

use num_complex::Complex64;

pub use dn::{solve_dn_numbers, DnNumbers, OrderMatrix};

use crate::error::{Error, Result};
use crate::hspace::{bracket_of, check_p, Grid, Mode, SpectralField, VectorField};
use crate::linalg::{czero, determinant, CMat};
use crate::report::{Report, Verdict, SAMPLING_NOTE};

/// Default pass threshold for ellipticity and condition-b margins.
pub const MARGIN_TOL: f64 = 1e-9;
pub const SPHERE_ANGLES_2D: usize = 720;
pub const SPHERE_POINTS_3D: usize = 2000;
/// Physical points per axis used as `x` samples for variable coefficients.
pub const X_SAMPLES_PER_AXIS: usize = 8;

/// Finite Fourier series `Σ_η c_η e^{i η·x}` with nonzero terms sorted by `η`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    terms: Vec<(Mode, Complex64)>,
}

impl TrigPoly {
    pub fn new(terms: impl IntoIterator<Item = (Mode, Complex64)>) -> Self {
        let mut map: BTreeMap<Mode, Complex64> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_default() += c;
        }
        TrigPoly {
            terms: map.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new([([0, 0, 0], c)])
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn terms(&self) -> &[(Mode, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| *m == [0, 0, 0])
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let phase: f64 = m.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::new(self.terms.iter().map(|(m, c)| ([-m[0], -m[1], -m[2]], c.conj())))
    }

    /// `D^α` applied to the polynomial: each term scales by `η^α`.
    pub fn derivative(&self, alpha: &[u32]) -> Self {
        Self::new(self.terms.iter().map(|(m, c)| {
            let f: f64 = alpha
                .iter()
                .zip(m)
                .map(|(&a, &k)| (k as f64).powi(a as i32))
                .product();
            (*m, c * f)
        }))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.terms.iter().map(|(m, c)| (*m, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    /// Multiply a field by the polynomial, keeping only lattice modes of the
    /// field's grid (Galerkin projection of the exact product).
    pub fn multiply(&self, w: &SpectralField) -> SpectralField {
        let g = w.grid();
        if self.is_constant() {
            let c = self.terms.first().map(|t| t.1).unwrap_or_default();
            return w.scaled(c);
        }
        let mut out = SpectralField::zeros(g);
        for (i, m) in g.modes() {
            let v = w.coeffs()[i];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (eta, c) in &self.terms {
                let target = [m[0] + eta[0], m[1] + eta[1], m[2] + eta[2]];
                if let Some(j) = g.index_of(&target) {
                    out.coeffs_mut()[j] += c * v;
                }
            }
        }
        out
    }
}

/// `Σ_{|μ| ≤ r} a_μ(x) D^μ` in normal form (one coefficient per multi-index).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffOp {
    terms: BTreeMap<Vec<u32>, TrigPoly>,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp::default()
    }

    pub fn new(terms: impl IntoIterator<Item = (Vec<u32>, TrigPoly)>) -> Self {
        let mut map: BTreeMap<Vec<u32>, TrigPoly> = BTreeMap::new();
        for (mu, a) in terms {
            let e = map.entry(mu).or_default();
            *e = e.add(&a);
        }
        map.retain(|_, a| !a.is_zero());
        DiffOp { terms: map }
    }

    /// Multiplication by a constant.
    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self::new([(vec![0; dim], TrigPoly::constant(c))])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &TrigPoly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Order `max |μ|` over nonzero terms, `None` for the zero operator.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().map(|mu| mu.iter().sum::<u32>() as i64).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.values().all(TrigPoly::is_constant)
    }

    /// `Σ a_μ(x) ξ^μ` restricted to `|μ| = exact` when given.
    pub fn symbol(&self, x: &[f64], xi: &[f64], exact: Option<u32>) -> Complex64 {
        self.terms
            .iter()
            .filter(|(mu, _)| exact.map_or(true, |e| mu.iter().sum::<u32>() == e))
            .map(|(mu, a)| a.eval(x) * monomial_f(xi, mu))
            .sum()
    }

    pub fn apply(&self, w: &SpectralField) -> SpectralField {
        let g = w.grid();
        let dim = g.dim();
        let mut out = SpectralField::zeros(g);
        for (mu, a) in &self.terms {
            let d = w.map_modes(|m, c| {
                let f: f64 = mu[..dim]
                    .iter()
                    .zip(m)
                    .map(|(&k, &xi)| (xi as f64).powi(k as i32))
                    .product();
                c * f
            });
            let term = a.multiply(&d);
            for (o, t) in out.coeffs_mut().iter_mut().zip(term.coeffs()) {
                *o += t;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).map(|(m, a)| (m.clone(), a.clone())))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::new(self.terms.iter().map(|(m, a)| (m.clone(), a.scaled(c))))
    }
}

fn monomial_f(xi: &[f64], mu: &[u32]) -> f64 {
    mu.iter().zip(xi).map(|(&k, &x)| x.powi(k as i32)).product()
}

/// A `p × p` matrix differential operator with optional DN numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct DnSystem {
    dim: usize,
    ops: Vec<Vec<DiffOp>>,
    dn: Option<DnNumbers>,
}

impl DnSystem {
    pub fn new(dim: usize, ops: Vec<Vec<DiffOp>>, dn: Option<DnNumbers>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidSystem(format!("dimension must be 1..=3, got {dim}")));
        }
        let p = ops.len();
        if p == 0 || ops.iter().any(|row| row.len() != p) {
            return Err(Error::InvalidSystem("operator matrix must be square and non-empty".into()));
        }
        for (j, row) in ops.iter().enumerate() {
            for (k, op) in row.iter().enumerate() {
                for (mu, a) in op.terms() {
                    if mu.len() != dim {
                        return Err(Error::InvalidSystem(format!(
                            "block ({j},{k}): multi-index {mu:?} has length {} but n = {dim}",
                            mu.len()
                        )));
                    }
                    for (eta, c) in a.terms() {
                        if eta[dim..].iter().any(|&e| e != 0) || !c.re.is_finite() || !c.im.is_finite() {
                            return Err(Error::InvalidSystem(format!(
                                "block ({j},{k}): bad coefficient term {eta:?} -> {c}"
                            )));
                        }
                    }
                }
            }
        }
        let sys = DnSystem { dim, ops, dn: None };
        match dn {
            Some(dn) => sys.with_dn(dn),
            None => Ok(sys),
        }
    }

    /// Attach DN numbers after checking `r_jk ≤ l_j + m_k`.
    pub fn with_dn(mut self, dn: DnNumbers) -> Result<Self> {
        if dn.l.len() != self.p() {
            return Err(Error::ShapeMismatch {
                expected: self.p(),
                got: dn.l.len(),
            });
        }
        if !dn.satisfies(&self.order_matrix()) {
            return Err(Error::InvalidSystem(format!(
                "DN numbers l = {:?}, m = {:?} violate r_jk <= l_j + m_k",
                dn.l, dn.m
            )));
        }
        self.dn = Some(dn);
        Ok(self)
    }

    /// Attach DN numbers computed by [`solve_dn_numbers`] if none are present.
    pub fn with_computed_dn(self) -> Result<Self> {
        if self.dn.is_some() {
            return Ok(self);
        }
        let dn = solve_dn_numbers(&self.order_matrix())?;
        self.with_dn(dn)
    }

    pub fn p(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn op(&self, j: usize, k: usize) -> &DiffOp {
        &self.ops[j][k]
    }

    pub fn ops(&self) -> &[Vec<DiffOp>] {
        &self.ops
    }

    pub fn dn(&self) -> Option<&DnNumbers> {
        self.dn.as_ref()
    }

    pub fn require_dn(&self) -> Result<&DnNumbers> {
        self.dn
            .as_ref()
            .ok_or_else(|| Error::Precondition("system has no DN numbers".into()))
    }

    pub fn order_matrix(&self) -> OrderMatrix {
        self.ops
            .iter()
            .map(|row| row.iter().map(DiffOp::order).collect())
            .collect()
    }

    pub fn q(&self) -> Result<f64> {
        Ok(self.require_dn()?.q())
    }

    pub fn is_constant(&self) -> bool {
        self.ops.iter().flatten().all(DiffOp::is_constant)
    }

    fn principal_orders(&self) -> Result<Vec<Vec<Option<u32>>>> {
        let dn = self.require_dn()?;
        let mut out = vec![vec![None; self.p()]; self.p()];
        for j in 0..self.p() {
            for k in 0..self.p() {
                if self.ops[j][k].is_zero() {
                    continue;
                }
                let s = dn.block_order(j, k);
                if (s - s.round()).abs() > 1e-12 {
                    return Err(Error::InvalidSystem(format!(
                        "block ({j},{k}) is nonzero but l_j + m_k = {s} is not an integer"
                    )));
                }
                if s >= 0.0 {
                    out[j][k] = Some(s.round() as u32);
                }
            }
        }
        Ok(out)
    }

    /// `A⁽⁰⁾(x, ξ)`: only terms with `|μ| = l_j + m_k` survive.
    pub fn principal_symbol(&self, x: &[f64], xi: &[f64]) -> Result<CMat> {
        let orders = self.principal_orders()?;
        let p = self.p();
        let mut m = czero(p);
        for j in 0..p {
            for k in 0..p {
                if let Some(e) = orders[j][k] {
                    m[(j, k)] = self.ops[j][k].symbol(x, xi, Some(e));
                }
            }
        }
        Ok(m)
    }

    /// `A(x, ξ) = Σ a_μ(x) ξ^μ` over all terms.
    pub fn full_symbol(&self, x: &[f64], xi: &[f64]) -> CMat {
        let p = self.p();
        let mut m = czero(p);
        for j in 0..p {
            for k in 0..p {
                m[(j, k)] = self.ops[j][k].symbol(x, xi, None);
            }
        }
        m
    }

    /// `(Au)_j = Σ_k A_jk u_k`, exact and projected onto the field's lattice.
    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        check_p(self.p(), u.p())?;
        let g = u.grid();
        if g.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "system has n = {} but field grid has n = {}",
                self.dim,
                g.dim()
            )));
        }
        let mut out = Vec::with_capacity(self.p());
        for row in &self.ops {
            let mut acc = SpectralField::zeros(g);
            for (op, comp) in row.iter().zip(u.components()) {
                if op.is_zero() {
                    continue;
                }
                acc = acc.add(&op.apply(comp))?;
            }
            out.push(acc);
        }
        VectorField::new(out)
    }

    pub fn formal_adjoint(&self) -> DnSystem {
        adjoint::formal_adjoint(self)
    }

    /// `min |det A⁽⁰⁾(x, ξ)|` over `x` samples and unit directions `ξ`.
    pub fn ellipticity_margin(&self, x_samples: &[Vec<f64>], sphere: &[Vec<f64>]) -> Result<Report> {
        self.ellipticity_margin_tol(x_samples, sphere, MARGIN_TOL)
    }

    pub fn ellipticity_margin_tol(
        &self,
        x_samples: &[Vec<f64>],
        sphere: &[Vec<f64>],
        tol: f64,
    ) -> Result<Report> {
        self.principal_orders()?;
        if x_samples.is_empty() || sphere.is_empty() {
            return Err(Error::Precondition("empty sample set".into()));
        }
        let mut best = f64::INFINITY;
        let mut arg = (Vec::new(), Vec::new());
        for x in x_samples {
            for xi in sphere {
                let d = determinant(&self.principal_symbol(x, xi)?).norm();
                if d < best {
                    best = d;
                    arg = (x.clone(), xi.clone());
                }
            }
        }
        let mut r = Report::new("ellipticity").with_config(serde_json::json!({
            "p": self.p(),
            "n": self.dim,
            "x_samples": x_samples.len(),
            "sphere_points": sphere.len(),
        }));
        r.constant("c_hat", best);
        r.check(
            "c_hat",
            "dnsystem: |det A0(x, xi)| >= c > 0 on |xi| = 1 (condition ii)",
            best,
            tol,
            Verdict::from_bool(best > tol),
        );
        r.note(SAMPLING_NOTE);
        r.note(format!("minimum attained at x = {:?}, xi = {:?}", arg.0, arg.1));
        Ok(r)
    }

    /// `min |det A(x, ξ)| / ⟨ξ⟩^q` over samples with `|x| + |ξ| ≥ c2`.
    pub fn condition_b_margin(
        &self,
        c2: f64,
        x_samples: &[Vec<f64>],
        xi_samples: &[Vec<f64>],
    ) -> Result<Report> {
        self.condition_b_margin_tol(c2, x_samples, xi_samples, MARGIN_TOL)
    }

    pub fn condition_b_margin_tol(
        &self,
        c2: f64,
        x_samples: &[Vec<f64>],
        xi_samples: &[Vec<f64>],
        tol: f64,
    ) -> Result<Report> {
        if !(c2 >= 0.0) {
            return Err(Error::Precondition(format!("c2 must be >= 0, got {c2}")));
        }
        let q = self.q()?;
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut best = f64::INFINITY;
        let mut used = 0usize;
        for x in x_samples {
            for xi in xi_samples {
                if norm(x) + norm(xi) < c2 {
                    continue;
                }
                used += 1;
                let d = determinant(&self.full_symbol(x, xi)).norm() / bracket_of(xi).powf(q);
                best = best.min(d);
            }
        }
        if used == 0 {
            return Err(Error::Precondition(format!("no samples with |x| + |xi| >= {c2}")));
        }
        let mut r = Report::new("condition-b").with_config(serde_json::json!({
            "p": self.p(),
            "n": self.dim,
            "c2": c2,
            "q": q,
            "samples": used,
        }));
        r.constant("c1_hat", best);
        r.constant("q", q);
        r.check(
            "c1_hat",
            "dnsystem: |det A(x, xi)| >= c1 <xi>^q for |x| + |xi| >= c2 (condition b)",
            best,
            tol,
            Verdict::from_bool(best > tol),
        );
        r.note(SAMPLING_NOTE);
        Ok(r)
    }
}

/// Unit directions: `±1` for n = 1, equally spaced angles for n = 2, a
/// Fibonacci sphere for n = 3.
pub fn default_sphere(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..SPHERE_ANGLES_2D)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / SPHERE_ANGLES_2D as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let n = SPHERE_POINTS_3D;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
    }
}

/// `x` samples: the origin for constant coefficients, otherwise the points of
/// a coarse torus grid.
pub fn default_x_samples(sys: &DnSystem) -> Vec<Vec<f64>> {
    if sys.is_constant() {
        return vec![vec![0.0; sys.dim()]];
    }
    let g = Grid::new(sys.dim(), X_SAMPLES_PER_AXIS).expect("valid sample grid");
    (0..g.len()).map(|i| g.point(i)[..sys.dim()].to_vec()).collect()
}

/// Lattice modes of `grid` as real frequency vectors.
pub fn lattice_samples(grid: Grid) -> Vec<Vec<f64>> {
    grid.modes()
        .map(|(_, m)| m[..grid.dim()].iter().map(|&v| v as f64).collect())
        .collect()
}

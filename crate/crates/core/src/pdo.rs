//! Matrix Fourier-multiplier and left-quantized operators, and the cutoff
//! parametrix of a constant-coefficient system.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dnsystem::DnSystem;
use crate::error::{Error, Result};
use crate::hspace::io::{write_field, Dtype};
use crate::hspace::{
    check_p, vector_hnorm_with, weight_tables, Grid, Mode, SpectralField, VectorField, WeightTable,
};
use crate::linalg::{cidentity, czero, inverse_with_condition, singular_values, spectral_norm, CMat, CONDITION_FLAG, RANK_TOL};
use crate::numeric::trial_rng;
use crate::report::{Report, Verdict};
use crate::roparam::RoParam;

pub type MultiplierFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;
pub type QuantizedFn = Arc<dyn Fn(&[f64], &[f64]) -> CMat + Send + Sync>;

/// Symbol growth ratio allowed between a grid and its refinement.
pub const GROWTH_STABILITY: f64 = 1.1;
/// Cutoff radius factor: `R = 1.2·(1 + max ⟨ξ⟩)` over singular lattice modes.
pub const CUTOFF_FACTOR: f64 = 1.2;

#[derive(Clone)]
pub enum Symbol {
    /// `g(ξ)`, applied exactly mode by mode.
    Multiplier(MultiplierFn),
    /// `g(x, ξ)`, left quantization.
    Quantized(QuantizedFn),
    /// A differential system, applied through its coefficients.
    Differential(DnSystem),
}

/// A `p × p` operator with declared block orders `r_jk`.
///
/// Blocks that vanish identically carry order `-∞`.
#[derive(Clone)]
pub struct FourierOp {
    p: usize,
    dim: usize,
    symbol: Symbol,
    orders: Vec<Vec<f64>>,
    label: String,
}

impl fmt::Debug for FourierOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.symbol {
            Symbol::Multiplier(_) => "multiplier",
            Symbol::Quantized(_) => "quantized",
            Symbol::Differential(_) => "differential",
        };
        write!(f, "FourierOp({}, {kind}, p = {}, orders = {:?})", self.label, self.p, self.orders)
    }
}

fn check_orders(p: usize, orders: &[Vec<f64>]) -> Result<()> {
    check_p(p, orders.len())?;
    for row in orders {
        check_p(p, row.len())?;
    }
    Ok(())
}

impl FourierOp {
    pub fn multiplier(dim: usize, orders: Vec<Vec<f64>>, g: MultiplierFn) -> Result<Self> {
        check_orders(orders.len(), &orders)?;
        Ok(FourierOp {
            p: orders.len(),
            dim,
            symbol: Symbol::Multiplier(g),
            orders,
            label: "multiplier".into(),
        })
    }

    pub fn quantized(dim: usize, orders: Vec<Vec<f64>>, g: QuantizedFn) -> Result<Self> {
        check_orders(orders.len(), &orders)?;
        Ok(FourierOp {
            p: orders.len(),
            dim,
            symbol: Symbol::Quantized(g),
            orders,
            label: "quantized".into(),
        })
    }

    pub fn identity(dim: usize, p: usize) -> Self {
        let orders = (0..p)
            .map(|j| (0..p).map(|k| if j == k { 0.0 } else { f64::NEG_INFINITY }).collect())
            .collect();
        FourierOp::multiplier(dim, orders, Arc::new(move |_| cidentity(p)))
            .expect("square orders")
            .with_label("identity")
    }

    /// Scalar multiplier `⟨ξ⟩^r`.
    pub fn bracket_power(dim: usize, r: f64) -> Self {
        FourierOp::multiplier(
            dim,
            vec![vec![r]],
            Arc::new(move |xi| {
                let b = crate::hspace::bracket_of(xi);
                CMat::from_element(1, 1, Complex64::new(b.powf(r), 0.0))
            }),
        )
        .expect("1x1 orders")
        .with_label(format!("<xi>^{r}"))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn block_orders(&self) -> &[Vec<f64>] {
        &self.orders
    }

    /// `r = max r_jk`.
    pub fn order(&self) -> f64 {
        self.orders.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_x_independent(&self) -> bool {
        match &self.symbol {
            Symbol::Multiplier(_) => true,
            Symbol::Quantized(_) => false,
            Symbol::Differential(s) => s.is_constant(),
        }
    }

    pub fn symbol_at(&self, x: &[f64], xi: &[f64]) -> CMat {
        match &self.symbol {
            Symbol::Multiplier(g) => g(xi),
            Symbol::Quantized(g) => g(x, xi),
            Symbol::Differential(s) => s.full_symbol(x, xi),
        }
    }

    /// Per-mode symbol matrices of an x-independent operator on `grid`.
    pub fn tabulate(&self, grid: Grid) -> Result<SymbolTable> {
        if !self.is_x_independent() {
            return Err(Error::Precondition(format!("{} depends on x", self.label)));
        }
        self.check_grid_dim(grid)?;
        let x = vec![0.0; self.dim];
        let mats = grid
            .modes()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(_, m)| self.symbol_at(&x, &mode_vec(m, self.dim)))
            .collect();
        Ok(SymbolTable {
            grid,
            p: self.p,
            mats,
        })
    }

    fn check_grid_dim(&self, grid: Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "operator has n = {} but grid has n = {}",
                self.dim,
                grid.dim()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        check_p(self.p, u.p())?;
        self.check_grid_dim(u.grid())?;
        match &self.symbol {
            Symbol::Differential(s) => s.apply(u),
            Symbol::Multiplier(_) => self.tabulate(u.grid())?.apply(u),
            Symbol::Quantized(g) => apply_quantized(g, self.p, u),
        }
    }

    /// `sup |g_jk(ξ)| ⟨ξ⟩^{-r_jk}` over lattice modes with `⟨ξ⟩ ≥ from`.
    pub fn growth_constant(&self, grid: Grid, from: f64) -> Result<f64> {
        let x = vec![0.0; self.dim];
        let mut best: f64 = 0.0;
        for (i, m) in grid.modes() {
            let b = grid.bracket(i);
            if b < from {
                continue;
            }
            let g = self.symbol_at(&x, &mode_vec(&m, self.dim));
            for j in 0..self.p {
                for k in 0..self.p {
                    let v = g[(j, k)].norm();
                    let r = self.orders[j][k];
                    if r == f64::NEG_INFINITY {
                        if v != 0.0 {
                            return Err(Error::InvalidSystem(format!(
                                "block ({j},{k}) of {} is declared zero but is {v:e} at {m:?}",
                                self.label
                            )));
                        }
                        continue;
                    }
                    best = best.max(v * b.powf(-r));
                }
            }
        }
        Ok(best)
    }

    /// Spot check of the declared orders: the growth constants of `g` and of
    /// its first differences in `ξ` must not grow under refinement.
    pub fn growth_report(&self, grid: Grid, from: f64) -> Result<Report> {
        let fine = grid.refined(2);
        let c0 = self.growth_constant(grid, from)?;
        let c1 = self.growth_constant(fine, from)?;
        let d0 = self.difference_constant(grid, from)?;
        let d1 = self.difference_constant(fine, from)?;
        let mut r = Report::new("symbol-growth").with_config(serde_json::json!({
            "operator": self.label,
            "orders": self.orders.iter().map(|row| row.iter().map(|v| if v.is_finite() { serde_json::json!(v) } else { serde_json::json!("-inf") }).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "from": from,
        }));
        r.grid_sizes = vec![grid.size(), fine.size()];
        r.constant("growth", c0);
        r.constant("growth_refined", c1);
        r.constant("difference", d0);
        r.constant("difference_refined", d1);
        let ok = |a: f64, b: f64| b <= GROWTH_STABILITY * a || b <= 1e-12;
        r.check(
            "growth",
            "pdo: |g(xi)| <= C <xi>^r on the lattice, C stable under refinement",
            c1 / c0.max(f64::MIN_POSITIVE),
            GROWTH_STABILITY,
            Verdict::from_bool(ok(c0, c1)),
        );
        r.check(
            "difference",
            "pdo: |g(xi + e_i) - g(xi)| <= C <xi>^(r-1), C stable under refinement",
            d1 / d0.max(f64::MIN_POSITIVE),
            GROWTH_STABILITY,
            Verdict::from_bool(ok(d0, d1)),
        );
        r.note("tested (alpha, beta): (0, 0) and (0, e_i) by forward differences in xi");
        Ok(r)
    }

    fn difference_constant(&self, grid: Grid, from: f64) -> Result<f64> {
        let x = vec![0.0; self.dim];
        let mut best: f64 = 0.0;
        for (i, m) in grid.modes() {
            let b = grid.bracket(i);
            if b < from {
                continue;
            }
            let xi = mode_vec(&m, self.dim);
            let g = self.symbol_at(&x, &xi);
            for axis in 0..self.dim {
                let mut next = m;
                next[axis] += 1;
                let Some(ni) = grid.index_of(&next) else { continue };
                if grid.bracket(ni) < from {
                    continue;
                }
                let h = self.symbol_at(&x, &mode_vec(&next, self.dim));
                for j in 0..self.p {
                    for k in 0..self.p {
                        let r = self.orders[j][k];
                        if r == f64::NEG_INFINITY {
                            continue;
                        }
                        best = best.max((h[(j, k)] - g[(j, k)]).norm() * b.powf(1.0 - r));
                    }
                }
            }
        }
        Ok(best)
    }
}

/// Per-mode symbol matrices on one grid.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: Grid,
    p: usize,
    mats: Vec<CMat>,
}

impl SymbolTable {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn at(&self, index: usize) -> &CMat {
        &self.mats[index]
    }

    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        check_p(self.p, u.p())?;
        crate::hspace::check_grid(self.grid, u.grid())?;
        let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; self.p];
        for (i, m) in self.mats.iter().enumerate() {
            for j in 0..self.p {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.p {
                    acc += m[(j, k)] * u.component(k).coeffs()[i];
                }
                out[j][i] = acc;
            }
        }
        VectorField::new(
            out.into_iter()
                .map(|c| SpectralField::from_coeffs(self.grid, c))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `sup_ξ ‖diag(φ_dst,j) g(ξ) diag(1/φ_src,k)‖₂`.
    pub fn weighted_norm(&self, src: &[WeightTable], dst: &[WeightTable]) -> f64 {
        let mut best: f64 = 0.0;
        for (i, m) in self.mats.iter().enumerate() {
            let ns = self.grid.norm_sq(i);
            let w = CMat::from_fn(self.p, self.p, |j, k| {
                m[(j, k)] * (dst[j].get(ns) / src[k].get(ns))
            });
            best = best.max(spectral_norm(&w));
        }
        best
    }
}

pub(crate) fn mode_vec(m: &Mode, dim: usize) -> Vec<f64> {
    m[..dim].iter().map(|&v| v as f64).collect()
}

/// `Gu(x) = Σ_ξ g(x, ξ) û(ξ) e^{i x·ξ}` sampled on the doubled grid, then
/// transformed back and truncated to the input lattice.
fn apply_quantized(g: &QuantizedFn, p: usize, u: &VectorField) -> Result<VectorField> {
    let grid = u.grid();
    let dim = grid.dim();
    let fine = grid.refined(2);
    let modes: Vec<(usize, Vec<f64>)> = grid.modes().map(|(i, m)| (i, mode_vec(&m, dim))).collect();
    let samples: Vec<Vec<Complex64>> = (0..fine.len())
        .into_par_iter()
        .map(|xi_idx| {
            let pt = fine.point(xi_idx);
            let x = &pt[..dim];
            let mut acc = vec![Complex64::new(0.0, 0.0); p];
            for (i, xi) in &modes {
                let s = g(x, xi);
                let phase = Complex64::from_polar(1.0, x.iter().zip(xi).map(|(a, b)| a * b).sum());
                for j in 0..p {
                    for k in 0..p {
                        acc[j] += s[(j, k)] * u.component(k).coeffs()[*i] * phase;
                    }
                }
            }
            acc
        })
        .collect();
    let comps = (0..p)
        .map(|j| {
            let col: Vec<Complex64> = samples.iter().map(|s| s[j]).collect();
            SpectralField::from_samples(fine, &col)?.resample(grid)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// `A` as an operator with block orders `l_j + m_k` (or `r_jk` without DN numbers).
pub fn system_as_op(sys: &DnSystem) -> FourierOp {
    let p = sys.p();
    let orders = match sys.dn() {
        Some(dn) => (0..p)
            .map(|j| {
                (0..p)
                    .map(|k| {
                        if sys.op(j, k).is_zero() {
                            f64::NEG_INFINITY
                        } else {
                            dn.block_order(j, k)
                        }
                    })
                    .collect()
            })
            .collect(),
        None => sys
            .order_matrix()
            .iter()
            .map(|row| row.iter().map(|r| r.map_or(f64::NEG_INFINITY, |v| v as f64)).collect())
            .collect(),
    };
    FourierOp {
        p,
        dim: sys.dim(),
        symbol: Symbol::Differential(sys.clone()),
        orders,
        label: "A".into(),
    }
}

fn is_singular(m: &CMat) -> bool {
    let s = singular_values(m);
    let hi = s.first().copied().unwrap_or(0.0);
    let lo = s.last().copied().unwrap_or(0.0);
    hi == 0.0 || lo <= RANK_TOL * hi
}

fn require_constant(sys: &DnSystem) -> Result<()> {
    if !sys.is_constant() {
        return Err(Error::Precondition(
            "parametrix construction needs constant coefficients".into(),
        ));
    }
    Ok(())
}

/// Lattice modes where the full symbol is singular under the rank tolerance.
pub fn singular_modes(sys: &DnSystem, grid: Grid) -> Result<Vec<Mode>> {
    require_constant(sys)?;
    let x = vec![0.0; sys.dim()];
    Ok(grid
        .modes()
        .filter(|(_, m)| is_singular(&sys.full_symbol(&x, &mode_vec(m, sys.dim()))))
        .map(|(_, m)| m)
        .collect())
}

/// `1.2·(1 + max ⟨ξ⟩)` over singular lattice modes, or 0 when there are none.
pub fn default_cutoff(sys: &DnSystem, grid: Grid) -> Result<f64> {
    let modes = singular_modes(sys, grid)?;
    Ok(modes
        .iter()
        .map(|m| crate::hspace::bracket_of(&mode_vec(m, sys.dim())))
        .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))))
        .map_or(0.0, |b| CUTOFF_FACTOR * (1.0 + b)))
}

/// `B`, `T₁`, `T₂` with `BA = I + T₁` and `AB = I + T₂` on the lattice.
#[derive(Debug, Clone)]
pub struct ParametrixBundle {
    pub b: FourierOp,
    pub t1: FourierOp,
    pub t2: FourierOp,
    pub radius: f64,
    /// Modes with `⟨ξ⟩ ≥ R` whose symbol condition number exceeds the flag level.
    pub flagged: Vec<(Mode, f64)>,
    pub report: Report,
}

pub fn build_parametrix(sys: &DnSystem, radius: f64, grid: Grid) -> Result<ParametrixBundle> {
    require_constant(sys)?;
    if !(radius >= 0.0) {
        return Err(Error::Precondition(format!("cutoff radius must be >= 0, got {radius}")));
    }
    let dn = sys.require_dn()?.clone();
    let p = sys.p();
    let dim = sys.dim();
    let x0 = vec![0.0; dim];
    let mut flagged = Vec::new();
    for (i, m) in grid.modes() {
        if grid.bracket(i) < radius {
            continue;
        }
        let a = sys.full_symbol(&x0, &mode_vec(&m, dim));
        if is_singular(&a) {
            let s = singular_values(&a);
            let ratio = s.last().unwrap() / s.first().unwrap().max(f64::MIN_POSITIVE);
            return Err(Error::SingularSymbol {
                mode: m[..dim].to_vec(),
                ratio,
            });
        }
        let (_, cond) = inverse_with_condition(&a).ok_or_else(|| Error::SingularSymbol {
            mode: m[..dim].to_vec(),
            ratio: 0.0,
        })?;
        if cond > CONDITION_FLAG {
            flagged.push((m, cond));
        }
    }

    let a_sys = sys.clone();
    let b_symbol: MultiplierFn = Arc::new(move |xi| {
        if crate::hspace::bracket_of(xi) < radius {
            return czero(p);
        }
        let x = vec![0.0; xi.len()];
        match inverse_with_condition(&a_sys.full_symbol(&x, xi)) {
            Some((inv, _)) => inv,
            None => CMat::from_element(p, p, Complex64::new(f64::NAN, f64::NAN)),
        }
    });
    let b_orders = (0..p)
        .map(|k| (0..p).map(|j| -dn.m[k] - dn.l[j]).collect())
        .collect();
    let b = FourierOp::multiplier(dim, b_orders, b_symbol)?.with_label("B");
    let t_symbol: MultiplierFn = Arc::new(move |xi| {
        if crate::hspace::bracket_of(xi) < radius {
            -cidentity(p)
        } else {
            czero(p)
        }
    });
    let t_orders = vec![vec![f64::NEG_INFINITY; p]; p];
    let t1 = FourierOp {
        p,
        dim,
        symbol: Symbol::Multiplier(t_symbol),
        orders: t_orders,
        label: "T1".into(),
    };
    let t2 = t1.clone().with_label("T2");

    let mut report = Report::new("parametrix").with_config(serde_json::json!({
        "p": p,
        "n": dim,
        "radius": radius,
    }));
    report.grid_sizes.push(grid.size());
    report.constant("radius", radius);
    report.constant("flagged_modes", flagged.len() as f64);
    let growth = b.growth_report(grid, radius.max(1.0))?;
    report.absorb("B", &growth);
    report.note("T1 = T2 = -1{<xi> < R} I: finitely many modes, order -inf on the lattice");
    for (m, c) in &flagged {
        report.note(format!("ill-conditioned symbol at {:?}: condition {c:e}", &m[..dim]));
    }
    Ok(ParametrixBundle {
        b,
        t1,
        t2,
        radius,
        flagged,
        report,
    })
}

/// Empirical and exact operator norms `H^{φ_src} → H^{φ_dst}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNorm {
    pub empirical: f64,
    pub exact: Option<f64>,
}

/// Random unit-norm fields give `empirical`; x-independent operators also
/// get the exact per-mode supremum.
pub fn op_norm_estimate(
    op: &FourierOp,
    src: &[RoParam],
    dst: &[RoParam],
    grid: Grid,
    trials: usize,
    seed: u64,
) -> Result<OpNorm> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    check_p(op.p, src.len())?;
    check_p(op.p, dst.len())?;
    let src_t = weight_tables(src, grid)?;
    let dst_t = weight_tables(dst, grid)?;
    let table = if op.is_x_independent() {
        Some(op.tabulate(grid)?)
    } else {
        None
    };
    let ratios = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let u = VectorField::random(grid, op.p, &mut trial_rng(seed, t));
            let n = vector_hnorm_with(&u, &src_t);
            let g = match &table {
                Some(tab) => tab.apply(&u)?,
                None => op.apply(&u)?,
            };
            Ok(vector_hnorm_with(&g, &dst_t) / n)
        })
        .collect::<Result<Vec<f64>>>()?;
    let empirical = ratios.into_iter().fold(0.0, f64::max);
    let exact = table.map(|t| t.weighted_norm(&src_t, &dst_t));
    Ok(OpNorm { empirical, exact })
}

/// Write `op` applied to the all-ones field in component `k`, one file per
/// block column, as `<dir>/<label>_col<k>.bin`.
pub fn dump_columns(op: &FourierOp, grid: Grid, dir: &Path) -> Result<()> {
    for k in 0..op.p {
        let mut u = VectorField::zeros(grid, op.p);
        u.component_mut(k).coeffs_mut().fill(Complex64::new(1.0, 0.0));
        let col = op.apply(&u)?;
        write_field(&dir.join(format!("{}_col{k}.bin", op.label)), &col, Dtype::Complex128)?;
    }
    Ok(())
}

//! RO-varying function parameters `φ : [1, ∞) → (0, ∞)`.
//!
//! A parameter is RO-varying when `φ(λt)/φ(t)` stays within `[1/c, c]` for
//! `t ≥ 1` and `λ` in a compact subset of `[1, ∞)`. The built-in kinds are
//! closed under multiplication by powers `t^r` and under reciprocals, which is
//! all the space-weight algebra (`φ·ρ^{m_k}`, `φ·ρ^{-l_j}`) needs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, log_space};
use crate::report::{Report, Verdict, SAMPLING_NOTE};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute tolerance for the `∫ α(τ)/τ dτ` quadrature of representation kinds.
pub const REPRESENTATION_QUAD_TOL: f64 = 1e-10;

pub const DEFAULT_T_POINTS: usize = 400;
pub const DEFAULT_T_MAX: f64 = 1e6;
pub const DEFAULT_LAMBDAS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

pub fn default_t_grid() -> Vec<f64> {
    log_space(1.0, DEFAULT_T_MAX, DEFAULT_T_POINTS)
}

#[derive(Clone)]
pub enum RoKind {
    /// `t^s`
    Power { s: f64 },
    /// `t^s (1 + ln t)^r`
    PowerLog { s: f64, r: f64 },
    /// `t^s exp(δ sin(ln t))`
    PowerSinLog { s: f64, delta: f64 },
    /// `exp(β(t) + ∫₁ᵗ α(τ)/τ dτ)` with bounded `α`, `β`.
    Representation { alpha: RealFn, beta: RealFn },
    Custom { eval: RealFn },
}

/// An RO-varying function parameter with optional analytic Matuszewska indices.
#[derive(Clone)]
pub struct RoParam {
    kind: RoKind,
    declared: Option<(f64, f64)>,
    label: String,
}

impl fmt::Debug for RoParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoParam")
            .field("label", &self.label)
            .field("declared", &self.declared)
            .finish()
    }
}

impl fmt::Display for RoParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl RoParam {
    pub fn power(s: f64) -> Self {
        RoParam {
            kind: RoKind::Power { s },
            declared: Some((s, s)),
            label: format!("power({s})"),
        }
    }

    /// The distinguished parameter `ρ(t) = t`.
    pub fn rho() -> Self {
        Self::power(1.0)
    }

    pub fn power_log(s: f64, r: f64) -> Self {
        RoParam {
            kind: RoKind::PowerLog { s, r },
            declared: Some((s, s)),
            label: format!("powerlog({s},{r})"),
        }
    }

    /// `t^s exp(δ sin ln t)`. Its Matuszewska indices are both `s`: the
    /// oscillating factor is bounded between `e^{-|δ|}` and `e^{|δ|}`.
    pub fn power_sin_log(s: f64, delta: f64) -> Self {
        RoParam {
            kind: RoKind::PowerSinLog { s, delta },
            declared: Some((s, s)),
            label: format!("powersinlog({s},{delta})"),
        }
    }

    pub fn representation(alpha: RealFn, beta: RealFn, declared: Option<(f64, f64)>) -> Self {
        RoParam {
            kind: RoKind::Representation { alpha, beta },
            declared,
            label: "representation".to_string(),
        }
    }

    /// A parameter given only by its values. Carries no declared indices.
    pub fn custom(eval: RealFn) -> Self {
        RoParam {
            kind: RoKind::Custom { eval },
            declared: None,
            label: "custom".to_string(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kind(&self) -> &RoKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Analytic `(σ₀, σ₁)` when known.
    pub fn declared_indices(&self) -> Option<(f64, f64)> {
        self.declared
    }

    pub fn is_builtin(&self) -> bool {
        matches!(
            self.kind,
            RoKind::Power { .. } | RoKind::PowerLog { .. } | RoKind::PowerSinLog { .. }
        )
    }

    /// `φ(t)` for `t ≥ 1`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::Domain(format!("{} evaluated at t = {t} < 1", self.label)));
        }
        let v = match &self.kind {
            RoKind::Power { s } => t.powf(*s),
            RoKind::PowerLog { s, r } => t.powf(*s) * (1.0 + t.ln()).powf(*r),
            RoKind::PowerSinLog { s, delta } => t.powf(*s) * (delta * t.ln().sin()).exp(),
            RoKind::Representation { alpha, beta } => {
                let integral = representation_integral(alpha, t);
                (beta(t) + integral).exp()
            }
            RoKind::Custom { eval } => eval(t),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "{} returned non-positive or non-finite value {v} at t = {t}",
                self.label
            )));
        }
        Ok(v)
    }

    /// `ln φ(t)`, computed analytically for the built-in kinds.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::Domain(format!("{} evaluated at t = {t} < 1", self.label)));
        }
        match &self.kind {
            RoKind::Power { s } => Ok(s * t.ln()),
            RoKind::PowerLog { s, r } => Ok(s * t.ln() + r * (1.0 + t.ln()).ln()),
            RoKind::PowerSinLog { s, delta } => Ok(s * t.ln() + delta * t.ln().sin()),
            RoKind::Representation { alpha, beta } => Ok(beta(t) + representation_integral(alpha, t)),
            RoKind::Custom { .. } => self.eval(t).map(f64::ln),
        }
    }

    /// `t ↦ φ(t)·t^r`. Indices shift by `+r`.
    pub fn scale_power(&self, r: f64) -> RoParam {
        let declared = self.declared.map(|(a, b)| (a + r, b + r));
        let (kind, label) = match &self.kind {
            RoKind::Power { s } => (RoKind::Power { s: s + r }, format!("power({})", s + r)),
            RoKind::PowerLog { s, r: q } => (
                RoKind::PowerLog { s: s + r, r: *q },
                format!("powerlog({},{q})", s + r),
            ),
            RoKind::PowerSinLog { s, delta } => (
                RoKind::PowerSinLog { s: s + r, delta: *delta },
                format!("powersinlog({},{delta})", s + r),
            ),
            RoKind::Representation { alpha, beta } => {
                let alpha = alpha.clone();
                (
                    RoKind::Representation {
                        alpha: Arc::new(move |t| alpha(t) + r),
                        beta: beta.clone(),
                    },
                    format!("{}*t^{r}", self.label),
                )
            }
            RoKind::Custom { eval } => {
                let eval = eval.clone();
                (
                    RoKind::Custom {
                        eval: Arc::new(move |t| eval(t) * t.powf(r)),
                    },
                    format!("{}*t^{r}", self.label),
                )
            }
        };
        RoParam { kind, declared, label }
    }

    /// `1/φ`. Indices map to `(-σ₁, -σ₀)`.
    pub fn reciprocal(&self) -> RoParam {
        let declared = self.declared.map(|(a, b)| (-b, -a));
        let (kind, label) = match &self.kind {
            RoKind::Power { s } => (RoKind::Power { s: -s }, format!("power({})", -s)),
            RoKind::PowerLog { s, r } => (
                RoKind::PowerLog { s: -s, r: -r },
                format!("powerlog({},{})", -s, -r),
            ),
            RoKind::PowerSinLog { s, delta } => (
                RoKind::PowerSinLog { s: -s, delta: -delta },
                format!("powersinlog({},{})", -s, -delta),
            ),
            RoKind::Representation { alpha, beta } => {
                let (alpha, beta) = (alpha.clone(), beta.clone());
                (
                    RoKind::Representation {
                        alpha: Arc::new(move |t| -alpha(t)),
                        beta: Arc::new(move |t| -beta(t)),
                    },
                    format!("1/{}", self.label),
                )
            }
            RoKind::Custom { eval } => {
                let eval = eval.clone();
                (
                    RoKind::Custom {
                        eval: Arc::new(move |t| 1.0 / eval(t)),
                    },
                    format!("1/{}", self.label),
                )
            }
        };
        RoParam { kind, declared, label }
    }

    pub fn spec(&self) -> Option<RoParamSpec> {
        match self.kind {
            RoKind::Power { s } => Some(RoParamSpec::Power { s }),
            RoKind::PowerLog { s, r } => Some(RoParamSpec::PowerLog { s, r }),
            RoKind::PowerSinLog { s, delta } => Some(RoParamSpec::PowerSinLog { s, delta }),
            _ => None,
        }
    }
}

fn representation_integral(alpha: &RealFn, t: f64) -> f64 {
    // ∫₁ᵗ α(τ)/τ dτ = ∫₀^{ln t} α(e^u) du
    adaptive_simpson(&|u: f64| alpha(u.exp()), 0.0, t.ln(), REPRESENTATION_QUAD_TOL)
}

/// JSON form of the built-in kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RoParamSpec {
    Power {
        s: f64,
    },
    #[serde(rename = "powerlog")]
    PowerLog { s: f64, r: f64 },
    #[serde(rename = "powersinlog")]
    PowerSinLog { s: f64, delta: f64 },
}

impl RoParamSpec {
    pub fn build(&self) -> RoParam {
        match *self {
            RoParamSpec::Power { s } => RoParam::power(s),
            RoParamSpec::PowerLog { s, r } => RoParam::power_log(s, r),
            RoParamSpec::PowerSinLog { s, delta } => RoParam::power_sin_log(s, delta),
        }
    }
}

impl FromStr for RoParamSpec {
    type Err = Error;

    /// Parses `power:S`, `powerlog:S,R` or `powersinlog:S,DELTA`.
    fn from_str(text: &str) -> Result<Self> {
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("expected KIND:ARGS, got {text:?}")))?;
        let nums = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {a:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let want = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("{kind} takes {k} argument(s), got {}", nums.len())))
            }
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "power" => {
                want(1)?;
                Ok(RoParamSpec::Power { s: nums[0] })
            }
            "powerlog" => {
                want(2)?;
                Ok(RoParamSpec::PowerLog { s: nums[0], r: nums[1] })
            }
            "powersinlog" => {
                want(2)?;
                Ok(RoParamSpec::PowerSinLog { s: nums[0], delta: nums[1] })
            }
            other => Err(Error::Config(format!("unknown parameter kind {other:?}"))),
        }
    }
}

/// Sampled lower bound for the RO constant on `[1, a]`.
///
/// `c_hat = max max(φ(λt)/φ(t), φ(t)/φ(λt))` over the grids.
pub fn verify_ro(param: &RoParam, a: f64, t_grid: &[f64], lambda_grid: &[f64]) -> Result<Report> {
    if !(a > 1.0) {
        return Err(Error::Precondition(format!("RO interval end a = {a} must exceed 1")));
    }
    if t_grid.is_empty() || lambda_grid.is_empty() {
        return Err(Error::Precondition("empty sampling grid".into()));
    }
    if let Some(l) = lambda_grid.iter().find(|&&l| !(1.0..=a).contains(&l)) {
        return Err(Error::Precondition(format!("lambda {l} outside [1, {a}]")));
    }
    let mut c_hat: f64 = 1.0;
    for &t in t_grid {
        let base = param.ln_eval(t)?;
        for &lam in lambda_grid {
            let d = param.ln_eval(lam * t)? - base;
            c_hat = c_hat.max(d.abs().exp());
        }
    }
    let mut report = Report::new("ro-condition").with_config(serde_json::json!({
        "param": param.label(),
        "a": a,
        "t_points": t_grid.len(),
        "lambda_points": lambda_grid.len(),
    }));
    report.constant("c_hat", c_hat);
    report.check(
        "c_hat_finite",
        "roparam: RO constant bounded on [1,a]",
        c_hat,
        f64::INFINITY,
        Verdict::from_bool(c_hat.is_finite()),
    );
    report.note(SAMPLING_NOTE);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub sigma0_hat: f64,
    pub sigma1_hat: f64,
    pub t_points: usize,
    pub t_max: f64,
    pub lambda_points: usize,
    pub lambda_max: f64,
}

/// Sampled Matuszewska indices from the ratio statistic
/// `ln(φ(λt)/φ(t)) / ln λ`: max gives `σ₁`, min gives `σ₀`.
pub fn estimate_indices(param: &RoParam, t_grid: &[f64], lambda_grid: &[f64]) -> Result<IndexEstimate> {
    if t_grid.is_empty() || lambda_grid.is_empty() {
        return Err(Error::Precondition("empty sampling grid".into()));
    }
    if let Some(l) = lambda_grid.iter().find(|&&l| !(l >= 2.0)) {
        return Err(Error::Precondition(format!("index estimation needs lambda >= 2, got {l}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t in t_grid {
        let base = param.ln_eval(t)?;
        for &lam in lambda_grid {
            let q = (param.ln_eval(lam * t)? - base) / lam.ln();
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    Ok(IndexEstimate {
        sigma0_hat: lo,
        sigma1_hat: hi,
        t_points: t_grid.len(),
        t_max: t_grid.iter().cloned().fold(1.0, f64::max),
        lambda_points: lambda_grid.len(),
        lambda_max: lambda_grid.iter().cloned().fold(2.0, f64::max),
    })
}

pub fn estimate_indices_default(param: &RoParam) -> Result<IndexEstimate> {
    estimate_indices(param, &default_t_grid(), &DEFAULT_LAMBDAS)
}

/// Declared indices, or default-grid estimates with `estimated = true`.
pub fn effective_indices(param: &RoParam) -> Result<(f64, f64, bool)> {
    match param.declared_indices() {
        Some((a, b)) => Ok((a, b, false)),
        None => {
            let e = estimate_indices_default(param)?;
            Ok((e.sigma0_hat, e.sigma1_hat, true))
        }
    }
}

/// The interpolation parameter
/// `ψ(t) = t^{-s0/(s1-s0)} φ(t^{1/(s1-s0)})` for `t ≥ 1`, `ψ(t) = φ(1)` on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct InterpParam {
    pub phi: RoParam,
    pub s0: f64,
    pub s1: f64,
    /// True when the index preconditions were checked against estimates only.
    pub estimated_preconditions: bool,
}

impl InterpParam {
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("psi evaluated at t = {t}")));
        }
        if t < 1.0 {
            return self.phi.eval(1.0);
        }
        let width = self.s1 - self.s0;
        Ok(t.powf(-self.s0 / width) * self.phi.eval(t.powf(1.0 / width))?)
    }
}

pub fn interp_psi(param: &RoParam, s0: f64, s1: f64) -> Result<InterpParam> {
    if !(s0 < s1) {
        return Err(Error::Precondition(format!("need s0 < s1, got s0 = {s0}, s1 = {s1}")));
    }
    let (sigma0, sigma1, estimated) = effective_indices(param)?;
    if !estimated && !(s0 < sigma0 && s1 > sigma1) {
        return Err(Error::Precondition(format!(
            "need s0 < sigma0 = {sigma0} and s1 > sigma1 = {sigma1}; got s0 = {s0}, s1 = {s1}"
        )));
    }
    Ok(InterpParam {
        phi: param.clone(),
        s0,
        s1,
        estimated_preconditions: estimated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn eval_examples() {
        assert_eq!(RoParam::power(2.0).eval(3.0).unwrap(), 9.0);
        assert_eq!(RoParam::power_log(0.0, 1.0).eval(1.0).unwrap(), 1.0);
        let t = (PI / 2.0).exp();
        let v = RoParam::power_sin_log(1.0, 1.0).eval(t).unwrap();
        assert!((v - t * E).abs() < 1e-12 * v);
        assert!((v - 13.0763).abs() < 1e-4);
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(RoParam::power(1.0).eval(0.5), Err(Error::Domain(_))));
        let bad = RoParam::custom(Arc::new(|t| 2.0 - t));
        assert!(matches!(bad.eval(3.0), Err(Error::Evaluation(_))));
        let nan = RoParam::custom(Arc::new(|_| f64::NAN));
        assert!(matches!(nan.eval(3.0), Err(Error::Evaluation(_))));
    }

    #[test]
    fn representation_of_power_matches_power() {
        // α ≡ s, β ≡ 0 gives t^s.
        let rep = RoParam::representation(Arc::new(|_| 1.5), Arc::new(|_| 0.0), Some((1.5, 1.5)));
        for t in [1.0, 2.0, 37.5, 1e4] {
            let a = rep.eval(t).unwrap();
            let b = RoParam::power(1.5).eval(t).unwrap();
            assert!((a - b).abs() <= 1e-9 * b, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn representation_of_powerlog() {
        // t^0 (1+ln t)^1 = exp(∫ 1/(1+ln τ) dτ/τ)
        let rep = RoParam::representation(
            Arc::new(|t: f64| 1.0 / (1.0 + t.ln())),
            Arc::new(|_| 0.0),
            None,
        );
        for t in [1.0, 5.0, 1e3] {
            let a = rep.eval(t).unwrap();
            let b = 1.0 + f64::ln(t);
            assert!((a - b).abs() < 1e-8 * b);
        }
        let r = rep.reciprocal().scale_power(2.0);
        let want = 100.0 / (1.0 + 10f64.ln());
        assert!((r.eval(10.0).unwrap() - want).abs() < 1e-8 * want);
    }

    #[test]
    fn verify_ro_examples() {
        let t = default_t_grid();
        let lam: Vec<f64> = (0..=32).map(|i| 1.0 + i as f64 / 32.0).collect();
        let r = verify_ro(&RoParam::power(1.0), 2.0, &t, &lam).unwrap();
        assert!((r.get("c_hat").unwrap() - 2.0).abs() < 1e-12);
        assert!(r.passed());
        let lam10: Vec<f64> = (0..=9).map(|i| 1.0 + i as f64).collect();
        let r = verify_ro(&RoParam::power(0.0), 10.0, &t, &lam10).unwrap();
        assert_eq!(r.get("c_hat").unwrap(), 1.0);
    }

    #[test]
    fn verify_ro_sin_log_bounded_by_e_squared() {
        // Brute-force oracle: max |sin(u + L) - sin u| over the same grid.
        let t = log_space(1.0, 1e6, 2000);
        let lam: Vec<f64> = (0..=200).map(|i| 1.0 + (E - 1.0) * i as f64 / 200.0).collect();
        let r = verify_ro(&RoParam::power_sin_log(0.0, 1.0), E, &t, &lam).unwrap();
        let mut oracle: f64 = 0.0;
        for &tt in &t {
            for &l in &lam {
                let u = f64::ln(tt);
                oracle = oracle.max((f64::sin(u + f64::ln(l)) - f64::sin(u)).abs());
            }
        }
        let c = r.get("c_hat").unwrap();
        assert!((c - oracle.exp()).abs() < 1e-9 * c);
        assert!(c <= E * E);
    }

    #[test]
    fn verify_ro_preconditions() {
        assert!(verify_ro(&RoParam::rho(), 1.0, &[1.0], &[1.0]).is_err());
        assert!(verify_ro(&RoParam::rho(), 2.0, &[], &[1.0]).is_err());
        assert!(verify_ro(&RoParam::rho(), 2.0, &[1.0], &[3.0]).is_err());
    }

    #[test]
    fn indices_of_powers() {
        for s in [-1.5, 0.0, 2.25, 7.0] {
            let e = estimate_indices_default(&RoParam::power(s)).unwrap();
            assert!((e.sigma0_hat - s).abs() < 1e-9);
            assert!((e.sigma1_hat - s).abs() < 1e-9);
        }
        assert!(estimate_indices(&RoParam::rho(), &[1.0], &[1.5]).is_err());
    }

    /// Independent oracle for the sin-log family: sup/inf over the grid of
    /// δ(sin(u + L) - sin u)/L computed directly from the closed form.
    fn sinlog_oracle(delta: f64, t: &[f64], lam: &[f64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &tt in t {
            for &l in lam {
                let (u, ll) = (tt.ln(), l.ln());
                let q = delta * ((u + ll).sin() - u.sin()) / ll;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        (lo, hi)
    }

    #[test]
    fn indices_of_sinlog_match_oracle() {
        let t = default_t_grid();
        let e = estimate_indices_default(&RoParam::power_sin_log(0.0, 1.0)).unwrap();
        let (lo, hi) = sinlog_oracle(1.0, &t, &DEFAULT_LAMBDAS);
        assert!((e.sigma0_hat - lo).abs() < 1e-12);
        assert!((e.sigma1_hat - hi).abs() < 1e-12);
        // Larger lambdas pull the estimates toward the analytic indices (0, 0).
        let far = estimate_indices(&RoParam::power_sin_log(0.0, 1.0), &t, &[1e3, 1e6]).unwrap();
        assert!(far.sigma1_hat < e.sigma1_hat && far.sigma0_hat > e.sigma0_hat);
    }

    #[test]
    fn powerlog_estimates_approach_declared_under_refinement() {
        let p = RoParam::power_log(2.0, 3.0);
        let coarse = estimate_indices(&p, &log_space(1e2, 1e4, 100), &DEFAULT_LAMBDAS).unwrap();
        let fine = estimate_indices(&p, &log_space(1e6, 1e8, 100), &DEFAULT_LAMBDAS).unwrap();
        let err = |e: IndexEstimate| (e.sigma1_hat - 2.0).abs().max((e.sigma0_hat - 2.0).abs());
        assert!(err(fine) < err(coarse));
    }

    #[test]
    fn scale_and_reciprocal() {
        let p = RoParam::power(2.0).scale_power(-2.0);
        assert!(matches!(p.kind(), RoKind::Power { s } if *s == 0.0));
        let q = RoParam::power_log(1.0, 1.0).scale_power(3.0);
        assert!((q.eval(E).unwrap() - E.powi(4) * 2.0).abs() < 1e-12);
        let r = RoParam::power(3.0).reciprocal();
        assert!(matches!(r.kind(), RoKind::Power { s } if *s == -3.0));
        let sl = RoParam::power_sin_log(0.0, 1.0);
        assert_eq!(sl.scale_power(5.0).declared_indices(), Some((5.0, 5.0)));
        let w = RoParam::power_log(1.0, 2.0).scale_power(0.5);
        assert_eq!(w.reciprocal().declared_indices(), Some((-1.5, -1.5)));
    }

    #[test]
    fn reciprocal_involution_on_grid() {
        for p in [
            RoParam::power_log(2.0, 3.0),
            RoParam::power_sin_log(-1.0, 0.7),
            RoParam::custom(Arc::new(|t: f64| t.sqrt() + 1.0)),
        ] {
            let back = p.reciprocal().reciprocal();
            for t in log_space(1.0, 1e6, 50) {
                let (a, b) = (p.eval(t).unwrap(), back.eval(t).unwrap());
                assert!((a - b).abs() <= 1e-14 * a);
            }
        }
    }

    #[test]
    fn index_shift_law_via_estimates() {
        let base = RoParam::power_sin_log(0.0, 1.0);
        let e0 = estimate_indices_default(&base).unwrap();
        let e5 = estimate_indices_default(&base.scale_power(5.0)).unwrap();
        assert!((e5.sigma0_hat - (e0.sigma0_hat + 5.0)).abs() < 1e-9);
        assert!((e5.sigma1_hat - (e0.sigma1_hat + 5.0)).abs() < 1e-9);
        let er = estimate_indices_default(&base.reciprocal()).unwrap();
        assert!((er.sigma0_hat + e0.sigma1_hat).abs() < 1e-12);
        assert!((er.sigma1_hat + e0.sigma0_hat).abs() < 1e-12);
    }

    #[test]
    fn psi_examples() {
        let psi = interp_psi(&RoParam::power(1.0), 0.0, 2.0).unwrap();
        for t in [1.0f64, 3.0, 1e5] {
            let want = t.powf(0.5);
            assert!((psi.eval(t).unwrap() - want).abs() <= 1e-12 * want);
        }
        let psi = interp_psi(&RoParam::power_log(0.0, 1.0), -1.0, 1.0).unwrap();
        assert!((psi.eval(E * E).unwrap() - 2.0 * E).abs() < 1e-12);
        assert_eq!(psi.eval(1.0).unwrap(), 1.0);
        assert_eq!(psi.eval(0.25).unwrap(), 1.0);
    }

    #[test]
    fn psi_preconditions() {
        let p = RoParam::power(1.0);
        assert!(matches!(interp_psi(&p, 1.0, 2.0), Err(Error::Precondition(_))));
        assert!(matches!(interp_psi(&p, 0.0, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(interp_psi(&p, 2.0, 0.0), Err(Error::Precondition(_))));
        let c = interp_psi(&RoParam::custom(Arc::new(|t| t)), 0.0, 2.0).unwrap();
        assert!(c.estimated_preconditions);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("power:0".parse::<RoParamSpec>().unwrap(), RoParamSpec::Power { s: 0.0 });
        assert_eq!(
            "powerlog:2,3".parse::<RoParamSpec>().unwrap(),
            RoParamSpec::PowerLog { s: 2.0, r: 3.0 }
        );
        assert!("power:1,2".parse::<RoParamSpec>().is_err());
        assert!("wobble:1".parse::<RoParamSpec>().is_err());
        let j: RoParamSpec = serde_json::from_str(r#"{"kind":"powersinlog","s":0,"delta":1}"#).unwrap();
        assert_eq!(j, RoParamSpec::PowerSinLog { s: 0.0, delta: 1.0 });
    }
}

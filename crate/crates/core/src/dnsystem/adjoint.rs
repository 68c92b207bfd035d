//! Formal adjoint by Leibniz expansion.

use num_complex::Complex64;

use super::{DiffOp, DnNumbers, DnSystem};

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sub-multi-indices `ν ≤ μ` componentwise.
fn below(mu: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &m in mu {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

/// `u ↦ Σ_μ D^μ(conj(a_μ) u)` rewritten as `Σ_ν b_ν D^ν`.
pub(super) fn adjoint_op(op: &DiffOp) -> DiffOp {
    let mut terms = Vec::new();
    for (mu, a) in op.terms() {
        let b = a.conj();
        for nu in below(mu) {
            let rest: Vec<u32> = mu.iter().zip(&nu).map(|(m, n)| m - n).collect();
            let c: f64 = mu.iter().zip(&nu).map(|(&m, &n)| binomial(m, n)).product();
            terms.push((nu, b.derivative(&rest).scaled(Complex64::new(c, 0.0))));
        }
    }
    DiffOp::new(terms)
}

pub(super) fn formal_adjoint(sys: &DnSystem) -> DnSystem {
    let p = sys.p();
    let ops: Vec<Vec<DiffOp>> = (0..p)
        .map(|j| (0..p).map(|k| adjoint_op(sys.op(k, j))).collect())
        .collect();
    let dn = sys.dn().map(|d| DnNumbers {
        l: d.m.clone(),
        m: d.l.clone(),
    });
    // Orders can only drop under the expansion, so r ≤ l + m still holds.
    DnSystem {
        dim: sys.dim(),
        ops,
        dn,
    }
}


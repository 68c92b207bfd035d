//! Douglis-Nirenberg numbers from an order matrix.
//!
//! Minimizing `Σ l_j + Σ m_k` subject to `l_j + m_k ≥ r_jk` is the dual of a
//! maximum-weight assignment problem. Its optima are exactly the feasible
//! `(l, m)` that are tight on the edges of one maximum assignment `σ`, so
//! after fixing `m_σ(j) = r_jσ(j) - l_j` the remaining constraints are
//! difference constraints on `l`. Those are solved exactly in integers by
//! shortest paths, which also yields the lexicographically smallest optimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order matrix entry; `None` marks an identically-zero block (order −∞).
pub type OrderMatrix = Vec<Vec<Option<i64>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnNumbers {
    pub l: Vec<f64>,
    pub m: Vec<f64>,
}

impl DnNumbers {
    pub fn new(l: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if l.len() != m.len() {
            return Err(Error::ShapeMismatch {
                expected: l.len(),
                got: m.len(),
            });
        }
        if l.iter().chain(&m).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSystem("DN numbers must be finite".into()));
        }
        Ok(DnNumbers { l, m })
    }

    /// `q = Σ l_j + Σ m_k`.
    pub fn q(&self) -> f64 {
        self.l.iter().sum::<f64>() + self.m.iter().sum::<f64>()
    }

    /// `(l + c, m - c)`; every downstream quantity is covariant under it.
    pub fn shifted(&self, c: f64) -> DnNumbers {
        DnNumbers {
            l: self.l.iter().map(|v| v + c).collect(),
            m: self.m.iter().map(|v| v - c).collect(),
        }
    }

    pub fn block_order(&self, j: usize, k: usize) -> f64 {
        self.l[j] + self.m[k]
    }

    /// Condition `r_jk ≤ l_j + m_k` for every nonzero block.
    pub fn satisfies(&self, orders: &OrderMatrix) -> bool {
        orders.iter().enumerate().all(|(j, row)| {
            row.iter()
                .enumerate()
                .all(|(k, r)| r.map_or(true, |r| r as f64 <= self.block_order(j, k) + 1e-12))
        })
    }
}

const INF: i64 = i64::MAX / 4;

/// Maximum-weight perfect assignment rows → columns over finite entries.
fn max_assignment(orders: &OrderMatrix) -> Option<Vec<usize>> {
    let p = orders.len();
    let full = 1usize << p;
    let mut best = vec![None::<i64>; full];
    let mut choice = vec![usize::MAX; full];
    best[0] = Some(0);
    for mask in 0..full {
        let Some(base) = best[mask] else { continue };
        let row = mask.count_ones() as usize;
        if row == p {
            continue;
        }
        for col in 0..p {
            if mask & (1 << col) != 0 {
                continue;
            }
            if let Some(r) = orders[row][col] {
                let next = mask | (1 << col);
                let cand = base + r;
                if best[next].map_or(true, |b| cand > b) {
                    best[next] = Some(cand);
                    choice[next] = col;
                }
            }
        }
    }
    best[full - 1]?;
    let mut cols = vec![0; p];
    let mut mask = full - 1;
    for row in (0..p).rev() {
        let col = choice[mask];
        cols[row] = col;
        mask &= !(1 << col);
    }
    Some(cols)
}

/// DN numbers with normalization `l₁ = 0`, minimal `Σl + Σm`, ties broken by
/// the lexicographically smallest `(l, m)`.
///
/// When the system decouples so that some `l_j` is unbounded below on the
/// optimal face, that `l_j` is pinned to `min(0, upper bound)` and the scan
/// continues; this extends the `l₁ = 0` normalization to each decoupled block.
pub fn solve_dn_numbers(orders: &OrderMatrix) -> Result<DnNumbers> {
    let p = orders.len();
    if p == 0 {
        return Err(Error::InvalidSystem("empty order matrix".into()));
    }
    if p > 20 {
        return Err(Error::InvalidSystem(format!("order matrix of size {p} is too large")));
    }
    if orders.iter().any(|row| row.len() != p) {
        return Err(Error::InvalidSystem("order matrix must be square".into()));
    }
    if orders.iter().flatten().flatten().any(|&r| r < 0) {
        return Err(Error::InvalidSystem("block orders must be non-negative".into()));
    }
    let sigma = max_assignment(orders).ok_or(Error::StructurallySingular)?;
    let mut row_of = vec![0; p];
    for (j, &k) in sigma.iter().enumerate() {
        row_of[k] = j;
    }

    // dist[a][b]: shortest path; constraint l_b ≤ l_a + w(a → b).
    let mut dist = vec![vec![INF; p]; p];
    for (a, row) in dist.iter_mut().enumerate() {
        row[a] = 0;
    }
    for j in 0..p {
        for k in 0..p {
            if let Some(r_jk) = orders[j][k] {
                let i = row_of[k];
                let r_ik = orders[i][k].expect("assignment uses finite entries");
                let w = r_ik - r_jk;
                if w < dist[j][i] {
                    dist[j][i] = w;
                }
            }
        }
    }
    for via in 0..p {
        for a in 0..p {
            if dist[a][via] == INF {
                continue;
            }
            for b in 0..p {
                if dist[via][b] == INF {
                    continue;
                }
                let cand = dist[a][via] + dist[via][b];
                if cand < dist[a][b] {
                    dist[a][b] = cand;
                }
            }
        }
    }
    debug_assert!((0..p).all(|a| dist[a][a] >= 0), "optimal assignment admits no negative cycle");

    let mut l = vec![0i64; p];
    for i in 1..p {
        let lower = (0..i)
            .filter(|&f| dist[i][f] < INF)
            .map(|f| l[f] - dist[i][f])
            .max();
        l[i] = match lower {
            Some(v) => v,
            None => {
                let upper = (0..i)
                    .filter(|&f| dist[f][i] < INF)
                    .map(|f| l[f] + dist[f][i])
                    .min();
                upper.map_or(0, |u| u.min(0))
            }
        };
    }
    let m: Vec<i64> = (0..p)
        .map(|k| {
            let j = row_of[k];
            orders[j][k].unwrap() - l[j]
        })
        .collect();
    let dn = DnNumbers {
        l: l.iter().map(|&v| v as f64).collect(),
        m: m.iter().map(|&v| v as f64).collect(),
    };
    debug_assert!(dn.satisfies(orders));
    Ok(dn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn om(rows: &[&[i64]]) -> OrderMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&v| if v < 0 { None } else { Some(v) }).collect())
            .collect()
    }

    #[test]
    fn scalar_and_petrovskii() {
        let d = solve_dn_numbers(&om(&[&[2]])).unwrap();
        assert_eq!((d.l, d.m), (vec![0.0], vec![2.0]));
        let d = solve_dn_numbers(&om(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!((d.l, d.m), (vec![0.0, 0.0], vec![1.0, 1.0]));
    }

    #[test]
    fn mixed_orders() {
        let d = solve_dn_numbers(&om(&[&[2, 1], &[1, 0]])).unwrap();
        assert_eq!((d.l.clone(), d.m.clone()), (vec![0.0, -1.0], vec![2.0, 1.0]));
        assert_eq!(d.q(), 2.0);
    }

    #[test]
    fn decoupled_blocks_pin_each_block() {
        let d = solve_dn_numbers(&om(&[&[2, -1], &[-1, 2]])).unwrap();
        assert_eq!((d.l, d.m), (vec![0.0, 0.0], vec![2.0, 2.0]));
    }

    #[test]
    fn triangular_block_is_pinned_at_upper_bound() {
        // l₂ is unbounded below on the optimal face; it is pinned at its upper bound -1.
        let orders = om(&[&[2, 1], &[-1, 0]]);
        let d = solve_dn_numbers(&orders).unwrap();
        assert_eq!((d.l.clone(), d.m.clone()), (vec![0.0, -1.0], vec![2.0, 1.0]));
        assert!(d.satisfies(&orders));
        assert_eq!(d.q(), 2.0);
    }

    #[test]
    fn structurally_singular() {
        assert!(matches!(
            solve_dn_numbers(&om(&[&[1, 2], &[-1, -1]])),
            Err(Error::StructurallySingular)
        ));
        assert!(solve_dn_numbers(&om(&[&[1, 2]])).is_err());
    }

    /// Exhaustive oracle over half-integers in [-5, 5] with l₁ = 0.
    fn brute_force(orders: &OrderMatrix) -> Option<(Vec<f64>, Vec<f64>)> {
        let p = orders.len();
        let vals: Vec<f64> = (-10..=10).map(|k| k as f64 / 2.0).collect();
        let free = 2 * p - 1;
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut idx = vec![0usize; free];
        loop {
            let mut x = vec![0.0];
            x.extend(idx.iter().map(|&i| vals[i]));
            let (l, m) = x.split_at(p);
            let feasible = (0..p).all(|j| {
                (0..p).all(|k| orders[j][k].map_or(true, |r| l[j] + m[k] >= r as f64))
            });
            if feasible {
                let s: f64 = x.iter().sum();
                let better = match &best {
                    None => true,
                    Some((bs, bx)) => s < *bs || (s == *bs && x.partial_cmp(bx) == Some(std::cmp::Ordering::Less)),
                };
                if better {
                    best = Some((s, x.clone()));
                }
            }
            let mut a = 0;
            loop {
                if a == free {
                    return best.map(|(_, x)| (x[..p].to_vec(), x[p..].to_vec()));
                }
                idx[a] += 1;
                if idx[a] < vals.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }

    #[test]
    fn matches_exhaustive_search_on_small_matrices() {
        let cases: Vec<OrderMatrix> = vec![
            om(&[&[2, 1], &[1, 0]]),
            om(&[&[1, 1], &[1, 1]]),
            om(&[&[2, 0], &[1, 1]]),
            om(&[&[0, 2], &[2, 0]]),
            om(&[&[1, 2], &[0, 1]]),
            om(&[&[2, 2], &[0, 1]]),
        ];
        for case in cases {
            let got = solve_dn_numbers(&case).unwrap();
            let want = brute_force(&case).expect("optimum inside the search box");
            assert_eq!((got.l.clone(), got.m.clone()), want, "orders {case:?}");
            assert!(got.satisfies(&case));
        }
    }

    #[test]
    fn shift_preserves_condition_and_q() {
        let orders = om(&[&[2, 1], &[1, 0]]);
        let d = solve_dn_numbers(&orders).unwrap();
        for c in [-2.0, 0.5, 3.0] {
            let s = d.shifted(c);
            assert!(s.satisfies(&orders));
            assert_eq!(s.q(), d.q());
        }
    }
}

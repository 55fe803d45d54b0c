//! Membership in the classical correlation polytope, whose vertices are the
//! tables of deterministic strategies.
//!
//! Solved as nonnegative least squares `min ‖A w − T‖₂, w ≥ 0` with the
//! Lawson–Hanson active-set method. Each vertex table is normalized per
//! question pair, so `A w = T` already forces `Σ w = 1`; an explicit
//! all-ones row is appended anyway to keep the weights a distribution when
//! `T` is outside the polytope.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use super::{CorrelationTable, DeterministicStrategy};
use crate::error::{Error, Result};

/// Largest vertex set handled (`k^{2n}`).
pub const MAX_VERTICES: usize = 1_000_000;
/// Sup-norm residual at or below which a table counts as classical.
pub const MEMBER_RESIDUAL: f64 = 1e-7;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CcMembership {
    pub member: bool,
    /// `max |T − Σ_d w_d T_d|` for the returned weights.
    pub residual: f64,
    /// Nonzero weights as `(strategy index, weight)`, sorted by index. The
    /// index decodes with [`DeterministicStrategy::from_index`].
    pub weights: Vec<(usize, f64)>,
    pub iterations: usize,
}

/// Vertex columns are never materialized; `A^T r` and `A w` are computed by
/// indexing into the table.
struct VertexSystem {
    n: usize,
    k: usize,
    rows: usize,
}

impl VertexSystem {
    fn entries(&self, d: usize) -> Vec<usize> {
        let s = DeterministicStrategy::from_index(d, self.n, self.k);
        let (n, k) = (self.n, self.k);
        let mut idx = Vec::with_capacity(n * n + 1);
        for x in 0..n {
            for y in 0..n {
                idx.push(((x * n + y) * k + s.alice[x]) * k + s.bob[y]);
            }
        }
        idx.push(self.rows - 1);
        idx
    }

    fn column(&self, d: usize) -> DVector<f64> {
        let mut col = DVector::zeros(self.rows);
        for i in self.entries(d) {
            col[i] = 1.0;
        }
        col
    }

    fn dot(&self, d: usize, r: &DVector<f64>) -> f64 {
        self.entries(d).into_iter().map(|i| r[i]).sum()
    }
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    svd.solve(b, eps)
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))
}

/// Decide whether `t` is a convex combination of deterministic tables.
pub fn membership_cc(t: &CorrelationTable) -> Result<CcMembership> {
    let (n, k) = (t.n(), t.k());
    let vertices = DeterministicStrategy::count(n, k)
        .filter(|&v| v <= MAX_VERTICES)
        .ok_or_else(|| Error::SizeOverflow(format!("k^(2n) vertices exceed {MAX_VERTICES} for n={n}, k={k}")))?;
    let rows = n * n * k * k + 1;
    let sys = VertexSystem { n, k, rows };
    let mut target = DVector::zeros(rows);
    target.rows_mut(0, rows - 1).copy_from_slice(t.entries());
    target[rows - 1] = 1.0;

    let tol = 1e-12;
    let mut passive: Vec<usize> = Vec::new();
    let mut x: Vec<f64> = Vec::new();
    let mut residual = target.clone();
    let mut iterations = 0;
    // vertices that entered and were immediately dropped since the residual
    // last changed; skipping them prevents cycling on degenerate vertices
    let mut rejected: HashSet<usize> = HashSet::new();

    loop {
        // most violated dual constraint among inactive vertices
        let mut best: Option<(usize, f64)> = None;
        for d in 0..vertices {
            if rejected.contains(&d) || passive.contains(&d) {
                continue;
            }
            let w = sys.dot(d, &residual);
            if w > tol && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((d, w));
            }
        }
        let Some((entering, _)) = best else { break };
        if iterations >= MAX_ITERATIONS {
            break;
        }
        passive.push(entering);
        x.push(0.0);

        loop {
            iterations += 1;
            let a = DMatrix::from_columns(&passive.iter().map(|&d| sys.column(d)).collect::<Vec<_>>());
            let z = least_squares(&a, &target)?;
            if z.iter().all(|&v| v > tol) {
                x = z.iter().copied().collect();
                break;
            }
            // step back to the boundary of the feasible region
            let mut alpha = 1.0_f64;
            for (i, &zi) in z.iter().enumerate() {
                if zi <= tol {
                    let denom = x[i] - zi;
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            for (xi, &zi) in x.iter_mut().zip(z.iter()) {
                *xi += alpha * (zi - *xi);
            }
            let mut keep = Vec::with_capacity(passive.len());
            let mut kept_x = Vec::with_capacity(x.len());
            for (i, &d) in passive.iter().enumerate() {
                if x[i] > tol {
                    keep.push(d);
                    kept_x.push(x[i]);
                }
            }
            passive = keep;
            x = kept_x;
            if passive.is_empty() || iterations >= MAX_ITERATIONS {
                break;
            }
        }

        if passive.contains(&entering) {
            rejected.clear();
        } else {
            rejected.insert(entering);
        }
        residual = target.clone();
        for (&d, &w) in passive.iter().zip(&x) {
            for i in sys.entries(d) {
                residual[i] -= w;
            }
        }
        if iterations >= MAX_ITERATIONS {
            break;
        }
    }

    let mut weights: Vec<(usize, f64)> = passive.into_iter().zip(x).filter(|(_, w)| *w > 0.0).collect();
    weights.sort_by_key(|(d, _)| *d);
    let sup = residual.rows(0, rows - 1).iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(CcMembership {
        member: sup <= MEMBER_RESIDUAL,
        residual: sup,
        weights,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::classical_table;

    #[test]
    fn uniform_table_is_classical() {
        let t = CorrelationTable::new(2, 2, vec![0.25; 16], 1e-12).unwrap();
        let m = membership_cc(&t).unwrap();
        assert!(m.member);
        assert!(m.residual <= 1e-9);
        let total: f64 = m.weights.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_is_its_own_witness() {
        let s = DeterministicStrategy::from_index(37, 3, 2);
        let t = classical_table(&[(s.clone(), 1.0)], 3, 2, 1e-12).unwrap();
        let m = membership_cc(&t).unwrap();
        assert!(m.member);
        assert_eq!(m.weights.len(), 1);
        assert_eq!(m.weights[0].0, s.index(2));
    }

    #[test]
    fn oversized_problem_is_rejected() {
        let (n, k) = (4, 6);
        let t = CorrelationTable::new(n, k, vec![1.0 / 36.0; n * n * k * k], 1e-9).unwrap();
        assert!(matches!(membership_cc(&t), Err(Error::SizeOverflow(_))));
    }
}

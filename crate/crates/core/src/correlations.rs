//! Correlation matrices `[τ(u_i u_j*)]` of unitary tuples in finite-dimensional
//! tracial algebras, the set of correlation matrices, and the bridge from a
//! tuple to a factorization of the associated Schur channel.

use crate::error::{Error, Result};
use crate::factorization::{FiniteAncillaSpec, FiniteFactorization};
use crate::linalg::{self, hermitian_eigen, hermitize, kron, matrix_unit, CMatrix, ONE};
use crate::zoo::{haar_unitary, UnitaryMatrix};

/// `n` unitaries `u_i = (u_i^{(1)}, …, u_i^{(N)}) ∈ ⊕_j M_{k_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryTuple {
    count: usize,
    ancilla: FiniteAncillaSpec,
    /// `blocks[j][i]` is the `k_j × k_j` component of `u_i`.
    blocks: Vec<Vec<UnitaryMatrix>>,
}

impl UnitaryTuple {
    pub fn new(ancilla: FiniteAncillaSpec, blocks: Vec<Vec<UnitaryMatrix>>) -> Result<Self> {
        if blocks.len() != ancilla.len() {
            return Err(Error::InvalidArgument(format!(
                "{} unitary blocks for {} ancilla blocks",
                blocks.len(),
                ancilla.len()
            )));
        }
        let count = blocks[0].len();
        if count == 0 {
            return Err(Error::InvalidArgument("empty unitary tuple".into()));
        }
        for (per_block, &k) in blocks.iter().zip(ancilla.blocks()) {
            if per_block.len() != count {
                return Err(Error::dim(count, per_block.len()));
            }
            if let Some(u) = per_block.iter().find(|u| u.dim() != k) {
                return Err(Error::dim(k, u.dim()));
            }
        }
        Ok(Self { count, ancilla, blocks })
    }

    /// Tuple in `(M_k, tr_k)`.
    pub fn matrix(us: Vec<UnitaryMatrix>) -> Result<Self> {
        let k = us
            .first()
            .map(UnitaryMatrix::dim)
            .ok_or_else(|| Error::InvalidArgument("empty unitary tuple".into()))?;
        Self::new(FiniteAncillaSpec::matrix(k), vec![us])
    }

    /// `n` independent Haar unitaries in `M_k`; unitary `i` uses seed `seed + i`.
    pub fn sample_haar(n: usize, k: usize, seed: u64) -> Result<Self> {
        let us = (0..n)
            .map(|i| haar_unitary(k, seed.wrapping_add(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Self::matrix(us)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn ancilla(&self) -> &FiniteAncillaSpec {
        &self.ancilla
    }

    pub fn blocks(&self) -> &[Vec<UnitaryMatrix>] {
        &self.blocks
    }
}

/// Hermitian, unit-diagonal, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(CMatrix);

impl CorrelationMatrix {
    pub fn new(b: CMatrix, tol: f64) -> Result<Self> {
        let diag = is_theta(&b, tol)?;
        if !diag.member {
            return Err(Error::NotCorrelationMatrix {
                reason: format!(
                    "min eigenvalue {:.3e}, diagonal deviation {:.3e}, Hermitian defect {:.3e}",
                    diag.min_eigenvalue, diag.max_diagonal_deviation, diag.hermitian_defect
                ),
            });
        }
        Ok(Self(b))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaDiagnostics {
    pub member: bool,
    pub min_eigenvalue: f64,
    pub max_diagonal_deviation: f64,
    pub hermitian_defect: f64,
}

/// Membership in the correlation matrices: Hermitian, unit diagonal and
/// `λ_min ≥ −tol·max(1, |λ|_max)`. Semidefinite, not definite, so that
/// singular Gram matrices are members.
pub fn is_theta(b: &CMatrix, tol: f64) -> Result<ThetaDiagnostics> {
    if !linalg::is_square(b) {
        return Err(Error::InvalidArgument(format!(
            "correlation matrix must be square, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let hermitian_defect = linalg::hermitian_defect(b);
    let max_diagonal_deviation = (0..b.nrows()).fold(0.0_f64, |m, i| m.max((b[(i, i)] - ONE).norm()));
    let spec = hermitian_eigen(&hermitize(b).0)?;
    let min_eigenvalue = spec.min();
    Ok(ThetaDiagnostics {
        member: hermitian_defect <= tol && max_diagonal_deviation <= tol && min_eigenvalue >= -tol * spec.scale(),
        min_eigenvalue,
        max_diagonal_deviation,
        hermitian_defect,
    })
}

/// `[Σ_j t_j tr_{k_j}(u_i^{(j)} u_l^{(j)*})]_{i,l}`.
pub fn gram_correlation(t: &UnitaryTuple) -> CorrelationMatrix {
    let n = t.count;
    let mut b = CMatrix::zeros(n, n);
    for ((per_block, &k), &w) in t.blocks.iter().zip(t.ancilla.blocks()).zip(t.ancilla.weights()) {
        let scale = w / k as f64;
        for i in 0..n {
            for l in 0..n {
                // tr(u_i u_l*) = Σ u_i[a,b] conj(u_l[a,b])
                b[(i, l)] += linalg::hs_inner(per_block[i].matrix(), per_block[l].matrix()) * scale;
            }
        }
    }
    CorrelationMatrix(b)
}

/// `u_i ↦ u_i ⊗ 1_{k'/k}`, embedding `M_k` into `M_{k'}` trace-preservingly.
pub fn embed_divisible(t: &UnitaryTuple, target: usize) -> Result<UnitaryTuple> {
    if t.ancilla.len() != 1 {
        return Err(Error::InvalidArgument("embedding needs a single-block tuple".into()));
    }
    let k = t.ancilla.blocks()[0];
    if target == 0 || !target.is_multiple_of(k) {
        return Err(Error::InvalidArgument(format!("{k} does not divide {target}")));
    }
    let pad = linalg::identity(target / k);
    let us = t.blocks[0]
        .iter()
        .map(|u| UnitaryMatrix::trusted(kron(u.matrix(), &pad)))
        .collect();
    UnitaryTuple::matrix(us)
}

/// Direct sum `T1 ⊕ T2` with trace `λ τ_1 ⊕ (1 − λ) τ_2`; its Gram matrix is
/// `λ G(T1) + (1 − λ) G(T2)`.
pub fn direct_sum_mix(t1: &UnitaryTuple, t2: &UnitaryTuple, lambda: f64) -> Result<UnitaryTuple> {
    if t1.count != t2.count {
        return Err(Error::dim(t1.count, t2.count));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidWeights(format!("lambda = {lambda} is not in [0, 1]")));
    }
    if lambda == 1.0 {
        return Ok(t1.clone());
    }
    if lambda == 0.0 {
        return Ok(t2.clone());
    }
    let mut blocks = t1.ancilla.blocks().to_vec();
    blocks.extend_from_slice(t2.ancilla.blocks());
    let weights: Vec<f64> = t1
        .ancilla
        .weights()
        .iter()
        .map(|w| w * lambda)
        .chain(t2.ancilla.weights().iter().map(|w| w * (1.0 - lambda)))
        .collect();
    let ancilla = FiniteAncillaSpec::new(blocks, weights, 1e-9)?;
    let mut unitaries = t1.blocks.clone();
    unitaries.extend(t2.blocks.iter().cloned());
    UnitaryTuple::new(ancilla, unitaries)
}

/// Factorization of the Schur channel of `gram_correlation(t)` through the
/// tuple's own ancilla, with `u = Σ_i e_ii ⊗ u_i` on each block.
pub fn schur_bridge(t: &UnitaryTuple) -> Result<FiniteFactorization> {
    let n = t.count;
    let unitaries = t
        .blocks
        .iter()
        .zip(t.ancilla.blocks())
        .map(|(per_block, &k)| {
            let mut u = CMatrix::zeros(n * k, n * k);
            for (i, ui) in per_block.iter().enumerate() {
                u += kron(&matrix_unit(n, i, i), ui.matrix());
            }
            UnitaryMatrix::trusted(u)
        })
        .collect();
    FiniteFactorization::new(n, t.ancilla.clone(), unitaries)
}

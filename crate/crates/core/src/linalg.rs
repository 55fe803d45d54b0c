//! Dense complex linear algebra shared by every module: matrix units,
//! tensor products, partial traces, Hermitian spectra and unitary completion.
//!
//! Tensor products follow the row-major convention of `kronecker`: the basis
//! vector `e_a ⊗ e_b` of `C^m ⊗ C^k` has index `a * k + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Dense complex matrix, the carrier for every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default absolute/relative tolerance for verification predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// The matrix unit `e_ij` in `M_n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Build a matrix from real row-major data.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Sup-entrywise distance between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_square(m: &CMatrix) -> bool {
    m.nrows() == m.ncols()
}

/// `max(‖u*u − 1‖, ‖uu* − 1‖)` in the sup-entrywise norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !is_square(u) {
        return f64::INFINITY;
    }
    let id = identity(u.nrows());
    let uh = u.adjoint();
    max_abs_diff(&(&uh * u), &id).max(max_abs_diff(&(u * &uh), &id))
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `(M + M*)/2` together with the largest entry it moved.
pub fn hermitize(m: &CMatrix) -> (CMatrix, f64) {
    let h = (m + m.adjoint()).scale(0.5);
    let moved = max_abs_diff(&h, m);
    (h, moved)
}

/// Normalized trace `Tr(x)/n`.
pub fn normalized_trace(m: &CMatrix) -> C64 {
    m.trace() / m.nrows() as f64
}

/// `Tr(b* a)`, the Hilbert–Schmidt pairing, linear in `a`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Row-major vectorization `vec(v)[a * cols + b] = v[a, b]`.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_fn(m.nrows() * m.ncols(), |idx, _| m[(idx / m.ncols(), idx % m.ncols())])
}

/// Inverse of [`vectorize`] for a square `n×n` target.
pub fn unvectorize(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |a, b| v[a * n + b])
}

/// `(id ⊗ Tr)` on `C^outer ⊗ C^inner`.
pub fn partial_trace_inner(m: &CMatrix, outer: usize, inner: usize) -> CMatrix {
    debug_assert_eq!(m.nrows(), outer * inner);
    CMatrix::from_fn(outer, outer, |a, c| {
        (0..inner).map(|k| m[(a * inner + k, c * inner + k)]).sum()
    })
}

/// `(Tr ⊗ id)` on `C^outer ⊗ C^inner`.
pub fn partial_trace_outer(m: &CMatrix, outer: usize, inner: usize) -> CMatrix {
    debug_assert_eq!(m.nrows(), outer * inner);
    CMatrix::from_fn(inner, inner, |i, j| {
        (0..outer).map(|a| m[(a * inner + i, a * inner + j)]).sum()
    })
}

/// Eigendecomposition of a Hermitian matrix with a reproducible layout.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`, phase fixed so that its
    /// largest-magnitude component is real and positive.
    pub vectors: CMatrix,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `max(1, largest |eigenvalue|)`.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Hermitian eigensolver. The input must already be Hermitian; only its
/// lower triangle is read.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianSpectrum> {
    if !is_square(m) {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition of non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianSpectrum {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .enumerate()
            .fold(
                (0, -1.0),
                |best, (i, z)| {
                    if z.norm() > best.1 + 1e-12 {
                        (i, z.norm())
                    } else {
                        best
                    }
                },
            )
            .0;
        let phase = col[pivot].conj() / col[pivot].norm();
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(HermitianSpectrum { values, vectors })
}

/// Number of eigenvalues strictly above `threshold`.
pub fn count_above(values: &[f64], threshold: f64) -> usize {
    values.iter().filter(|&&v| v > threshold).count()
}

/// Numerical rank of a Hermitian positive semidefinite matrix such as a Gram
/// matrix: eigenvalues above `tol · dim · max(1, λ_max)`.
pub fn psd_rank(gram: &CMatrix, tol: f64) -> Result<usize> {
    let (h, _) = hermitize(gram);
    let spec = hermitian_eigen(&h)?;
    let threshold = tol * gram.nrows() as f64 * spec.scale();
    Ok(count_above(&spec.values, threshold))
}

/// Gram matrix `G[i, j] = Tr(m_i* m_j)`, Hermitian PSD.
pub fn gram_matrix(ms: &[CMatrix]) -> CMatrix {
    let d = ms.len();
    CMatrix::from_fn(d, d, |i, j| hs_inner(&ms[j], &ms[i]))
}

/// Extend a matrix with orthonormal columns to an orthonormal basis of its
/// ambient space. Returns only the added columns.
///
/// Deterministic: candidates are the standard basis vectors, and at every
/// step the one with the largest residual after projection is taken.
pub fn orthonormal_completion(cols: &CMatrix) -> CMatrix {
    let dim = cols.nrows();
    let have = cols.ncols();
    let mut basis: Vec<CVector> = (0..have).map(|j| cols.column(j).into_owned()).collect();
    let mut added: Vec<CVector> = Vec::with_capacity(dim - have);
    let project_out = |v: &mut CVector, basis: &[CVector]| {
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for b in basis {
                let coeff = b.dotc(v);
                v.axpy(-coeff, b, ONE);
            }
        }
    };
    let mut used = vec![false; dim];
    while basis.len() < dim {
        let mut best: Option<(usize, CVector, f64)> = None;
        for i in (0..dim).filter(|&i| !used[i]) {
            let mut v = CVector::zeros(dim);
            v[i] = ONE;
            project_out(&mut v, &basis);
            let norm = v.norm();
            if best.as_ref().is_none_or(|b| norm > b.2 + 1e-12) {
                best = Some((i, v, norm));
            }
        }
        let (i, v, norm) = best.expect("completion ran out of candidates");
        used[i] = true;
        let v = v.unscale(norm);
        basis.push(v.clone());
        added.push(v);
    }
    if added.is_empty() {
        return CMatrix::zeros(dim, 0);
    }
    CMatrix::from_columns(&added)
}

//! Completely positive maps on `M_n` in Kraus form, their Choi matrices, and
//! the verification predicates built on top of them.
//!
//! Choi convention: `C_Φ = Σ_ij Φ(e_ij) ⊗ e_ij`, output factor first. Entry
//! `C[(a·n + i), (b·n + j)]` equals `Φ(e_ij)[a, b]`, so a Kraus operator `v`
//! contributes the rank-one term `vec(v) vec(v)*` with row-major `vec`.

use crate::error::{Error, Result};
use crate::linalg::{
    self, count_above, hermitian_eigen, hermitize, matrix_unit, max_abs, max_abs_diff, CMatrix, CVector, DEFAULT_TOL,
    ZERO,
};

/// A linear map `x ↦ Σ_j v_j x v_j*` on `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("channel dimension must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("Kraus list is empty".into()));
        }
        for v in &kraus {
            if v.nrows() != dim {
                return Err(Error::dim(dim, v.nrows()));
            }
            if v.ncols() != dim {
                return Err(Error::dim(dim, v.ncols()));
            }
        }
        Ok(Self { dim, kraus })
    }

    /// `x ↦ u x u*`.
    pub fn conjugation(u: &CMatrix) -> Result<Self> {
        Self::new(u.nrows(), vec![u.clone()])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![linalg::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn into_kraus(self) -> Vec<CMatrix> {
        self.kraus
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        apply_channel(self, x)
    }

    pub fn choi(&self) -> ChoiMatrix {
        choi_of(self)
    }

    /// The same map with a linearly independent Kraus set of size
    /// `choi_rank`, extracted from the Choi spectrum.
    pub fn canonical(&self, tol: f64) -> Result<Self> {
        channel_from_choi(&self.choi(), tol)
    }

    /// `Σ v_j* v_j`
    pub fn kraus_sum_left(&self) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| acc + v.adjoint() * v)
    }

    /// `Σ v_j v_j*`
    pub fn kraus_sum_right(&self) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| acc + v * v.adjoint())
    }
}

/// A Choi matrix `Σ Φ(e_ij) ⊗ e_ij` of a Hermiticity-preserving map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    /// Accepts an `n²×n²` matrix that is Hermitian up to `tol` relative to
    /// its largest entry.
    pub fn new(dim: usize, matrix: CMatrix, tol: f64) -> Result<Self> {
        let size = dim * dim;
        if matrix.nrows() != size {
            return Err(Error::dim(size, matrix.nrows()));
        }
        if matrix.ncols() != size {
            return Err(Error::dim(size, matrix.ncols()));
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > tol * max_abs(&matrix).max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "Choi matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self { dim, matrix })
    }

    /// Choi matrix of an arbitrary linear map given as a closure, evaluated on
    /// the matrix units.
    pub fn from_map<F>(dim: usize, map: F) -> Result<Self>
    where
        F: Fn(&CMatrix) -> CMatrix,
    {
        let mut c = CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let image = map(&matrix_unit(dim, i, j));
                if image.shape() != (dim, dim) {
                    return Err(Error::dim(dim, image.nrows()));
                }
                for a in 0..dim {
                    for b in 0..dim {
                        c[(a * dim + i, b * dim + j)] = image[(a, b)];
                    }
                }
            }
        }
        Self::new(dim, c, DEFAULT_TOL)
    }

    /// The flip `s_n = Σ e_ji ⊗ e_ij`, which is the Choi matrix of the
    /// transpose map.
    pub fn flip(dim: usize) -> Self {
        let mut c = CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                c[(j * dim + i, i * dim + j)] = linalg::ONE;
            }
        }
        Self { dim, matrix: c }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Evaluate the represented map: `Φ(x)[a, b] = Σ_ij C[(a,i),(b,j)] x_ij`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let n = self.dim;
        if x.shape() != (n, n) {
            return Err(Error::dim(n, x.nrows()));
        }
        Ok(CMatrix::from_fn(n, n, |a, b| {
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    acc += self.matrix[(a * n + i, b * n + j)] * x[(i, j)];
                }
            }
            acc
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub cp: bool,
    pub trace_preserving: bool,
    pub unital: bool,
    pub choi_rank: usize,
    pub min_choi_eigenvalue: f64,
    /// Sup-entrywise distance of the trace-preservation condition from `1_n`.
    pub tp_defect: f64,
    /// Sup-entrywise distance of the unitality condition from `1_n`.
    pub unital_defect: f64,
}

impl VerificationReport {
    pub fn is_ucpt(&self) -> bool {
        self.cp && self.trace_preserving && self.unital
    }
}

pub fn apply_channel(ch: &QuantumChannel, x: &CMatrix) -> Result<CMatrix> {
    let n = ch.dim;
    if x.nrows() != n {
        return Err(Error::dim(n, x.nrows()));
    }
    if x.ncols() != n {
        return Err(Error::dim(n, x.ncols()));
    }
    Ok(ch
        .kraus
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, v| acc + v * x * v.adjoint()))
}

pub fn choi_of(ch: &QuantumChannel) -> ChoiMatrix {
    let n = ch.dim;
    let size = n * n;
    let mut c = CMatrix::zeros(size, size);
    for v in &ch.kraus {
        let w = linalg::vectorize(v);
        c.ger(linalg::ONE, &w, &w.conjugate(), linalg::ONE);
    }
    ChoiMatrix { dim: n, matrix: c }
}

/// Spectral threshold below which Choi eigenvalues count as zero.
fn rank_threshold(dim: usize, largest: f64, tol: f64) -> f64 {
    tol * (dim * dim) as f64 * largest
}

/// Extract a linearly independent Kraus family from a PSD Choi matrix.
///
/// One Kraus operator per eigenvalue above the rank threshold, obtained by
/// reshaping `√λ · eigenvector`.
pub fn channel_from_choi(choi: &ChoiMatrix, tol: f64) -> Result<QuantumChannel> {
    let n = choi.dim;
    let (h, moved) = hermitize(&choi.matrix);
    if moved > tol * max_abs(&choi.matrix).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "Choi matrix moved by {moved:.3e} under Hermitization"
        )));
    }
    let spec = hermitian_eigen(&h)?;
    if spec.min() < -tol * spec.scale() {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: spec.min(),
        });
    }
    let largest = spec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = rank_threshold(n, largest, tol);
    let kraus: Vec<CMatrix> = spec
        .values
        .iter()
        .enumerate()
        .take_while(|(_, &lambda)| lambda > threshold)
        .map(|(idx, &lambda)| {
            let w: CVector = spec.vectors.column(idx).scale(lambda.sqrt());
            linalg::unvectorize(&w, n)
        })
        .collect();
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("Choi matrix is zero: no Kraus operators".into()));
    }
    QuantumChannel::new(n, kraus)
}

/// Check complete positivity, trace preservation and unitality directly on a
/// Choi matrix. Partial traces supply the latter two conditions.
pub fn verify_choi(choi: &ChoiMatrix, tol: f64) -> Result<VerificationReport> {
    let n = choi.dim;
    let (h, _) = hermitize(&choi.matrix);
    let spec = hermitian_eigen(&h)?;
    let largest = spec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let id = linalg::identity(n);
    let tp_defect = max_abs_diff(&linalg::partial_trace_outer(&h, n, n), &id);
    let unital_defect = max_abs_diff(&linalg::partial_trace_inner(&h, n, n), &id);
    Ok(VerificationReport {
        cp: spec.min() >= -tol * spec.scale(),
        trace_preserving: tp_defect <= tol,
        unital: unital_defect <= tol,
        choi_rank: count_above(&spec.values, rank_threshold(n, largest, tol)),
        min_choi_eigenvalue: spec.min(),
        tp_defect,
        unital_defect,
    })
}

/// Verification report for a Kraus channel. Never fails: an eigensolver
/// breakdown is reported as `cp = false` with a NaN eigenvalue.
pub fn verify_channel(ch: &QuantumChannel, tol: f64) -> VerificationReport {
    let id = linalg::identity(ch.dim);
    let tp_defect = max_abs_diff(&ch.kraus_sum_left(), &id);
    let unital_defect = max_abs_diff(&ch.kraus_sum_right(), &id);
    let (cp, choi_rank, min_choi_eigenvalue) = match verify_choi(&choi_of(ch), tol) {
        Ok(r) => (r.cp, r.choi_rank, r.min_choi_eigenvalue),
        Err(_) => (false, 0, f64::NAN),
    };
    VerificationReport {
        cp,
        trace_preserving: tp_defect <= tol,
        unital: unital_defect <= tol,
        choi_rank,
        min_choi_eigenvalue,
        tp_defect,
        unital_defect,
    }
}

/// `second ∘ first`, Kraus set `{w_i v_j}`.
pub fn compose(first: &QuantumChannel, second: &QuantumChannel) -> Result<QuantumChannel> {
    if first.dim != second.dim {
        return Err(Error::dim(first.dim, second.dim));
    }
    let kraus = second
        .kraus
        .iter()
        .flat_map(|w| first.kraus.iter().map(move |v| w * v))
        .collect();
    QuantumChannel::new(first.dim, kraus)
}

/// Hilbert–Schmidt adjoint, Kraus set `{v_j*}`.
pub fn adjoint_channel(ch: &QuantumChannel) -> QuantumChannel {
    QuantumChannel {
        dim: ch.dim,
        kraus: ch.kraus.iter().map(|v| v.adjoint()).collect(),
    }
}

/// Largest sup-entrywise difference between two maps over all matrix units.
pub fn max_unit_distance<F, G>(dim: usize, f: F, g: G) -> f64
where
    F: Fn(&CMatrix) -> CMatrix,
    G: Fn(&CMatrix) -> CMatrix,
{
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            let e = matrix_unit(dim, i, j);
            worst = worst.max(max_abs_diff(&f(&e), &g(&e)));
        }
    }
    worst
}

/// [`max_unit_distance`] for two Kraus channels.
pub fn channel_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::dim(a.dim, b.dim));
    }
    Ok(max_unit_distance(
        a.dim,
        |x| apply_channel(a, x).expect("dimension checked"),
        |x| apply_channel(b, x).expect("dimension checked"),
    ))
}

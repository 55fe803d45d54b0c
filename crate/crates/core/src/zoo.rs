//! Named channel families: Schur multipliers, the completely depolarizing
//! channel with its clock-and-shift mixture, negative Holevo–Werner channels,
//! unitary mixtures, Haar-random unitaries and the extremality test.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{verify_channel, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, c, hermitian_eigen, hermitize, matrix_unit, max_abs, unitarity_defect, CMatrix, C64, ONE};

/// A square matrix checked to be unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        let deviation = unitarity_defect(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// Wrap a matrix that is unitary by construction.
    pub(crate) fn trusted(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(linalg::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }
}

impl AsRef<CMatrix> for UnitaryMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremalityCertificate {
    pub kraus_count: usize,
    /// Rank of the Gram matrix of the `d²` products `v_i v_j*`.
    pub gram_rank: usize,
    pub extreme: bool,
}

/// Entrywise (Schur) product `b ∘ x`, with no positivity requirement on `b`.
pub fn schur_product(b: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    if b.shape() != x.shape() {
        return Err(Error::dim(b.nrows(), x.nrows()));
    }
    Ok(b.component_mul(x))
}

/// Checks the correlation-matrix conditions: Hermitian, unit diagonal and
/// positive semidefinite, all within `tol`.
fn check_correlation(b: &CMatrix, tol: f64) -> Result<()> {
    if !linalg::is_square(b) {
        return Err(Error::NotCorrelationMatrix {
            reason: format!("matrix is {}x{}", b.nrows(), b.ncols()),
        });
    }
    let herm = linalg::hermitian_defect(b);
    if herm > tol * max_abs(b).max(1.0) {
        return Err(Error::NotCorrelationMatrix {
            reason: format!("not Hermitian (defect {herm:.3e})"),
        });
    }
    let diag_dev = (0..b.nrows()).fold(0.0_f64, |m, i| m.max((b[(i, i)] - ONE).norm()));
    if diag_dev > tol {
        return Err(Error::NotCorrelationMatrix {
            reason: format!("diagonal deviates from 1 by {diag_dev:.3e}"),
        });
    }
    let spec = hermitian_eigen(&hermitize(b).0)?;
    if spec.min() < -tol * spec.scale() {
        return Err(Error::NotCorrelationMatrix {
            reason: format!("minimum eigenvalue {:.3e}", spec.min()),
        });
    }
    Ok(())
}

/// The Schur multiplier `Σ_b(x) = b ∘ x` for a correlation matrix `b`.
///
/// Kraus operators are `diag(√λ_r e_r)` for the eigenpairs of `b`; this
/// tolerates singular `b`.
pub fn schur_channel(b: &CMatrix, tol: f64) -> Result<QuantumChannel> {
    check_correlation(b, tol)?;
    let n = b.nrows();
    let spec = hermitian_eigen(&hermitize(b).0)?;
    let threshold = tol * n as f64 * spec.scale();
    let kraus: Vec<CMatrix> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, &lambda)| lambda > threshold)
        .map(|(r, &lambda)| {
            let d = spec.vectors.column(r).scale(lambda.sqrt());
            CMatrix::from_diagonal(&d)
        })
        .collect();
    QuantumChannel::new(n, kraus)
}

/// `S_n` together with the clock-and-shift unitaries realizing it as a
/// uniform mixture of `n²` conjugations.
#[derive(Debug, Clone)]
pub struct Depolarizing {
    pub channel: QuantumChannel,
    /// `diag(1, ω, …, ω^{n−1})`, `ω = exp(2πi/n)`.
    pub clock: UnitaryMatrix,
    /// Cyclic shift with ones on the superdiagonal and in the bottom-left corner.
    pub shift: UnitaryMatrix,
    /// `shift^i · clock^j` in the order `(i, j)` row-major, `0 ≤ i, j < n`.
    pub unitaries: Vec<UnitaryMatrix>,
    pub weights: Vec<f64>,
}

pub fn clock_matrix(n: usize) -> CMatrix {
    let entries: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    linalg::diag(&entries)
}

pub fn shift_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if j == (i + 1) % n { ONE } else { c(0.0, 0.0) })
}

/// The completely depolarizing channel `x ↦ tr_n(x) 1_n`.
pub fn depolarizing(n: usize) -> Result<Depolarizing> {
    if n < 2 {
        return Err(Error::InvalidArgument("depolarizing channel needs n >= 2".into()));
    }
    let clock = clock_matrix(n);
    let shift = shift_matrix(n);
    let mut unitaries = Vec::with_capacity(n * n);
    let mut shift_pow = linalg::identity(n);
    for _ in 0..n {
        let mut clock_pow = linalg::identity(n);
        for _ in 0..n {
            unitaries.push(UnitaryMatrix::trusted(&shift_pow * &clock_pow));
            clock_pow = &clock_pow * &clock;
        }
        shift_pow = &shift_pow * &shift;
    }
    let inv = 1.0 / n as f64;
    let kraus = unitaries.iter().map(|u| u.matrix().scale(inv)).collect();
    Ok(Depolarizing {
        channel: QuantumChannel::new(n, kraus)?,
        clock: UnitaryMatrix::trusted(clock),
        shift: UnitaryMatrix::trusted(shift),
        unitaries,
        weights: vec![inv * inv; n * n],
    })
}

/// `W_n^-(x) = (Tr(x) 1_n − x^t)/(n − 1)`, Kraus operators
/// `(e_ij − e_ji)/√(n − 1)` for `i < j`.
pub fn holevo_werner(n: usize) -> Result<QuantumChannel> {
    if n < 2 {
        return Err(Error::InvalidArgument("Holevo-Werner channel needs n >= 2".into()));
    }
    let scale = 1.0 / ((n - 1) as f64).sqrt();
    let mut kraus = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            kraus.push((matrix_unit(n, i, j) - matrix_unit(n, j, i)).scale(scale));
        }
    }
    QuantumChannel::new(n, kraus)
}

/// `x ↦ Σ t_j u_j x u_j*`.
pub fn mixture_of_unitaries(us: &[UnitaryMatrix], ts: &[f64], tol: f64) -> Result<QuantumChannel> {
    let first = us
        .first()
        .ok_or_else(|| Error::InvalidArgument("no unitaries given".into()))?;
    if us.len() != ts.len() {
        return Err(Error::InvalidWeights(format!(
            "{} unitaries but {} weights",
            us.len(),
            ts.len()
        )));
    }
    check_weights(ts, tol)?;
    let n = first.dim();
    let kraus = us
        .iter()
        .zip(ts)
        .map(|(u, &t)| {
            if u.dim() != n {
                Err(Error::dim(n, u.dim()))
            } else {
                Ok(u.matrix().scale(t.sqrt()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(n, kraus)
}

/// Probability-vector check: all weights positive and summing to one.
pub fn check_weights(ts: &[f64], tol: f64) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::InvalidWeights("empty weight list".into()));
    }
    if let Some((i, t)) = ts.iter().enumerate().find(|(_, t)| t.is_nan() || **t <= 0.0) {
        return Err(Error::InvalidWeights(format!("weight {i} is {t}, must be positive")));
    }
    let sum: f64 = ts.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the diagonal of `R` rotated to the positive reals.
pub fn haar_unitary(d: usize, seed: u64) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("unitary dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut g = CMatrix::zeros(d, d);
    // fill row-major so the stream layout is independent of storage order
    for i in 0..d {
        for j in 0..d {
            let re = draw();
            let im = draw();
            g[(i, j)] = c(re * scale, im * scale);
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Ok(UnitaryMatrix(q))
}

/// Tests whether a unital channel is an extreme point of the unital quantum
/// channels: with an independent Kraus family `{v_1, …, v_d}`, the `d²`
/// products `v_i v_j*` must be linearly independent.
pub fn extremality_certificate(ch: &QuantumChannel, tol: f64) -> Result<ExtremalityCertificate> {
    if !verify_channel(ch, tol).is_ucpt() {
        return Err(Error::NotUcpt);
    }
    let canonical = ch.canonical(tol)?;
    let vs = canonical.kraus();
    let d = vs.len();
    let products: Vec<CMatrix> = vs
        .iter()
        .flat_map(|vi| vs.iter().map(move |vj| vi * vj.adjoint()))
        .collect();
    let gram_rank = linalg::psd_rank(&linalg::gram_matrix(&products), tol)?;
    Ok(ExtremalityCertificate {
        kraus_count: d,
        gram_rank,
        extreme: gram_rank == d * d,
    })
}

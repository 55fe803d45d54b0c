//! Factorizable channels with finite-dimensional ancillas.
//!
//! An ancilla `A = ⊕_j M_{k_j}` carries the trace `τ(y) = Σ_j t_j tr_{k_j}(y_j)`.
//! A unitary `u ∈ M_n ⊗ A` is stored block by block: block `j` is an
//! `(n·k_j)×(n·k_j)` unitary on `C^n ⊗ C^{k_j}` (system index first). The
//! factorized channel is `x ↦ (id_n ⊗ τ)(u (x ⊗ 1_A) u*)`.

use crate::channel::{
    self, apply_channel, channel_distance, channel_from_choi, verify_channel, ChoiMatrix, QuantumChannel,
};
use crate::error::{Error, Result};
use crate::linalg::{self, hs_inner, identity, kron, matrix_unit, max_abs_diff, CMatrix, C64, DEFAULT_TOL, ONE, ZERO};
use crate::zoo::{check_weights, UnitaryMatrix};

/// A mixing weight, either an exact fraction or a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Exact { num: u64, den: u64 },
    Float(f64),
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Weight {
    pub fn exact(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidWeights("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        Ok(Weight::Exact {
            num: num / g,
            den: den / g,
        })
    }

    pub fn value(&self) -> f64 {
        match *self {
            Weight::Exact { num, den } => num as f64 / den as f64,
            Weight::Float(t) => t,
        }
    }

    /// If `t ∈ k⁻¹ℤ`, the integer `m = t·k`.
    ///
    /// Exact fractions are decided arithmetically; floats accept
    /// `|t·k − round(t·k)| ≤ 1e-9·k`.
    pub fn multiple_of(&self, k: usize) -> Option<usize> {
        match *self {
            Weight::Exact { num, den } => {
                let k = k as u64;
                k.is_multiple_of(den).then(|| (num * (k / den)) as usize)
            }
            Weight::Float(t) => {
                let tk = t * k as f64;
                let m = tk.round();
                ((tk - m).abs() <= 1e-9 * k as f64 && m >= 0.0).then_some(m as usize)
            }
        }
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weight::Exact { num, den } => write!(f, "{num}/{den}"),
            Weight::Float(t) => write!(f, "{t}"),
        }
    }
}

/// Block sizes `k_j` and trace weights `t_j` of `⊕_j M_{k_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAncillaSpec {
    blocks: Vec<usize>,
    weights: Vec<f64>,
}

impl FiniteAncillaSpec {
    pub fn new(blocks: Vec<usize>, weights: Vec<f64>, tol: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("ancilla has no blocks".into()));
        }
        if blocks.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} blocks but {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        if let Some(j) = blocks.iter().position(|&k| k == 0) {
            return Err(Error::InvalidArgument(format!("block {j} has size 0")));
        }
        check_weights(&weights, tol)?;
        Ok(Self { blocks, weights })
    }

    /// `(M_k, tr_k)`.
    pub fn matrix(k: usize) -> Self {
        Self {
            blocks: vec![k.max(1)],
            weights: vec![1.0],
        }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Total dimension `Σ k_j²` of the algebra.
    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|k| k * k).sum()
    }
}

/// A unitary in `M_n ⊗ (⊕_j M_{k_j})` together with the trace weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFactorization {
    dim: usize,
    ancilla: FiniteAncillaSpec,
    unitaries: Vec<UnitaryMatrix>,
}

impl FiniteFactorization {
    pub fn new(dim: usize, ancilla: FiniteAncillaSpec, unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if unitaries.len() != ancilla.len() {
            return Err(Error::InvalidArgument(format!(
                "{} block unitaries for {} ancilla blocks",
                unitaries.len(),
                ancilla.len()
            )));
        }
        for (u, &k) in unitaries.iter().zip(&ancilla.blocks) {
            if u.dim() != dim * k {
                return Err(Error::dim(dim * k, u.dim()));
            }
        }
        Ok(Self {
            dim,
            ancilla,
            unitaries,
        })
    }

    /// Trivial ancilla `C`: the automorphism `Ad(u)`.
    pub fn automorphism(u: UnitaryMatrix) -> Self {
        Self {
            dim: u.dim(),
            ancilla: FiniteAncillaSpec::matrix(1),
            unitaries: vec![u],
        }
    }

    /// A `k`-noisy factorization with `u ∈ M_n ⊗ M_k`.
    pub fn k_noisy(dim: usize, k: usize, u: UnitaryMatrix) -> Result<Self> {
        Self::new(dim, FiniteAncillaSpec::matrix(k), vec![u])
    }

    /// Abelian ancilla `C^N` with weights `t_j` and `u = (u_1, …, u_N)`.
    pub fn mixture(us: Vec<UnitaryMatrix>, ts: Vec<f64>, tol: f64) -> Result<Self> {
        let dim = us
            .first()
            .map(UnitaryMatrix::dim)
            .ok_or_else(|| Error::InvalidArgument("no unitaries given".into()))?;
        let ancilla = FiniteAncillaSpec::new(vec![1; us.len()], ts, tol)?;
        Self::new(dim, ancilla, us)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ancilla(&self) -> &FiniteAncillaSpec {
        &self.ancilla
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.unitaries
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, f64, &CMatrix)> {
        self.ancilla
            .blocks
            .iter()
            .zip(&self.ancilla.weights)
            .zip(&self.unitaries)
            .map(|((&k, &t), u)| (k, t, u.matrix()))
    }

    pub fn channel(&self) -> Result<QuantumChannel> {
        channel_of_factorization(self)
    }
}

/// `n×n` block `(α, β)` of an operator on `C^n ⊗ C^k`.
fn system_block(u: &CMatrix, n: usize, k: usize, alpha: usize, beta: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |a, b| u[(a * k + alpha, b * k + beta)])
}

/// The channel `x ↦ Σ_j t_j (id_n ⊗ tr_{k_j})(U_j (x ⊗ 1) U_j*)`.
///
/// Kraus operators are `√(t_j/k_j) · U_j[α, β]` over the `n×n` blocks of
/// each block unitary.
pub fn channel_of_factorization(f: &FiniteFactorization) -> Result<QuantumChannel> {
    let n = f.dim;
    let mut kraus = Vec::new();
    for (k, t, u) in f.blocks() {
        let scale = (t / k as f64).sqrt();
        for alpha in 0..k {
            for beta in 0..k {
                let block = system_block(u, n, k, alpha, beta);
                if linalg::max_abs(&block) > 0.0 {
                    kraus.push(block.scale(scale));
                }
            }
        }
    }
    QuantumChannel::new(n, kraus)
}

/// Direct evaluation of `(id_n ⊗ τ)(u (x ⊗ 1_A) u*)` with full block matrices.
pub fn apply_factorization(f: &FiniteFactorization, x: &CMatrix) -> Result<CMatrix> {
    let n = f.dim;
    if x.shape() != (n, n) {
        return Err(Error::dim(n, x.nrows()));
    }
    let mut out = CMatrix::zeros(n, n);
    for (k, t, u) in f.blocks() {
        let lifted = u * kron(x, &identity(k)) * u.adjoint();
        out += linalg::partial_trace_inner(&lifted, n, k).scale(t / k as f64);
    }
    Ok(out)
}

/// `⟨α(x), β(e_ij)⟩` summed into `Φ(x)`, with `α = id ⊗ 1_A` and
/// `β = Ad(w) ∘ α`; `conj_by_adjoint` selects `w = u*` (reproducing `Φ`) or
/// `w = u` (reproducing its Hilbert–Schmidt adjoint).
fn conditional_expectation_apply(f: &FiniteFactorization, x: &CMatrix, conj_by_adjoint: bool) -> CMatrix {
    let n = f.dim;
    let mut out = CMatrix::zeros(n, n);
    for (k, t, u) in f.blocks() {
        let w = if conj_by_adjoint { u.adjoint() } else { u.clone() };
        let one_k = identity(k);
        let alpha_x = kron(x, &one_k);
        let weight = t / k as f64;
        for i in 0..n {
            for j in 0..n {
                let beta_e = &w * kron(&matrix_unit(n, i, j), &one_k) * w.adjoint();
                out[(i, j)] += hs_inner(&alpha_x, &beta_e) * weight;
            }
        }
    }
    out
}

/// Recover the channel from the pair of embeddings `α = id_n ⊗ 1_A` and
/// `β = Ad(u*) ∘ α`, via `Φ(x) = Σ_ij ⟨α(x), β(e_ij)⟩_{Tr ⊗ τ} e_ij`, and
/// re-extract a Kraus form from the resulting Choi matrix.
pub fn recover_eq2(f: &FiniteFactorization, tol: f64) -> Result<QuantumChannel> {
    let choi = ChoiMatrix::from_map(f.dim, |x| conditional_expectation_apply(f, x, true))?;
    channel_from_choi(&choi, tol)
}

/// The map obtained from the same pairing when `β = Ad(u) ∘ α`; this is the
/// adjoint of the factorized channel.
pub fn recover_eq2_adjoint(f: &FiniteFactorization, tol: f64) -> Result<QuantumChannel> {
    let choi = ChoiMatrix::from_map(f.dim, |x| conditional_expectation_apply(f, x, false))?;
    channel_from_choi(&choi, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A `k`-noisy factorization was built for the smallest admissible `k`.
    Constructed,
    /// Independence holds and no `k ≤ k_max` has `t ∈ k⁻¹ℤ`: the mixture is
    /// not `k`-noisy for any such `k`.
    Obstructed,
    /// `{1, u1*u2, u2*u1}` is linearly dependent, so the criterion says nothing.
    CriterionInapplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionReport {
    /// Whether `{1_n, u1*u2, u2*u1}` is linearly independent.
    pub independent: bool,
    pub independence_rank: usize,
    pub k_max: usize,
    /// All `2 ≤ k ≤ k_max` with `t ∈ k⁻¹ℤ`.
    pub admissible_k: Vec<usize>,
    pub verdict: Verdict,
    /// Ancilla size of the returned factorization, if any.
    pub k: Option<usize>,
    /// Sup distance on matrix units between the factorized channel and the
    /// mixture `t·Ad(u1) + (1 − t)·Ad(u2)`.
    pub mixture_error: Option<f64>,
    /// Residual of `1 = z1*z1 + z2*z2`, `0 = z2*z1 = z1*z2` for the
    /// coefficients recovered from the constructed unitary; absent when
    /// `u1` and `u2` are proportional.
    pub coefficient_residual: Option<f64>,
}

/// Decides and, where possible, constructs a `k`-noisy factorization of the
/// two-unitary mixture `t·Ad(u1) + (1 − t)·Ad(u2)`.
///
/// With `p = diag(1^m, 0^{k−m})` and `t = m/k`, `U = u1 ⊗ p + u2 ⊗ (1 − p)` is
/// unitary and factorizes the mixture. Conversely, when `{1, u1*u2, u2*u1}`
/// is independent, any `k`-noisy factorization forces `t ∈ k⁻¹ℤ`.
pub fn two_unitary_factorization(
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    t: Weight,
    k_max: usize,
    tol: f64,
) -> Result<(ObstructionReport, Option<FiniteFactorization>)> {
    let n = u1.dim();
    if u2.dim() != n {
        return Err(Error::dim(n, u2.dim()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("two-unitary criterion needs n >= 2".into()));
    }
    let tv = t.value();
    if !(tv > 0.0 && tv < 1.0) {
        return Err(Error::InvalidWeights(format!("t = {t} is not in (0, 1)")));
    }
    let (a, b) = (u1.matrix(), u2.matrix());
    let v = a.adjoint() * b;
    let independence_rank = linalg::psd_rank(&linalg::gram_matrix(&[identity(n), v.clone(), v.adjoint()]), tol)?;
    let independent = independence_rank == 3;

    let admissible_k: Vec<usize> = (2..=k_max)
        .filter(|&k| t.multiple_of(k).is_some_and(|m| m > 0 && m < k))
        .collect();

    let mixture = crate::zoo::mixture_of_unitaries(&[u1.clone(), u2.clone()], &[tv, 1.0 - tv], DEFAULT_TOL.max(tol))?;

    let mut report = ObstructionReport {
        independent,
        independence_rank,
        k_max,
        admissible_k: admissible_k.clone(),
        verdict: if independent {
            Verdict::Obstructed
        } else {
            Verdict::CriterionInapplicable
        },
        k: None,
        mixture_error: None,
        coefficient_residual: None,
    };

    let factorization = if let Some(&k) = admissible_k.first() {
        let m = t.multiple_of(k).expect("admissible k has an integer multiple");
        let p = projection_diag(k, m);
        let q = identity(k) - &p;
        let u = kron(a, &p) + kron(b, &q);
        let f = FiniteFactorization::k_noisy(n, k, UnitaryMatrix::new(u, 1e-10)?)?;
        // coefficients are only determined when u1, u2 are independent
        if let Ok((z1, z2)) = noisy_pair_coefficients(a, b, f.unitaries[0].matrix(), k) {
            report.coefficient_residual = Some(coefficient_residual(&z1, &z2));
        }
        report.k = Some(k);
        if independent {
            report.verdict = Verdict::Constructed;
        }
        Some(f)
    } else if !independent && proportional(a, b, tol) {
        // u2 = c·u1 with |c| = 1: the mixture is just Ad(u1)
        report.k = Some(1);
        Some(FiniteFactorization::automorphism(u1.clone()))
    } else {
        None
    };
    if let Some(f) = &factorization {
        report.mixture_error = Some(channel_distance(&channel_of_factorization(f)?, &mixture)?);
    }
    Ok((report, factorization))
}

fn projection_diag(k: usize, m: usize) -> CMatrix {
    let entries: Vec<C64> = (0..k).map(|i| if i < m { ONE } else { ZERO }).collect();
    linalg::diag(&entries)
}

fn proportional(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    let v = a.adjoint() * b;
    let phase = linalg::normalized_trace(&v);
    max_abs_diff(&v, &identity(a.nrows()).map(|z| z * phase)) <= tol.max(1e-12)
}

/// Recovers `z1, z2 ∈ M_k` from `U = u1 ⊗ z1 + u2 ⊗ z2` by least squares on
/// each `n×n` block. Requires `u1`, `u2` linearly independent.
pub fn noisy_pair_coefficients(u1: &CMatrix, u2: &CMatrix, u: &CMatrix, k: usize) -> Result<(CMatrix, CMatrix)> {
    let n = u1.nrows();
    if u.nrows() != n * k {
        return Err(Error::dim(n * k, u.nrows()));
    }
    let g11 = hs_inner(u1, u1);
    let g22 = hs_inner(u2, u2);
    let g12 = hs_inner(u2, u1); // Tr(u1* u2)
    let det = g11 * g22 - g12 * g12.conj();
    if det.norm() < 1e-12 * g11.norm() * g22.norm() {
        return Err(Error::InvalidArgument("u1 and u2 are linearly dependent".into()));
    }
    let mut z1 = CMatrix::zeros(k, k);
    let mut z2 = CMatrix::zeros(k, k);
    for alpha in 0..k {
        for beta in 0..k {
            let block = system_block(u, n, k, alpha, beta);
            let r1 = hs_inner(&block, u1);
            let r2 = hs_inner(&block, u2);
            // [g11 g12; conj(g12) g22] [c1; c2] = [r1; r2]
            z1[(alpha, beta)] = (g22 * r1 - g12 * r2) / det;
            z2[(alpha, beta)] = (g11 * r2 - g12.conj() * r1) / det;
        }
    }
    Ok((z1, z2))
}

/// `max(‖z1*z1 + z2*z2 − 1‖, ‖z2*z1‖, ‖z1*z2‖)`, sup-entrywise.
pub fn coefficient_residual(z1: &CMatrix, z2: &CMatrix) -> f64 {
    let k = z1.nrows();
    let sum = z1.adjoint() * z1 + z2.adjoint() * z2;
    max_abs_diff(&sum, &identity(k))
        .max(linalg::max_abs(&(z2.adjoint() * z1)))
        .max(linalg::max_abs(&(z1.adjoint() * z2)))
}

/// Finite-ancilla form of the two-unitary criterion: the mixture factors
/// through `(A, τ)` when `A` has a projection of trace `t`. Projections of
/// `⊕ M_{k_j}` have traces `Σ t_j m_j / k_j`; the first rank vector `(m_j)`
/// hitting `t` within `tol` is used.
pub fn two_unitary_on_ancilla(
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    t: f64,
    ancilla: &FiniteAncillaSpec,
    tol: f64,
) -> Result<Option<FiniteFactorization>> {
    let n = u1.dim();
    if u2.dim() != n {
        return Err(Error::dim(n, u2.dim()));
    }
    let combos: usize = ancilla.blocks.iter().map(|k| k + 1).product();
    if combos > 1_000_000 {
        return Err(Error::SizeOverflow(format!("{combos} projection ranks to search")));
    }
    let mut ranks = vec![0usize; ancilla.len()];
    for _ in 0..combos {
        let trace: f64 = ranks
            .iter()
            .zip(&ancilla.blocks)
            .zip(&ancilla.weights)
            .map(|((&m, &k), &w)| w * m as f64 / k as f64)
            .sum();
        if (trace - t).abs() <= tol {
            let unitaries = ranks
                .iter()
                .zip(&ancilla.blocks)
                .map(|(&m, &k)| {
                    let p = projection_diag(k, m);
                    let q = identity(k) - &p;
                    UnitaryMatrix::new(kron(u1.matrix(), &p) + kron(u2.matrix(), &q), 1e-10)
                })
                .collect::<Result<Vec<_>>>()?;
            return FiniteFactorization::new(n, ancilla.clone(), unitaries).map(Some);
        }
        // odometer increment
        for (m, &k) in ranks.iter_mut().zip(&ancilla.blocks) {
            if *m < k {
                *m += 1;
                break;
            }
            *m = 0;
        }
    }
    Ok(None)
}

/// Factorization of `G ∘ F` through `A ⊗ B` with `w = v̂ (u ⊗ 1_B)`, where
/// `v̂` acts as `v` on the system and `B` factors and trivially on `A`.
pub fn compose_factorizations(
    first: &FiniteFactorization,
    second: &FiniteFactorization,
) -> Result<FiniteFactorization> {
    let n = first.dim;
    if second.dim != n {
        return Err(Error::dim(n, second.dim));
    }
    let mut blocks = Vec::new();
    let mut weights = Vec::new();
    let mut unitaries = Vec::new();
    for (k, t, u) in first.blocks() {
        for (l, s, v) in second.blocks() {
            let size = n * k * l;
            let u_lift = kron(u, &identity(l));
            let v_hat = CMatrix::from_fn(size, size, |row, col| {
                let (a, alpha, beta) = (row / (k * l), (row / l) % k, row % l);
                let (a2, alpha2, beta2) = (col / (k * l), (col / l) % k, col % l);
                if alpha == alpha2 {
                    v[(a * l + beta, a2 * l + beta2)]
                } else {
                    ZERO
                }
            });
            blocks.push(k * l);
            weights.push(t * s);
            unitaries.push(UnitaryMatrix::trusted(v_hat * u_lift));
        }
    }
    let ancilla = FiniteAncillaSpec::new(blocks, weights, 1e-9)?;
    FiniteFactorization::new(n, ancilla, unitaries)
}

/// `Σ_j t_j Φ_j` through `⊕_j A_j` with trace `Σ_j t_j τ_j`.
pub fn convex_combine(fs: &[FiniteFactorization], ts: &[f64], tol: f64) -> Result<FiniteFactorization> {
    let first = fs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no factorizations to combine".into()))?;
    if fs.len() != ts.len() {
        return Err(Error::InvalidWeights(format!(
            "{} factorizations but {} weights",
            fs.len(),
            ts.len()
        )));
    }
    check_weights(ts, tol)?;
    let n = first.dim;
    let mut blocks = Vec::new();
    let mut weights = Vec::new();
    let mut unitaries = Vec::new();
    for (f, &t) in fs.iter().zip(ts) {
        if f.dim != n {
            return Err(Error::dim(n, f.dim));
        }
        blocks.extend_from_slice(&f.ancilla.blocks);
        weights.extend(f.ancilla.weights.iter().map(|w| w * t));
        unitaries.extend(f.unitaries.iter().cloned());
    }
    let ancilla = FiniteAncillaSpec::new(blocks, weights, tol.max(1e-9))?;
    FiniteFactorization::new(n, ancilla, unitaries)
}

/// Split into one `k_j`-noisy factorization per block, weighted by
/// `t_j = τ(q_j)`. Blocks with `t_j ≤ tol` are dropped.
pub fn split_factorization(f: &FiniteFactorization, tol: f64) -> Vec<(f64, FiniteFactorization)> {
    f.blocks()
        .filter(|(_, t, _)| *t > tol)
        .map(|(k, t, u)| {
            let single = FiniteFactorization {
                dim: f.dim,
                ancilla: FiniteAncillaSpec::matrix(k),
                unitaries: vec![UnitaryMatrix::trusted(u.clone())],
            };
            (t, single)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DilationMode {
    /// `Φ(x) = (id_n ⊗ Tr_r)(u (x ⊗ e_11) u*)`, for trace-preserving `Φ`.
    Cptp,
    /// `Φ(x) = (id_n ⊗ ρ)(u (x ⊗ 1_r) u*)`, `ρ` the vector state of `e_1`, for
    /// unital `Φ`.
    Ucp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stinespring {
    pub mode: DilationMode,
    pub dim: usize,
    /// Ancilla size, equal to the Choi rank.
    pub r: usize,
    pub unitary: UnitaryMatrix,
    /// Ancilla basis vector used for `e_11` or the pure state `ρ`.
    pub state_index: usize,
}

impl Stinespring {
    /// Evaluate the dilation formula directly on the `n·r`-dimensional space.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let (n, r, s) = (self.dim, self.r, self.state_index);
        if x.shape() != (n, n) {
            return Err(Error::dim(n, x.nrows()));
        }
        let u = self.unitary.matrix();
        match self.mode {
            DilationMode::Cptp => {
                let lifted = u * kron(x, &matrix_unit(r, s, s)) * u.adjoint();
                Ok(linalg::partial_trace_inner(&lifted, n, r))
            }
            DilationMode::Ucp => {
                let lifted = u * kron(x, &identity(r)) * u.adjoint();
                Ok(CMatrix::from_fn(n, n, |a, c| lifted[(a * r + s, c * r + s)]))
            }
        }
    }

    pub fn reconstruction_error(&self, ch: &QuantumChannel) -> Result<f64> {
        if ch.dim() != self.dim {
            return Err(Error::dim(self.dim, ch.dim()));
        }
        Ok(channel::max_unit_distance(
            self.dim,
            |x| self.apply(x).expect("dimension checked"),
            |x| apply_channel(ch, x).expect("dimension checked"),
        ))
    }
}

/// Stinespring dilation with ancilla size `r = choi_rank`. The canonical
/// Kraus operators fill the block column (CPTP) or block row (UCP) attached
/// to ancilla index 0, and the rest is an orthonormal completion.
pub fn stinespring(ch: &QuantumChannel, mode: DilationMode, tol: f64) -> Result<Stinespring> {
    let report = verify_channel(ch, tol);
    if !report.cp {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: report.min_choi_eigenvalue,
        });
    }
    match mode {
        DilationMode::Cptp if !report.trace_preserving => {
            return Err(Error::NotTracePreserving {
                deviation: report.tp_defect,
            })
        }
        DilationMode::Ucp if !report.unital => {
            return Err(Error::NotUnital {
                deviation: report.unital_defect,
            })
        }
        _ => {}
    }
    let canonical = ch.canonical(tol)?;
    let vs = canonical.kraus();
    let n = ch.dim();
    let r = vs.len();
    let size = n * r;
    // isometry columns: column b has entries v_α[a, b] at row (a, α)
    let mut iso = CMatrix::zeros(size, n);
    for (alpha, v) in vs.iter().enumerate() {
        for a in 0..n {
            for b in 0..n {
                iso[(a * r + alpha, b)] = match mode {
                    DilationMode::Cptp => v[(a, b)],
                    // row (a, 0), column (b, β) of u holds v_β[a, b]; build u* instead
                    DilationMode::Ucp => v[(b, a)].conj(),
                };
            }
        }
    }
    // re-orthonormalize to absorb rounding in the Kraus sums
    let iso = gram_schmidt_columns(&iso);
    let extra = linalg::orthonormal_completion(&iso);
    let mut full = CMatrix::zeros(size, size);
    let mut next_extra = 0;
    for col in 0..size {
        let (b, alpha) = (col / r, col % r);
        if alpha == 0 {
            full.set_column(col, &iso.column(b));
        } else {
            full.set_column(col, &extra.column(next_extra));
            next_extra += 1;
        }
    }
    let unitary = match mode {
        DilationMode::Cptp => full,
        DilationMode::Ucp => full.adjoint(),
    };
    Ok(Stinespring {
        mode,
        dim: n,
        r,
        unitary: UnitaryMatrix::new(unitary, 1e-8)?,
        state_index: 0,
    })
}

fn gram_schmidt_columns(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let prev = out.column(i).into_owned();
                let coeff = prev.dotc(&out.column(j));
                let mut col = out.column_mut(j);
                col.axpy(-coeff, &prev, ONE);
            }
        }
        let norm = out.column(j).norm();
        out.column_mut(j).unscale_mut(norm);
    }
    out
}

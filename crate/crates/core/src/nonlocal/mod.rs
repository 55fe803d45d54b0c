//! Two-party correlation tables `p(a, b | x, y)` with `n` questions and `k`
//! answers per party, and the three finite-dimensional models producing
//! them: classical (deterministic strategies mixed by shared randomness),
//! tensor-product and commuting-operator.

mod bell;
mod polytope;

pub use bell::{bell_value, maximize_chsh, textbook_chsh_strategy, BellFunctional, ChshMode, ChshOptimum, NelderMead};
pub use polytope::{membership_cc, CcMembership, MAX_VERTICES, MEMBER_RESIDUAL};

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, max_abs, max_abs_diff, CMatrix, CVector, ONE};

/// A `k`-outcome projection-valued measure on `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm {
    dim: usize,
    projections: Vec<CMatrix>,
}

impl Pvm {
    pub fn new(projections: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let dim = projections
            .first()
            .map(CMatrix::nrows)
            .ok_or_else(|| Error::InvalidPvm("no projections".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (a, p) in projections.iter().enumerate() {
            if p.shape() != (dim, dim) {
                return Err(Error::InvalidPvm(format!("projection {a} has the wrong shape")));
            }
            if linalg::hermitian_defect(p) > tol {
                return Err(Error::InvalidPvm(format!("projection {a} is not Hermitian")));
            }
            let idem = max_abs_diff(&(p * p), p);
            if idem > tol {
                return Err(Error::InvalidPvm(format!(
                    "projection {a} is not idempotent (defect {idem:.3e})"
                )));
            }
            sum += p;
        }
        let defect = max_abs_diff(&sum, &linalg::identity(dim));
        if defect > tol {
            return Err(Error::InvalidPvm(format!(
                "projections sum to identity only up to {defect:.3e}"
            )));
        }
        Ok(Self { dim, projections })
    }

    /// Rank-one projections onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix, tol: f64) -> Result<Self> {
        let projections = (0..u.ncols())
            .map(|j| {
                let v = u.column(j);
                v * v.adjoint()
            })
            .collect();
        Self::new(projections, tol)
    }

    /// `{e_aa}`.
    pub fn computational(dim: usize) -> Self {
        Self {
            dim,
            projections: (0..dim).map(|a| linalg::matrix_unit(dim, a, a)).collect(),
        }
    }

    /// Qubit measurement along `(cos θ, sin θ)` and its orthogonal complement.
    pub fn real_plane(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        let v = CVector::from_vec(vec![c(co, 0.0), c(s, 0.0)]);
        let p = &v * v.adjoint();
        let q = linalg::identity(2) - &p;
        Self {
            dim: 2,
            projections: vec![p, q],
        }
    }

    /// Single-outcome-certain PVM on `C^1` with `k` outcomes: outcome `a`
    /// carries the identity, all others vanish.
    pub fn deterministic(k: usize, a: usize) -> Self {
        Self {
            dim: 1,
            projections: (0..k)
                .map(|b| CMatrix::from_element(1, 1, if a == b { ONE } else { c(0.0, 0.0) }))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.projections.len()
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    fn lift_left(&self, other_dim: usize) -> Self {
        let id = linalg::identity(other_dim);
        Self {
            dim: self.dim * other_dim,
            projections: self.projections.iter().map(|p| kron(p, &id)).collect(),
        }
    }

    fn lift_right(&self, other_dim: usize) -> Self {
        let id = linalg::identity(other_dim);
        Self {
            dim: self.dim * other_dim,
            projections: self.projections.iter().map(|p| kron(&id, p)).collect(),
        }
    }
}

fn check_family(pvms: &[Pvm], dim: usize, who: &str) -> Result<usize> {
    let k = pvms
        .first()
        .map(Pvm::outcomes)
        .ok_or_else(|| Error::InvalidPvm(format!("{who} has no measurements")))?;
    for (x, m) in pvms.iter().enumerate() {
        if m.dim != dim {
            return Err(Error::InvalidPvm(format!(
                "{who} measurement {x} acts on dimension {}, expected {dim}",
                m.dim
            )));
        }
        if m.outcomes() != k {
            return Err(Error::InvalidPvm(format!(
                "{who} measurement {x} has {} outcomes, expected {k}",
                m.outcomes()
            )));
        }
    }
    Ok(k)
}

fn check_state(psi: &CVector, dim: usize, tol: f64) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::dim(dim, psi.len()));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > tol {
        return Err(Error::InvalidArgument(format!("state has norm {norm}, expected 1")));
    }
    Ok(())
}

/// Measurements `P^x` on `H_A`, `Q^y` on `H_B` and a unit vector in `H_A ⊗ H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorStrategy {
    dim_a: usize,
    dim_b: usize,
    alice: Vec<Pvm>,
    bob: Vec<Pvm>,
    psi: CVector,
}

impl TensorStrategy {
    pub fn new(alice: Vec<Pvm>, bob: Vec<Pvm>, psi: CVector, tol: f64) -> Result<Self> {
        let dim_a = alice.first().map_or(0, Pvm::dim);
        let dim_b = bob.first().map_or(0, Pvm::dim);
        let ka = check_family(&alice, dim_a, "alice")?;
        let kb = check_family(&bob, dim_b, "bob")?;
        if ka != kb {
            return Err(Error::InvalidPvm(format!("alice has {ka} outcomes, bob has {kb}")));
        }
        if alice.len() != bob.len() {
            return Err(Error::InvalidPvm(format!(
                "alice has {} questions, bob has {}",
                alice.len(),
                bob.len()
            )));
        }
        check_state(&psi, dim_a * dim_b, tol)?;
        Ok(Self {
            dim_a,
            dim_b,
            alice,
            bob,
            psi,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn alice(&self) -> &[Pvm] {
        &self.alice
    }

    pub fn bob(&self) -> &[Pvm] {
        &self.bob
    }

    pub fn psi(&self) -> &CVector {
        &self.psi
    }

    pub fn questions(&self) -> usize {
        self.alice.len()
    }

    pub fn outcomes(&self) -> usize {
        self.alice[0].outcomes()
    }
}

/// Mutually commuting measurement families on one space, with a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingStrategy {
    dim: usize,
    alice: Vec<Pvm>,
    bob: Vec<Pvm>,
    psi: CVector,
}

impl CommutingStrategy {
    /// Fails with [`Error::NonCommutingPvms`] at the first `(x, y, a, b)` with
    /// `‖[P_a^x, Q_b^y]‖ > tol`.
    pub fn new(alice: Vec<Pvm>, bob: Vec<Pvm>, psi: CVector, tol: f64) -> Result<Self> {
        let dim = alice.first().map_or(0, Pvm::dim);
        let ka = check_family(&alice, dim, "alice")?;
        let kb = check_family(&bob, dim, "bob")?;
        if ka != kb || alice.len() != bob.len() {
            return Err(Error::InvalidPvm("alice and bob have different shapes".into()));
        }
        check_state(&psi, dim, tol)?;
        for (x, px) in alice.iter().enumerate() {
            for (y, qy) in bob.iter().enumerate() {
                for (a, p) in px.projections.iter().enumerate() {
                    for (b, q) in qy.projections.iter().enumerate() {
                        let norm = max_abs(&(p * q - q * p));
                        if norm > tol {
                            return Err(Error::NonCommutingPvms { x, y, a, b, norm });
                        }
                    }
                }
            }
        }
        Ok(Self { dim, alice, bob, psi })
    }

    /// `P ↦ P ⊗ 1`, `Q ↦ 1 ⊗ Q` on `H_A ⊗ H_B`.
    pub fn from_tensor(s: &TensorStrategy) -> Self {
        Self {
            dim: s.dim_a * s.dim_b,
            alice: s.alice.iter().map(|p| p.lift_left(s.dim_b)).collect(),
            bob: s.bob.iter().map(|q| q.lift_right(s.dim_a)).collect(),
            psi: s.psi.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `p(a, b | x, y)` stored flat in `(x, y, a, b)` row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    n: usize,
    k: usize,
    p: Vec<f64>,
}

impl CorrelationTable {
    pub fn new(n: usize, k: usize, p: Vec<f64>, tol: f64) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidTable("n and k must be positive".into()));
        }
        if p.len() != n * n * k * k {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, got {}",
                n * n * k * k,
                p.len()
            )));
        }
        let table = Self { n, k, p };
        for x in 0..n {
            for y in 0..n {
                let mut total = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        let v = table.get(x, y, a, b);
                        if !(v >= -tol && v <= 1.0 + tol) {
                            return Err(Error::InvalidTable(format!(
                                "p({a},{b}|{x},{y}) = {v} is outside [0, 1]"
                            )));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > tol {
                    return Err(Error::InvalidTable(format!("p(.,.|{x},{y}) sums to {total}")));
                }
            }
        }
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.n + y) * self.k + a) * self.k + b
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.index(x, y, a, b)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    /// Largest deviation from nonnegativity and per-question normalization.
    pub fn validity_defect(&self) -> f64 {
        let neg = self.p.iter().fold(0.0_f64, |m, &v| m.max(-v));
        let norm = self
            .p
            .chunks(self.k * self.k)
            .fold(0.0_f64, |m, block| m.max((block.iter().sum::<f64>() - 1.0).abs()));
        neg.max(norm)
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if (self.n, self.k) != (other.n, other.k) {
            return Err(Error::InvalidTable("shape mismatch".into()));
        }
        Ok(Self {
            n: self.n,
            k: self.k,
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn real_part(z: num_complex::Complex64, tol: f64, what: &str) -> Result<f64> {
    if z.im.abs() > tol {
        return Err(Error::Numerical(format!("{what} has imaginary part {:.3e}", z.im)));
    }
    Ok(z.re)
}

/// `p(a, b | x, y) = ⟨(P_a^x ⊗ Q_b^y) ψ, ψ⟩`.
pub fn tensor_table(s: &TensorStrategy, tol: f64) -> Result<CorrelationTable> {
    let (n, k) = (s.questions(), s.outcomes());
    let mut p = Vec::with_capacity(n * n * k * k);
    for px in &s.alice {
        for qy in &s.bob {
            for pa in &px.projections {
                for qb in &qy.projections {
                    let v = kron(pa, qb) * &s.psi;
                    p.push(real_part(s.psi.dotc(&v), tol, "tensor expectation")?);
                }
            }
        }
    }
    CorrelationTable::new(n, k, p, tol.max(1e-9))
}

/// `p(a, b | x, y) = ⟨P_a^x Q_b^y ψ, ψ⟩`.
pub fn commuting_table(s: &CommutingStrategy, tol: f64) -> Result<CorrelationTable> {
    let n = s.alice.len();
    let k = s.alice[0].outcomes();
    let mut p = Vec::with_capacity(n * n * k * k);
    for px in &s.alice {
        for qy in &s.bob {
            for pa in &px.projections {
                for qb in &qy.projections {
                    let v = pa * (qb * &s.psi);
                    p.push(real_part(s.psi.dotc(&v), tol, "commuting expectation")?);
                }
            }
        }
    }
    CorrelationTable::new(n, k, p, tol.max(1e-9))
}

/// Answer functions `x ↦ a(x)` and `y ↦ b(y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    /// Number of strategies, `k^{2n}`, or `None` on overflow.
    pub fn count(n: usize, k: usize) -> Option<usize> {
        let n2 = u32::try_from(2 * n).ok()?;
        k.checked_pow(n2)
    }

    /// Strategy number `index`: base-`k` digits, Alice's answers first
    /// (question 0 most significant), then Bob's.
    pub fn from_index(index: usize, n: usize, k: usize) -> Self {
        let mut digits = vec![0; 2 * n];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = rest % k;
            rest /= k;
        }
        let bob = digits.split_off(n);
        Self { alice: digits, bob }
    }

    pub fn index(&self, k: usize) -> usize {
        self.alice.iter().chain(&self.bob).fold(0, |acc, &d| acc * k + d)
    }

    pub fn table(&self, k: usize) -> Result<CorrelationTable> {
        let n = self.alice.len();
        if self.bob.len() != n {
            return Err(Error::InvalidArgument(
                "alice and bob answer different question sets".into(),
            ));
        }
        if self.alice.iter().chain(&self.bob).any(|&a| a >= k) {
            return Err(Error::InvalidArgument(format!("answer out of range 0..{k}")));
        }
        let mut p = vec![0.0; n * n * k * k];
        for x in 0..n {
            for y in 0..n {
                p[((x * n + y) * k + self.alice[x]) * k + self.bob[y]] = 1.0;
            }
        }
        Ok(CorrelationTable { n, k, p })
    }

    /// The same table from a tensor strategy on `C^1 ⊗ C^1`.
    pub fn as_tensor_strategy(&self, k: usize) -> Result<TensorStrategy> {
        let alice = self.alice.iter().map(|&a| Pvm::deterministic(k, a)).collect();
        let bob = self.bob.iter().map(|&b| Pvm::deterministic(k, b)).collect();
        TensorStrategy::new(alice, bob, CVector::from_element(1, ONE), 1e-12)
    }
}

/// `p(a, b | x, y) = Σ_d w_d [a_d(x) = a][b_d(y) = b]`.
pub fn classical_table(
    dist: &[(DeterministicStrategy, f64)],
    n: usize,
    k: usize,
    tol: f64,
) -> Result<CorrelationTable> {
    if dist.is_empty() {
        return Err(Error::InvalidWeights("empty distribution".into()));
    }
    if let Some((_, w)) = dist.iter().find(|(_, w)| w.is_nan() || *w < 0.0) {
        return Err(Error::InvalidWeights(format!("negative weight {w}")));
    }
    let total: f64 = dist.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let mut p = vec![0.0; n * n * k * k];
    for (s, w) in dist {
        if s.alice.len() != n {
            return Err(Error::dim(n, s.alice.len()));
        }
        let t = s.table(k)?;
        for (acc, v) in p.iter_mut().zip(&t.p) {
            *acc += w * v;
        }
    }
    CorrelationTable::new(n, k, p, tol.max(1e-9))
}

/// `p(a, b | x, x) ≤ tol` for every `a ≠ b`.
pub fn is_synchronous(t: &CorrelationTable, tol: f64) -> bool {
    (0..t.n).all(|x| (0..t.k).all(|a| (0..t.k).all(|b| a == b || t.get(x, x, a, b) <= tol)))
}

/// `(|00⟩ + … + |d−1,d−1⟩)/√d`.
pub fn maximally_entangled(d: usize) -> CVector {
    let mut psi = CVector::zeros(d * d);
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        psi[i * d + i] = amp;
    }
    psi
}

//! Linear Bell functionals and CHSH maximization over classical and qubit
//! strategies.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{maximally_entangled, tensor_table, CorrelationTable, DeterministicStrategy, Pvm, TensorStrategy};
use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMatrix, CVector};

/// Coefficients `f(a, b | x, y)` in the same layout as [`CorrelationTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    n: usize,
    k: usize,
    coefficients: Vec<f64>,
}

impl BellFunctional {
    pub fn new(n: usize, k: usize, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != n * n * k * k {
            return Err(Error::InvalidTable(format!(
                "Bell functional needs {} coefficients, got {}",
                n * n * k * k,
                coefficients.len()
            )));
        }
        Ok(Self { n, k, coefficients })
    }

    /// `E_00 + E_01 + E_10 − E_11` with correlators `E_xy = Σ (−1)^{a+b} p(a,b|x,y)`,
    /// i.e. `f(a, b | x, y) = (−1)^{a + b + x·y}`. Classical bound 2.
    pub fn chsh() -> Self {
        let mut coefficients = Vec::with_capacity(16);
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let sign = if (a + b + x * y) % 2 == 0 { 1.0 } else { -1.0 };
                        coefficients.push(sign);
                    }
                }
            }
        }
        Self {
            n: 2,
            k: 2,
            coefficients,
        }
    }

    pub fn zero(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            coefficients: vec![0.0; n * n * k * k],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

pub fn bell_value(t: &CorrelationTable, f: &BellFunctional) -> Result<f64> {
    if (t.n(), t.k()) != (f.n, f.k) {
        return Err(Error::InvalidTable(format!(
            "table is (n={}, k={}), functional is (n={}, k={})",
            t.n(),
            t.k(),
            f.n,
            f.k
        )));
    }
    Ok(t.entries().iter().zip(&f.coefficients).map(|(p, c)| p * c).sum())
}

/// Minimizer of a function of a few real parameters by the downhill simplex
/// method with standard coefficients (1, 2, 1/2, 1/2).
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iterations: usize,
    pub f_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 4000,
            f_tol: 1e-13,
            initial_step: 0.5,
        }
    }
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, start: &[f64]) -> (Vec<f64>, f64) {
        let dim = start.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), f(start)));
        for i in 0..dim {
            let mut p = start.to_vec();
            p[i] += self.initial_step;
            let v = f(&p);
            simplex.push((p, v));
        }
        for _ in 0..self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if (simplex[dim].1 - simplex[0].1).abs() <= self.f_tol {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|(p, _)| p[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let reflected = along(-1.0);
            let fr = f(&reflected);
            if fr < simplex[0].1 {
                let expanded = along(-2.0);
                let fe = f(&expanded);
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
            } else {
                let contracted = if fr < simplex[dim].1 { along(-0.5) } else { along(0.5) };
                let fc = f(&contracted);
                if fc < simplex[dim].1.min(fr) {
                    simplex[dim] = (contracted, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for (p, v) in simplex.iter_mut().skip(1) {
                        for (x, b) in p.iter_mut().zip(&best) {
                            *x = b + 0.5 * (*x - b);
                        }
                        *v = f(p);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (p, v) = simplex.swap_remove(0);
        (p, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChshMode {
    /// Exhaustive over the 16 deterministic strategies.
    Classical,
    /// Qubit strategies with real-plane projective measurements and a real
    /// two-qubit state.
    Quantum,
    /// As `Quantum`, restricted to product states.
    QuantumProduct,
}

#[derive(Debug, Clone)]
pub struct ChshOptimum {
    pub value: f64,
    pub table: CorrelationTable,
    /// Measurement angles `(A0, A1, B0, B1)` for the quantum modes.
    pub angles: Option<[f64; 4]>,
    pub strategy: Option<TensorStrategy>,
    /// Maximizing deterministic strategy for the classical mode.
    pub deterministic: Option<DeterministicStrategy>,
    pub description: String,
}

const STARTS: usize = 32;

/// Real unit vector in `R^4` from three hyperspherical angles.
fn real_state(a: f64, b: f64, c_: f64) -> CVector {
    let v = [
        a.cos(),
        a.sin() * b.cos(),
        a.sin() * b.sin() * c_.cos(),
        a.sin() * b.sin() * c_.sin(),
    ];
    CVector::from_iterator(4, v.iter().map(|&x| c(x, 0.0)))
}

fn qubit(theta: f64) -> CMatrix {
    CMatrix::from_column_slice(2, 1, &[c(theta.cos(), 0.0), c(theta.sin(), 0.0)])
}

fn product_state(alpha: f64, beta: f64) -> CVector {
    let v = kron(&qubit(alpha), &qubit(beta));
    CVector::from_iterator(4, v.iter().copied())
}

fn qubit_strategy(angles: &[f64], psi: CVector) -> TensorStrategy {
    TensorStrategy {
        dim_a: 2,
        dim_b: 2,
        alice: vec![Pvm::real_plane(angles[0]), Pvm::real_plane(angles[1])],
        bob: vec![Pvm::real_plane(angles[2]), Pvm::real_plane(angles[3])],
        psi,
    }
}

fn strategy_from_params(params: &[f64], mode: ChshMode) -> TensorStrategy {
    let psi = match mode {
        ChshMode::QuantumProduct => product_state(params[4], params[5]),
        _ => real_state(params[4], params[5], params[6]),
    };
    qubit_strategy(&params[..4], psi)
}

fn chsh_of(s: &TensorStrategy) -> f64 {
    tensor_table(s, 1e-9)
        .and_then(|t| bell_value(&t, &BellFunctional::chsh()))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Angles `A = (0, π/4)`, `B = (π/8, −π/8)` on the maximally entangled state,
/// which attain `2√2`.
pub fn textbook_chsh_strategy() -> TensorStrategy {
    qubit_strategy(&[0.0, FRAC_PI_4, FRAC_PI_8, -FRAC_PI_8], maximally_entangled(2))
}

/// Maximize the CHSH functional. The quantum modes run Nelder–Mead from
/// [`STARTS`] random starting points drawn from a ChaCha stream seeded with
/// `seed`; the best start wins, ties broken by start order.
pub fn maximize_chsh(mode: ChshMode, seed: u64) -> Result<ChshOptimum> {
    let chsh = BellFunctional::chsh();
    if mode == ChshMode::Classical {
        let mut best: Option<(f64, DeterministicStrategy, CorrelationTable)> = None;
        for d in 0..16 {
            let s = DeterministicStrategy::from_index(d, 2, 2);
            let t = s.table(2)?;
            let v = bell_value(&t, &chsh)?;
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, s, t));
            }
        }
        let (value, s, table) = best.expect("16 strategies");
        return Ok(ChshOptimum {
            value,
            table,
            angles: None,
            strategy: None,
            description: format!("deterministic strategy a={:?} b={:?}", s.alice, s.bob),
            deterministic: Some(s),
        });
    }
    let params = if mode == ChshMode::QuantumProduct { 6 } else { 7 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nm = NelderMead::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..STARTS {
        let start: Vec<f64> = (0..params).map(|_| rng.random::<f64>() * TAU).collect();
        let (p, v) = nm.minimize(|p| -chsh_of(&strategy_from_params(p, mode)), &start);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((p, v));
        }
    }
    let (p, _) = best.expect("at least one start");
    let strategy = strategy_from_params(&p, mode);
    let table = tensor_table(&strategy, 1e-9)?;
    let value = bell_value(&table, &chsh)?;
    let angles = [p[0], p[1], p[2], p[3]];
    Ok(ChshOptimum {
        value,
        table,
        angles: Some(angles),
        description: format!(
            "qubit strategy, {} state, angles A=({:.6}, {:.6}) B=({:.6}, {:.6})",
            if mode == ChshMode::QuantumProduct {
                "product"
            } else {
                "real"
            },
            angles[0],
            angles[1],
            angles[2],
            angles[3]
        ),
        strategy: Some(strategy),
        deterministic: None,
    })
}

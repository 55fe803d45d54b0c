#![allow(dead_code)]

use ancilla::factorization::{FiniteAncillaSpec, FiniteFactorization};
use ancilla::linalg::{c, CMatrix};
use ancilla::zoo::{haar_unitary, UnitaryMatrix};

/// Deterministic pseudo-random reals in [-1, 1) from a seed (splitmix64).
pub fn reals(seed: u64, len: usize) -> Vec<f64> {
    let mut s = seed;
    (0..len)
        .map(|_| {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

pub fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let r = reals(seed, 2 * n * n);
    CMatrix::from_fn(n, n, |i, j| c(r[2 * (i * n + j)], r[2 * (i * n + j) + 1]))
}

/// Strictly positive weights summing to one.
pub fn random_weights(len: usize, seed: u64) -> Vec<f64> {
    let raw: Vec<f64> = reals(seed, len).iter().map(|x| 1.1 + x).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn haar_list(count: usize, d: usize, seed: u64) -> Vec<UnitaryMatrix> {
    (0..count)
        .map(|i| haar_unitary(d, seed.wrapping_mul(1000).wrapping_add(i as u64)).unwrap())
        .collect()
}

/// Factorization with up to three blocks of size ≤ 3 and Haar unitaries.
pub fn random_factorization(n: usize, seed: u64) -> FiniteFactorization {
    let r = reals(seed, 4);
    let count = 1 + ((r[0] + 1.0) * 1.5) as usize;
    let blocks: Vec<usize> = (0..count).map(|j| 1 + ((r[j + 1] + 1.0) * 1.5) as usize).collect();
    let weights = random_weights(count, seed ^ 0xabcd);
    let unitaries = blocks
        .iter()
        .enumerate()
        .map(|(j, &k)| haar_unitary(n * k, seed.wrapping_mul(31).wrapping_add(j as u64)).unwrap())
        .collect();
    let ancilla = FiniteAncillaSpec::new(blocks, weights, 1e-9).unwrap();
    FiniteFactorization::new(n, ancilla, unitaries).unwrap()
}

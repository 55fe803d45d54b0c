use ancilla::linalg::{c, CVector};
use ancilla::nonlocal::{
    bell_value, classical_table, commuting_table, is_synchronous, maximally_entangled, maximize_chsh, membership_cc,
    tensor_table, textbook_chsh_strategy, BellFunctional, ChshMode, CommutingStrategy, CorrelationTable,
    DeterministicStrategy, Pvm, TensorStrategy,
};
use ancilla::zoo::haar_unitary;
use ancilla::Error;
use proptest::prelude::*;

fn strategy_weights(count: usize, seed: u64) -> Vec<f64> {
    // a simple LCG keeps this file free of extra dependencies
    let mut s = seed | 1;
    let raw: Vec<f64> = (0..count)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64 / (1u64 << 31) as f64) + 0.05
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn random_classical(n: usize, k: usize, support: usize, seed: u64) -> CorrelationTable {
    let total = DeterministicStrategy::count(n, k).unwrap();
    let weights = strategy_weights(support, seed);
    let dist: Vec<_> = (0..support)
        .map(|i| {
            let d = (seed as usize).wrapping_add(i.wrapping_mul(7919)) % total;
            (DeterministicStrategy::from_index(d, n, k), weights[i])
        })
        .collect();
    classical_table(&dist, n, k, 1e-12).unwrap()
}

fn random_tensor(n: usize, k: usize, seed: u64) -> TensorStrategy {
    let pvms = |offset: u64| -> Vec<Pvm> {
        (0..n)
            .map(|x| Pvm::from_basis(haar_unitary(k, seed ^ (offset + x as u64)).unwrap().matrix(), 1e-10).unwrap())
            .collect()
    };
    let u = haar_unitary(k * k, seed ^ 0xfeed).unwrap();
    let psi = u.matrix().column(0).into_owned();
    TensorStrategy::new(pvms(100), pvms(200), psi, 1e-10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn classical_tables_are_members(n in 1usize..=3, k in 2usize..=3, support in 1usize..=6, seed in any::<u64>()) {
        prop_assume!(DeterministicStrategy::count(n, k).unwrap() <= 729);
        let t = random_classical(n, k, support, seed);
        prop_assert!(t.validity_defect() <= 1e-10);
        let m = membership_cc(&t).unwrap();
        prop_assert!(m.member);
        prop_assert!(m.residual <= 1e-9);
    }

    #[test]
    fn chsh_never_exceeds_two_classically(support in 1usize..=16, seed in any::<u64>()) {
        let t = random_classical(2, 2, support, seed);
        prop_assert!(bell_value(&t, &BellFunctional::chsh()).unwrap() <= 2.0 + 1e-9);
    }

    #[test]
    fn bell_value_is_linear(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let t1 = tensor_table(&random_tensor(2, 2, seed), 1e-10).unwrap();
        let t2 = random_classical(2, 2, 3, seed);
        let f = BellFunctional::chsh();
        let mixed = bell_value(&t1.mix(&t2, lambda).unwrap(), &f).unwrap();
        let expected = lambda * bell_value(&t1, &f).unwrap() + (1.0 - lambda) * bell_value(&t2, &f).unwrap();
        prop_assert!((mixed - expected).abs() <= 1e-12);
    }

    #[test]
    fn tensor_split_commuting_matches(n in 1usize..=3, k in 2usize..=3, seed in any::<u64>()) {
        let s = random_tensor(n, k, seed);
        let t = tensor_table(&s, 1e-10).unwrap();
        let cs = commuting_table(&CommutingStrategy::from_tensor(&s), 1e-10).unwrap();
        prop_assert!(t.max_abs_diff(&cs) <= 1e-12);
        prop_assert!(t.validity_defect() <= 1e-10);
    }
}

#[test]
fn deterministic_tables_from_trivial_strategies() {
    for d in 0..DeterministicStrategy::count(2, 3).unwrap() {
        let s = DeterministicStrategy::from_index(d, 2, 3);
        assert_eq!(s.index(3), d);
        let direct = s.table(3).unwrap();
        let via = tensor_table(&s.as_tensor_strategy(3).unwrap(), 1e-12).unwrap();
        assert!(direct.max_abs_diff(&via) <= 1e-15);
        let v = bell_value(&s.table(3).unwrap(), &BellFunctional::zero(2, 3)).unwrap();
        assert_eq!(v, 0.0);
    }
    for d in 0..16 {
        let v = bell_value(
            &DeterministicStrategy::from_index(d, 2, 2).table(2).unwrap(),
            &BellFunctional::chsh(),
        )
        .unwrap();
        assert!(v == 2.0 || v == -2.0, "vertex {d} gives {v}");
    }
}

#[test]
fn entangled_standard_basis() {
    let s = TensorStrategy::new(
        vec![Pvm::computational(2)],
        vec![Pvm::computational(2)],
        maximally_entangled(2),
        1e-12,
    )
    .unwrap();
    let t = tensor_table(&s, 1e-12).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            let expected = if a == b { 0.5 } else { 0.0 };
            assert!((t.get(0, 0, a, b) - expected).abs() <= 1e-15);
        }
    }
    assert!(is_synchronous(&t, 1e-12));
}

#[test]
fn product_state_factorizes() {
    let phi_a = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let phi_b = CVector::from_vec(vec![c(1.0 / 2f64.sqrt(), 0.0), c(0.5, 0.5)]);
    let psi = phi_a.kronecker(&phi_b);
    let pa = [Pvm::computational(2), Pvm::real_plane(0.3)];
    let pb = [Pvm::real_plane(1.1), Pvm::computational(2)];
    let s = TensorStrategy::new(pa.to_vec(), pb.to_vec(), psi, 1e-12).unwrap();
    let t = tensor_table(&s, 1e-12).unwrap();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let ma: f64 = (0..2).map(|bb| t.get(x, y, a, bb)).sum();
                    let mb: f64 = (0..2).map(|aa| t.get(x, y, aa, b)).sum();
                    assert!((t.get(x, y, a, b) - ma * mb).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn shared_diagonal_measurement_is_classical() {
    // both parties read the same diagonal PVM on C^3 with a state of real amplitudes
    let probs = [0.2, 0.5, 0.3];
    let psi = CVector::from_iterator(3, probs.iter().map(|p: &f64| c(p.sqrt(), 0.0)));
    let s = CommutingStrategy::new(vec![Pvm::computational(3)], vec![Pvm::computational(3)], psi, 1e-12).unwrap();
    let t = commuting_table(&s, 1e-12).unwrap();
    for (a, &pa) in probs.iter().enumerate() {
        for b in 0..3 {
            let expected = if a == b { pa } else { 0.0 };
            assert!((t.get(0, 0, a, b) - expected).abs() <= 1e-15);
        }
    }
    assert!(membership_cc(&t).unwrap().member);
}

#[test]
fn non_commuting_pvms_are_rejected() {
    let psi = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let r = CommutingStrategy::new(
        vec![Pvm::computational(2)],
        vec![Pvm::real_plane(std::f64::consts::FRAC_PI_4)],
        psi,
        1e-12,
    );
    assert!(matches!(r, Err(Error::NonCommutingPvms { .. })));
}

#[test]
fn chsh_optima() {
    let classical = maximize_chsh(ChshMode::Classical, 0).unwrap();
    assert_eq!(classical.value, 2.0);

    let quantum = maximize_chsh(ChshMode::Quantum, 7).unwrap();
    assert!(quantum.value >= 2.82, "quantum optimum {}", quantum.value);
    assert!(quantum.value <= 2.0 * 2f64.sqrt() + 1e-9);
    let m = membership_cc(&quantum.table).unwrap();
    assert!(!m.member);
    assert!(m.residual > 1e-3);

    let product = maximize_chsh(ChshMode::QuantumProduct, 7).unwrap();
    assert!(product.value <= 2.0 + 1e-6);

    let textbook = tensor_table(&textbook_chsh_strategy(), 1e-12).unwrap();
    let v = bell_value(&textbook, &BellFunctional::chsh()).unwrap();
    assert!((v - 2.0 * 2f64.sqrt()).abs() <= 1e-12);
    assert!((quantum.value - v).abs() <= 1e-6);
}

#[test]
fn chsh_is_deterministic() {
    let a = maximize_chsh(ChshMode::Quantum, 3).unwrap();
    let b = maximize_chsh(ChshMode::Quantum, 3).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.angles, b.angles);
}

#[test]
fn uniform_and_diagonal_tables() {
    let all: Vec<_> = (0..16)
        .map(|d| (DeterministicStrategy::from_index(d, 2, 2), 1.0 / 16.0))
        .collect();
    let t = classical_table(&all, 2, 2, 1e-12).unwrap();
    assert!(t.entries().iter().all(|&p| (p - 0.25).abs() <= 1e-15));

    // the four strategies with a ≡ b
    let diag: Vec<_> = (0..16)
        .map(|d| DeterministicStrategy::from_index(d, 2, 2))
        .filter(|s| s.alice == s.bob && s.alice[0] == s.alice[1])
        .map(|s| (s, 0.5))
        .collect();
    let t = classical_table(&diag, 2, 2, 1e-12).unwrap();
    assert!(is_synchronous(&t, 1e-15));
    for x in 0..2 {
        for y in 0..2 {
            assert_eq!(t.get(x, y, 0, 0), 0.5);
            assert_eq!(t.get(x, y, 1, 1), 0.5);
        }
    }
    let mismatched = DeterministicStrategy {
        alice: vec![0, 0],
        bob: vec![0, 1],
    };
    assert!(!is_synchronous(&mismatched.table(2).unwrap(), 1e-12));
}

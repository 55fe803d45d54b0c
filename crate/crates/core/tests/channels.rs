mod common;

use ancilla::channel::{
    adjoint_channel, channel_distance, channel_from_choi, choi_of, compose, verify_channel, verify_choi, ChoiMatrix,
    QuantumChannel,
};
use ancilla::linalg::{hs_inner, identity, kron, matrix_unit, max_abs_diff, CMatrix, DEFAULT_TOL};
use ancilla::zoo::{
    depolarizing, extremality_certificate, haar_unitary, holevo_werner, mixture_of_unitaries, schur_channel,
};
use ancilla::Error;
use common::{haar_list, random_matrix, random_weights};
use proptest::prelude::*;

fn random_mixture(n: usize, count: usize, seed: u64) -> QuantumChannel {
    mixture_of_unitaries(&haar_list(count, n, seed), &random_weights(count, seed), 1e-12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mixtures_are_ucpt(n in 1usize..=4, count in 1usize..=5, seed in any::<u64>()) {
        let ch = random_mixture(n, count, seed);
        let r = verify_channel(&ch, DEFAULT_TOL);
        prop_assert!(r.cp && r.trace_preserving && r.unital);
        prop_assert!(r.choi_rank <= count.min(n * n));
    }

    #[test]
    fn choi_roundtrip(n in 1usize..=4, count in 1usize..=5, seed in any::<u64>()) {
        let ch = random_mixture(n, count, seed);
        let back = channel_from_choi(&choi_of(&ch), DEFAULT_TOL).unwrap();
        prop_assert!(channel_distance(&ch, &back).unwrap() <= 1e-9);
        // minimal Kraus representation
        prop_assert_eq!(back.kraus().len(), verify_channel(&ch, DEFAULT_TOL).choi_rank);
    }

    #[test]
    fn adjoint_pairing(n in 1usize..=4, count in 1usize..=4, seed in any::<u64>()) {
        let ch = random_mixture(n, count, seed);
        let adj = adjoint_channel(&ch);
        let x = random_matrix(n, seed ^ 1);
        let y = random_matrix(n, seed ^ 2);
        let lhs = hs_inner(&ch.apply(&x).unwrap(), &y);
        let rhs = hs_inner(&x, &adj.apply(&y).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn composition_is_sequential(n in 1usize..=3, seed in any::<u64>()) {
        let f = random_mixture(n, 2, seed);
        let g = random_mixture(n, 3, seed ^ 7);
        let gf = compose(&f, &g).unwrap();
        let x = random_matrix(n, seed);
        let direct = g.apply(&f.apply(&x).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&gf.apply(&x).unwrap(), &direct) <= 1e-10);
        prop_assert!(verify_channel(&gf, DEFAULT_TOL).is_ucpt());
    }

    #[test]
    fn cp_iff_choi_psd(n in 1usize..=3, seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        // λ·mixture + (1 − λ)·transpose is CP exactly when its Choi matrix is PSD
        let mix = choi_of(&random_mixture(n, 3, seed));
        let flip = ChoiMatrix::flip(n);
        let m = mix.matrix() * ancilla::linalg::c(lambda, 0.0)
            + flip.matrix() * ancilla::linalg::c(1.0 - lambda, 0.0);
        let choi = ChoiMatrix::new(n, m, DEFAULT_TOL).unwrap();
        let report = verify_choi(&choi, DEFAULT_TOL).unwrap();
        prop_assert_eq!(report.cp, report.min_choi_eigenvalue >= -1e-9);
        prop_assert_eq!(report.cp, channel_from_choi(&choi, DEFAULT_TOL).is_ok());
    }
}

#[test]
fn transpose_map_is_rejected() {
    for n in 2..=4 {
        match channel_from_choi(&ChoiMatrix::flip(n), DEFAULT_TOL) {
            Err(Error::NotCompletelyPositive { min_eigenvalue }) => assert!(min_eigenvalue <= -0.99),
            other => panic!("expected rejection, got {other:?}"),
        }
    }
}

#[test]
fn zoo_channels_are_ucpt() {
    for n in 2..=6 {
        let s = depolarizing(n).unwrap();
        let r = verify_channel(&s.channel, DEFAULT_TOL);
        assert!(r.is_ucpt());
        assert_eq!(r.choi_rank, n * n);
        let c = choi_of(&s.channel);
        let expected = kron(&identity(n), &identity(n)).map(|z| z / n as f64);
        assert!(max_abs_diff(c.matrix(), &expected) <= 1e-12);

        let w = holevo_werner(n).unwrap();
        let r = verify_channel(&w, DEFAULT_TOL);
        assert!(r.is_ucpt(), "W_{n}");
        assert_eq!(r.choi_rank, n * (n - 1) / 2);

        let pinching = schur_channel(&identity(n), DEFAULT_TOL).unwrap();
        assert!(verify_channel(&pinching, DEFAULT_TOL).is_ucpt());
        let ones = schur_channel(&CMatrix::from_element(n, n, 1.0.into()), DEFAULT_TOL).unwrap();
        assert!(channel_distance(&ones, &QuantumChannel::identity(n)).unwrap() <= 1e-12);
    }
}

#[test]
fn depolarizing_on_matrix_units() {
    for n in 2..=5 {
        let s = depolarizing(n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let out = s.channel.apply(&matrix_unit(n, i, j)).unwrap();
                let expected = if i == j {
                    identity(n).map(|z| z / n as f64)
                } else {
                    CMatrix::zeros(n, n)
                };
                assert!(max_abs_diff(&out, &expected) <= 1e-10);
            }
        }
    }
}

#[test]
fn extremality() {
    let w3 = holevo_werner(3).unwrap();
    let cert = extremality_certificate(&w3, DEFAULT_TOL).unwrap();
    assert_eq!((cert.gram_rank, cert.extreme), (9, true));
    // mixtures of two distinct unitaries are never extreme
    let mix = random_mixture(3, 2, 11);
    assert!(!extremality_certificate(&mix, DEFAULT_TOL).unwrap().extreme);
    let u = haar_unitary(3, 5).unwrap();
    assert!(
        extremality_certificate(&QuantumChannel::conjugation(u.matrix()).unwrap(), DEFAULT_TOL)
            .unwrap()
            .extreme
    );
}

#[test]
fn holevo_werner_spectrum() {
    let w3 = holevo_werner(3).unwrap();
    let spec = ancilla::linalg::hermitian_eigen(choi_of(&w3).matrix()).unwrap();
    for (i, v) in spec.values.iter().enumerate() {
        let expected = if i < 3 { 1.0 } else { 0.0 };
        assert!((v - expected).abs() <= 1e-10, "eigenvalue {i} = {v}");
    }
}

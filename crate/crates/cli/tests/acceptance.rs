//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::process::Command;
use std::time::Instant;

use ancilla::channel::{
    channel_distance, channel_from_choi, choi_of, compose, verify_channel, ChoiMatrix, QuantumChannel,
};
use ancilla::correlations::{direct_sum_mix, embed_divisible, gram_correlation, is_theta, schur_bridge, UnitaryTuple};
use ancilla::factorization::{
    channel_of_factorization, compose_factorizations, convex_combine, recover_eq2, split_factorization, stinespring,
    two_unitary_factorization, DilationMode, FiniteAncillaSpec, FiniteFactorization, Verdict, Weight,
};
use ancilla::linalg::{
    c, diag, from_real_rows, hermitian_eigen, identity, kron, matrix_unit, max_abs_diff, normalized_trace, CMatrix,
    DEFAULT_TOL,
};
use ancilla::nonlocal::{
    bell_value, classical_table, commuting_table, maximize_chsh, membership_cc, tensor_table, textbook_chsh_strategy,
    BellFunctional, ChshMode, CommutingStrategy, DeterministicStrategy, Pvm, TensorStrategy,
};
use ancilla::zoo::{
    depolarizing, extremality_certificate, haar_unitary, mixture_of_unitaries, schur_channel, UnitaryMatrix,
};
use ancilla::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// splitmix64 stream mapped to [0, 1).
struct Stream(u64);

impl Stream {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.next() * n as f64) as usize).min(n - 1)
    }

    fn weights(&mut self, len: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..len).map(|_| 0.05 + self.next()).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn e(err: Error) -> String {
    err.to_string()
}

fn depolarizing_exactness() -> Outcome {
    let mut worst_unit = 0.0_f64;
    let mut worst_choi = 0.0_f64;
    for n in 2..=5 {
        let s = depolarizing(n).map_err(e)?;
        ensure(s.unitaries.len() == n * n, || {
            format!("n={n}: {} terms", s.unitaries.len())
        })?;
        for i in 0..n {
            for j in 0..n {
                let x = matrix_unit(n, i, j);
                let expected = identity(n) * normalized_trace(&x);
                worst_unit = worst_unit.max(max_abs_diff(&s.channel.apply(&x).map_err(e)?, &expected));
            }
        }
        let expected = kron(&identity(n), &identity(n)).map(|z| z / n as f64);
        worst_choi = worst_choi.max(max_abs_diff(choi_of(&s.channel).matrix(), &expected));
        let rank = verify_channel(&s.channel, DEFAULT_TOL).choi_rank;
        ensure(rank == n * n, || format!("n={n}: choi_rank {rank}"))?;
    }
    ensure(worst_unit <= 1e-10, || format!("matrix-unit error {worst_unit:e}"))?;
    ensure(worst_choi <= 1e-12, || format!("Choi error {worst_choi:e}"))?;
    Ok(format!(
        "n=2..5, unit error {worst_unit:.1e}, Choi error {worst_choi:.1e}, rank n²"
    ))
}

fn holevo_werner() -> Outcome {
    let h = 1.0 / 2f64.sqrt();
    let printed = vec![
        from_real_rows(&[&[0.0, h, 0.0], &[-h, 0.0, 0.0], &[0.0, 0.0, 0.0]]),
        from_real_rows(&[&[0.0, 0.0, h], &[0.0, 0.0, 0.0], &[-h, 0.0, 0.0]]),
        from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, h], &[0.0, -h, 0.0]]),
    ];
    let w3 = QuantumChannel::new(3, printed).map_err(e)?;
    let r = verify_channel(&w3, DEFAULT_TOL);
    ensure(r.cp && r.trace_preserving && r.unital, || format!("{r:?}"))?;
    let cert = extremality_certificate(&w3, DEFAULT_TOL).map_err(e)?;
    ensure(cert.gram_rank == 9 && cert.extreme, || format!("{cert:?}"))?;
    let spec = hermitian_eigen(choi_of(&w3).matrix()).map_err(e)?;
    let dev = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - if i < 3 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    ensure(dev <= 1e-10, || format!("Choi spectrum deviation {dev:e}"))?;
    Ok(format!(
        "UCPT, gram_rank 9, extreme, spectrum {{1×3, 0×6}} within {dev:.1e}"
    ))
}

fn k_noisy_criterion() -> Outcome {
    let w = c(0.0, 2.0 * std::f64::consts::PI / 3.0).exp();
    let u1 = UnitaryMatrix::identity(3);
    let u2 = UnitaryMatrix::new(diag(&[c(1.0, 0.0), w, w.conj()]), 1e-12).map_err(e)?;
    let (r, f) = two_unitary_factorization(&u1, &u2, Weight::exact(1, 3).map_err(e)?, 6, DEFAULT_TOL).map_err(e)?;
    ensure(r.verdict == Verdict::Constructed && r.k == Some(3), || {
        format!("t=1/3: {r:?}")
    })?;
    let mix = mixture_of_unitaries(&[u1.clone(), u2.clone()], &[1.0 / 3.0, 2.0 / 3.0], 1e-12).map_err(e)?;
    let f = f.ok_or("t=1/3: no factorization returned")?;
    let err = channel_distance(&channel_of_factorization(&f).map_err(e)?, &mix).map_err(e)?;
    ensure(err <= 1e-10, || format!("t=1/3: mixture error {err:e}"))?;

    let (r, _) = two_unitary_factorization(&u1, &u2, Weight::exact(2, 5).map_err(e)?, 4, DEFAULT_TOL).map_err(e)?;
    ensure(r.verdict == Verdict::Obstructed && r.independent, || {
        format!("t=2/5: {r:?}")
    })?;

    let scalar = UnitaryMatrix::new(identity(3) * w, 1e-12).map_err(e)?;
    let (r, _) = two_unitary_factorization(&u1, &scalar, Weight::exact(1, 3).map_err(e)?, 6, DEFAULT_TOL).map_err(e)?;
    ensure(r.verdict == Verdict::CriterionInapplicable, || format!("u2=ω·1: {r:?}"))?;
    Ok(format!(
        "t=1/3 Constructed at k=3 (error {err:.1e}); t=2/5 Obstructed; u2=ω·1 CriterionInapplicable"
    ))
}

fn choi_calculus() -> Outcome {
    let mut rng = Stream(4);
    let mut worst = 0.0_f64;
    for trial in 0..200u64 {
        let n = 1 + rng.below(4);
        let count = 1 + rng.below(5);
        let us: Vec<UnitaryMatrix> = (0..count)
            .map(|i| haar_unitary(n, trial * 16 + i as u64))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let ch = mixture_of_unitaries(&us, &rng.weights(count), 1e-12).map_err(e)?;
        let r = verify_channel(&ch, DEFAULT_TOL);
        ensure(r.is_ucpt(), || format!("trial {trial}: {r:?}"))?;
        let back = channel_from_choi(&choi_of(&ch), DEFAULT_TOL).map_err(e)?;
        worst = worst.max(channel_distance(&ch, &back).map_err(e)?);
    }
    ensure(worst <= 1e-9, || format!("roundtrip error {worst:e}"))?;
    let min_eig = match channel_from_choi(&ChoiMatrix::flip(3), DEFAULT_TOL) {
        Err(Error::NotCompletelyPositive { min_eigenvalue }) => min_eigenvalue,
        other => return Err(format!("transpose map not rejected: {other:?}")),
    };
    ensure(min_eig <= -0.99, || format!("transpose min eigenvalue {min_eig}"))?;
    Ok(format!(
        "200 mixtures UCPT, roundtrip {worst:.1e}, transpose rejected (λ_min = {min_eig})"
    ))
}

fn random_factorization(rng: &mut Stream, n: usize, seed: u64) -> Result<FiniteFactorization, String> {
    let count = 1 + rng.below(3);
    let blocks: Vec<usize> = (0..count).map(|_| 1 + rng.below(3)).collect();
    let unitaries = blocks
        .iter()
        .enumerate()
        .map(|(j, &k)| haar_unitary(n * k, seed * 8 + j as u64))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let ancilla = FiniteAncillaSpec::new(blocks, rng.weights(count), 1e-9).map_err(e)?;
    FiniteFactorization::new(n, ancilla, unitaries).map_err(e)
}

fn factorization_algebra() -> Outcome {
    let mut rng = Stream(5);
    let (mut eq, mut comp, mut split, mut dil) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for trial in 0..100u64 {
        let n = 1 + rng.below(4);
        let f = random_factorization(&mut rng, n, 2 * trial)?;
        let g = random_factorization(&mut rng, n, 2 * trial + 1)?;
        let ch = channel_of_factorization(&f).map_err(e)?;
        eq = eq.max(channel_distance(&ch, &recover_eq2(&f, DEFAULT_TOL).map_err(e)?).map_err(e)?);

        let gf = compose_factorizations(&f, &g).map_err(e)?;
        let seq = compose(&ch, &g.channel().map_err(e)?).map_err(e)?;
        comp = comp.max(channel_distance(&gf.channel().map_err(e)?, &seq).map_err(e)?);

        let (ts, fs): (Vec<f64>, Vec<_>) = split_factorization(&f, 0.0).into_iter().unzip();
        let back = convex_combine(&fs, &ts, DEFAULT_TOL).map_err(e)?;
        split = split.max(channel_distance(&back.channel().map_err(e)?, &ch).map_err(e)?);

        let rank = verify_channel(&ch, DEFAULT_TOL).choi_rank;
        for mode in [DilationMode::Cptp, DilationMode::Ucp] {
            let s = stinespring(&ch, mode, DEFAULT_TOL).map_err(e)?;
            ensure(s.r == rank, || {
                format!("trial {trial}: r = {} but choi_rank = {rank}", s.r)
            })?;
            dil = dil.max(s.reconstruction_error(&ch).map_err(e)?);
        }
    }
    let worst = eq.max(comp).max(split).max(dil);
    ensure(worst <= 1e-10, || {
        format!("direct vs conditional expectation {eq:e}, compose {comp:e}, split {split:e}, dilation {dil:e}")
    })?;
    Ok(format!(
        "100 factorizations: direct vs conditional expectation {eq:.1e}, compose {comp:.1e}, split/combine {split:.1e}, Stinespring {dil:.1e}"
    ))
}

fn schur_bridge_check() -> Outcome {
    let x = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let t = UnitaryTuple::matrix(vec![
        UnitaryMatrix::identity(2),
        UnitaryMatrix::new(x, 1e-12).map_err(e)?,
        UnitaryMatrix::new(y, 1e-12).map_err(e)?,
    ])
    .map_err(e)?;
    let b = gram_correlation(&t);
    let gram_err = max_abs_diff(b.matrix(), &identity(3));
    ensure(gram_err <= 1e-12, || format!("Pauli Gram error {gram_err:e}"))?;
    let bridged = schur_bridge(&t).map_err(e)?.channel().map_err(e)?;
    let pinching = schur_channel(&identity(3), DEFAULT_TOL).map_err(e)?;
    let bridge_err = channel_distance(&bridged, &pinching).map_err(e)?;
    ensure(bridge_err <= 1e-10, || format!("bridge vs pinching {bridge_err:e}"))?;

    let mut worst = 0.0_f64;
    for s in 0..50u64 {
        let n = 2 + (s % 4) as usize;
        let k = 1 + (s % 3) as usize;
        let b = gram_correlation(&UnitaryTuple::sample_haar(n, k, 1000 + 10 * s).map_err(e)?);
        let mut expected = CMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                expected += kron(&matrix_unit(n, i, j), &matrix_unit(n, i, j)) * b.matrix()[(i, j)];
            }
        }
        let ch = schur_channel(b.matrix(), DEFAULT_TOL).map_err(e)?;
        worst = worst.max(max_abs_diff(choi_of(&ch).matrix(), &expected));
    }
    ensure(worst <= 1e-12, || format!("Schur Choi error {worst:e}"))?;
    Ok(format!(
        "Pauli bridge = pinching ({bridge_err:.1e}); 50 Schur Choi matrices within {worst:.1e}"
    ))
}

fn correlation_sets() -> Outcome {
    let mut min_eig = f64::INFINITY;
    for s in 0..1000u64 {
        let k = 1 + (s % 5) as usize;
        let d = is_theta(
            gram_correlation(&UnitaryTuple::sample_haar(4, k, s * 4).map_err(e)?).matrix(),
            DEFAULT_TOL,
        )
        .map_err(e)?;
        ensure(d.member, || format!("sample {s}: {d:?}"))?;
        min_eig = min_eig.min(d.min_eigenvalue);
    }
    ensure(min_eig >= -1e-9, || format!("min eigenvalue {min_eig:e}"))?;
    let (mut embed, mut affine) = (0.0_f64, 0.0_f64);
    for s in 0..50u64 {
        let k = 1 + (s % 3) as usize;
        let t = UnitaryTuple::sample_haar(4, k, 7000 + 8 * s).map_err(e)?;
        let big = embed_divisible(&t, k * (2 + (s % 2) as usize)).map_err(e)?;
        embed = embed.max(max_abs_diff(
            gram_correlation(&t).matrix(),
            gram_correlation(&big).matrix(),
        ));
        let t2 = UnitaryTuple::sample_haar(4, 2, 9000 + 8 * s).map_err(e)?;
        let lambda = 0.25 + 0.01 * s as f64;
        let mixed = gram_correlation(&direct_sum_mix(&t, &t2, lambda).map_err(e)?);
        let expected = gram_correlation(&t).matrix().map(|z| z * lambda)
            + gram_correlation(&t2).matrix().map(|z| z * (1.0 - lambda));
        affine = affine.max(max_abs_diff(mixed.matrix(), &expected));
    }
    ensure(embed <= 1e-12 && affine <= 1e-12, || {
        format!("embed {embed:e}, affine {affine:e}")
    })?;
    Ok(format!(
        "1000 Grams in Θ(4) (λ_min ≥ {min_eig:.1e}); embed {embed:.1e}; affine {affine:.1e}"
    ))
}

fn nonlocal_games() -> Outcome {
    let classical = maximize_chsh(ChshMode::Classical, 0).map_err(e)?;
    ensure(classical.value == 2.0, || {
        format!("classical maximum {}", classical.value)
    })?;
    let quantum = maximize_chsh(ChshMode::Quantum, 0).map_err(e)?;
    ensure(quantum.value >= 2.82, || format!("quantum optimum {}", quantum.value))?;
    let textbook = bell_value(
        &tensor_table(&textbook_chsh_strategy(), 1e-12).map_err(e)?,
        &BellFunctional::chsh(),
    )
    .map_err(e)?;
    ensure((textbook - 2.0 * 2f64.sqrt()).abs() <= 1e-12, || {
        format!("textbook angles give {textbook}")
    })?;
    let m = membership_cc(&quantum.table).map_err(e)?;
    ensure(!m.member && m.residual > 1e-3, || {
        format!("quantum table: member {} residual {:e}", m.member, m.residual)
    })?;

    let mut rng = Stream(8);
    let mut worst_classical = 0.0_f64;
    for _ in 0..40 {
        let (n, k) = [(2, 2), (2, 3), (3, 2)][rng.below(3)];
        let total = DeterministicStrategy::count(n, k).unwrap();
        let support = 1 + rng.below(6);
        let ws = rng.weights(support);
        let dist: Vec<_> = ws
            .into_iter()
            .map(|w| (DeterministicStrategy::from_index(rng.below(total), n, k), w))
            .collect();
        let t = classical_table(&dist, n, k, 1e-12).map_err(e)?;
        let m = membership_cc(&t).map_err(e)?;
        ensure(m.member, || {
            format!("classical table rejected, residual {:e}", m.residual)
        })?;
        worst_classical = worst_classical.max(m.residual);
    }
    ensure(worst_classical <= 1e-9, || {
        format!("classical residual {worst_classical:e}")
    })?;

    let mut worst_split = 0.0_f64;
    for s in 0..20u64 {
        let k = 2 + (s % 2) as usize;
        let pvms = |base: u64| -> Result<Vec<Pvm>, String> {
            (0..2)
                .map(|x| Pvm::from_basis(haar_unitary(k, base + x).map_err(e)?.matrix(), 1e-10).map_err(e))
                .collect()
        };
        let psi = haar_unitary(k * k, 500 + s).map_err(e)?.matrix().column(0).into_owned();
        let st = TensorStrategy::new(pvms(100 * s)?, pvms(100 * s + 50)?, psi, 1e-10).map_err(e)?;
        let t = tensor_table(&st, 1e-10).map_err(e)?;
        let ct = commuting_table(&CommutingStrategy::from_tensor(&st), 1e-10).map_err(e)?;
        worst_split = worst_split.max(t.max_abs_diff(&ct));
    }
    ensure(worst_split <= 1e-12, || format!("commuting vs tensor {worst_split:e}"))?;
    Ok(format!(
        "classical 2, quantum {:.6} (textbook {textbook:.6}), quantum residual {:.3}, classical residual {worst_classical:.1e}, split {worst_split:.1e}",
        quantum.value, m.residual
    ))
}

fn run_cli(args: &[&str], dir: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ancilla"))
        .args(args)
        .current_dir(dir)
        .env("NO_COLOR", "1")
        .output()
        .map_err(|err| format!("cannot run ancilla: {err}"))?;
    if !matches!(out.status.code(), Some(0) | Some(1)) {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|err| err.to_string())?;
    let d = dir.path();
    run_cli(&["zoo", "haar", "--d", "3", "--seed", "5", "--out", "u1.mat.json"], d)?;
    run_cli(&["zoo", "haar", "--d", "3", "--seed", "6", "--out", "u2.mat.json"], d)?;
    run_cli(
        &[
            "corr",
            "sample",
            "--n",
            "3",
            "--k",
            "2",
            "--seed",
            "9",
            "--out",
            "t.tuple.json",
        ],
        d,
    )?;
    run_cli(
        &[
            "game",
            "chsh",
            "--mode",
            "quantum",
            "--seed",
            "3",
            "--out",
            "q.table.json",
        ],
        d,
    )?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["zoo", "haar", "--d", "4", "--seed", "11"],
        vec!["zoo", "depolarizing", "--n", "3"],
        vec![
            "zoo",
            "mixture",
            "--unitary",
            "u1.mat.json",
            "--unitary",
            "u2.mat.json",
            "--weights",
            "1/3,2/3",
        ],
        vec!["corr", "sample", "--n", "4", "--k", "3", "--count", "20", "--seed", "7"],
        vec!["corr", "gram", "--tuple", "t.tuple.json"],
        vec![
            "fact",
            "two-unitary",
            "--u1",
            "u1.mat.json",
            "--u2",
            "u2.mat.json",
            "--t",
            "1/2",
            "--kmax",
            "4",
        ],
        vec!["game", "chsh", "--mode", "quantum", "--seed", "3"],
        vec!["game", "member-cc", "--table", "q.table.json"],
    ];
    for args in &commands {
        let mut full: Vec<&str> = args.clone();
        full.push("--json");
        let a = run_cli(&full, d)?;
        let b = run_cli(&full, d)?;
        ensure(a == b, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!(
        "{} commands re-run with identical --seed give identical JSON",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("depolarizing exactness", depolarizing_exactness),
        ("Holevo-Werner W_3^-", holevo_werner),
        ("k-noisy criterion", k_noisy_criterion),
        ("Choi calculus", choi_calculus),
        ("factorization algebra", factorization_algebra),
        ("Schur bridge", schur_bridge_check),
        ("correlation sets", correlation_sets),
        ("nonlocal games", nonlocal_games),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} — {detail} [{ms} ms]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} — {detail} [{ms} ms]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

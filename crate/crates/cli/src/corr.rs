use std::path::PathBuf;

use ancilla::correlations::{
    direct_sum_mix, embed_divisible, gram_correlation, is_theta, ThetaDiagnostics, UnitaryTuple,
};
use ancilla::io::{matrix_to_json, tuple_to_json};
use ancilla::linalg::max_abs_diff;
use ancilla::CMatrix;
use clap::Subcommand;

use crate::context::{load_matrix, load_tuple, Context};
use crate::error::CliError;
use crate::report::{ReportBuilder, RunReport};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gram matrix `[τ(u_i u_j*)]` of a unitary tuple.
    Gram {
        #[arg(long)]
        tuple: PathBuf,
    },
    /// Is the matrix Hermitian, unit-diagonal and positive semidefinite?
    CheckTheta {
        #[arg(long)]
        b: PathBuf,
    },
    /// Haar-random tuples of `n` unitaries in `M_k`; writes the first.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Number of tuples to sample and test.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// `u_i ↦ u_i ⊗ 1` into `M_{k'}`.
    Embed {
        #[arg(long)]
        tuple: PathBuf,
        /// Target size, a multiple of the tuple's size.
        #[arg(long)]
        k: usize,
    },
    /// Direct sum with trace `λ τ_1 ⊕ (1 − λ) τ_2`.
    Mix {
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t2: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
}

fn record_theta(rb: &mut ReportBuilder, d: &ThetaDiagnostics) {
    rb.result("min_eigenvalue", d.min_eigenvalue);
    rb.result("max_diagonal_deviation", d.max_diagonal_deviation);
    rb.result("hermitian_defect", d.hermitian_defect);
    rb.check("correlation_matrix", d.member);
}

fn scaled(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * s)
}

pub fn run(cmd: Command, ctx: &Context) -> Result<RunReport, CliError> {
    let tol = ctx.tol;
    match cmd {
        Command::Gram { tuple } => {
            let mut rb = ctx.report("corr gram");
            let t = load_tuple(&mut rb, "tuple", &tuple, tol)?;
            let b = gram_correlation(&t);
            record_theta(&mut rb, &is_theta(b.matrix(), tol)?);
            rb.result("gram", matrix_to_json(b.matrix()));
            ctx.emit(&mut rb, &matrix_to_json(b.matrix()))?;
            Ok(rb.finish())
        }
        Command::CheckTheta { b } => {
            let mut rb = ctx.report("corr check-theta");
            let m = load_matrix(&mut rb, "b", &b)?;
            record_theta(&mut rb, &is_theta(&m, tol)?);
            Ok(rb.finish())
        }
        Command::Sample { n, k, count } => {
            let mut rb = ctx.report("corr sample");
            rb.param("n", n);
            rb.param("k", k);
            rb.param("count", count);
            rb.param("seed", ctx.seed);
            if count == 0 {
                return Err(CliError::Usage("--count must be positive".into()));
            }
            let mut worst_eig = f64::INFINITY;
            let mut worst_diag = 0.0_f64;
            let mut members = 0;
            let mut first = None;
            for j in 0..count {
                // tuple j uses seeds seed + j·n, …, seed + j·n + n − 1
                let seed = ctx.seed.wrapping_add((j * n) as u64);
                let t = UnitaryTuple::sample_haar(n, k, seed)?;
                let d = is_theta(gram_correlation(&t).matrix(), tol)?;
                worst_eig = worst_eig.min(d.min_eigenvalue);
                worst_diag = worst_diag.max(d.max_diagonal_deviation);
                members += usize::from(d.member);
                first.get_or_insert(t);
            }
            rb.result("members", members);
            rb.result("min_eigenvalue", worst_eig);
            rb.result("max_diagonal_deviation", worst_diag);
            rb.check("all_correlation_matrices", members == count);
            let first = first.expect("count > 0");
            rb.result("first_gram", matrix_to_json(gram_correlation(&first).matrix()));
            ctx.emit(&mut rb, &tuple_to_json(&first))?;
            Ok(rb.finish())
        }
        Command::Embed { tuple, k } => {
            let mut rb = ctx.report("corr embed");
            rb.param("k", k);
            let t = load_tuple(&mut rb, "tuple", &tuple, tol)?;
            let e = embed_divisible(&t, k)?;
            let err = max_abs_diff(gram_correlation(&t).matrix(), gram_correlation(&e).matrix());
            rb.result("gram_error", err);
            rb.check("gram_preserved", err <= tol);
            ctx.emit(&mut rb, &tuple_to_json(&e))?;
            Ok(rb.finish())
        }
        Command::Mix { t1, t2, lambda } => {
            let mut rb = ctx.report("corr mix");
            rb.param("lambda", lambda);
            let a = load_tuple(&mut rb, "t1", &t1, tol)?;
            let b = load_tuple(&mut rb, "t2", &t2, tol)?;
            let mixed = direct_sum_mix(&a, &b, lambda)?;
            let expected =
                scaled(gram_correlation(&a).matrix(), lambda) + scaled(gram_correlation(&b).matrix(), 1.0 - lambda);
            let err = max_abs_diff(gram_correlation(&mixed).matrix(), &expected);
            rb.result("blocks", mixed.ancilla().blocks());
            rb.result("affine_error", err);
            rb.check("affine", err <= tol);
            ctx.emit(&mut rb, &tuple_to_json(&mixed))?;
            Ok(rb.finish())
        }
    }
}

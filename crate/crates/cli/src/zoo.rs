use std::path::PathBuf;

use ancilla::channel::{choi_of, max_unit_distance, verify_channel};
use ancilla::correlations::is_theta;
use ancilla::io::{channel_to_json, matrix_to_json, parse_weight};
use ancilla::linalg::{hermitian_eigen, identity, kron, max_abs_diff, normalized_trace, unitarity_defect};
use ancilla::zoo::{
    depolarizing, extremality_certificate, haar_unitary, holevo_werner, mixture_of_unitaries, schur_channel,
};
use ancilla::Weight;
use clap::Subcommand;

use crate::chan::record_verification;
use crate::context::{load_matrix, load_unitary, Context};
use crate::error::CliError;
use crate::report::RunReport;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Completely depolarizing channel `x ↦ tr(x)·1` as a clock-and-shift mixture.
    Depolarizing {
        #[arg(long)]
        n: usize,
    },
    /// `x ↦ (Tr(x)·1 − x^t)/(n − 1)`.
    HolevoWerner {
        #[arg(long)]
        n: usize,
    },
    /// Entrywise multiplication by a correlation matrix.
    Schur {
        /// Matrix file.
        #[arg(long)]
        b: PathBuf,
    },
    /// Convex combination of unitary conjugations.
    Mixture {
        /// Unitary matrix file; repeat once per term.
        #[arg(long = "unitary", required = true)]
        unitaries: Vec<PathBuf>,
        /// Comma-separated weights, each a decimal or `p/q`.
        #[arg(long, value_delimiter = ',', value_parser = parse_weight, required = true)]
        weights: Vec<Weight>,
    },
    /// Haar-random unitary from `--seed`.
    Haar {
        #[arg(long)]
        d: usize,
    },
}

pub fn run(cmd: Command, ctx: &Context) -> Result<RunReport, CliError> {
    let tol = ctx.tol;
    match cmd {
        Command::Depolarizing { n } => {
            let mut rb = ctx.report("zoo depolarizing");
            rb.param("n", n);
            let s = depolarizing(n)?;
            let report = verify_channel(&s.channel, tol);
            let expected_choi = kron(&identity(n), &identity(n)).map(|z| z / n as f64);
            let choi_error = max_abs_diff(choi_of(&s.channel).matrix(), &expected_choi);
            let unit_error = max_unit_distance(
                n,
                |x| s.channel.apply(x).expect("matrix units match the channel dimension"),
                |x| identity(n) * normalized_trace(x),
            );
            rb.result("kraus_count", s.channel.kraus().len());
            record_verification(&mut rb, &report);
            rb.result("choi_error", choi_error);
            rb.result("matrix_unit_error", unit_error);
            rb.check("ucpt", report.is_ucpt());
            rb.check("choi_rank_is_n_squared", report.choi_rank == n * n);
            rb.check("exact", choi_error <= tol && unit_error <= tol);
            ctx.emit(&mut rb, &channel_to_json(&s.channel))?;
            Ok(rb.finish())
        }
        Command::HolevoWerner { n } => {
            let mut rb = ctx.report("zoo holevo-werner");
            rb.param("n", n);
            let ch = holevo_werner(n)?;
            let report = verify_channel(&ch, tol);
            record_verification(&mut rb, &report);
            let spec = hermitian_eigen(choi_of(&ch).matrix())?;
            rb.result("choi_eigenvalues", &spec.values);
            rb.check("ucpt", report.is_ucpt());
            let cert = extremality_certificate(&ch, tol)?;
            rb.result("kraus_count", cert.kraus_count);
            rb.result("gram_rank", cert.gram_rank);
            rb.result("extreme", cert.extreme);
            ctx.emit(&mut rb, &channel_to_json(&ch))?;
            Ok(rb.finish())
        }
        Command::Schur { b } => {
            let mut rb = ctx.report("zoo schur");
            let m = load_matrix(&mut rb, "b", &b)?;
            let d = is_theta(&m, tol)?;
            rb.result("min_eigenvalue", d.min_eigenvalue);
            rb.result("max_diagonal_deviation", d.max_diagonal_deviation);
            rb.result("hermitian_defect", d.hermitian_defect);
            rb.check("correlation_matrix", d.member);
            if d.member {
                let ch = schur_channel(&m, tol)?;
                let report = verify_channel(&ch, tol);
                record_verification(&mut rb, &report);
                rb.check("ucpt", report.is_ucpt());
                ctx.emit(&mut rb, &channel_to_json(&ch))?;
            }
            Ok(rb.finish())
        }
        Command::Mixture { unitaries, weights } => {
            let mut rb = ctx.report("zoo mixture");
            let ts: Vec<f64> = weights.iter().map(Weight::value).collect();
            rb.param("weights", weights.iter().map(ToString::to_string).collect::<Vec<_>>());
            if ts.len() != unitaries.len() {
                return Err(CliError::Usage(format!(
                    "{} unitaries but {} weights",
                    unitaries.len(),
                    ts.len()
                )));
            }
            let us = unitaries
                .iter()
                .enumerate()
                .map(|(i, p)| load_unitary(&mut rb, &format!("unitary{i}"), p, tol))
                .collect::<Result<Vec<_>, _>>()?;
            let ch = mixture_of_unitaries(&us, &ts, tol)?;
            let report = verify_channel(&ch, tol);
            record_verification(&mut rb, &report);
            rb.check("ucpt", report.is_ucpt());
            ctx.emit(&mut rb, &channel_to_json(&ch))?;
            Ok(rb.finish())
        }
        Command::Haar { d } => {
            let mut rb = ctx.report("zoo haar");
            rb.param("d", d);
            rb.param("seed", ctx.seed);
            let u = haar_unitary(d, ctx.seed)?;
            let defect = unitarity_defect(u.matrix());
            rb.result("unitarity_defect", defect);
            rb.result("trace", [u.matrix().trace().re, u.matrix().trace().im]);
            rb.check("unitary", defect <= tol);
            ctx.emit(&mut rb, &matrix_to_json(u.matrix()))?;
            Ok(rb.finish())
        }
    }
}

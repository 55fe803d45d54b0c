use std::path::PathBuf;

use ancilla::channel::{adjoint_channel, channel_distance, compose, verify_channel};
use ancilla::factorization::{
    apply_factorization, channel_of_factorization, compose_factorizations, convex_combine, recover_eq2,
    recover_eq2_adjoint, split_factorization, stinespring, two_unitary_factorization, two_unitary_on_ancilla,
    DilationMode, Verdict,
};
use ancilla::io::{channel_to_json, factorization_to_json, matrix_to_json, parse_weight};
use ancilla::linalg::max_abs_diff;
use ancilla::zoo::mixture_of_unitaries;
use ancilla::{FiniteAncillaSpec, Weight};
use clap::{Subcommand, ValueEnum};
use serde_json::json;

use crate::chan::record_verification;
use crate::context::{load_channel, load_factorization, load_matrix, load_unitary, write_text, Context};
use crate::error::CliError;
use crate::report::RunReport;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel of a factorization, optionally applied to a matrix.
    Eval {
        #[arg(long)]
        fact: PathBuf,
        /// Matrix file to evaluate on.
        #[arg(long)]
        x: Option<PathBuf>,
    },
    /// Cross-check the two evaluation formulas and unitality/trace preservation.
    Check {
        #[arg(long)]
        fact: PathBuf,
    },
    /// Decide whether `t·Ad(u1) + (1 − t)·Ad(u2)` is k-noisy and build it if so.
    TwoUnitary {
        #[arg(long)]
        u1: PathBuf,
        #[arg(long)]
        u2: PathBuf,
        /// Weight of `u1`, a decimal or `p/q`.
        #[arg(long, value_parser = parse_weight)]
        t: Weight,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        /// Use this ancilla `⊕ M_{k_j}` instead of full matrix algebras.
        #[arg(long, value_delimiter = ',', requires = "ancilla_weights")]
        blocks: Option<Vec<usize>>,
        /// Trace weights of the ancilla blocks.
        #[arg(long, value_delimiter = ',', value_parser = parse_weight, requires = "blocks")]
        ancilla_weights: Option<Vec<Weight>>,
    },
    /// Factorization of `second ∘ first` through the tensor product of ancillas.
    Compose {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// Convex combination through the direct sum of ancillas.
    Mix {
        /// Factorization file; repeat once per term.
        #[arg(long = "fact", required = true)]
        facts: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', value_parser = parse_weight, required = true)]
        weights: Vec<Weight>,
    },
    /// Split into one matrix-ancilla factorization per block; `--out` is a directory.
    Split {
        #[arg(long)]
        fact: PathBuf,
    },
    /// Unitary dilation of a channel.
    Stinespring {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Cptp)]
        mode: Mode,
    },
    /// Rebuild the channel from the conditional-expectation formula.
    RecoverEq2 {
        #[arg(long)]
        fact: PathBuf,
        /// Conjugate by `u` instead of `u*`, which yields the adjoint channel.
        #[arg(long)]
        adjoint: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cptp,
    Ucp,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Constructed => "Constructed",
        Verdict::Obstructed => "Obstructed",
        Verdict::CriterionInapplicable => "CriterionInapplicable",
    }
}

pub fn run(cmd: Command, ctx: &Context) -> Result<RunReport, CliError> {
    let tol = ctx.tol;
    match cmd {
        Command::Eval { fact, x } => {
            let mut rb = ctx.report("fact eval");
            let f = load_factorization(&mut rb, "fact", &fact, tol)?;
            let ch = channel_of_factorization(&f)?;
            let report = verify_channel(&ch, tol);
            record_verification(&mut rb, &report);
            rb.result("kraus_count", ch.kraus().len());
            rb.check("ucpt", report.is_ucpt());
            if let Some(xp) = x {
                let xm = load_matrix(&mut rb, "x", &xp)?;
                let direct = apply_factorization(&f, &xm)?;
                let via_kraus = ch.apply(&xm)?;
                let err = max_abs_diff(&direct, &via_kraus);
                rb.result("image", matrix_to_json(&direct));
                rb.result("kraus_vs_direct_error", err);
                rb.check("kraus_matches_direct", err <= tol);
            }
            ctx.emit(&mut rb, &channel_to_json(&ch))?;
            Ok(rb.finish())
        }
        Command::Check { fact } => {
            let mut rb = ctx.report("fact check");
            let f = load_factorization(&mut rb, "fact", &fact, tol)?;
            let ch = channel_of_factorization(&f)?;
            let eq2 = recover_eq2(&f, tol)?;
            let err = channel_distance(&ch, &eq2)?;
            let report = verify_channel(&ch, tol);
            rb.result("blocks", f.ancilla().blocks());
            rb.result("weights", f.ancilla().weights());
            record_verification(&mut rb, &report);
            rb.result("formula_agreement_error", err);
            rb.check("ucpt", report.is_ucpt());
            rb.check("formulas_agree", err <= tol);
            Ok(rb.finish())
        }
        Command::TwoUnitary {
            u1,
            u2,
            t,
            kmax,
            blocks,
            ancilla_weights,
        } => {
            let mut rb = ctx.report("fact two-unitary");
            rb.param("t", t.to_string());
            rb.param("kmax", kmax);
            let a = load_unitary(&mut rb, "u1", &u1, tol)?;
            let b = load_unitary(&mut rb, "u2", &u2, tol)?;
            if let (Some(blocks), Some(ws)) = (blocks, ancilla_weights) {
                rb.param("blocks", &blocks);
                rb.param(
                    "ancilla_weights",
                    ws.iter().map(ToString::to_string).collect::<Vec<_>>(),
                );
                let ws: Vec<f64> = ws.iter().map(Weight::value).collect();
                let anc = FiniteAncillaSpec::new(blocks, ws, tol)?;
                let found = two_unitary_on_ancilla(&a, &b, t.value(), &anc, tol)?;
                rb.result("factorizes", found.is_some());
                if let Some(f) = found {
                    let mix = mixture_of_unitaries(&[a, b], &[t.value(), 1.0 - t.value()], tol)?;
                    let err = channel_distance(&f.channel()?, &mix)?;
                    rb.result("mixture_error", err);
                    rb.check("matches_mixture", err <= tol);
                    ctx.emit(&mut rb, &factorization_to_json(&f))?;
                }
                return Ok(rb.finish());
            }
            let (report, f) = two_unitary_factorization(&a, &b, t, kmax, tol)?;
            rb.result("verdict", verdict_name(report.verdict));
            rb.result("independent", report.independent);
            rb.result("independence_rank", report.independence_rank);
            rb.result("admissible_k", &report.admissible_k);
            rb.result("k", report.k);
            rb.result("mixture_error", report.mixture_error);
            rb.result("coefficient_residual", report.coefficient_residual);
            if let Some(e) = report.mixture_error {
                rb.check("matches_mixture", e <= tol);
            }
            if let Some(e) = report.coefficient_residual {
                rb.check("coefficients_orthonormal", e <= tol);
            }
            if let Some(f) = &f {
                ctx.emit(&mut rb, &factorization_to_json(f))?;
            }
            Ok(rb.finish())
        }
        Command::Compose { first, second } => {
            let mut rb = ctx.report("fact compose");
            let f = load_factorization(&mut rb, "first", &first, tol)?;
            let g = load_factorization(&mut rb, "second", &second, tol)?;
            let gf = compose_factorizations(&f, &g)?;
            let seq = compose(&f.channel()?, &g.channel()?)?;
            let err = channel_distance(&gf.channel()?, &seq)?;
            rb.result("blocks", gf.ancilla().blocks());
            rb.result("composition_error", err);
            rb.check("matches_sequential", err <= tol);
            ctx.emit(&mut rb, &factorization_to_json(&gf))?;
            Ok(rb.finish())
        }
        Command::Mix { facts, weights } => {
            let mut rb = ctx.report("fact mix");
            rb.param("weights", weights.iter().map(ToString::to_string).collect::<Vec<_>>());
            let fs = facts
                .iter()
                .enumerate()
                .map(|(i, p)| load_factorization(&mut rb, &format!("fact{i}"), p, tol))
                .collect::<Result<Vec<_>, _>>()?;
            let ts: Vec<f64> = weights.iter().map(Weight::value).collect();
            let mixed = convex_combine(&fs, &ts, tol)?;
            // compare with the same convex combination of Choi matrices
            let n = mixed.dim();
            let mut expected = ancilla::CMatrix::zeros(n * n, n * n);
            for (f, &t) in fs.iter().zip(&ts) {
                expected += f.channel()?.choi().matrix().map(|z| z * t);
            }
            let err = max_abs_diff(mixed.channel()?.choi().matrix(), &expected);
            rb.result("blocks", mixed.ancilla().blocks());
            rb.result("affine_error", err);
            rb.check("affine", err <= tol);
            ctx.emit(&mut rb, &factorization_to_json(&mixed))?;
            Ok(rb.finish())
        }
        Command::Split { fact } => {
            let mut rb = ctx.report("fact split");
            let f = load_factorization(&mut rb, "fact", &fact, tol)?;
            let parts = split_factorization(&f, 0.0);
            let (ts, fs): (Vec<f64>, Vec<_>) = parts.into_iter().unzip();
            let back = convex_combine(&fs, &ts, tol)?;
            let err = channel_distance(&back.channel()?, &f.channel()?)?;
            rb.result(
                "parts",
                fs.iter()
                    .zip(&ts)
                    .map(|(p, t)| json!({"weight": t, "k": p.ancilla().blocks()[0]}))
                    .collect::<Vec<_>>(),
            );
            rb.result("recombination_error", err);
            rb.check("recombines", err <= tol);
            if let Some(dir) = &ctx.out {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
                for (j, p) in fs.iter().enumerate() {
                    write_text(&dir.join(format!("part{j}.fact.json")), &factorization_to_json(p))?;
                }
            }
            Ok(rb.finish())
        }
        Command::Stinespring { channel, mode } => {
            let mut rb = ctx.report("fact stinespring");
            let ch = load_channel(&mut rb, "channel", &channel)?;
            let mode = match mode {
                Mode::Cptp => DilationMode::Cptp,
                Mode::Ucp => DilationMode::Ucp,
            };
            rb.param("mode", if mode == DilationMode::Cptp { "cptp" } else { "ucp" });
            let s = stinespring(&ch, mode, tol)?;
            let err = s.reconstruction_error(&ch)?;
            let rank = verify_channel(&ch, tol).choi_rank;
            rb.result("r", s.r);
            rb.result("choi_rank", rank);
            rb.result("state_index", s.state_index);
            rb.result("reconstruction_error", err);
            rb.check("reconstructs", err <= tol);
            rb.check("minimal", s.r == rank);
            ctx.emit(&mut rb, &matrix_to_json(s.unitary.matrix()))?;
            Ok(rb.finish())
        }
        Command::RecoverEq2 { fact, adjoint } => {
            let mut rb = ctx.report("fact recover-eq2");
            rb.param("adjoint", adjoint);
            let f = load_factorization(&mut rb, "fact", &fact, tol)?;
            let ch = channel_of_factorization(&f)?;
            let (recovered, target) = if adjoint {
                (recover_eq2_adjoint(&f, tol)?, adjoint_channel(&ch))
            } else {
                (recover_eq2(&f, tol)?, ch)
            };
            let err = channel_distance(&recovered, &target)?;
            rb.result("error", err);
            rb.check("matches", err <= tol);
            ctx.emit(&mut rb, &channel_to_json(&recovered))?;
            Ok(rb.finish())
        }
    }
}

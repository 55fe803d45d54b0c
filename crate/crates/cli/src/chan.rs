use std::path::PathBuf;

use ancilla::channel::{
    adjoint_channel, channel_distance, channel_from_choi, choi_of, compose, verify_channel, verify_choi,
    VerificationReport,
};
use ancilla::io::{channel_to_json, matrix_to_json};
use ancilla::linalg::hermitian_eigen;
use ancilla::ChoiMatrix;
use clap::{Args, Subcommand, ValueEnum};

use crate::context::{load_channel, load_matrix, Context};
use crate::error::CliError;
use crate::report::{ReportBuilder, RunReport};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check complete positivity, trace preservation and unitality.
    Verify(VerifyArgs),
    /// Choi matrix of a channel.
    Choi {
        #[arg(long)]
        channel: PathBuf,
    },
    /// Minimal Kraus operators from a Choi matrix.
    Kraus {
        #[arg(long)]
        choi: PathBuf,
    },
    /// `second ∘ first`.
    Compose {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// Hilbert–Schmidt adjoint.
    Adjoint {
        #[arg(long)]
        channel: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Channel file.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Choi matrix file (output factor first).
    #[arg(long)]
    choi: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Properties that must hold for the command to pass.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Property::Cp, Property::Tp, Property::Unital])]
    require: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Cp,
    Tp,
    Unital,
}

pub fn record_verification(rb: &mut ReportBuilder, r: &VerificationReport) {
    rb.result("cp", r.cp);
    rb.result("trace_preserving", r.trace_preserving);
    rb.result("unital", r.unital);
    rb.result("choi_rank", r.choi_rank);
    rb.result("min_choi_eigenvalue", r.min_choi_eigenvalue);
    rb.result("tp_defect", r.tp_defect);
    rb.result("unital_defect", r.unital_defect);
}

fn dim_of_choi(m: &ancilla::CMatrix) -> Result<usize, CliError> {
    let d = (m.nrows() as f64).sqrt().round() as usize;
    if m.nrows() != m.ncols() || d * d != m.nrows() {
        return Err(CliError::Usage(format!(
            "a Choi matrix must be n²×n², got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(d)
}

pub fn run(cmd: Command, ctx: &Context) -> Result<RunReport, CliError> {
    let tol = ctx.tol;
    match cmd {
        Command::Verify(args) => {
            let mut rb = ctx.report("chan verify");
            let report = if let Some(p) = &args.source.channel {
                let ch = load_channel(&mut rb, "channel", p)?;
                rb.result("kraus_count", ch.kraus().len());
                verify_channel(&ch, tol)
            } else {
                let p = args.source.choi.as_ref().expect("clap enforces one source");
                let m = load_matrix(&mut rb, "choi", p)?;
                let n = dim_of_choi(&m)?;
                verify_choi(&ChoiMatrix::new(n, m, tol)?, tol)?
            };
            let mut required: Vec<&str> = args
                .require
                .iter()
                .map(|p| match p {
                    Property::Cp => "cp",
                    Property::Tp => "tp",
                    Property::Unital => "unital",
                })
                .collect();
            required.sort_unstable();
            required.dedup();
            rb.param("require", &required);
            record_verification(&mut rb, &report);
            let ok = args.require.iter().all(|p| match p {
                Property::Cp => report.cp,
                Property::Tp => report.trace_preserving,
                Property::Unital => report.unital,
            });
            rb.check("requirements_met", ok);
            Ok(rb.finish())
        }
        Command::Choi { channel } => {
            let mut rb = ctx.report("chan choi");
            let ch = load_channel(&mut rb, "channel", &channel)?;
            let c = choi_of(&ch);
            let spec = hermitian_eigen(c.matrix())?;
            rb.result("dim", ch.dim());
            rb.result("choi_eigenvalues", &spec.values);
            rb.result("choi_rank", verify_channel(&ch, tol).choi_rank);
            rb.check("positive", spec.min() >= -tol * spec.scale());
            ctx.emit(&mut rb, &matrix_to_json(c.matrix()))?;
            Ok(rb.finish())
        }
        Command::Kraus { choi } => {
            let mut rb = ctx.report("chan kraus");
            let m = load_matrix(&mut rb, "choi", &choi)?;
            let n = dim_of_choi(&m)?;
            let c = ChoiMatrix::new(n, m, tol)?;
            let ch = channel_from_choi(&c, tol)?;
            let err = ancilla::linalg::max_abs_diff(choi_of(&ch).matrix(), c.matrix());
            rb.result("kraus_count", ch.kraus().len());
            rb.result("reconstruction_error", err);
            rb.check("reconstructed", err <= tol);
            ctx.emit(&mut rb, &channel_to_json(&ch))?;
            Ok(rb.finish())
        }
        Command::Compose { first, second } => {
            let mut rb = ctx.report("chan compose");
            let f = load_channel(&mut rb, "first", &first)?;
            let g = load_channel(&mut rb, "second", &second)?;
            let gf = compose(&f, &g)?;
            let report = verify_channel(&gf, tol);
            rb.result("kraus_count", gf.kraus().len());
            record_verification(&mut rb, &report);
            rb.check("completely_positive", report.cp);
            ctx.emit(&mut rb, &channel_to_json(&gf))?;
            Ok(rb.finish())
        }
        Command::Adjoint { channel } => {
            let mut rb = ctx.report("chan adjoint");
            let ch = load_channel(&mut rb, "channel", &channel)?;
            let adj = adjoint_channel(&ch);
            let back = adjoint_channel(&adj);
            let involution = channel_distance(&back, &ch)?;
            let report = verify_channel(&adj, tol);
            record_verification(&mut rb, &report);
            rb.result("involution_error", involution);
            rb.check("involution", involution <= tol);
            ctx.emit(&mut rb, &channel_to_json(&adj))?;
            Ok(rb.finish())
        }
    }
}

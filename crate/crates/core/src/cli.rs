//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnostics::export_trace_csv;
use crate::engine::{self, FactorInit, FactorPair, SolverConfig, Termination, Variant};
use crate::error::{Error, Result};
use crate::io::{format_value, read_matrix, read_vector, write_matrix, MatrixFileFormat};
use crate::matrix::{DenseMatrix, RegParams};
use crate::regularizer::{init_regularization, RegInit};
use crate::tikhonov::{lcurve_sweep, log_grid, run_lambda_iteration, LambdaIteration, LinearInverseProblem};

/// Exit status for a run that used its whole iteration budget.
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "tnmf", version, about = "Tikhonov-regularized NMF with automatic regularization parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Factorize a nonnegative matrix A ≈ BC.
    Factorize(FactorizeArgs),
    /// Solve a Tikhonov least-squares problem with iterative λ selection.
    TikhonovSolve(TikhonovArgs),
    /// Sample the L-curve (λ, ρ², η²) on a log-spaced grid.
    LcurveSweep(SweepArgs),
    /// Report complementary slackness of given factors.
    CheckKkt(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Additive,
    Multiplicative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    Random,
}

#[derive(Debug, Args)]
struct FactorizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long, value_enum, default_value = "additive")]
    variant: VariantArg,
    #[arg(long, default_value = "1000")]
    max_iter: usize,
    #[arg(long, default_value = "1e-9")]
    tol: f64,
    #[arg(long, default_value = "1e-9")]
    sigma: f64,
    #[arg(long, default_value = "1e-9")]
    delta_b: f64,
    #[arg(long, default_value = "1e-9")]
    delta_c: f64,
    /// Slope applied to every row and column.
    #[arg(long, default_value = "0.1")]
    gamma: f64,
    /// Per-row slopes (overrides --gamma for B).
    #[arg(long)]
    gamma_b: Option<PathBuf>,
    /// Per-column slopes (overrides --gamma for C).
    #[arg(long)]
    gamma_c: Option<PathBuf>,
    /// `zeros` or a vector file.
    #[arg(long, default_value = "zeros")]
    alpha0: String,
    /// `zeros` or a vector file.
    #[arg(long, default_value = "zeros")]
    beta0: String,
    #[arg(long, value_enum, default_value = "random", conflicts_with_all = ["init_b", "init_c"])]
    init: Option<InitArg>,
    #[arg(long, requires = "init_c")]
    init_b: Option<PathBuf>,
    #[arg(long, requires = "init_b")]
    init_c: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long)]
    out_b: PathBuf,
    #[arg(long)]
    out_c: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    /// Also write the final β.
    #[arg(long)]
    out_beta: Option<PathBuf>,
    /// Also write the final α.
    #[arg(long)]
    out_alpha: Option<PathBuf>,
    /// Keep β and α at their initial values.
    #[arg(long)]
    freeze_regularization: bool,
}

#[derive(Debug, Args)]
struct TikhonovArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    observation: PathBuf,
    #[arg(long, default_value = "1.0")]
    gamma: f64,
    #[arg(long, default_value = "0")]
    lambda0: f64,
    #[arg(long, default_value = "0.001")]
    eps: f64,
    #[arg(long, default_value = "1000")]
    max_iter: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    lambda_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    observation: PathBuf,
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    c: PathBuf,
    #[arg(long)]
    beta: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
        }
    };
    let stdout = std::io::stdout();
    let result = match cli.command {
        Command::Factorize(args) => factorize(args, &mut stdout.lock()),
        Command::TikhonovSolve(args) => tikhonov_solve(args, &mut stdout.lock()),
        Command::LcurveSweep(args) => sweep(args),
        Command::CheckKkt(args) => check_kkt(args, &mut stdout.lock()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn write_out(m: &DenseMatrix, path: &Path) -> Result<()> {
    write_matrix(m, path, MatrixFileFormat::for_path(path))
}

fn write_vector(v: &[f64], path: &Path) -> Result<()> {
    write_out(&DenseMatrix::column(v)?, path)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn weights(source: &str, len: usize, name: &'static str) -> Result<Vec<f64>> {
    if source == "zeros" {
        return Ok(vec![0.0; len]);
    }
    let v = read_vector(Path::new(source))?;
    if v.len() != len {
        return Err(Error::invalid(name, format!("expected {len} entries, got {}", v.len())));
    }
    Ok(v)
}

fn factorize(args: FactorizeArgs, out: &mut impl Write) -> Result<i32> {
    let a = read_matrix(&args.input, None)?;
    let (m, n) = a.shape();
    a.ensure_nonnegative("input matrix")?;

    let mut config = SolverConfig::new(m, n, args.rank).with_gamma(args.gamma);
    if let Some(p) = &args.gamma_b {
        config = config.with_gamma_b(read_vector(p)?);
    }
    if let Some(p) = &args.gamma_c {
        config = config.with_gamma_c(read_vector(p)?);
    }
    config.sigma = args.sigma;
    config.delta_b = args.delta_b;
    config.delta_c = args.delta_c;
    config.tol = args.tol;
    config.max_iter = args.max_iter;
    config.seed = args.seed;
    config.update_regularization = !args.freeze_regularization;
    config.variant = match args.variant {
        VariantArg::Additive => Variant::Additive,
        VariantArg::Multiplicative => Variant::Multiplicative,
    };
    config.validate(m, n)?;

    let strategy = match (&args.init_b, &args.init_c) {
        (Some(b), Some(c)) => FactorInit::Provided {
            b: read_matrix(b, None)?,
            c: read_matrix(c, None)?,
        },
        _ => FactorInit::UniformRandom,
    };
    let init = engine::init_factors(m, n, args.rank, config.seed, &strategy)?;
    let params = init_regularization(
        m,
        n,
        &RegInit::Provided {
            beta: weights(&args.beta0, m, "beta0")?,
            alpha: weights(&args.alpha0, n, "alpha0")?,
        },
    )?;

    let result = engine::run(&a, &config, init, params)?;

    write_out(&result.factors.b, &args.out_b)?;
    write_out(&result.factors.c, &args.out_c)?;
    if let Some(p) = &args.out_beta {
        write_vector(result.params.beta(), p)?;
    }
    if let Some(p) = &args.out_alpha {
        write_vector(result.params.alpha(), p)?;
    }
    let mut trace = create(&args.trace)?;
    export_trace_csv(&result.traces, &mut trace)?;
    trace.flush().map_err(|source| Error::Io {
        path: args.trace.clone(),
        source,
    })?;

    let last = result.traces.last();
    let status = match result.termination {
        Termination::KktConverged => "kkt_converged",
        Termination::MaxIter => "max_iter",
    };
    writeln!(out, "termination {status}").map_err(stdout_err)?;
    writeln!(out, "iterations {}", result.iterations()).map_err(stdout_err)?;
    if let Some(t) = last {
        writeln!(out, "objective {}", format_value(t.objective_combined)).map_err(stdout_err)?;
        writeln!(out, "max_slack_b {}", format_value(t.max_slack_b)).map_err(stdout_err)?;
        writeln!(out, "max_slack_c {}", format_value(t.max_slack_c)).map_err(stdout_err)?;
    }
    Ok(match result.termination {
        Termination::KktConverged => 0,
        Termination::MaxIter => EXIT_MAX_ITER,
    })
}

fn load_problem(design: &Path, observation: &Path) -> Result<LinearInverseProblem> {
    LinearInverseProblem::new(read_matrix(design, None)?, read_vector(observation)?)
}

fn tikhonov_solve(args: TikhonovArgs, out: &mut impl Write) -> Result<i32> {
    let problem = load_problem(&args.design, &args.observation)?;
    let outcome = run_lambda_iteration(
        &problem,
        &LambdaIteration {
            gamma: args.gamma,
            lambda0: args.lambda0,
            eps: args.eps,
            max_iter: args.max_iter,
        },
    )?;
    write_vector(&outcome.x, &args.out)?;
    if let Some(p) = &args.lambda_trace {
        let mut w = create(p)?;
        let io = |source| Error::Io { path: p.clone(), source };
        writeln!(w, "iteration,lambda").map_err(io)?;
        for (k, l) in outcome.lambda_history.iter().enumerate() {
            writeln!(w, "{},{}", k + 1, format_value(*l)).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    writeln!(out, "lambda {}", format_value(outcome.lambda)).map_err(stdout_err)?;
    writeln!(out, "iterations {}", outcome.iterations).map_err(stdout_err)?;
    writeln!(out, "converged {}", outcome.converged).map_err(stdout_err)?;
    Ok(if outcome.converged { 0 } else { EXIT_MAX_ITER })
}

fn sweep(args: SweepArgs) -> Result<i32> {
    let problem = load_problem(&args.design, &args.observation)?;
    let grid = log_grid(args.lambda_min, args.lambda_max, args.points)?;
    let points = lcurve_sweep(&problem, &grid)?;
    let mut w = create(&args.out)?;
    let io = |source| Error::Io {
        path: args.out.clone(),
        source,
    };
    writeln!(w, "lambda,residual_norm_sq,solution_norm_sq").map_err(io)?;
    for p in &points {
        writeln!(
            w,
            "{},{},{}",
            format_value(p.lambda),
            format_value(p.residual_norm_sq),
            format_value(p.solution_norm_sq)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(0)
}

fn check_kkt(args: CheckArgs, out: &mut impl Write) -> Result<i32> {
    let a = read_matrix(&args.input, None)?;
    let factors = FactorPair::new(read_matrix(&args.b, None)?, read_matrix(&args.c, None)?)?;
    let (m, n) = a.shape();
    let load = |p: &Option<PathBuf>, len: usize| -> Result<Vec<f64>> {
        match p {
            Some(p) => read_vector(p),
            None => Ok(vec![0.0; len]),
        }
    };
    let params = RegParams::new(load(&args.beta, m)?, load(&args.alpha, n)?)?;
    let k = engine::kkt_residual(&a, &factors, &params)?;
    writeln!(out, "max_slack_b {}", format_value(k.max_slack_b)).map_err(stdout_err)?;
    writeln!(out, "max_slack_c {}", format_value(k.max_slack_c)).map_err(stdout_err)?;
    writeln!(out, "neg_grad_at_zero_b {}", k.neg_grad_at_zero_b).map_err(stdout_err)?;
    writeln!(out, "neg_grad_at_zero_c {}", k.neg_grad_at_zero_c).map_err(stdout_err)?;
    Ok(0)
}

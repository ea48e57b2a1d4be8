use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::bench::{run_bench, BenchConfig, Instance, KernelKind, OutputFormat};
use super::serialize::{load_factors, load_vector, save_factors, save_vector};
use crate::butterfly::{ButterflyFactors, Mode};
use crate::error::{Error, Result};
use crate::kernels::{dense_matrix, DENSE_CAP};
use crate::linalg::{CMat, OversamplingParams};
use crate::partition::make_partition;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sampling,
    Matvec,
    Streaming,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Sampling => Mode::Sampling,
            ModeArg::Matvec => Mode::Matvec,
            ModeArg::Streaming => Mode::Streaming,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bfac",
    about = "Butterfly factorization of complementary low-rank kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Construction {
    #[arg(long, value_enum)]
    kernel: KernelKind,
    #[arg(long, value_enum, default_value = "sampling")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target leaf size of the partition.
    #[arg(long, default_value_t = 1)]
    leaf: usize,
    /// Additive oversampling.
    #[arg(long, default_value_t = 5)]
    oversample: usize,
    /// Multiplicative oversampling of the sampling engine.
    #[arg(long, default_value_t = 3)]
    q: usize,
    /// Skeleton refinement sweeps of the sampling engine.
    #[arg(long, default_value_t = 3)]
    iters: usize,
}

impl Construction {
    fn params(&self) -> OversamplingParams {
        OversamplingParams {
            p: self.oversample,
            q: self.q,
            iters: self.iters,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a factorization and write it as a .bfac file.
    Factor {
        #[command(flatten)]
        c: Construction,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a stored factorization to a vector file.
    Apply {
        #[arg(long)]
        factors: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Apply the adjoint instead.
        #[arg(long)]
        adjoint: bool,
    },
    /// Accuracy and timing table over sizes and ranks.
    Bench {
        #[command(flatten)]
        c: Construction,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        rank_list: Vec<usize>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a factorization against the dense kernel (n <= 4096).
    Verify {
        #[command(flatten)]
        c: Construction,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        /// Check this stored factorization instead of building one.
        #[arg(long)]
        factors: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Exit with status 2 when the relative Frobenius error exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::Oracle { .. } => 2,
        _ => 1,
    }
}

/// Runs the `bfac` command line and returns the process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn build(c: &Construction, n: usize, r: usize) -> Result<(Instance, ButterflyFactors)> {
    let p = make_partition(n, c.leaf)?;
    let instance = Instance::new(c.kernel, &p, &c.params(), c.seed)?;
    let f = instance.factorize(&p, r, &c.params(), c.seed, c.mode.into())?;
    Ok((instance, f))
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Factor { c, n, rank, out } => {
            let (_, f) = build(&c, n, rank)?;
            save_factors(&f, &out)?;
            let nnz = f.nnz_report();
            println!(
                "wrote {} (N = {n}, r = {rank}, nnz = {})",
                out.display(),
                nnz.total
            );
        }
        Command::Apply {
            factors,
            input,
            output,
            adjoint,
        } => {
            let f = load_factors(&factors)?;
            let g = load_vector(&input)?;
            let y = if adjoint {
                f.apply_adjoint(&g)?
            } else {
                f.apply(&g)?
            };
            save_vector(&y, &output)?;
        }
        Command::Bench {
            c,
            n_list,
            rank_list,
            samples,
            format,
            out,
        } => {
            let cfg = BenchConfig {
                kernel: c.kernel,
                n_list,
                rank_list,
                mode: c.mode.into(),
                seed: c.seed,
                sample_count: samples,
                format,
                params: c.params(),
                leaf: c.leaf,
            };
            let report = run_bench(&cfg);
            let text = report.render(cfg.format)?;
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => println!("{text}"),
            }
            if report.rows.iter().any(|r| r.error.is_some()) {
                return Ok(2);
            }
        }
        Command::Verify {
            c,
            n,
            rank,
            factors,
            samples,
            tol,
        } => {
            if n > DENSE_CAP {
                return Err(Error::invalid(format!(
                    "verify is limited to n <= {DENSE_CAP}"
                )));
            }
            let (instance, f) = match factors {
                Some(path) => {
                    let f = load_factors(&path)?;
                    if f.n() != n {
                        return Err(Error::invalid(format!(
                            "stored factorization has N = {}, expected {n}",
                            f.n()
                        )));
                    }
                    let p = make_partition(n, c.leaf)?;
                    (Instance::new(c.kernel, &p, &c.params(), c.seed)?, f)
                }
                None => build(&c, n, rank)?,
            };
            let dense = match &instance {
                Instance::Composition(op) => op.apply_block(&CMat::identity(n, n))?,
                _ => dense_matrix(instance.entries().expect("entry kernel"), n)?,
            };
            let eps_f = (f.to_dense() - &dense).norm() / dense.norm();
            let eps_a = instance.estimate(&f, samples, c.seed, f.rank)?;
            println!("eps_frobenius {eps_f:e}");
            println!("eps_a {:e}", eps_a.value);
            if tol.is_some_and(|t| eps_f.is_nan() || eps_f > t) {
                eprintln!("error: relative Frobenius error exceeds the tolerance");
                return Ok(2);
            }
        }
    }
    Ok(0)
}

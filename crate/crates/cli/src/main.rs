mod bench;
mod files;
mod job;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_poisson::report::SolveReport;

use crate::job::{CliError, JobConfig};

#[derive(Parser, Debug)]
#[command(
    name = "spectral-poisson",
    version,
    about = "Spectral Poisson solvers built on ADI with Zolotarev shifts"
)]
struct Cli {
    /// Worker threads for mode- and slice-parallel solvers (falls back to SPECTRAL_POISSON_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zolotarev shifts for [a, b] ∪ [c, d], printed as CSV.
    Shifts {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, allow_hyphen_values = true)]
        d: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Poisson on [−1, 1]² (or a rectangle), optionally with Dirichlet data.
    SolveSquare {
        #[command(flatten)]
        io: SolveArgs,
        /// Dirichlet data: `# edges=chebyshev, n=<m>` then rows left, right, bottom, top.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// a,b,c,d for [a, b] × [c, d].
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        #[arg(long, value_enum, default_value_t = Count::Certified)]
        count: Count,
    },
    /// Poisson on [a, b] × [c, d] with zero boundary data.
    SolveRect {
        #[command(flatten)]
        io: SolveArgs,
        #[arg(long, allow_hyphen_values = true)]
        domain: String,
        #[arg(long, value_enum, default_value_t = Count::Certified)]
        count: Count,
    },
    /// Five-point finite differences on the uniform grid.
    SolveFd {
        #[command(flatten)]
        io: SolveArgs,
        #[arg(long, value_enum, default_value_t = FdMethod::Adi)]
        method: FdMethod,
    },
    /// Poisson on the unit cylinder; samples on the doubled Chebyshev × uniform × Chebyshev grid.
    SolveCylinder {
        #[command(flatten)]
        io: SolveArgs,
    },
    /// Experimental nested ADI on [−1, 1]³. Far from practical beyond small n.
    SolveCube {
        #[command(flatten)]
        io: SolveArgs,
    },
    /// Timing sweep over n = nmin, 2·nmin, … ≤ nmax; CSV on stdout or --out.
    Bench {
        #[arg(long, value_enum)]
        solver: bench::BenchSolver,
        #[arg(long)]
        nmin: usize,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the Gershgorin interval of the symmetrized operator against [−1, −1/(30n⁴)].
    VerifyBounds {
        #[arg(long)]
        n: usize,
        /// Also check every power of two from 2 up to n.
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Expected size; checked against the header of --rhs.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Certified,
    Printed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdMethod {
    Adi,
    Dst,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("SPECTRAL_POISSON_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| {
                CliError::Usage(format!("SPECTRAL_POISSON_THREADS=`{v}` is not a count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    match cli.cmd {
        Command::Shifts {
            a,
            b,
            c,
            d,
            eps,
            out,
        } => {
            let iv = spectral_poisson::zolotarev_shifts::SpectralIntervals::new(a, b, c, d)
                .map_err(CliError::input)?;
            let sched = spectral_poisson::zolotarev_shifts::adi_shifts(&iv, eps)
                .map_err(CliError::input)?;
            with_output(out.as_deref(), |w| files::write_shifts(w, &sched))
        }
        Command::SolveSquare {
            io,
            edges,
            domain,
            count,
        } => {
            let job = JobConfig::square("square", &io, edges, domain.as_deref(), count)?;
            let report = job.run_square()?;
            finish(&io, &report)
        }
        Command::SolveRect { io, domain, count } => {
            let job = JobConfig::square("rectangle", &io, None, Some(&domain), count)?;
            let report = job.run_square()?;
            finish(&io, &report)
        }
        Command::SolveFd { io, method } => {
            let report = JobConfig::simple("fd", &io)?.run_fd(method)?;
            finish(&io, &report)
        }
        Command::SolveCylinder { io } => {
            let report = JobConfig::simple("cylinder", &io)?.run_cylinder()?;
            finish(&io, &report)
        }
        Command::SolveCube { io } => {
            eprintln!("note: the cube solver is experimental; cost grows like J³n³");
            let report = JobConfig::simple("cube", &io)?.run_cube()?;
            finish(&io, &report)
        }
        Command::Bench {
            solver,
            nmin,
            nmax,
            eps,
            reps,
            out,
        } => {
            let rows = bench::sweep(solver, nmin, nmax, eps, reps)?;
            with_output(out.as_deref(), |w| bench::write_csv(w, &rows))
        }
        Command::VerifyBounds { n, sweep } => verify_bounds(n, sweep),
    }
}

fn verify_bounds(n: usize, sweep: bool) -> Result<(), CliError> {
    if n < 1 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let sizes: Vec<usize> = if sweep {
        std::iter::successors(Some(2usize), |m| Some(m * 2))
            .take_while(|&m| m <= n)
            .collect()
    } else {
        vec![n]
    };
    let mut failed = vec![];
    for m in sizes {
        let disc = spectral_poisson::poisson_square::assemble(m).map_err(CliError::input)?;
        let (lo, hi) = disc.gershgorin().map_err(CliError::from)?;
        let delta = spectral_poisson::poisson_square::spectral_gap(m);
        let ok = lo >= -1.0 && hi <= -delta;
        println!(
            "n={m} gershgorin=[{lo:e}, {hi:e}] certified=[-1, {:e}] {}",
            -delta,
            if ok { "ok" } else { "VIOLATED" }
        );
        if !ok {
            failed.push(m);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "containment fails for n in {failed:?}"
        )))
    }
}

fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?);
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn finish(io: &SolveArgs, report: &SolveReport) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    match &io.report {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| CliError::io(p, e))?,
        None => eprintln!(
            "{}: n={} iterations={} residual={:e} seconds={:.3}",
            report.solver,
            report.n,
            report.iterations,
            report.residual,
            report.total_seconds()
        ),
    }
    Ok(())
}

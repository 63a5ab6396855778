//! Timing sweeps. Each size is run `reps` times and the median per column is kept.

use std::io::Write;

use clap::ValueEnum;
use spectral_poisson::basis::{BasisTag, CoeffMatrix2D, CoeffTensor3D};
use spectral_poisson::report::SolveReport;
use spectral_poisson::zolotarev_shifts::IterationFormula;
use spectral_poisson::{poisson_cube, poisson_cylinder, poisson_fd, poisson_square};

use crate::job::CliError;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchSolver {
    Square,
    Fd,
    FdDst,
    Cylinder,
    Cube,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub adi_seconds: f64,
    pub transform_seconds: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn stage(r: &SolveReport, names: &[&str]) -> f64 {
    names.iter().filter_map(|s| r.seconds.get(*s)).sum()
}

fn one(solver: BenchSolver, n: usize, eps: f64) -> Result<SolveReport, CliError> {
    let f2 = |x: f64, y: f64| (x + 0.5 * y).exp() * (2.0 * y).cos();
    let f3 = |x: f64, y: f64, z: f64| (x - y * z).exp() + x * y;
    Ok(match solver {
        BenchSolver::Square => {
            let f = CoeffMatrix2D::chebyshev_from_fn(n, f2)?;
            poisson_square::solve_square(&f, eps)?.1
        }
        BenchSolver::Fd | BenchSolver::FdDst => {
            let prob = poisson_fd::FdProblem::from_fn(n, f2).map_err(CliError::input)?;
            let mut r = SolveReport::new("fd", n, eps);
            let x = if solver == BenchSolver::Fd {
                let sched = poisson_fd::fd_schedule(n, eps, IterationFormula::FiniteDifference)
                    .map_err(CliError::input)?;
                r.iterations = sched.len();
                r.time("adi", || poisson_fd::solve_fd_adi_with(&prob, &sched))?
            } else {
                r.time("adi", || poisson_fd::solve_fd_dst(&prob))
            };
            r.residual = poisson_fd::fd_residual(&prob, x.view());
            r
        }
        BenchSolver::Cylinder => {
            let mut secs = 0.0;
            let rhs = {
                let t = std::time::Instant::now();
                let rhs = poisson_cylinder::CylinderRhs::from_cartesian(n, f3)?;
                secs += t.elapsed().as_secs_f64();
                rhs
            };
            let mut r = poisson_cylinder::solve_cylinder(&rhs, eps)?.1;
            r.seconds.insert("transform_in".into(), secs);
            r
        }
        BenchSolver::Cube => {
            let data = poisson_cube::chebyshev_from_fn(n, f3);
            poisson_cube::solve_cube(
                &CoeffTensor3D {
                    data,
                    basis: [BasisTag::ChebyshevT; 3],
                },
                eps,
            )?
            .1
        }
    })
}

pub fn sweep(
    solver: BenchSolver,
    nmin: usize,
    nmax: usize,
    eps: f64,
    reps: usize,
) -> Result<Vec<BenchRow>, CliError> {
    if nmin == 0 || nmax < nmin {
        return Err(CliError::Usage(format!(
            "need 1 ≤ nmin ≤ nmax, got {nmin}, {nmax}"
        )));
    }
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CliError::Usage(format!("--eps {eps} must lie in (0, 1)")));
    }
    let mut rows = vec![];
    let mut n = nmin;
    while n <= nmax {
        let runs = (0..reps)
            .map(|_| one(solver, n, eps))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(BenchRow {
            n,
            adi_seconds: median(runs.iter().map(|r| stage(r, &["adi", "dense"])).collect()),
            transform_seconds: median(
                runs.iter()
                    .map(|r| stage(r, &["transform_in", "lift"]))
                    .collect(),
            ),
            iterations: runs[0].iterations,
            residual: median(runs.iter().map(|r| r.residual).collect()),
        });
        n *= 2;
    }
    Ok(rows)
}

pub fn write_csv(w: &mut dyn Write, rows: &[BenchRow]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Usage(e.to_string());
    writeln!(w, "n,adi_seconds,transform_seconds,iterations,residual").map_err(io)?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{},{:e}",
            r.n, r.adi_seconds, r.transform_seconds, r.iterations, r.residual
        )
        .map_err(io)?;
    }
    Ok(())
}

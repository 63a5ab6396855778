//! Validated job descriptions and the solver dispatch.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use spectral_poisson::basis::{
    cheb_transform_2d, write_coeffs, write_tensor, write_tensor_complex, CoeffMatrix2D,
};
use spectral_poisson::poisson_square::{solve_poisson, EdgeData, Rectangle, SquareCount};
use spectral_poisson::report::SolveReport;
use spectral_poisson::{poisson_cube, poisson_cylinder, poisson_fd, Error};

use crate::files::{self, Rhs};
use crate::{Count, FdMethod, SolveArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files: exit 1.
    Usage(String),
    /// The method itself failed: exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    /// Library errors raised while checking inputs are validation errors whatever their kind.
    pub fn input(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn io(p: &Path, e: std::io::Error) -> Self {
        CliError::Usage(format!("{}: {e}", p.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Numerical(s) => f.write_str(s),
        }
    }
}

#[derive(Debug)]
pub struct JobConfig {
    pub solver: &'static str,
    pub n: usize,
    pub eps: f64,
    pub domain: Rectangle,
    pub rhs: Rhs,
    pub edges: Option<EdgeData>,
    pub count: SquareCount,
    pub out: Option<PathBuf>,
}

fn check_eps(eps: f64) -> Result<(), CliError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--eps {eps} must lie in (0, 1)")))
    }
}

pub fn parse_domain(s: &str) -> Result<Rectangle, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--domain `{s}`: {e}")))?;
    match v[..] {
        [a, b, c, d] => Rectangle::new(a, b, c, d).map_err(CliError::input),
        _ => Err(CliError::Usage(format!(
            "--domain `{s}` needs four numbers a,b,c,d"
        ))),
    }
}

impl JobConfig {
    fn base(solver: &'static str, io: &SolveArgs) -> Result<Self, CliError> {
        check_eps(io.eps)?;
        let rhs = files::read_rhs(&io.rhs, solver)?;
        let n = rhs.n();
        if let Some(want) = io.n {
            if want != n {
                return Err(CliError::Usage(format!(
                    "--n {want} disagrees with {} (n = {n})",
                    io.rhs.display()
                )));
            }
        }
        if n == 0 {
            return Err(CliError::Usage("empty right-hand side".into()));
        }
        Ok(Self {
            solver,
            n,
            eps: io.eps,
            domain: Rectangle::REFERENCE,
            rhs,
            edges: None,
            count: SquareCount::Certified,
            out: io.out.clone(),
        })
    }

    pub fn simple(solver: &'static str, io: &SolveArgs) -> Result<Self, CliError> {
        Self::base(solver, io)
    }

    pub fn square(
        solver: &'static str,
        io: &SolveArgs,
        edges: Option<PathBuf>,
        domain: Option<&str>,
        count: Count,
    ) -> Result<Self, CliError> {
        let mut job = Self::base(solver, io)?;
        if let Some(d) = domain {
            job.domain = parse_domain(d)?;
        }
        if let Some(p) = edges {
            let f = File::open(&p).map_err(|e| CliError::io(&p, e))?;
            job.edges = Some(files::read_edges(BufReader::new(f))?);
        }
        job.count = match count {
            Count::Certified => SquareCount::Certified,
            Count::Printed => SquareCount::Printed,
        };
        Ok(job)
    }

    fn write(
        &self,
        f: impl FnOnce(&mut dyn std::io::Write) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        crate::with_output(self.out.as_deref(), f)
    }

    pub fn run_square(&self) -> Result<SolveReport, CliError> {
        let f = match &self.rhs {
            Rhs::Coeffs(c) => c.clone(),
            Rhs::Samples2(s) => CoeffMatrix2D::square(
                cheb_transform_2d(s.view()).map_err(CliError::input)?,
                spectral_poisson::basis::BasisTag::ChebyshevT,
            ),
            _ => {
                return Err(CliError::Usage(format!(
                    "the {} solver needs a 2-D rhs file",
                    self.solver
                )))
            }
        };
        let (sol, rep) = solve_poisson(&f, self.edges.as_ref(), self.domain, self.eps, self.count)?;
        let c = sol.to_chebyshev()?;
        self.write(|mut w| write_coeffs(&mut w, &c).map_err(CliError::from))?;
        Ok(rep)
    }

    pub fn run_fd(&self, method: FdMethod) -> Result<SolveReport, CliError> {
        let Rhs::Fd(f) = &self.rhs else {
            return Err(CliError::Usage(
                "solve-fd needs a `grid=fd` sample file".into(),
            ));
        };
        let prob = poisson_fd::FdProblem::new(self.n, f.clone()).map_err(CliError::input)?;
        let mut rep = SolveReport::new("fd", self.n, self.eps);
        let x = match method {
            FdMethod::Adi => {
                let sched = poisson_fd::fd_schedule(
                    self.n,
                    self.eps,
                    spectral_poisson::zolotarev_shifts::IterationFormula::FiniteDifference,
                )
                .map_err(CliError::input)?;
                rep.iterations = sched.len();
                rep.time("adi", || poisson_fd::solve_fd_adi_with(&prob, &sched))?
            }
            FdMethod::Dst => rep.time("dst", || poisson_fd::solve_fd_dst(&prob)),
        };
        rep.residual = poisson_fd::fd_residual(&prob, x.view());
        self.write(|w| files::write_fd(w, self.n, &x))?;
        Ok(rep)
    }

    pub fn run_cylinder(&self) -> Result<SolveReport, CliError> {
        let Rhs::Samples3 { grid, data } = &self.rhs else {
            return Err(CliError::Usage(
                "solve-cylinder needs a `grid=cylinder` sample file".into(),
            ));
        };
        if grid != "cylinder" {
            return Err(CliError::Usage(format!(
                "solve-cylinder needs `grid=cylinder`, found `{grid}`"
            )));
        }
        let (sol, rep) = poisson_cylinder::solve_cylinder_samples(data.view(), self.eps)?;
        let c = sol.to_coefficients()?;
        self.write(|mut w| write_tensor_complex(&mut w, &c).map_err(CliError::from))?;
        Ok(rep)
    }

    pub fn run_cube(&self) -> Result<SolveReport, CliError> {
        let (sol, rep) =
            match &self.rhs {
                Rhs::Samples3 { grid, data } if grid == "chebyshev3" => {
                    poisson_cube::solve_cube_samples(data, self.eps)?
                }
                Rhs::Tensor(t) => poisson_cube::solve_cube(t, self.eps)?,
                _ => return Err(CliError::Usage(
                    "solve-cube needs a `grid=chebyshev3` sample file or a real coefficient tensor"
                        .into(),
                )),
            };
        let c = sol.to_chebyshev()?;
        self.write(|mut w| write_tensor(&mut w, &c).map_err(CliError::from))?;
        Ok(rep)
    }
}

//! Spectral Poisson solver on the square and on rectangles.
//!
//! The solution is `u = Σ X_ij (1−y²)(1−x²) C̃_i(y) C̃_j(x)` in reference coordinates.
//! Galerkin-style truncation of `∇²u = f` gives `MXD + DXM = F`, i.e.
//! `AX − XB = D⁻¹FD⁻¹` with `A = D⁻¹M`, `B = −MD⁻¹`. A diagonal similarity makes
//! `A` symmetric, `Ã = D_s⁻¹AD_s`, and then `ÃY + YÃ = D_s⁻¹(D⁻¹FD⁻¹)D_s⁻¹` with
//! `X = D_s Y D_s`.

use ndarray::{s, Array2, Axis, Zip};

use crate::basis::{
    build_d, build_m, cheb_derivative, cheb_eval_2d, cheb_series, ultra_series, BasisTag,
    CoeffMatrix2D,
};
use crate::error::{Error, Result};
use crate::linalg::{
    adi_solve, frobenius, gershgorin_intervals, BandedMatrix, StridedTridiagonal, SylvesterProblem,
};
use crate::report::SolveReport;
use crate::zolotarev_shifts::{
    cross_ratio_gamma, iteration_count, shifts_with_count, IterationFormula, ShiftSchedule,
    SpectralIntervals,
};

/// The assembled operators for one `n`.
#[derive(Debug, Clone)]
pub struct SquareDiscretization {
    pub n: usize,
    pub d: Vec<f64>,
    pub m: BandedMatrix,
    /// `A = D⁻¹M`
    pub a: BandedMatrix,
    pub ds: Vec<f64>,
    /// `Ã = D_s⁻¹ A D_s`, stored with its even/odd tridiagonal structure.
    pub a_tilde: StridedTridiagonal,
    /// `[−1, −1/(30n⁴)] ∪ [1/(30n⁴), 1]`
    pub iv: SpectralIntervals,
}

/// Lower edge `1/(30n⁴)` of the certified spectrum of `−Ã`.
pub fn spectral_gap(n: usize) -> f64 {
    1.0 / (30.0 * (n as f64).powi(4))
}

pub fn assemble(n: usize) -> Result<SquareDiscretization> {
    if n == 0 {
        return Err(Error::domain("assemble", "n must be at least 1"));
    }
    let d = build_d(n);
    let m = build_m(n);
    let mut a = m.clone();
    for i in 0..n {
        for j in a.row_range(i) {
            a.set(i, j, m.get(i, j) / d[i]);
        }
    }
    let mut ds = vec![1.0; n];
    for j in 0..n.saturating_sub(2) {
        let ratio = a.get(j + 2, j) / a.get(j, j + 2);
        assert!(ratio > 0.0, "A_(j+2,j)/A_(j,j+2) must be positive");
        ds[j + 2] = ds[j] * ratio.sqrt();
    }
    let mut at = BandedMatrix::zeros(n, 2, 2);
    for i in 0..n {
        for j in a.row_range(i) {
            at.set(i, j, a.get(i, j) * ds[j] / ds[i]);
        }
    }
    // symmetrize the last bit so the stored matrix is exactly symmetric
    for i in 0..n.saturating_sub(2) {
        let v = (a.get(i, i + 2) * a.get(i + 2, i)).sqrt();
        at.set(i, i + 2, v);
        at.set(i + 2, i, v);
    }
    let a_tilde = StridedTridiagonal::from_banded(&at, 2)?;
    let delta = spectral_gap(n);
    let iv = SpectralIntervals::new(-1.0, -delta, delta, 1.0)?;
    Ok(SquareDiscretization {
        n,
        d,
        m,
        a,
        ds,
        a_tilde,
        iv,
    })
}

impl SquareDiscretization {
    /// Gershgorin hull of `S⁻¹ÃS` with `S_ii` the 1-based position of `i` in its parity class.
    pub fn gershgorin(&self) -> Result<(f64, f64)> {
        let scaling: Vec<f64> = (0..self.n).map(|i| (i / 2 + 1) as f64).collect();
        gershgorin_intervals(&self.a_tilde.to_banded(), &scaling)
    }

    /// `‖AX − XB − R‖_F / ‖R‖_F` for `(ρA)X − XB = R`.
    fn residual(&self, rho: f64, x: &Array2<f64>, r: &Array2<f64>) -> f64 {
        let mut mx = Array2::zeros(x.raw_dim());
        let mut xm = Array2::zeros(x.raw_dim());
        self.m.left_mul(x.view(), mx.view_mut());
        self.m.right_mul(x.view(), xm.view_mut());
        let d = &self.d;
        let mut res = r.clone();
        Zip::indexed(&mut res)
            .and(&mx)
            .and(&xm)
            .for_each(|(i, j), v, &a, &b| {
                // ρ D⁻¹MX + XMD⁻¹ − R
                *v = rho * a / d[i] + b / d[j] - *v;
            });
        frobenius(&res) / frobenius(r).max(f64::MIN_POSITIVE)
    }
}

/// An axis-aligned rectangle `[a, b] × [c, d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Rectangle {
    pub const REFERENCE: Rectangle = Rectangle {
        a: -1.0,
        b: 1.0,
        c: -1.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() && b > a && d > c) {
            return Err(Error::domain(
                "solve_rectangle",
                format!("degenerate domain [{a}, {b}] × [{c}, {d}]"),
            ));
        }
        Ok(Self { a, b, c, d })
    }

    /// `(α, β) = ((2/(b−a))², (2/(d−c))²)`.
    pub fn scales(&self) -> (f64, f64) {
        (
            (2.0 / (self.b - self.a)).powi(2),
            (2.0 / (self.d - self.c)).powi(2),
        )
    }

    fn to_reference(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !(x >= self.a && x <= self.b && y >= self.c && y <= self.d) {
            return Err(Error::domain(
                "evaluate",
                format!("({x}, {y}) lies outside the domain"),
            ));
        }
        let xi = ((2.0 * x - self.a - self.b) / (self.b - self.a)).clamp(-1.0, 1.0);
        let eta = ((2.0 * y - self.c - self.d) / (self.d - self.c)).clamp(-1.0, 1.0);
        Ok((xi, eta))
    }
}

/// Dirichlet data as Chebyshev coefficients along each edge, each on its own `[−1, 1]`
/// parameter: left/right in `y`, bottom/top in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl EdgeData {
    pub fn zero() -> Self {
        Self {
            left: vec![],
            right: vec![],
            bottom: vec![],
            top: vec![],
        }
    }

    /// Interpolates `g(x, y)` along the four edges of the reference square at `n` Chebyshev points.
    pub fn from_fn(n: usize, g: impl Fn(f64, f64) -> f64) -> Self {
        let dct = crate::basis::Dct1::new(n);
        let t = crate::basis::cheb_points(n);
        let edge = |h: &dyn Fn(f64) -> f64| {
            dct.values_to_coeffs(&t.iter().map(|&s| h(s)).collect::<Vec<_>>())
        };
        Self {
            left: edge(&|y| g(-1.0, y)),
            right: edge(&|y| g(1.0, y)),
            bottom: edge(&|x| g(x, -1.0)),
            top: edge(&|x| g(x, 1.0)),
        }
    }

    fn max_len(&self) -> usize {
        [&self.left, &self.right, &self.bottom, &self.top]
            .iter()
            .map(|v| v.len())
            .max()
            .unwrap_or(0)
    }

    /// Worst disagreement of adjacent edges at the four corners.
    pub fn corner_defect(&self) -> (&'static str, f64) {
        let at = |c: &[f64], t: f64| cheb_series(c, t);
        [
            (
                "bottom-left",
                (at(&self.left, -1.0) - at(&self.bottom, -1.0)).abs(),
            ),
            (
                "top-left",
                (at(&self.left, 1.0) - at(&self.top, -1.0)).abs(),
            ),
            (
                "bottom-right",
                (at(&self.right, -1.0) - at(&self.bottom, 1.0)).abs(),
            ),
            (
                "top-right",
                (at(&self.right, 1.0) - at(&self.top, 1.0)).abs(),
            ),
        ]
        .into_iter()
        .fold(("none", 0.0), |w, c| if c.1 > w.1 { c } else { w })
    }

    /// Chebyshev coefficients (`n × n`, row = y) of the Coons blend of the edge data.
    fn lift(&self, n: usize) -> Array2<f64> {
        let pad = |v: &[f64]| {
            let mut p = vec![0.0; n];
            p[..v.len()].copy_from_slice(v);
            p
        };
        let (l, r, b, t) = (
            pad(&self.left),
            pad(&self.right),
            pad(&self.bottom),
            pad(&self.top),
        );
        // (1∓s)/2 = ½T₀ ∓ ½T₁
        let lo = [0.5, -0.5];
        let hi = [0.5, 0.5];
        let mut u = Array2::zeros((n, n));
        let mut outer = |col: &[f64], row: &[f64]| {
            for (i, &ci) in col.iter().enumerate().take(n) {
                for (j, &rj) in row.iter().enumerate().take(n) {
                    u[[i, j]] += ci * rj;
                }
            }
        };
        outer(&l, &lo);
        outer(&r, &hi);
        // bottom/top minus their own linear corner interpolants
        let corr = |g: &[f64]| {
            let (g0, g1) = (cheb_series(g, -1.0), cheb_series(g, 1.0));
            let mut h = g.to_vec();
            h[0] -= 0.5 * (g0 + g1);
            if n > 1 {
                h[1] -= 0.5 * (g1 - g0);
            }
            h
        };
        let (bc, tc) = (corr(&b), corr(&t));
        outer(&lo, &bc);
        outer(&hi, &tc);
        u
    }
}

/// `α ∂²_ξ + β ∂²_η` on Chebyshev coefficients (row = η).
fn cheb_laplacian(u: &Array2<f64>, alpha: f64, beta: f64) -> Array2<f64> {
    let mut out = Array2::zeros(u.raw_dim());
    for (i, row) in u.axis_iter(Axis(0)).enumerate() {
        let d2 = cheb_derivative(&cheb_derivative(&row.to_vec()));
        for (j, v) in d2.into_iter().enumerate() {
            out[[i, j]] += alpha * v;
        }
    }
    for (j, col) in u.axis_iter(Axis(1)).enumerate() {
        let d2 = cheb_derivative(&cheb_derivative(&col.to_vec()));
        for (i, v) in d2.into_iter().enumerate() {
            out[[i, j]] += beta * v;
        }
    }
    out
}

/// C̃⊗C̃ coefficients of a right-hand side given in any polynomial basis.
pub fn rhs_to_c32(f: &CoeffMatrix2D) -> Result<CoeffMatrix2D> {
    if f.data.nrows() != f.data.ncols() {
        return Err(Error::Shape(format!(
            "rhs must be square, got {:?}",
            f.data.dim()
        )));
    }
    f.converted(BasisTag::UltraC32)
}

/// A computed solution: weighted C̃ coefficients plus an optional Chebyshev lift carrying boundary data.
#[derive(Debug, Clone)]
pub struct SquareSolution {
    /// Coefficients of `(1−η²)(1−ξ²)C̃_i(η)C̃_j(ξ)`.
    pub x: CoeffMatrix2D,
    /// Chebyshev coefficients of the boundary lift, if any.
    pub lift: Option<Array2<f64>>,
    pub domain: Rectangle,
}

/// Which count to use for the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SquareCount {
    /// The general count on the certified intervals.
    #[default]
    Certified,
    /// `⌈log(120n⁴) log(1/ε)/(2π²)⌉`.
    Printed,
}

/// Schedule for `(ρÃ)Y − Y(−Ã) = R`.
pub fn square_schedule(
    n: usize,
    rho: f64,
    eps: f64,
    count: SquareCount,
) -> Result<(SpectralIntervals, ShiftSchedule)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(
            "solve_square",
            format!("eps = {eps} must lie in (0, 1)"),
        ));
    }
    let delta = spectral_gap(n);
    let iv = SpectralIntervals::new(-rho, -rho * delta, delta, 1.0)?;
    let formula = match count {
        SquareCount::Certified => IterationFormula::General {
            gamma: cross_ratio_gamma(&iv),
        },
        SquareCount::Printed => IterationFormula::SquarePrinted,
    };
    let j = iteration_count(formula, n, eps)?;
    Ok((iv, shifts_with_count(&iv, j)?))
}

/// Solves `ρ·AX − XB = R` (already divided through by β) for the weighted coefficients.
fn solve_core(
    disc: &SquareDiscretization,
    rho: f64,
    r: &Array2<f64>,
    schedule: &ShiftSchedule,
    report: &mut SolveReport,
) -> Result<Array2<f64>> {
    let ds = &disc.ds;
    let mut rt = r.clone();
    Zip::indexed(&mut rt).for_each(|(i, j), v| *v /= ds[i] * ds[j]);
    let a_op = disc.a_tilde.scaled(rho);
    let b_op = disc.a_tilde.scaled(-1.0);
    let y = report.time("adi", || {
        adi_solve(&SylvesterProblem { a: &a_op, b: &b_op }, &rt, schedule)
    })?;
    let mut x = y;
    Zip::indexed(&mut x).for_each(|(i, j), v| *v *= ds[i] * ds[j]);
    report.iterations = schedule.len();
    report.residual = report.time("residual", || disc.residual(rho, &x, r));
    Ok(x)
}

/// Full pipeline on a rectangle with optional Dirichlet data.
pub fn solve_poisson(
    f: &CoeffMatrix2D,
    edges: Option<&EdgeData>,
    domain: Rectangle,
    eps: f64,
    count: SquareCount,
) -> Result<(SquareSolution, SolveReport)> {
    let n = f.data.nrows();
    if n == 0 || f.data.ncols() != n {
        return Err(Error::Shape(format!(
            "rhs must be square and nonempty, got {:?}",
            f.data.dim()
        )));
    }
    let solver = if domain == Rectangle::REFERENCE {
        "square"
    } else {
        "rectangle"
    };
    let mut report = SolveReport::new(solver, n, eps);
    let (alpha, beta) = domain.scales();
    let rho = alpha / beta;
    let (_, schedule) = square_schedule(n, rho, eps, count)?;
    let lift = match edges {
        Some(e) if e.max_len() > 0 => {
            if e.max_len() > n {
                return Err(Error::Shape(format!(
                    "edge data of length {} exceeds n = {n}",
                    e.max_len()
                )));
            }
            let (corner, defect) = e.corner_defect();
            if defect > 1e-10 {
                return Err(Error::CornerMismatch { corner, defect });
            }
            Some(e.lift(n))
        }
        _ => None,
    };
    let disc = report.time("assemble", || assemble(n))?;
    let mut fu = report.time("transform_in", || rhs_to_c32(f))?.data;
    if let Some(l) = &lift {
        let lap = report.time("lift", || -> Result<Array2<f64>> {
            let lc = CoeffMatrix2D::square(cheb_laplacian(l, alpha, beta), BasisTag::ChebyshevT);
            Ok(lc.converted(BasisTag::UltraC32)?.data)
        })?;
        fu -= &lap;
    }
    let d = &disc.d;
    let mut r = fu;
    Zip::indexed(&mut r).for_each(|(i, j), v| *v /= beta * d[i] * d[j]);
    let x = solve_core(&disc, rho, &r, &schedule, &mut report)?;
    Ok((
        SquareSolution {
            x: CoeffMatrix2D::square(x, BasisTag::UltraC32),
            lift,
            domain,
        },
        report,
    ))
}

/// `∇²u = f` on `[−1, 1]²`, zero boundary data. The certified count is used.
pub fn solve_square(f: &CoeffMatrix2D, eps: f64) -> Result<(SquareSolution, SolveReport)> {
    solve_poisson(f, None, Rectangle::REFERENCE, eps, SquareCount::Certified)
}

/// Nonhomogeneous Dirichlet data on `[−1, 1]²`.
pub fn solve_dirichlet(
    f: &CoeffMatrix2D,
    edges: &EdgeData,
    eps: f64,
) -> Result<(SquareSolution, SolveReport)> {
    solve_poisson(
        f,
        Some(edges),
        Rectangle::REFERENCE,
        eps,
        SquareCount::Certified,
    )
}

/// Zero Dirichlet data on a rectangle; `f` is given in the reference coordinates of the rectangle.
pub fn solve_rectangle(
    f: &CoeffMatrix2D,
    domain: Rectangle,
    eps: f64,
) -> Result<(SquareSolution, SolveReport)> {
    solve_poisson(f, None, domain, eps, SquareCount::Certified)
}

impl SquareSolution {
    /// Point values at physical coordinates.
    pub fn evaluate(&self, points: &[(f64, f64)]) -> Result<Vec<f64>> {
        points
            .iter()
            .map(|&(x, y)| {
                let (xi, eta) = self.domain.to_reference(x, y)?;
                let inner: Vec<f64> = self
                    .x
                    .data
                    .rows()
                    .into_iter()
                    .map(|r| ultra_series(&r.to_vec(), xi))
                    .collect();
                let mut v = (1.0 - xi * xi) * (1.0 - eta * eta) * ultra_series(&inner, eta);
                if let Some(l) = &self.lift {
                    v += cheb_eval_2d(l.view(), xi, eta);
                }
                Ok(v)
            })
            .collect()
    }

    /// Chebyshev coefficients of `u` in reference coordinates, of size `(n+2) × (n+2)`.
    pub fn to_chebyshev(&self) -> Result<CoeffMatrix2D> {
        let n = self.x.data.nrows();
        let mut pad = Array2::zeros((n + 2, n + 2));
        pad.slice_mut(s![..n, ..n]).assign(&self.x.data);
        let m = build_m(n + 2);
        let mut tmp = Array2::zeros(pad.raw_dim());
        let mut ultra = Array2::zeros(pad.raw_dim());
        m.left_mul(pad.view(), tmp.view_mut());
        m.right_mul(tmp.view(), ultra.view_mut());
        let mut cheb =
            CoeffMatrix2D::square(ultra, BasisTag::UltraC32).converted(BasisTag::ChebyshevT)?;
        if let Some(l) = &self.lift {
            let (r, c) = l.dim();
            let mut view = cheb.data.slice_mut(s![..r, ..c]);
            view += l;
        }
        Ok(cheb)
    }
}

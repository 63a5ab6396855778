//! Experimental: Poisson's equation on `[−1, 1]³` by nested ADI.
//!
//! With `A = D⁻¹M` and `X[[i, j, k]]` multiplying `C̃_i(x)C̃_j(y)C̃_k(z)` times the three
//! weights, the discretization is `(D_xx + D_yy + D_zz) X = F̂`, `F̂ = F / (d_i d_j d_k)`, where
//! `D_xx` applies `A` along the `y` and `z` axes (in column-major Kronecker notation
//! `A⊗A⊗I`), `D_yy` along `x` and `z`, `D_zz` along `x` and `y`.
//!
//! Everything runs on the symmetrized `Ã = D_s⁻¹AD_s`:
//!
//! * outer: `−(D_xx + D_yy) X − X D_zz = −F̂`, intervals `[−2, −2δ²] ∪ [δ², 1]`;
//! * middle, for `(−D_xx − D_yy − q) Y = G`: `−(D_xx + q/2) Y − Y (D_yy + q/2) = G`;
//! * inner, one slice at a time: `Ã Z Ã + c Z = G`, i.e. `cÃ⁻¹Z − Z(−Ã) = Ã⁻¹G`.
//!
//! The outer and middle intervals are widened by a factor 2 at both ends. Cost grows like
//! `J³ n³`, so sizes are guarded.

use ndarray::{Array2, Array3, ArrayView2, ArrayViewMut2, Axis, Ix3, Zip};
use rayon::prelude::*;

use crate::basis::{
    build_m, cheb_points, convert_axis, ultra_series, BasisTag, CoeffTensor3D, Dct1,
};
use crate::error::{Error, Result};
use crate::linalg::{
    adi_solve, frobenius, AdiSplit, ShiftedOperator, StridedTridiagonal, SylvesterProblem,
};
use crate::poisson_square::{assemble, spectral_gap, SquareDiscretization};
use crate::report::SolveReport;
use crate::zolotarev_shifts::{adi_shifts, ShiftSchedule, SpectralIntervals};

/// Default size guard.
pub const CUBE_N_MAX: usize = 64;

/// Tolerance of the innermost slice solves.
pub const EPS_INNER: f64 = 1e-15;

/// Which Kronecker term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeOp {
    Dxx,
    Dyy,
    Dzz,
}

impl CubeOp {
    /// The axis carrying the identity factor; slices are taken along it.
    fn free_axis(self) -> usize {
        match self {
            CubeOp::Dxx => 0,
            CubeOp::Dyy => 1,
            CubeOp::Dzz => 2,
        }
    }
}

fn check_cube<T>(x: &Array3<T>, n: usize) -> Result<()> {
    if x.dim() != (n, n, n) {
        return Err(Error::Shape(format!("tensor {:?} for n = {n}", x.dim())));
    }
    Ok(())
}

/// Applies `f` to every 2-D slice normal to `axis`, in parallel.
fn map_slices(
    x: &Array3<f64>,
    axis: usize,
    f: impl Fn(ArrayView2<f64>, ArrayViewMut2<f64>) + Sync,
) -> Array3<f64> {
    let mut out = Array3::zeros(x.raw_dim());
    out.axis_iter_mut(Axis(axis))
        .into_par_iter()
        .zip(x.axis_iter(Axis(axis)).into_par_iter())
        .for_each(|(o, s)| f(s, o));
    out
}

fn try_map_slices(
    x: &mut Array3<f64>,
    axis: usize,
    f: impl Fn(&mut Array2<f64>) -> Result<()> + Sync,
) -> Result<()> {
    x.axis_iter_mut(Axis(axis))
        .into_par_iter()
        .try_for_each(|mut s| {
            let mut owned = s.to_owned();
            f(&mut owned)?;
            s.assign(&owned);
            Ok(())
        })
}

/// `op · X` with `A = D⁻¹M` in the original coordinates.
pub fn apply_kron(op: CubeOp, x: &Array3<f64>) -> Result<Array3<f64>> {
    let (n, n1, n2) = x.dim();
    if n != n1 || n1 != n2 {
        return Err(Error::Shape(format!(
            "apply_kron needs a cubic tensor, got {:?}",
            x.dim()
        )));
    }
    if n == 0 {
        return Ok(x.clone());
    }
    let a = assemble(n)?.a;
    let at = a.transpose();
    Ok(map_slices(x, op.free_axis(), |s, mut o| {
        let mut t = Array2::zeros(s.raw_dim());
        a.left_mul(s, t.view_mut());
        at.right_mul(t.view(), o.view_mut());
    }))
}

/// `Ã Z Ã` on one slice.
fn pair(at: &StridedTridiagonal, s: ArrayView2<f64>, out: ArrayViewMut2<f64>) {
    let mut t = Array2::zeros(s.raw_dim());
    at.apply_shifted_rows(0.0, s, t.view_mut());
    at.apply_shifted_cols(0.0, t.view(), out);
}

/// `T = c Ã⁻¹` with shifted solves `(cÃ⁻¹ − s)⁻¹ = −(1/s)(Ã − (c/s)I)⁻¹Ã`.
struct ScaledInverse<'a> {
    at: &'a StridedTridiagonal,
    c: f64,
}

impl ShiftedOperator for ScaledInverse<'_> {
    fn order(&self) -> usize {
        self.at.n()
    }

    fn apply_left(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        out.assign(&x);
        self.at.solve_shifted_rows(0.0, out.view_mut())?;
        Zip::from(&mut out)
            .and(&x)
            .for_each(|o, &v| *o = self.c * *o - s * v);
        Ok(())
    }

    fn solve_left(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        if s == 0.0 {
            self.at
                .apply_shifted_rows(0.0, x.to_owned().view(), x.view_mut());
            x.mapv_inplace(|v| v / self.c);
            return Ok(());
        }
        let t = x.to_owned();
        self.at.apply_shifted_rows(0.0, t.view(), x.view_mut());
        self.at.solve_shifted_rows(self.c / s, x.view_mut())?;
        x.mapv_inplace(|v| -v / s);
        Ok(())
    }

    fn apply_right(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        out.assign(&x);
        self.at.solve_shifted_cols(0.0, out.view_mut())?;
        Zip::from(&mut out)
            .and(&x)
            .for_each(|o, &v| *o = self.c * *o - s * v);
        Ok(())
    }

    fn solve_right(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        if s == 0.0 {
            self.at
                .apply_shifted_cols(0.0, x.to_owned().view(), x.view_mut());
            x.mapv_inplace(|v| v / self.c);
            return Ok(());
        }
        let t = x.to_owned();
        self.at.apply_shifted_cols(0.0, t.view(), x.view_mut());
        self.at.solve_shifted_cols(self.c / s, x.view_mut())?;
        x.mapv_inplace(|v| -v / s);
        Ok(())
    }
}

/// Schedules and operators shared by all three levels.
pub struct CubeSolver {
    pub n: usize,
    disc: SquareDiscretization,
    neg_at: StridedTridiagonal,
    delta: f64,
    eps_outer: f64,
    eps_middle: f64,
    eps_inner: f64,
}

impl CubeSolver {
    /// `eps` is split as `ε/4` (outer), `ε/4` (middle) and [`EPS_INNER`].
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        Self::with_guard(n, eps, CUBE_N_MAX)
    }

    pub fn with_guard(n: usize, eps: f64, n_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("solve_cube", "n must be at least 1"));
        }
        if n > n_max {
            return Err(Error::SizeGuard(format!(
                "cube solver limited to n ≤ {n_max}, got {n}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(
                "solve_cube",
                format!("eps = {eps} must lie in (0, 1)"),
            ));
        }
        let disc = assemble(n)?;
        let neg_at = disc.a_tilde.scaled(-1.0);
        Ok(Self {
            n,
            disc,
            neg_at,
            delta: spectral_gap(n),
            eps_outer: eps / 4.0,
            eps_middle: eps / 4.0,
            eps_inner: EPS_INNER,
        })
    }

    fn at(&self) -> &StridedTridiagonal {
        &self.disc.a_tilde
    }

    /// `Σ` of the symmetrized Kronecker terms selected by `ops`.
    fn apply_sym(&self, ops: &[CubeOp], x: &Array3<f64>) -> Array3<f64> {
        let mut out = Array3::zeros(x.raw_dim());
        for &op in ops {
            out += &map_slices(x, op.free_axis(), |s, o| pair(self.at(), s, o));
        }
        out
    }

    /// Solves `(op + cI) Y = G` in place, one inner ADI per slice; `c > 0`.
    fn solve_shifted_term(&self, op: CubeOp, c: f64, g: &mut Array3<f64>) -> Result<usize> {
        let wrap = |e: Error| Error::Nested {
            level: "inner",
            source: Box::new(e),
        };
        if !(c > 0.0) {
            return Err(wrap(Error::domain(
                "solve_cube",
                format!("inner shift {c:e} must be positive"),
            )));
        }
        let iv = SpectralIntervals::new(-c / self.delta, -c, self.delta, 1.0).map_err(wrap)?;
        let schedule = adi_shifts(&iv, self.eps_inner).map_err(wrap)?;
        let a = ScaledInverse { at: self.at(), c };
        let prob = SylvesterProblem {
            a: &a,
            b: &self.neg_at,
        };
        try_map_slices(g, op.free_axis(), |s| {
            self.at().solve_shifted_rows(0.0, s.view_mut())?;
            *s = adi_solve(&prob, s, &schedule)?;
            Ok(())
        })
        .map_err(wrap)?;
        Ok(schedule.len())
    }

    fn outer_schedule(&self) -> Result<ShiftSchedule> {
        let d2 = self.delta * self.delta;
        // −(D_xx + D_yy) ∈ [−2, −2δ²], D_zz ∈ [δ², 1], each widened ×2
        adi_shifts(
            &SpectralIntervals::new(-4.0, -d2, d2 / 2.0, 2.0)?,
            self.eps_outer,
        )
    }

    fn middle_schedule(&self, h: f64) -> Result<ShiftSchedule> {
        let d2 = self.delta * self.delta;
        let (lo, hi) = (d2 + h, 1.0 + h);
        adi_shifts(
            &SpectralIntervals::new(-2.0 * hi, -lo / 2.0, lo / 2.0, 2.0 * hi)?,
            self.eps_middle,
        )
    }

    /// Solves the symmetrized system `(D_xx + D_yy + D_zz) X̃ = F̃`.
    pub fn solve_symmetric(&self, f: &Array3<f64>) -> Result<(Array3<f64>, usize)> {
        check_cube(f, self.n)?;
        let schedule = self.outer_schedule()?;
        let neg_f = f.mapv(|v| -v);
        let x =
            adi_solve(&OuterSplit { s: self }, &neg_f, &schedule).map_err(|e| Error::Nested {
                level: "outer",
                source: Box::new(e),
            })?;
        Ok((x, schedule.len()))
    }

    /// `‖(D_xx + D_yy + D_zz) X − F̂‖ / ‖F̂‖` in the original coordinates.
    pub fn residual(&self, x: &Array3<f64>, fhat: &Array3<f64>) -> Result<f64> {
        let mut r = -fhat;
        for op in [CubeOp::Dxx, CubeOp::Dyy, CubeOp::Dzz] {
            r += &apply_kron(op, x)?;
        }
        Ok(frobenius(&r) / frobenius(fhat).max(f64::MIN_POSITIVE))
    }
}

struct OuterSplit<'a> {
    s: &'a CubeSolver,
}

impl AdiSplit<Ix3> for OuterSplit<'_> {
    // A = −(D_xx + D_yy)
    fn apply_a(&self, s: f64, x: &Array3<f64>, out: &mut Array3<f64>) -> Result<()> {
        let t = self.s.apply_sym(&[CubeOp::Dxx, CubeOp::Dyy], x);
        Zip::from(out)
            .and(&t)
            .and(x)
            .for_each(|o, &t, &x| *o = -t - s * x);
        Ok(())
    }

    fn solve_a(&self, s: f64, x: &mut Array3<f64>) -> Result<()> {
        let h = s / 2.0;
        let schedule = self.s.middle_schedule(h)?;
        let y =
            adi_solve(&MiddleSplit { s: self.s, h }, x, &schedule).map_err(|e| Error::Nested {
                level: "middle",
                source: Box::new(e),
            })?;
        x.assign(&y);
        Ok(())
    }

    // B = D_zz
    fn apply_b(&self, s: f64, x: &Array3<f64>, out: &mut Array3<f64>) -> Result<()> {
        let t = self.s.apply_sym(&[CubeOp::Dzz], x);
        Zip::from(out)
            .and(&t)
            .and(x)
            .for_each(|o, &t, &x| *o = t - s * x);
        Ok(())
    }

    fn solve_b(&self, s: f64, x: &mut Array3<f64>) -> Result<()> {
        self.s.solve_shifted_term(CubeOp::Dzz, -s, x).map(|_| ())
    }
}

/// `A₂ = −(D_xx + h)`, `B₂ = D_yy + h`.
struct MiddleSplit<'a> {
    s: &'a CubeSolver,
    h: f64,
}

impl AdiSplit<Ix3> for MiddleSplit<'_> {
    fn apply_a(&self, t: f64, x: &Array3<f64>, out: &mut Array3<f64>) -> Result<()> {
        let d = self.s.apply_sym(&[CubeOp::Dxx], x);
        Zip::from(out)
            .and(&d)
            .and(x)
            .for_each(|o, &d, &x| *o = -d - (self.h + t) * x);
        Ok(())
    }

    fn solve_a(&self, t: f64, x: &mut Array3<f64>) -> Result<()> {
        x.mapv_inplace(|v| -v);
        self.s
            .solve_shifted_term(CubeOp::Dxx, self.h + t, x)
            .map(|_| ())
    }

    fn apply_b(&self, t: f64, x: &Array3<f64>, out: &mut Array3<f64>) -> Result<()> {
        let d = self.s.apply_sym(&[CubeOp::Dyy], x);
        Zip::from(out)
            .and(&d)
            .and(x)
            .for_each(|o, &d, &x| *o = d + (self.h - t) * x);
        Ok(())
    }

    fn solve_b(&self, t: f64, x: &mut Array3<f64>) -> Result<()> {
        self.s
            .solve_shifted_term(CubeOp::Dyy, self.h - t, x)
            .map(|_| ())
    }
}

/// Converts every axis of a cubic tensor between bases.
pub fn convert_tensor(x: &Array3<f64>, from: BasisTag, to: BasisTag) -> Result<Array3<f64>> {
    let mut out = x.clone();
    for axis in 0..3 {
        // slice along a different axis so `axis` is one of the two remaining
        let (slice_axis, inner) = if axis == 0 {
            (2, Axis(0))
        } else {
            (0, Axis(axis - 1))
        };
        try_map_slices(&mut out, slice_axis, |s| {
            *s = convert_axis(s.view(), inner, from, to)?;
            Ok(())
        })?;
    }
    Ok(out)
}

/// Chebyshev coefficients of `f(x, y, z)` sampled on the `n³` Chebyshev grid, axes `(x, y, z)`.
pub fn chebyshev_from_fn(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Array3<f64> {
    let p = cheb_points(n);
    let samples = Array3::from_shape_fn((n, n, n), |(i, j, k)| f(p[i], p[j], p[k]));
    chebyshev_from_samples(&samples)
}

pub fn chebyshev_from_samples(samples: &Array3<f64>) -> Array3<f64> {
    let n = samples.len_of(Axis(0));
    let dct = Dct1::new(n);
    let mut data = samples.clone();
    for ax in 0..3 {
        for mut lane in data.lanes_mut(Axis(ax)) {
            let c = dct.values_to_coeffs(&lane.to_vec());
            lane.iter_mut().zip(c).for_each(|(d, v)| *d = v);
        }
    }
    data
}

#[derive(Debug, Clone)]
pub struct CubeSolution {
    /// Weighted C̃ coefficients, axes `(x, y, z)`.
    pub x: CoeffTensor3D,
}

impl CubeSolution {
    pub fn evaluate(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(x.abs() <= 1.0 && y.abs() <= 1.0 && z.abs() <= 1.0) {
            return Err(Error::domain(
                "evaluate",
                format!("({x}, {y}, {z}) lies outside the cube"),
            ));
        }
        let planes: Vec<f64> = self
            .x
            .data
            .axis_iter(Axis(0))
            .map(|p| {
                let inner: Vec<f64> = p
                    .rows()
                    .into_iter()
                    .map(|r| ultra_series(&r.to_vec(), z))
                    .collect();
                ultra_series(&inner, y)
            })
            .collect();
        Ok((1.0 - x * x) * (1.0 - y * y) * (1.0 - z * z) * ultra_series(&planes, x))
    }

    /// Chebyshev coefficients of `u`, size `(n+2)³`.
    pub fn to_chebyshev(&self) -> Result<CoeffTensor3D> {
        let n = self.x.data.len_of(Axis(0));
        let m = build_m(n + 2);
        let mut p = Array3::zeros((n + 2, n + 2, n + 2));
        p.slice_mut(ndarray::s![..n, ..n, ..n]).assign(&self.x.data);
        for ax in 0..3 {
            for mut lane in p.lanes_mut(Axis(ax)) {
                let v = m.matvec(&lane.to_vec());
                lane.iter_mut().zip(v).for_each(|(d, v)| *d = v);
            }
        }
        let data = convert_tensor(&p, BasisTag::UltraC32, BasisTag::ChebyshevT)?;
        Ok(CoeffTensor3D {
            data,
            basis: [BasisTag::ChebyshevT; 3],
        })
    }
}

/// Solves for `f` given as coefficients in any polynomial basis, axes `(x, y, z)`.
pub fn solve_cube(f: &CoeffTensor3D, eps: f64) -> Result<(CubeSolution, SolveReport)> {
    let (n, n1, n2) = f.data.dim();
    if n != n1 || n1 != n2 {
        return Err(Error::Shape(format!(
            "cube rhs must be cubic, got {:?}",
            f.data.dim()
        )));
    }
    if f.basis.iter().any(|b| *b != f.basis[0]) {
        return Err(Error::domain("solve_cube", "mixed bases are not supported"));
    }
    let mut report = SolveReport::new("cube", n, eps);
    let solver = report.time("assemble", || CubeSolver::new(n, eps))?;
    let fu = report.time("transform_in", || {
        convert_tensor(&f.data, f.basis[0], BasisTag::UltraC32)
    })?;
    let (d, ds) = (&solver.disc.d, &solver.disc.ds);
    let fhat = Array3::from_shape_fn(fu.raw_dim(), |(i, j, k)| {
        fu[[i, j, k]] / (d[i] * d[j] * d[k])
    });
    let ftil = Array3::from_shape_fn(fu.raw_dim(), |(i, j, k)| {
        fhat[[i, j, k]] / (ds[i] * ds[j] * ds[k])
    });
    let (xt, iters) = report.time("adi", || solver.solve_symmetric(&ftil))?;
    let x = Array3::from_shape_fn(xt.raw_dim(), |(i, j, k)| {
        xt[[i, j, k]] * ds[i] * ds[j] * ds[k]
    });
    report.iterations = iters;
    report.residual = report.time("residual", || solver.residual(&x, &fhat))?;
    report.notes.push("experimental nested ADI".into());
    Ok((
        CubeSolution {
            x: CoeffTensor3D {
                data: x,
                basis: [BasisTag::UltraC32; 3],
            },
        },
        report,
    ))
}

/// Solves for samples on the `n³` Chebyshev grid, axes `(x, y, z)` as in [`chebyshev_from_fn`].
pub fn solve_cube_samples(samples: &Array3<f64>, eps: f64) -> Result<(CubeSolution, SolveReport)> {
    let (n, n1, n2) = samples.dim();
    if n != n1 || n1 != n2 || n == 0 {
        return Err(Error::Shape(format!(
            "cube samples must be cubic, got {:?}",
            samples.dim()
        )));
    }
    let mut secs = 0.0;
    let data = {
        let t = std::time::Instant::now();
        let c = chebyshev_from_samples(samples);
        secs += t.elapsed().as_secs_f64();
        c
    };
    let (sol, mut report) = solve_cube(
        &CoeffTensor3D {
            data,
            basis: [BasisTag::ChebyshevT; 3],
        },
        eps,
    )?;
    *report.seconds.entry("transform_in".into()).or_insert(0.0) += secs;
    Ok((sol, report))
}

/// Dense reference: `(D_xx + D_yy + D_zz) vec X = vec F̂` by LU, for tiny `n`.
pub fn cube_dense_oracle(fhat: &Array3<f64>) -> Result<Array3<f64>> {
    let n = fhat.len_of(Axis(0));
    if n.pow(3) > crate::linalg::DENSE_UNKNOWNS_MAX {
        return Err(Error::SizeGuard(format!(
            "dense cube oracle limited to n³ ≤ 4096, got n = {n}"
        )));
    }
    let a = assemble(n)?.a.to_dense();
    let dense = kron_dense(&a, n);
    let lu = nalgebra::DMatrix::from_fn(n * n * n, n * n * n, |i, j| dense[[i, j]]).lu();
    let b = nalgebra::DVector::from_iterator(n * n * n, fhat.iter().copied());
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular("cube Kronecker system".into()))?;
    Ok(Array3::from_shape_vec((n, n, n), x.iter().copied().collect()).expect("shape"))
}

/// `D_xx + D_yy + D_zz` as a dense matrix on row-major `vec X` (index `i n² + j n + k`).
fn kron_dense(a: &Array2<f64>, n: usize) -> Array2<f64> {
    let id = Array2::<f64>::eye(n);
    let k3 = |p: &Array2<f64>, q: &Array2<f64>, r: &Array2<f64>| {
        let mut out = Array2::zeros((n * n * n, n * n * n));
        for ((i, i2), &pv) in p.indexed_iter() {
            for ((j, j2), &qv) in q.indexed_iter() {
                for ((k, k2), &rv) in r.indexed_iter() {
                    out[[i * n * n + j * n + k, i2 * n * n + j2 * n + k2]] = pv * qv * rv;
                }
            }
        }
        out
    };
    k3(&id, a, a) + k3(a, &id, a) + k3(a, a, &id)
}

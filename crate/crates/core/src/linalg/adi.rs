//! The ADI iteration for `AX − XB = F` with precomputed shifts.
//!
//! One sweep, starting from `X₀ = 0`:
//!
//! ```text
//! X_{j+1/2} (B − p_j I) = F − (A − p_j I) X_j
//! (A − q_j I) X_{j+1}   = F − X_{j+1/2} (B − q_j I)
//! ```
//!
//! The engine is generic over the array dimension so the nested 3-D solver can reuse it.

use nalgebra::DMatrix;
use ndarray::{Array, Array2, ArrayView2, ArrayViewMut2, Axis, Dimension, Ix2, Zip};
use rayon::prelude::*;

use super::banded::{BandedLu, BandedMatrix};
use super::tridiag::StridedTridiagonal;
use crate::error::{Error, Result};
use crate::zolotarev_shifts::ShiftSchedule;

/// The four shifted actions ADI needs on `A` (left factor) and `B` (right factor).
pub trait AdiSplit<D: Dimension> {
    /// `out = (A − sI) x`
    fn apply_a(&self, s: f64, x: &Array<f64, D>, out: &mut Array<f64, D>) -> Result<()>;
    /// `x ← (A − sI)⁻¹ x`
    fn solve_a(&self, s: f64, x: &mut Array<f64, D>) -> Result<()>;
    /// `out = x (B − sI)`
    fn apply_b(&self, s: f64, x: &Array<f64, D>, out: &mut Array<f64, D>) -> Result<()>;
    /// `x ← x (B − sI)⁻¹`
    fn solve_b(&self, s: f64, x: &mut Array<f64, D>) -> Result<()>;
}

/// Runs one ADI sweep per shift pair. Failures carry the iteration index.
pub fn adi_solve<D, S>(
    ops: &S,
    f: &Array<f64, D>,
    schedule: &ShiftSchedule,
) -> Result<Array<f64, D>>
where
    D: Dimension,
    S: AdiSplit<D> + ?Sized,
{
    let mut x = Array::zeros(f.raw_dim());
    let mut t = Array::zeros(f.raw_dim());
    let wrap = |iteration: usize| {
        move |e: Error| Error::Adi {
            iteration,
            source: Box::new(e),
        }
    };
    for (j, (&p, &q)) in schedule.p.iter().zip(&schedule.q).enumerate() {
        if j == 0 {
            t.assign(f);
        } else {
            ops.apply_a(p, &x, &mut t).map_err(wrap(j))?;
            Zip::from(&mut t).and(f).par_for_each(|t, &f| *t = f - *t);
        }
        ops.solve_b(p, &mut t).map_err(wrap(j))?;
        ops.apply_b(q, &t, &mut x).map_err(wrap(j))?;
        Zip::from(&mut x).and(f).par_for_each(|x, &f| *x = f - *x);
        ops.solve_a(q, &mut x).map_err(wrap(j))?;
    }
    Ok(x)
}

/// A matrix that can act, shifted, from the left or the right of a 2-D block.
pub trait ShiftedOperator: Sync {
    fn order(&self) -> usize;
    /// `out = (T − sI) x`
    fn apply_left(&self, s: f64, x: ArrayView2<f64>, out: ArrayViewMut2<f64>) -> Result<()>;
    /// `x ← (T − sI)⁻¹ x`
    fn solve_left(&self, s: f64, x: ArrayViewMut2<f64>) -> Result<()>;
    /// `out = x (T − sI)`
    fn apply_right(&self, s: f64, x: ArrayView2<f64>, out: ArrayViewMut2<f64>) -> Result<()>;
    /// `x ← x (T − sI)⁻¹`
    fn solve_right(&self, s: f64, x: ArrayViewMut2<f64>) -> Result<()>;
}

/// `AX − XB = F` with `A` and `B` given as shifted operators.
pub struct SylvesterProblem<'a> {
    pub a: &'a dyn ShiftedOperator,
    pub b: &'a dyn ShiftedOperator,
}

impl SylvesterProblem<'_> {
    fn check(&self, x: &Array2<f64>) -> Result<()> {
        if x.dim() != (self.a.order(), self.b.order()) {
            return Err(Error::Shape(format!(
                "block is {:?}, operators are {} and {}",
                x.dim(),
                self.a.order(),
                self.b.order()
            )));
        }
        Ok(())
    }

    /// `‖AX − XB − F‖_F / ‖F‖_F`.
    pub fn residual(&self, x: &Array2<f64>, f: &Array2<f64>) -> Result<f64> {
        self.check(x)?;
        let mut ax = Array2::zeros(x.raw_dim());
        let mut xb = Array2::zeros(x.raw_dim());
        self.a.apply_left(0.0, x.view(), ax.view_mut())?;
        self.b.apply_right(0.0, x.view(), xb.view_mut())?;
        Ok(frobenius(&(ax - xb - f)) / frobenius(f).max(f64::MIN_POSITIVE))
    }
}

impl AdiSplit<Ix2> for SylvesterProblem<'_> {
    fn apply_a(&self, s: f64, x: &Array2<f64>, out: &mut Array2<f64>) -> Result<()> {
        self.check(x)?;
        self.a.apply_left(s, x.view(), out.view_mut())
    }

    fn solve_a(&self, s: f64, x: &mut Array2<f64>) -> Result<()> {
        self.check(x)?;
        self.a.solve_left(s, x.view_mut())
    }

    fn apply_b(&self, s: f64, x: &Array2<f64>, out: &mut Array2<f64>) -> Result<()> {
        self.check(x)?;
        self.b.apply_right(s, x.view(), out.view_mut())
    }

    fn solve_b(&self, s: f64, x: &mut Array2<f64>) -> Result<()> {
        self.check(x)?;
        self.b.solve_right(s, x.view_mut())
    }
}

pub fn frobenius<D: Dimension>(x: &Array<f64, D>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl ShiftedOperator for StridedTridiagonal {
    fn order(&self) -> usize {
        self.n()
    }

    fn apply_left(&self, s: f64, x: ArrayView2<f64>, out: ArrayViewMut2<f64>) -> Result<()> {
        self.apply_shifted_rows(s, x, out);
        Ok(())
    }

    fn solve_left(&self, s: f64, x: ArrayViewMut2<f64>) -> Result<()> {
        self.solve_shifted_rows(s, x)
    }

    fn apply_right(&self, s: f64, x: ArrayView2<f64>, out: ArrayViewMut2<f64>) -> Result<()> {
        self.apply_shifted_cols(s, x, out);
        Ok(())
    }

    fn solve_right(&self, s: f64, x: ArrayViewMut2<f64>) -> Result<()> {
        self.solve_shifted_cols(s, x)
    }
}

/// Diagonal matrix.
#[derive(Debug, Clone)]
pub struct DiagonalOperator(pub Vec<f64>);

impl DiagonalOperator {
    fn inv(&self, s: f64) -> Result<Vec<f64>> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if d - s == 0.0 {
                    Err(Error::SingularPivot { index: i })
                } else {
                    Ok(1.0 / (d - s))
                }
            })
            .collect()
    }
}

impl ShiftedOperator for DiagonalOperator {
    fn order(&self) -> usize {
        self.0.len()
    }

    fn apply_left(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        Zip::indexed(&mut out)
            .and(&x)
            .for_each(|(i, _), o, &v| *o = (self.0[i] - s) * v);
        Ok(())
    }

    fn solve_left(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        let inv = self.inv(s)?;
        Zip::indexed(&mut x).for_each(|(i, _), v| *v *= inv[i]);
        Ok(())
    }

    fn apply_right(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        Zip::indexed(&mut out)
            .and(&x)
            .for_each(|(_, j), o, &v| *o = (self.0[j] - s) * v);
        Ok(())
    }

    fn solve_right(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        let inv = self.inv(s)?;
        Zip::indexed(&mut x).for_each(|(_, j), v| *v *= inv[j]);
        Ok(())
    }
}

/// Dense matrix, shifted solves by LU. Intended for small problems and fallbacks.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    a: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(a: ArrayView2<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Shape(format!(
                "dense operator must be square, got {:?}",
                a.dim()
            )));
        }
        Ok(Self { a: to_nalgebra(a) })
    }

    fn shifted(&self, s: f64) -> DMatrix<f64> {
        let mut m = self.a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= s;
        }
        m
    }
}

pub(crate) fn to_nalgebra(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_nalgebra(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

impl ShiftedOperator for DenseOperator {
    fn order(&self) -> usize {
        self.a.nrows()
    }

    fn apply_left(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        out.assign(&from_nalgebra(&(self.shifted(s) * to_nalgebra(x))));
        Ok(())
    }

    fn solve_left(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        let lu = self.shifted(s).lu();
        let sol = lu
            .solve(&to_nalgebra(x.view()))
            .ok_or_else(|| Error::Singular(format!("A − {s}·I")))?;
        x.assign(&from_nalgebra(&sol));
        Ok(())
    }

    fn apply_right(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        out.assign(&from_nalgebra(&(to_nalgebra(x) * self.shifted(s))));
        Ok(())
    }

    fn solve_right(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        let lu = self.shifted(s).transpose().lu();
        let sol = lu
            .solve(&to_nalgebra(x.view()).transpose())
            .ok_or_else(|| Error::Singular(format!("B − {s}·I")))?;
        x.assign(&from_nalgebra(&sol.transpose()));
        Ok(())
    }
}

/// `T = L⁻¹N` for banded `L`, `N`, never formed.
///
/// Shifted solves use `(T − sI)⁻¹ = (N − sL)⁻¹ L`, which stays banded.
#[derive(Debug, Clone)]
pub struct PencilOperator {
    l: BandedMatrix,
    n: BandedMatrix,
    l_lu: BandedLu,
}

impl PencilOperator {
    pub fn new(l: BandedMatrix, n: BandedMatrix) -> Result<Self> {
        if l.n() != n.n() {
            return Err(Error::Shape(format!(
                "pencil orders {} and {}",
                l.n(),
                n.n()
            )));
        }
        let l_lu = BandedLu::factor(&l)?;
        Ok(Self { l, n, l_lu })
    }

    pub fn l(&self) -> &BandedMatrix {
        &self.l
    }

    pub fn n_matrix(&self) -> &BandedMatrix {
        &self.n
    }

    fn pencil(&self, s: f64) -> BandedMatrix {
        self.n.add_scaled(-s, &self.l)
    }

    /// Solves `L x = b`.
    pub fn solve_l(&self, b: &mut [f64]) {
        self.l_lu.solve(b)
    }
}

fn for_each_row<F>(mut x: ArrayViewMut2<f64>, f: F)
where
    F: Fn(&mut [f64]) + Sync,
{
    x.axis_iter_mut(Axis(0))
        .into_par_iter()
        .for_each(|mut row| match row.as_slice_mut() {
            Some(r) => f(r),
            None => {
                let mut buf = row.to_vec();
                f(&mut buf);
                row.iter_mut().zip(buf).for_each(|(d, v)| *d = v);
            }
        });
}

impl ShiftedOperator for PencilOperator {
    fn order(&self) -> usize {
        self.l.n()
    }

    fn apply_left(&self, s: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) -> Result<()> {
        self.pencil(s).left_mul(x, out.view_mut());
        self.l_lu.solve_rows(out);
        Ok(())
    }

    fn solve_left(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        let lu = BandedLu::factor(&self.pencil(s))?;
        let mut lx = Array2::zeros(x.raw_dim());
        self.l.left_mul(x.view(), lx.view_mut());
        lu.solve_rows(lx.view_mut());
        x.assign(&lx);
        Ok(())
    }

    fn apply_right(&self, s: f64, x: ArrayView2<f64>, out: ArrayViewMut2<f64>) -> Result<()> {
        let mut y = x.to_owned();
        for_each_row(y.view_mut(), |r| self.l_lu.solve_transpose(r));
        self.pencil(s).right_mul(y.view(), out);
        Ok(())
    }

    fn solve_right(&self, s: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        let lu = BandedLu::factor(&self.pencil(s))?;
        for_each_row(x.view_mut(), |r| lu.solve_transpose(r));
        let y = x.to_owned();
        self.l.right_mul(y.view(), x);
        Ok(())
    }
}

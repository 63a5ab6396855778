//! Matrices with nonzeros only at offsets `0` and `±s`.
//!
//! `s = 1` is an ordinary tridiagonal matrix. `s = 2` is a pentadiagonal matrix whose
//! first off-diagonals vanish: it decouples into two tridiagonal systems on the even
//! and odd indices, so shifted solves are Thomas eliminations along each chain.

use ndarray::{ArrayView2, ArrayViewMut2, Axis};
use rayon::prelude::*;

use super::banded::BandedMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StridedTridiagonal {
    stride: usize,
    diag: Vec<f64>,
    // upper[i] = T[i, i+s], lower[i] = T[i+s, i]
    upper: Vec<f64>,
    lower: Vec<f64>,
}

// Column chunk width for parallel row-vectorized sweeps.
const CHUNK: usize = 256;

impl StridedTridiagonal {
    pub fn new(stride: usize, diag: Vec<f64>, upper: Vec<f64>, lower: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        let off = n.saturating_sub(stride);
        if stride == 0 || upper.len() != off || lower.len() != off {
            return Err(Error::Shape(format!(
                "stride {stride}, order {n}: off-diagonals need {off} entries, got {} and {}",
                upper.len(),
                lower.len()
            )));
        }
        Ok(Self {
            stride,
            diag,
            upper,
            lower,
        })
    }

    /// Extracts the structure from a banded matrix, rejecting any other nonzero.
    pub fn from_banded(m: &BandedMatrix, stride: usize) -> Result<Self> {
        let n = m.n();
        for i in 0..n {
            for j in m.row_range(i) {
                let d = i.abs_diff(j);
                if d != 0 && d != stride && m.get(i, j) != 0.0 {
                    return Err(Error::Shape(format!(
                        "nonzero at ({i}, {j}) breaks the stride-{stride} structure"
                    )));
                }
            }
        }
        let off = n.saturating_sub(stride);
        Self::new(
            stride,
            (0..n).map(|i| m.get(i, i)).collect(),
            (0..off).map(|i| m.get(i, i + stride)).collect(),
            (0..off).map(|i| m.get(i + stride, i)).collect(),
        )
    }

    pub fn to_banded(&self) -> BandedMatrix {
        let n = self.n();
        let s = self.stride;
        let mut m = BandedMatrix::zeros(n, s.min(n.saturating_sub(1)), s.min(n.saturating_sub(1)));
        for i in 0..n {
            m.set(i, i, self.diag[i]);
        }
        for i in 0..self.upper.len() {
            m.set(i, i + s, self.upper[i]);
            m.set(i + s, i, self.lower[i]);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn transpose(&self) -> Self {
        Self {
            stride: self.stride,
            diag: self.diag.clone(),
            upper: self.lower.clone(),
            lower: self.upper.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let sc = |v: &Vec<f64>| v.iter().map(|x| x * s).collect();
        Self {
            stride: self.stride,
            diag: sc(&self.diag),
            upper: sc(&self.upper),
            lower: sc(&self.lower),
        }
    }

    /// Thomas coefficients for `T − pI`: `(c'_i, 1/w_i)` per index.
    fn sweep(&self, p: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let s = self.stride;
        let scale = self
            .diag
            .iter()
            .map(|d| (d - p).abs())
            .chain(self.upper.iter().chain(&self.lower).map(|v| v.abs()))
            .fold(0.0_f64, f64::max);
        let mut cp = vec![0.0; n];
        let mut winv = vec![0.0; n];
        for i in 0..n {
            let mut w = self.diag[i] - p;
            if i >= s {
                w -= self.lower[i - s] * cp[i - s];
            }
            if w == 0.0 || w.abs() <= 1e-300_f64.max(f64::EPSILON * 1e-3 * scale) || !w.is_finite()
            {
                return Err(Error::SingularPivot { index: i });
            }
            winv[i] = 1.0 / w;
            if i + s < n {
                cp[i] = self.upper[i] * winv[i];
            }
        }
        Ok((cp, winv))
    }

    /// Solves `(T − pI) x = rhs` in place.
    pub fn solve_shifted(&self, p: f64, x: &mut [f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Shape(format!(
                "rhs length {} vs order {}",
                x.len(),
                self.n()
            )));
        }
        let (cp, winv) = self.sweep(p)?;
        self.substitute(&cp, &winv, x);
        Ok(())
    }

    fn substitute(&self, cp: &[f64], winv: &[f64], x: &mut [f64]) {
        let n = self.n();
        let s = self.stride;
        for i in 0..n {
            let mut v = x[i];
            if i >= s {
                v -= self.lower[i - s] * x[i - s];
            }
            x[i] = v * winv[i];
        }
        for i in (0..n.saturating_sub(s)).rev() {
            x[i] -= cp[i] * x[i + s];
        }
    }

    /// Solves `(T − pI) X = R` for a row-major block, vectorized across columns.
    pub fn solve_shifted_rows(&self, p: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        if x.nrows() != self.n() {
            return Err(Error::Shape(format!(
                "block has {} rows, order {}",
                x.nrows(),
                self.n()
            )));
        }
        let (cp, winv) = self.sweep(p)?;
        let n = self.n();
        let s = self.stride;
        x.axis_chunks_iter_mut(Axis(1), CHUNK)
            .into_par_iter()
            .for_each(|mut blk| {
                for i in 0..n {
                    if i >= s {
                        let (prev, mut cur) =
                            blk.multi_slice_mut((ndarray::s![i - s, ..], ndarray::s![i, ..]));
                        cur.scaled_add(-self.lower[i - s], &prev);
                    }
                    blk.row_mut(i).mapv_inplace(|v| v * winv[i]);
                }
                for i in (0..n.saturating_sub(s)).rev() {
                    let (mut cur, next) =
                        blk.multi_slice_mut((ndarray::s![i, ..], ndarray::s![i + s, ..]));
                    cur.scaled_add(-cp[i], &next);
                }
            });
        Ok(())
    }

    /// Solves `X (T − pI) = R`, one row at a time.
    pub fn solve_shifted_cols(&self, p: f64, mut x: ArrayViewMut2<f64>) -> Result<()> {
        if x.ncols() != self.n() {
            return Err(Error::Shape(format!(
                "block has {} columns, order {}",
                x.ncols(),
                self.n()
            )));
        }
        let t = self.transpose();
        let (cp, winv) = t.sweep(p)?;
        x.axis_iter_mut(Axis(0))
            .into_par_iter()
            .for_each(|mut row| match row.as_slice_mut() {
                Some(r) => t.substitute(&cp, &winv, r),
                None => {
                    let mut buf = row.to_vec();
                    t.substitute(&cp, &winv, &mut buf);
                    row.iter_mut().zip(buf).for_each(|(d, v)| *d = v);
                }
            });
        Ok(())
    }

    /// `out = (T − pI) x`.
    pub fn apply_shifted_rows(&self, p: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) {
        let n = self.n();
        let s = self.stride;
        out.axis_chunks_iter_mut(Axis(1), CHUNK)
            .into_par_iter()
            .zip(x.axis_chunks_iter(Axis(1), CHUNK).into_par_iter())
            .for_each(|(mut o, xb)| {
                for i in 0..n {
                    let mut orow = o.row_mut(i);
                    orow.assign(&xb.row(i));
                    orow.mapv_inplace(|v| v * (self.diag[i] - p));
                    if i + s < n {
                        orow.scaled_add(self.upper[i], &xb.row(i + s));
                    }
                    if i >= s {
                        orow.scaled_add(self.lower[i - s], &xb.row(i - s));
                    }
                }
            });
    }

    /// `out = x (T − pI)`.
    pub fn apply_shifted_cols(&self, p: f64, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) {
        let n = self.n();
        let s = self.stride;
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(x.axis_iter(Axis(0)).into_par_iter())
            .for_each(|(mut o, xr)| {
                for j in 0..n {
                    let mut v = xr[j] * (self.diag[j] - p);
                    if j >= s {
                        v += xr[j - s] * self.upper[j - s];
                    }
                    if j + s < n {
                        v += xr[j + s] * self.lower[j];
                    }
                    o[j] = v;
                }
            });
    }
}

/// Solves `(P − pI) x = rhs` for a pentadiagonal `P` with zero first off-diagonals.
pub fn solve_penta_evenodd(pm: &BandedMatrix, p: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let t = StridedTridiagonal::from_banded(pm, 2)?;
    let mut x = rhs.to_vec();
    t.solve_shifted(p, &mut x)?;
    Ok(x)
}

//! Values ↔ coefficients on Chebyshev (second kind) and uniform periodic grids.
//!
//! Chebyshev points are taken in ascending order, `x_k = −cos(πk/(n−1))`, so that
//! sample arrays read left-to-right and bottom-to-top like the domain. Periodic
//! grids are `θ_m = −π + 2πm/n`.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Chebyshev points of the second kind in ascending order.
pub fn cheb_points(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => {
            let m = (n - 1) as f64;
            // sin form keeps the points symmetric to the last bit
            (0..n)
                .map(|k| (std::f64::consts::PI * (2.0 * k as f64 - m) / (2.0 * m)).sin())
                .collect()
        }
    }
}

/// Uniform periodic grid on `[−π, π)`.
pub fn fourier_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|m| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * m as f64 / n as f64)
        .collect()
}

/// Clenshaw evaluation of `Σ c_k T_k(x)`.
pub fn cheb_series(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (1..c.len()).rev() {
        let b = c[k] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Chebyshev coefficients of `u'` from those of `u` (same length, top entry zero).
pub fn cheb_derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    // d_{k−1} = d_{k+1} + 2k c_k, then halve d_0
    for k in (1..n).rev() {
        let above = if k + 1 < n { d[k + 1] } else { 0.0 };
        d[k - 1] = above + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d
}

/// A planned DCT-I of fixed length, evaluated through a complex FFT of length `2(n−1)`.
pub struct Dct1 {
    n: usize,
    fft: Option<Arc<dyn Fft<f64>>>,
}

impl Dct1 {
    pub fn new(n: usize) -> Self {
        let fft = (n >= 2).then(|| FftPlanner::new().plan_fft_forward(2 * (n - 1)));
        Self { n, fft }
    }

    // W_k = v_0 + (−1)^k v_N + 2 Σ_{j=1}^{N−1} v_j cos(πjk/N)
    fn raw(&self, v: &[f64]) -> Vec<f64> {
        let fft = self.fft.as_ref().expect("length ≥ 2");
        let big = 2 * (self.n - 1);
        let mut buf: Vec<Complex64> = (0..big)
            .map(|j| Complex64::new(if j < self.n { v[j] } else { v[big - j] }, 0.0))
            .collect();
        fft.process(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }

    /// Coefficients of the interpolant of samples at ascending Chebyshev points.
    pub fn values_to_coeffs(&self, v: &[f64]) -> Vec<f64> {
        if self.n < 2 {
            return v.to_vec();
        }
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        let nn = (self.n - 1) as f64;
        let mut c: Vec<f64> = self.raw(&rev).into_iter().map(|w| w / nn).collect();
        c[0] *= 0.5;
        c[self.n - 1] *= 0.5;
        c
    }

    /// Samples at ascending Chebyshev points of `Σ c_k T_k`.
    pub fn coeffs_to_values(&self, c: &[f64]) -> Vec<f64> {
        if self.n < 2 {
            return c.to_vec();
        }
        let last = self.n - 1;
        let w = self.raw(c);
        // Σ_k c_k cos(πjk/N) = (W_j + c_0 + (−1)^j c_N) / 2, at x = cos(πj/N)
        let desc: Vec<f64> = (0..self.n)
            .map(|j| 0.5 * (w[j] + c[0] + if j % 2 == 0 { c[last] } else { -c[last] }))
            .collect();
        desc.into_iter().rev().collect()
    }
}

fn map_lanes(a: ArrayView2<f64>, axis: Axis, f: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Array2<f64> {
    let lanes: Vec<Vec<f64>> = a
        .lanes(axis)
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| f(&l.to_vec()))
        .collect();
    let mut out = Array2::zeros(a.raw_dim());
    for (mut dst, src) in out.lanes_mut(axis).into_iter().zip(lanes) {
        dst.assign(&Array1::from(src));
    }
    out
}

/// Samples on the tensor Chebyshev grid (row `i` ↔ `y_i`, column `j` ↔ `x_j`) to the
/// matrix `C` with `f(x, y) ≈ Σ C_ij T_i(y) T_j(x)`.
pub fn cheb_transform_2d(samples: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (ny, nx) = samples.dim();
    if ny == 0 || nx == 0 {
        return Err(Error::Shape("empty sample grid".into()));
    }
    let (dy, dx) = (Dct1::new(ny), Dct1::new(nx));
    let rows = map_lanes(samples, Axis(1), |v| dx.values_to_coeffs(v));
    Ok(map_lanes(rows.view(), Axis(0), |v| dy.values_to_coeffs(v)))
}

/// Inverse of [`cheb_transform_2d`].
pub fn cheb_inverse_2d(coeffs: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (ny, nx) = coeffs.dim();
    if ny == 0 || nx == 0 {
        return Err(Error::Shape("empty coefficient matrix".into()));
    }
    let (dy, dx) = (Dct1::new(ny), Dct1::new(nx));
    let rows = map_lanes(coeffs, Axis(1), |v| dx.coeffs_to_values(v));
    Ok(map_lanes(rows.view(), Axis(0), |v| dy.coeffs_to_values(v)))
}

/// Samples `f(x_j, y_i)` on the tensor Chebyshev grid of size `ny × nx`.
pub fn sample_cheb_2d(ny: usize, nx: usize, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
    let (ys, xs) = (cheb_points(ny), cheb_points(nx));
    Array2::from_shape_fn((ny, nx), |(i, j)| f(xs[j], ys[i]))
}

/// `Σ C_ij T_i(y) T_j(x)`.
pub fn cheb_eval_2d(c: ArrayView2<f64>, x: f64, y: f64) -> f64 {
    let inner: Vec<f64> = c
        .rows()
        .into_iter()
        .map(|r| cheb_series(&r.to_vec(), x))
        .collect();
    cheb_series(&inner, y)
}

/// Index `k ∈ [−n/2, n/2)` of the `m`-th stored Fourier coefficient.
pub fn fourier_wavenumber(m: usize, n: usize) -> i64 {
    m as i64 - (n / 2) as i64
}

/// Coefficients `a_k`, `k = −n/2 … n/2−1`, of the trigonometric interpolant
/// `Σ a_k e^{ikθ}` through samples on [`fourier_points`].
pub fn fourier_forward(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    if n == 0 {
        return vec![];
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // the grid starts at −π, so coefficient k picks up e^{ikπ} = (−1)^k
    (0..n)
        .map(|m| {
            let k = fourier_wavenumber(m, n);
            let z = buf[k.rem_euclid(n as i64) as usize] / n as f64;
            if k % 2 == 0 {
                z
            } else {
                -z
            }
        })
        .collect()
}

/// Inverse of [`fourier_forward`].
pub fn fourier_inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n == 0 {
        return vec![];
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (m, &a) in coeffs.iter().enumerate() {
        let k = fourier_wavenumber(m, n);
        buf[k.rem_euclid(n as i64) as usize] = if k % 2 == 0 { a } else { -a };
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Fourier in `θ` (rows) by Chebyshev in `x` (columns) for samples `f(θ_i, x_j)`.
pub fn fourier_cheb_transform_2d(samples: ArrayView2<f64>) -> Result<Array2<Complex64>> {
    let (nt, nx) = samples.dim();
    if nt == 0 || nx == 0 {
        return Err(Error::Shape("empty sample grid".into()));
    }
    let dx = Dct1::new(nx);
    let rows = map_lanes(samples, Axis(1), |v| dx.values_to_coeffs(v));
    let mut out = Array2::zeros((nt, nx));
    for j in 0..nx {
        let col: Vec<Complex64> = rows
            .column(j)
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        out.column_mut(j)
            .assign(&Array1::from(fourier_forward(&col)));
    }
    Ok(out)
}

/// Inverse of [`fourier_cheb_transform_2d`], returning the real part of the samples.
pub fn fourier_cheb_inverse_2d(coeffs: ArrayView2<Complex64>) -> Result<Array2<f64>> {
    let (nt, nx) = coeffs.dim();
    if nt == 0 || nx == 0 {
        return Err(Error::Shape("empty coefficient matrix".into()));
    }
    let mut re = Array2::zeros((nt, nx));
    for j in 0..nx {
        let vals = fourier_inverse(&coeffs.column(j).to_vec());
        re.column_mut(j)
            .assign(&Array1::from_iter(vals.iter().map(|z| z.re)));
    }
    let dx = Dct1::new(nx);
    Ok(map_lanes(re.view(), Axis(1), |v| dx.coeffs_to_values(v)))
}

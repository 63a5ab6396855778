//! Coefficient conversions between Chebyshev, Legendre and C̃^(3/2) expansions.
//!
//! Legendre ↔ C̃ is banded and O(n). Chebyshev ↔ Legendre uses the explicit
//! O(n²) connection matrices built from `Λ(z) = Γ(z+½)/Γ(z+1)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisTag {
    ChebyshevT,
    LegendreP,
    UltraC32,
    FourierComplex,
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisTag::ChebyshevT => "chebyshev",
            BasisTag::LegendreP => "legendre",
            BasisTag::UltraC32 => "ultra32",
            BasisTag::FourierComplex => "fourier",
        })
    }
}

impl FromStr for BasisTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chebyshev" | "chebyshevt" | "cheb" => Ok(BasisTag::ChebyshevT),
            "legendre" | "legendrep" | "leg" => Ok(BasisTag::LegendreP),
            "ultra32" | "ultrac32" | "ultra" => Ok(BasisTag::UltraC32),
            "fourier" | "fouriercomplex" => Ok(BasisTag::FourierComplex),
            other => Err(Error::Parse(format!("unknown basis tag `{other}`"))),
        }
    }
}

/// `Λ(k/2)` for `k = 0..len`.
fn lambda_half(len: usize) -> Vec<f64> {
    let mut l = vec![0.0; len.max(2)];
    l[0] = std::f64::consts::PI.sqrt();
    l[1] = 2.0 / l[0];
    for k in 2..l.len() {
        // Λ(z+1) = Λ(z)(z+½)/(z+1) with z = (k−2)/2
        let z = (k - 2) as f64 / 2.0;
        l[k] = l[k - 2] * (z + 0.5) / (z + 1.0);
    }
    l
}

/// Dense `n × n` matrix taking Legendre to Chebyshev coefficients (upper triangular).
pub fn leg2cheb_matrix(n: usize) -> Array2<f64> {
    let lam = lambda_half(2 * n);
    let mut a = Array2::zeros((n, n));
    for k in 0..n {
        for j in (k % 2..=k).step_by(2) {
            let mut v = 2.0 / std::f64::consts::PI * lam[k - j] * lam[k + j];
            if j == 0 {
                v *= 0.5;
            }
            a[[j, k]] = v;
        }
    }
    a
}

/// Dense `n × n` matrix taking Chebyshev to Legendre coefficients (upper triangular).
pub fn cheb2leg_matrix(n: usize) -> Array2<f64> {
    let lam = lambda_half(2 * n + 2);
    let mut a = Array2::zeros((n, n));
    for k in 0..n {
        // Λ(k) sits at index 2k
        a[[k, k]] = if k == 0 {
            1.0
        } else {
            std::f64::consts::PI.sqrt() / (2.0 * lam[2 * k])
        };
        for j in (k + 2..n).step_by(2) {
            let (jf, kf) = (j as f64, k as f64);
            a[[k, j]] =
                -jf * (kf + 0.5) / ((jf + kf + 1.0) * (jf - kf)) * lam[j - k - 2] * lam[j + k - 1];
        }
    }
    a
}

fn s_coef(n: usize) -> f64 {
    let n = n as f64;
    ((n + 1.0) * (n + 2.0) / (n + 1.5)).sqrt()
}

fn t_coef(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n = n as f64;
    ((n - 1.0) * n / (n - 0.5)).sqrt()
}

// (2m+1) P_m = P'_{m+1} − P'_{m−1} = C_m − C_{m−2} = s_m C̃_m − t_m C̃_{m−2}
fn leg2ultra(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|m| {
            let hi = if m + 2 < n {
                a[m + 2] * t_coef(m + 2) / (2 * m + 5) as f64
            } else {
                0.0
            };
            a[m] * s_coef(m) / (2 * m + 1) as f64 - hi
        })
        .collect()
}

fn ultra2leg(b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut a = vec![0.0; n];
    for m in (0..n).rev() {
        let hi = if m + 2 < n {
            a[m + 2] * t_coef(m + 2) / (2 * m + 5) as f64
        } else {
            0.0
        };
        a[m] = (b[m] + hi) * (2 * m + 1) as f64 / s_coef(m);
    }
    a
}

fn dense_apply(mat: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    mat.dot(&ndarray::ArrayView1::from(x)).to_vec()
}

/// Converts a single coefficient vector between the polynomial bases.
pub fn convert(coeffs: &[f64], from: BasisTag, to: BasisTag) -> Result<Vec<f64>> {
    use BasisTag::*;
    if from == to {
        return Ok(coeffs.to_vec());
    }
    let n = coeffs.len();
    Ok(match (from, to) {
        (LegendreP, UltraC32) => leg2ultra(coeffs),
        (UltraC32, LegendreP) => ultra2leg(coeffs),
        (ChebyshevT, LegendreP) => dense_apply(&cheb2leg_matrix(n), coeffs),
        (LegendreP, ChebyshevT) => dense_apply(&leg2cheb_matrix(n), coeffs),
        (ChebyshevT, UltraC32) => leg2ultra(&dense_apply(&cheb2leg_matrix(n), coeffs)),
        (UltraC32, ChebyshevT) => dense_apply(&leg2cheb_matrix(n), &ultra2leg(coeffs)),
        _ => {
            return Err(Error::domain(
                "convert",
                format!("no conversion from {from} to {to}"),
            ))
        }
    })
}

/// Applies a basis change along one axis of a 2-D array (axis 0 = rows index y, axis 1 = columns index x).
pub fn convert_axis(
    a: ArrayView2<f64>,
    axis: Axis,
    from: BasisTag,
    to: BasisTag,
) -> Result<Array2<f64>> {
    use BasisTag::*;
    if from == to {
        return Ok(a.to_owned());
    }
    let len = a.len_of(axis);
    let dense = match (from, to) {
        (ChebyshevT, LegendreP) | (ChebyshevT, UltraC32) => Some(cheb2leg_matrix(len)),
        (LegendreP, ChebyshevT) | (UltraC32, ChebyshevT) => Some(leg2cheb_matrix(len)),
        (LegendreP, UltraC32) | (UltraC32, LegendreP) => None,
        _ => {
            return Err(Error::domain(
                "convert",
                format!("no conversion from {from} to {to}"),
            ))
        }
    };
    // work column-wise on axis 0 so that dense steps are a single matrix product
    let mut w = if axis == Axis(0) {
        a.to_owned()
    } else {
        a.t().to_owned()
    };
    let banded = |w: &mut Array2<f64>, f: fn(&[f64]) -> Vec<f64>| {
        let cols: Vec<Vec<f64>> = w
            .axis_iter(Axis(1))
            .into_par_iter()
            .map(|c| f(&c.to_vec()))
            .collect();
        for (j, c) in cols.into_iter().enumerate() {
            w.column_mut(j).assign(&ndarray::Array1::from(c));
        }
    };
    match (from, to) {
        (LegendreP, UltraC32) => banded(&mut w, leg2ultra),
        (UltraC32, LegendreP) => banded(&mut w, ultra2leg),
        (ChebyshevT, LegendreP) | (LegendreP, ChebyshevT) => w = dense.unwrap().dot(&w),
        (ChebyshevT, UltraC32) => {
            w = dense.unwrap().dot(&w);
            banded(&mut w, leg2ultra);
        }
        (UltraC32, ChebyshevT) => {
            banded(&mut w, ultra2leg);
            w = dense.unwrap().dot(&w);
        }
        _ => unreachable!(),
    }
    Ok(if axis == Axis(0) { w } else { w.t().to_owned() })
}

/// `Σ a_j P_j(x)` by the three-term recurrence.
pub fn legendre_series(a: &[f64], x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    let mut s = 0.0;
    for (j, c) in a.iter().enumerate() {
        if j == 0 {
            s += c * p0;
        } else {
            if j >= 2 {
                let jf = (j - 1) as f64;
                let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            s += c * p1;
        }
    }
    s
}

//! The normalized ultraspherical polynomials C̃_j^(3/2), orthonormal against `1 − x²`,
//! and their banded operator matrices.

use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;

/// Normalization `C̃_j = c_j · C_j^(3/2)`.
pub fn ultra_norm(j: usize) -> f64 {
    let j = j as f64;
    ((j + 1.5) / ((j + 1.0) * (j + 2.0))).sqrt()
}

/// Jacobi-matrix coefficient in `x C̃_j = β_{j+1} C̃_{j+1} + β_j C̃_{j−1}`.
pub(crate) fn beta(j: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let j = (j - 1) as f64;
    ((j + 1.0) * (j + 3.0) / ((2.0 * j + 3.0) * (2.0 * j + 5.0))).sqrt()
}

fn check_x(op: &'static str, x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(op, format!("x = {x} is outside [-1, 1]")));
    }
    Ok(())
}

/// Value of C̃_j^(3/2)(x).
pub fn ultra_eval(j: usize, x: f64) -> Result<f64> {
    check_x("ultra_eval", x)?;
    // (m+1) C_{m+1} = (2m+3) x C_m − (m+2) C_{m−1}
    let (mut prev, mut cur) = (0.0, 1.0);
    for m in 0..j {
        let m = m as f64;
        let next = ((2.0 * m + 3.0) * x * cur - (m + 2.0) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(ultra_norm(j) * cur)
}

/// Values C̃_0(x), …, C̃_{n−1}(x), from the orthonormal recurrence.
pub fn ultra_values(n: usize, x: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if n == 0 {
        return v;
    }
    v[0] = 3f64.sqrt() / 2.0;
    for j in 1..n {
        let prev2 = if j >= 2 { beta(j - 1) * v[j - 2] } else { 0.0 };
        v[j] = (x * v[j - 1] - prev2) / beta(j);
    }
    v
}

/// Clenshaw evaluation of `Σ a_j C̃_j(x)`.
pub fn ultra_series(a: &[f64], x: f64) -> f64 {
    let n = a.len();
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (0..n).rev() {
        let b = a[k] + x / beta(k + 1) * b1 - beta(k + 1) / beta(k + 2) * b2;
        b2 = b1;
        b1 = b;
    }
    3f64.sqrt() / 2.0 * b1
}

/// Diagonal of `D`, the eigenvalues of `u ↦ ((1−x²)u)''` on C̃_j.
pub fn build_d(n: usize) -> Vec<f64> {
    (0..n).map(|j| -((j * (j + 3) + 2) as f64)).collect()
}

/// `M`: multiplication by `1 − x²` in the C̃ basis, truncated to `n × n`.
pub fn build_m(n: usize) -> BandedMatrix {
    let mut m = BandedMatrix::zeros(n, 2, 2);
    for j in 0..n {
        let jf = j as f64;
        m.set(
            j,
            j,
            2.0 * (jf + 1.0) * (jf + 2.0) / ((2.0 * jf + 1.0) * (2.0 * jf + 5.0)),
        );
        if j + 2 < n {
            let p = (jf + 1.0) * (jf + 2.0) * (jf + 3.0) * (jf + 4.0);
            let v = -(p * (2.0 * jf + 3.0) / (2.0 * jf + 7.0)).sqrt()
                / ((2.0 * jf + 3.0) * (2.0 * jf + 5.0));
            m.set(j, j + 2, v);
            m.set(j + 2, j, v);
        }
    }
    m
}

/// `M_r`: multiplication by `x`, symmetric tridiagonal with zero diagonal.
pub fn build_mr(n: usize) -> BandedMatrix {
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for j in 0..n.saturating_sub(1) {
        let b = beta(j + 1);
        m.set(j, j + 1, b);
        m.set(j + 1, j, b);
    }
    m
}

/// `M_{r²} = I − M`.
pub fn build_mr2(n: usize) -> BandedMatrix {
    BandedMatrix::identity(n).add_scaled(-1.0, &build_m(n))
}

/// `M_{1−r²} D₁`, the first derivative followed by multiplication by `1 − x²`.
///
/// Uses `(1−x²) C_j' = (a_j C_{j−1} − b_j C_{j+1})` with
/// `a_j = (j+2)(j+3)/(2j+3)`, `b_j = j(j+1)/(2j+3)` for the unnormalized family.
pub fn build_m1mr2_d1(n: usize) -> BandedMatrix {
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for j in 0..n {
        let jf = j as f64;
        let cj = ultra_norm(j);
        if j >= 1 {
            let a = (jf + 2.0) * (jf + 3.0) / (2.0 * jf + 3.0);
            m.set(j - 1, j, a * cj / ultra_norm(j - 1));
        }
        if j + 1 < n {
            let b = jf * (jf + 1.0) / (2.0 * jf + 3.0);
            m.set(j + 1, j, -b * cj / ultra_norm(j + 1));
        }
    }
    m
}

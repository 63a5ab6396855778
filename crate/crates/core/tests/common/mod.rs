//! Oracles shared by the integration tests. Nothing here calls into the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights by Newton on the three-term recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (t * pm - pm1) / (t * t - 1.0);
            let step = pm / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Adaptive Simpson on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        50,
    )
}

/// Chebyshev `Σ c_k T_k(x)` by the cosine definition, independent of any recurrence in the crate.
pub fn cheb_cos(c: &[f64], x: f64) -> f64 {
    let t = x.clamp(-1.0, 1.0).acos();
    c.iter()
        .enumerate()
        .map(|(k, v)| v * (k as f64 * t).cos())
        .sum()
}

/// `‖A‖₂` through the largest eigenvalue of `AᵀA`.
pub fn spectral_norm(a: &ndarray::Array2<f64>) -> f64 {
    let m = nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]]);
    m.singular_values().max()
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn oracles_self_check() {
    let (x, w) = gauss_legendre(10);
    let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
    assert!((q - 2.0 / 19.0).abs() < 1e-14);
    assert!((simpson(&|t: f64| t.sin(), 0.0, PI, 1e-12) - 2.0).abs() < 1e-10);
    assert!((cheb_cos(&[0.0, 0.0, 1.0], 0.3) - (2.0 * 0.09 - 1.0)).abs() < 1e-15);
}

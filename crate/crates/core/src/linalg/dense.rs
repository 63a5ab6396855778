//! Direct Kronecker solves for small matrix equations.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Largest number of unknowns the Kronecker system may have (a 4096² dense LU, 128 MiB).
pub const DENSE_UNKNOWNS_MAX: usize = 4096;

/// Solves `Σ_k L_k X R_k = F` by LU on the assembled `mn × mn` system.
pub fn generalized_sylvester_dense(
    terms: &[(ArrayView2<f64>, ArrayView2<f64>)],
    f: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    Ok(generalized_sylvester_dense_many(terms, &[f])?
        .pop()
        .expect("one right-hand side"))
}

/// As [`generalized_sylvester_dense`], factoring once for several right-hand sides of the same shape.
pub fn generalized_sylvester_dense_many(
    terms: &[(ArrayView2<f64>, ArrayView2<f64>)],
    rhs: &[ArrayView2<f64>],
) -> Result<Vec<Array2<f64>>> {
    let Some(first) = rhs.first() else {
        return Ok(vec![]);
    };
    let (m, n) = first.dim();
    let size = m * n;
    if size > DENSE_UNKNOWNS_MAX {
        return Err(Error::SizeGuard(format!(
            "{m}×{n} unknowns exceed the dense limit {DENSE_UNKNOWNS_MAX}"
        )));
    }
    if let Some(f) = rhs.iter().find(|f| f.dim() != (m, n)) {
        return Err(Error::Shape(format!(
            "right-hand sides {:?} and {:?}",
            (m, n),
            f.dim()
        )));
    }
    for (l, r) in terms {
        if l.dim() != (m, m) || r.dim() != (n, n) {
            return Err(Error::Shape(format!(
                "term {:?}·X·{:?} does not fit X of shape {:?}",
                l.dim(),
                r.dim(),
                (m, n)
            )));
        }
    }
    // row-major vec: vec(L X R)[(i,j)] = Σ L[i,k] R[l,j] X[k,l]
    let mut k = DMatrix::<f64>::zeros(size, size);
    for (l, r) in terms {
        for i in 0..m {
            for kk in 0..m {
                let lik = l[[i, kk]];
                if lik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    for ll in 0..n {
                        k[(i * n + j, kk * n + ll)] += lik * r[[ll, j]];
                    }
                }
            }
        }
    }
    let scale = k.amax();
    let lu = k.lu();
    let u_min = (0..size)
        .map(|i| lu.u()[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if !(u_min > 1e-14 * scale) {
        return Err(Error::Singular(format!(
            "Kronecker operator has pivot {u_min:e} against scale {scale:e}"
        )));
    }
    rhs.iter()
        .map(|f| {
            let b = DVector::from_iterator(size, f.iter().copied());
            let x = lu
                .solve(&b)
                .ok_or_else(|| Error::Singular("Kronecker operator is singular".into()))?;
            Ok(Array2::from_shape_vec((m, n), x.iter().copied().collect()).expect("shape"))
        })
        .collect()
}

/// Solves `AX − XB = F` through the Kronecker form `(I⊗A − Bᵀ⊗I) vec X = vec F`.
pub fn sylvester_dense_oracle(
    a: ArrayView2<f64>,
    b: ArrayView2<f64>,
    f: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    let im = Array2::eye(a.nrows());
    let in_ = Array2::eye(b.nrows());
    let neg_b = b.mapv(|v| -v);
    generalized_sylvester_dense(&[(a.view(), in_.view()), (im.view(), neg_b.view())], f)
}

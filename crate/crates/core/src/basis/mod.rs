//! C̃^(3/2) machinery, basis conversions and transforms.
//!
//! Index convention, used everywhere: a coefficient matrix entry `(i, j)` multiplies
//! `φ_i(y) φ_j(x)`. Rows run over `y`, columns over `x`.

mod convert;
mod io;
mod transform;
mod ultra;

use ndarray::{Array2, Array3, Axis};

pub use convert::{
    cheb2leg_matrix, convert, convert_axis, leg2cheb_matrix, legendre_series, BasisTag,
};
pub use io::{
    read_coeffs, read_grid, read_grid3, read_tensor, read_tensor_complex, write_coeffs, write_grid,
    write_grid3, write_tensor, write_tensor_complex,
};
pub use transform::{
    cheb_derivative, cheb_eval_2d, cheb_inverse_2d, cheb_points, cheb_series, cheb_transform_2d,
    fourier_cheb_inverse_2d, fourier_cheb_transform_2d, fourier_forward, fourier_inverse,
    fourier_points, fourier_wavenumber, sample_cheb_2d, Dct1,
};
pub use ultra::{
    build_d, build_m, build_m1mr2_d1, build_mr, build_mr2, ultra_eval, ultra_norm, ultra_series,
    ultra_values,
};

use crate::error::Result;

/// Coefficients of a bivariate expansion; `data[[i, j]]` multiplies `φ_i(y) φ_j(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix2D<T = f64> {
    pub data: Array2<T>,
    pub basis_x: BasisTag,
    pub basis_y: BasisTag,
}

impl CoeffMatrix2D<f64> {
    pub fn new(data: Array2<f64>, basis_x: BasisTag, basis_y: BasisTag) -> Self {
        Self {
            data,
            basis_x,
            basis_y,
        }
    }

    /// Both dimensions in the same basis.
    pub fn square(data: Array2<f64>, basis: BasisTag) -> Self {
        Self::new(data, basis, basis)
    }

    /// Chebyshev coefficients of the interpolant of `f` on the `n × n` Chebyshev grid.
    pub fn chebyshev_from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let samples = sample_cheb_2d(n, n, f);
        Ok(Self::square(
            cheb_transform_2d(samples.view())?,
            BasisTag::ChebyshevT,
        ))
    }

    /// Re-expands both dimensions in `to`.
    pub fn converted(&self, to: BasisTag) -> Result<Self> {
        let cols = convert_axis(self.data.view(), Axis(1), self.basis_x, to)?;
        let data = convert_axis(cols.view(), Axis(0), self.basis_y, to)?;
        Ok(Self::square(data, to))
    }
}

/// Trivariate coefficients; `data[[i, j, k]]` multiplies `φ_i(d0) φ_j(d1) φ_k(d2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor3D<T = f64> {
    pub data: Array3<T>,
    pub basis: [BasisTag; 3],
}

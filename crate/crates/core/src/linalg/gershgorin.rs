//! Eigenvalue enclosures from Gershgorin discs of a diagonally scaled matrix.

use super::banded::BandedMatrix;
use crate::error::{Error, Result};

/// Real hull `[min(c_i − R_i), max(c_i + R_i)]` of the Gershgorin discs of `S⁻¹MS`,
/// where `S = diag(scaling)`.
pub fn gershgorin_intervals(m: &BandedMatrix, scaling: &[f64]) -> Result<(f64, f64)> {
    if scaling.len() != m.n() {
        return Err(Error::Shape(format!(
            "{} scaling entries for order {}",
            scaling.len(),
            m.n()
        )));
    }
    if let Some(i) = scaling.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::domain(
            "gershgorin_intervals",
            format!("scaling[{i}] must be positive"),
        ));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.n() {
        let radius: f64 = m
            .row_range(i)
            .filter(|&j| j != i)
            .map(|j| m.get(i, j).abs() * scaling[j] / scaling[i])
            .sum();
        let c = m.get(i, i);
        lo = lo.min(c - radius);
        hi = hi.max(c + radius);
    }
    Ok((lo, hi))
}

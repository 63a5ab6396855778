//! Banded solvers, the ADI engine and small dense oracles.

pub mod adi;
pub mod banded;
pub mod dense;
pub mod gershgorin;
pub mod tridiag;

pub use adi::{
    adi_solve, frobenius, AdiSplit, DenseOperator, DiagonalOperator, PencilOperator,
    ShiftedOperator, SylvesterProblem,
};
pub use banded::{solve_banded, BandedLu, BandedMatrix};
pub use dense::{
    generalized_sylvester_dense, generalized_sylvester_dense_many, sylvester_dense_oracle,
    DENSE_UNKNOWNS_MAX,
};
pub use gershgorin::gershgorin_intervals;
pub use tridiag::{solve_penta_evenodd, StridedTridiagonal};

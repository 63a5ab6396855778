pub mod basis;
pub mod error;
pub mod linalg;
pub mod poisson_cube;
pub mod poisson_cylinder;
pub mod poisson_fd;
pub mod poisson_square;
pub mod report;
pub mod special_functions;
pub mod zolotarev_shifts;

pub use error::{Error, Result};

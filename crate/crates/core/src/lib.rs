pub mod analysis;
pub mod banded;
pub mod basis_matrix;
pub mod chebyshev;
pub mod coeff_matrix;
pub mod error;
pub mod legendre;
pub mod oracle;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod triple_product;

pub use error::{Error, Result};

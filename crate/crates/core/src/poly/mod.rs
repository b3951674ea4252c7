//! Sparse multivariate polynomials.

mod coeff;
mod monomial;
mod polynomial;

pub use coeff::{rational_from_f64, Coeff, Rational};
pub use monomial::{basis_size, monomial_basis, Monomial};
pub use polynomial::{PolyError, Polynomial};

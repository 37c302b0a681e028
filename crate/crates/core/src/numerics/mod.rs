//! Shared numerical kernels.

mod matrix;
mod oracle;
mod qfunc;
mod quadrature;

pub use matrix::{sym_matrix_sqrt, CovarianceFactor};
pub use oracle::{integrate_adaptive, lognormal_expectation_oracle};
pub use qfunc::{q_approx, q_approx_sq, q_exact};
pub use quadrature::{gauss_hermite, QuadratureRule, MAX_ORDER};

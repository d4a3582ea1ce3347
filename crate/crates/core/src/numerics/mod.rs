//! Numerical building blocks: special functions, quadrature, least squares,
//! derivative-free minimization and root bracketing.

pub mod lstsq;
pub mod optimize;
pub mod quadrature;
pub mod special;

//! Special functions and adaptive quadrature.

mod quadrature;
mod special;

pub use quadrature::{
    integrate, integrate_semi_infinite, integrate_semi_infinite_hinted, integrate_singular_power,
    integrate_singular_power_hinted, integrate_with_breaks, Hints, IntegralResult, QuadratureConfig,
};
pub use special::{beta, gamma, is_nonpositive_integer, ln_gamma, reciprocal_gamma, GAMMA_MAX_ARG};

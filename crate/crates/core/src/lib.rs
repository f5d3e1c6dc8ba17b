// Negated float comparisons are how inputs reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference constants keep every digit they were computed to.
#![allow(clippy::excessive_precision)]

pub mod actuarial;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod fracops;
pub mod numerics;
pub mod order_mvt;
pub mod taylor;

pub use distributions::{DistributionModel, DistributionSpec};
pub use error::{Error, Result};

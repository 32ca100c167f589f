//! Piecewise Hölder fields, their norms, and oscillatory integrals.

pub mod field;
pub mod mollifier;
pub mod norms;
pub mod oscint;
pub mod quadrature;

pub use field::{FieldScalar, Observable, PiecewiseField};
pub use mollifier::{mollify, MollifyReport};
pub use norms::{b_norm, holder_norm, holder_seminorm, integral, l1_norm, norm_report, sup_norm, NormReport};
pub use oscint::{oscillatory_integral, OscIntOptions, OscIntResult};

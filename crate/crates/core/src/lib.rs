//! Numerical calculus on Moyal spheres.

// `!(x > 0.0)` style checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod area;
pub mod band_matrix;
pub mod curvature;
pub mod diag_series;
pub mod error;
pub mod figures;
pub mod gauss_bonnet;
pub mod jet;
pub mod par;
pub mod params;
pub mod radial;
pub mod special;
pub mod summation;
pub mod table;
pub mod verify;

pub use diag_series::DiagSeries;
pub use error::{Error, Result};
pub use params::SphereParams;

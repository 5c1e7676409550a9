//! Reactive capacitances, monopole corrections and small-patch asymptotics
//! for mixed Steklov problems on the unit sphere.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod disk_steklov;
pub mod error;
pub mod expansions;
pub mod float;
pub mod io;
pub mod oracle;
pub mod patch_geometry;
pub mod quadrature;
pub mod reactivity;
pub mod specfun;
pub mod sphere_geometry;
pub mod steklov_asym;

pub use error::{Error, Result};
pub use reactivity::Reactivity;

//! Numerical and exact-rational machinery for the degree-2 quantum Birkhoff
//! normal form of the Laplacian along closed geodesics of Zoll surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`surface`]: Zoll metrics of revolution, charts, curvature, exponential map.
//! * [`geodesic`]: closed geodesics sampled on a uniform periodic grid.
//! * [`jacobi`]: fundamental Jacobi solutions, Floquet data, variation fields.
//! * [`weyl`]: polynomial Weyl symbols in `(z, z̄)` and the Moyal star product.
//! * [`expansion`]: the exact semiclassical expansion of the half-density Laplacian.
//! * [`normalform`]: the two conjugation steps and the restricted degree-2 form.
//! * [`identities`]: the integral identities that make the invariants computable.
//! * [`cli`]: configuration, report assembly and the `zollforms` commands.

pub mod cli;
pub mod error;
pub mod expansion;
pub mod geodesic;
pub mod identities;
pub mod jacobi;
pub mod normalform;
pub mod ode;
pub mod scalar;
pub mod spectral;
pub mod surface;
pub mod weyl;

pub use error::{Error, Result};

/// Period of every unit-speed closed geodesic considered here.
pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/surfaces.md")]
    pub struct Surfaces;
    #[doc = include_str!("../../../book/src/jacobi.md")]
    pub struct Jacobi;
    #[doc = include_str!("../../../book/src/weyl.md")]
    pub struct Weyl;
    #[doc = include_str!("../../../book/src/expansion.md")]
    pub struct Expansion;
    #[doc = include_str!("../../../book/src/normal_form.md")]
    pub struct NormalForm;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}

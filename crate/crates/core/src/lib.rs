//! Numerical laboratory for scrambling-based quantum ramp secret sharing.
//!
//! The core is generic over the floating point type ([`Real`], `f32` or
//! `f64`); closed-form Haar averages are also available over exact rationals
//! through [`Field`]. Concrete aliases for the common instantiations live at
//! the crate root.

pub mod analytic;
pub mod error;
pub mod ensembles;
pub mod infotheory;
pub mod io;
pub mod linalg;
pub mod ramp;
pub mod register;
pub mod scalar;
pub mod scrambling;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::{Field, Real, C};

pub type PureState64 = register::PureState<f64>;
pub type PureState32 = register::PureState<f32>;
pub type DensityMatrix64 = register::DensityMatrix<f64>;
pub type DensityMatrix32 = register::DensityMatrix<f32>;
pub type UnitaryMatrix64 = ensembles::UnitaryMatrix<f64>;
pub type UnitaryMatrix32 = ensembles::UnitaryMatrix<f32>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type Rational = num_rational::Ratio<i128>;

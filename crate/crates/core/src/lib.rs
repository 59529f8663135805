//! Homogenized description of periodic double-porosity spin systems:
//! surface tensions from cell problems, the bulk density from periodic
//! minimum problems, and the limit functional.

pub mod connectivity;
pub mod bulk_density;
pub mod error;
pub mod examples;
pub mod exec;
pub mod fixtures;
pub mod gamma_limit;
pub mod ground_state;
pub mod lattice;
pub mod model;
pub mod rational;
pub mod smith;
pub mod spin;
pub mod surface_tension;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::LatticeModel;
pub use rational::Rational;
pub use spin::Spin;

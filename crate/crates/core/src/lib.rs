//! Exact and numerical tools for heat-equation solutions built from
//! polynomial dynamical systems.

pub mod algebra;
pub mod error;
pub mod heatcheck;
pub mod input;
pub mod jetcalc;
pub mod dynsys;
pub mod phi;
pub mod sl2;
pub mod verify;

pub use error::{Error, Result};

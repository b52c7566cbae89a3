//! Fractional eigenvalue, capacity and fatness toolkit for planar domains.
//!
//! Everything numerical is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the common `f64` instantiation.

pub mod capacity;
pub mod config;
pub mod constants;
pub mod error;
pub mod fatness;
pub mod gagliardo;
pub mod geometry;
pub mod linalg;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = geometry::Point<f64>;
pub type Direction = geometry::Direction<f64>;
pub type RasterDomain = geometry::RasterDomain<f64>;
pub type ConvexBody = geometry::ConvexBody<f64>;
pub type GridFunction = gagliardo::GridFunction<f64>;
pub type NonlocalForm = gagliardo::NonlocalForm<f64>;
pub type FractionalOrder = gagliardo::FractionalOrder<f64>;
pub type CapacityResult = capacity::CapacityResult<f64>;
pub type EigResult = spectral::EigResult<f64>;
pub type ConstantsTable = constants::ConstantsTable<f64>;

//! Discrete and analytic Gagliardo seminorms.

pub mod analytic;
pub mod conv;
pub mod directional;
pub mod form;
pub mod stencil;

pub use analytic::{seminorm_1d, seminorm_tensor_2d, tensor_norm2, Profile};
pub use directional::{axis_seminorms, directional_seminorm, Directional};
pub use form::{assemble_1d, assemble_2d, average, GridOperator, NonlocalForm, Operator1d};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RasterDomain;
use crate::scalar::{lit, Real};

/// Fractional order `s ∈ (0, 1)`, optionally required to exceed 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrder<T> {
    pub s: T,
    pub strict_half: bool,
}

impl<T: Real> FractionalOrder<T> {
    pub fn new(s: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidOrder(s.to_f64_(), "s must lie in (0, 1)"));
        }
        Ok(Self { s, strict_half: false })
    }

    pub fn above_half(s: T) -> Result<Self> {
        if !(s > lit(0.5) && s < T::one()) {
            return Err(Error::InvalidOrder(s.to_f64_(), "s must lie in (1/2, 1)"));
        }
        Ok(Self { s, strict_half: true })
    }
}

/// Nodal values on a raster grid, zero outside the supporting mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { nx, ny, values: vec![T::zero(); nx * ny] }
    }

    /// Samples `f` at the nodes where `mask` holds.
    pub fn from_fn<F: Fn(T, T) -> T>(dom: &RasterDomain<T>, mask: &[bool], f: F) -> Self {
        let mut values = vec![T::zero(); dom.nx * dom.ny];
        for j in 0..dom.ny {
            for i in 0..dom.nx {
                let k = dom.index(i, j);
                if mask[k] {
                    let p = dom.node_point(i, j);
                    values[k] = f(p.x, p.y);
                }
            }
        }
        Self { nx: dom.nx, ny: dom.ny, values }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { nx: self.nx, ny: self.ny, values: self.values.iter().map(|&v| v * c).collect() }
    }

    pub fn zip_with<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

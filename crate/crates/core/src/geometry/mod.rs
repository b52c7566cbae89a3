//! Planar raster domains and the geometric quantities the certificates need:
//! inradius, topological order, axis projections and convex-body gauges.

mod convex;
mod distance;
mod projection;
mod raster;
mod topology;

pub use convex::{lipschitz_constants, minkowski_gauge, phi_inverse, phi_map, ConvexBody};
pub use distance::{distance_field, inradius, squared_edt};
pub use projection::{project, project_points, ProjectionResult};
pub use raster::{Puncture, RasterDomain};
pub use topology::{topology_order, TopologyReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn scale(self, t: T) -> Self {
        Self::new(self.x * t, self.y * t)
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }
}

impl<T: Real> std::ops::Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> std::ops::Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

/// A unit vector `ω ∈ 𝕊¹`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction<T> {
    omega: Point<T>,
}

impl<T: Real> Direction<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        let n = x.hypot(y);
        if !(n > T::zero()) {
            return Err(Error::Precondition("direction must be nonzero".into()));
        }
        Ok(Self { omega: Point::new(x / n, y / n) })
    }

    pub fn e1() -> Self {
        Self { omega: Point::new(T::one(), T::zero()) }
    }

    pub fn e2() -> Self {
        Self { omega: Point::new(T::zero(), T::one()) }
    }

    pub fn from_angle(theta: T) -> Self {
        Self { omega: Point::new(theta.cos(), theta.sin()) }
    }

    pub fn omega(&self) -> Point<T> {
        self.omega
    }

    /// `Some(0)` for `e₁`, `Some(1)` for `e₂` (up to sign), `None` otherwise.
    pub fn axis(&self) -> Option<usize> {
        let eps: T = lit(1e-12);
        if self.omega.y.abs() <= eps {
            Some(0)
        } else if self.omega.x.abs() <= eps {
            Some(1)
        } else {
            None
        }
    }
}

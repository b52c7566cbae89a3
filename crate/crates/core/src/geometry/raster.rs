use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// A removed point of the domain, snapped to a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Puncture<T> {
    pub point: Point<T>,
    pub node: (usize, usize),
}

/// Uniform node grid with an inclusion mask.
///
/// Node `(i, j)` sits at `origin + h·(i, j)` and has linear index
/// `j·nx + i`. The outermost ring of nodes is always outside, so grid
/// functions extended by zero are supported strictly inside the raster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterDomain<T> {
    pub origin: Point<T>,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
    pub punctures: Vec<Puncture<T>>,
    pub label: String,
}

impl<T: Real> RasterDomain<T> {
    pub fn new(origin: Point<T>, h: T, nx: usize, ny: usize, mask: Vec<bool>) -> Result<Self> {
        let dom = Self {
            origin,
            h,
            nx,
            ny,
            mask,
            punctures: Vec::new(),
            label: String::new(),
        };
        dom.validate()?;
        Ok(dom)
    }

    /// Rasterises an indicator; the boundary ring is forced outside.
    pub fn from_fn<F: Fn(T, T) -> bool>(origin: Point<T>, h: T, nx: usize, ny: usize, inside: F) -> Result<Self> {
        let mut mask = vec![false; nx * ny];
        for j in 1..ny.saturating_sub(1) {
            for i in 1..nx.saturating_sub(1) {
                let x = origin.x + h * T::from_usize_(i);
                let y = origin.y + h * T::from_usize_(j);
                mask[j * nx + i] = inside(x, y);
            }
        }
        Self::new(origin, h, nx, ny, mask)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > T::zero()) || !self.h.is_finite() {
            return Err(Error::InvalidDomain("h must be positive".into()));
        }
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::InvalidDomain("grid needs at least 3×3 nodes".into()));
        }
        if self.mask.len() != self.nx * self.ny {
            return Err(Error::DimensionMismatch {
                expected: self.nx * self.ny,
                got: self.mask.len(),
            });
        }
        for i in 0..self.nx {
            if self.mask[i] || self.mask[(self.ny - 1) * self.nx + i] {
                return Err(Error::InvalidDomain("boundary ring must be outside".into()));
            }
        }
        for j in 0..self.ny {
            if self.mask[j * self.nx] || self.mask[j * self.nx + self.nx - 1] {
                return Err(Error::InvalidDomain("boundary ring must be outside".into()));
            }
        }
        for p in &self.punctures {
            if !self.mask[self.index(p.node.0, p.node.1)] {
                return Err(Error::InvalidDomain(format!(
                    "puncture at node {:?} is not inside",
                    p.node
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn node_point(&self, i: usize, j: usize) -> Point<T> {
        Point::new(
            self.origin.x + self.h * T::from_usize_(i),
            self.origin.y + self.h * T::from_usize_(j),
        )
    }

    #[inline]
    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.mask[self.index(i, j)]
    }

    /// Mask lookup for signed node coordinates; off-raster nodes are outside.
    #[inline]
    pub fn inside_signed(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny && self.inside(i as usize, j as usize)
    }

    pub fn count_inside(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Nearest node to a point (clamped to the raster).
    pub fn nearest_node(&self, p: Point<T>) -> (usize, usize) {
        let fi = ((p.x - self.origin.x) / self.h).round();
        let fj = ((p.y - self.origin.y) / self.h).round();
        let clamp = |v: T, n: usize| -> usize {
            let v = v.to_f64_();
            if v < 0.0 {
                0
            } else if v > (n - 1) as f64 {
                n - 1
            } else {
                v as usize
            }
        };
        (clamp(fi, self.nx), clamp(fj, self.ny))
    }

    /// Records a removed point, snapped to the nearest node (which must be inside).
    pub fn add_puncture(&mut self, p: Point<T>) -> Result<()> {
        let node = self.nearest_node(p);
        if !self.inside(node.0, node.1) {
            return Err(Error::InvalidDomain(format!(
                "puncture ({}, {}) snaps to an outside node",
                p.x, p.y
            )));
        }
        if !self.punctures.iter().any(|q| q.node == node) {
            self.punctures.push(Puncture { point: p, node });
        }
        Ok(())
    }

    /// Mask of nodes carrying degrees of freedom. Punctures stay active unless
    /// `remove_punctures` is set.
    pub fn active_mask(&self, remove_punctures: bool) -> Vec<bool> {
        let mut m = self.mask.clone();
        if remove_punctures {
            for p in &self.punctures {
                let k = self.index(p.node.0, p.node.1);
                m[k] = false;
            }
        }
        m
    }

    pub fn is_puncture(&self, i: usize, j: usize) -> bool {
        self.punctures.iter().any(|p| p.node == (i, j))
    }

    /// The same raster with every length multiplied by `t > 0`.
    pub fn scaled(&self, t: T) -> Self {
        let mut out = self.clone();
        out.origin = self.origin.scale(t);
        out.h = self.h * t;
        for p in &mut out.punctures {
            p.point = p.point.scale(t);
        }
        out
    }

    pub fn translated(&self, v: Point<T>) -> Self {
        let mut out = self.clone();
        out.origin = self.origin + v;
        for p in &mut out.punctures {
            p.point = p.point + v;
        }
        out
    }

    /// Reflection across the diagonal `x = y`.
    pub fn swap_axes(&self) -> Self {
        let mut mask = vec![false; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                mask[i * self.ny + j] = self.mask[j * self.nx + i];
            }
        }
        Self {
            origin: Point::new(self.origin.y, self.origin.x),
            h: self.h,
            nx: self.ny,
            ny: self.nx,
            mask,
            punctures: self
                .punctures
                .iter()
                .map(|p| Puncture {
                    point: Point::new(p.point.y, p.point.x),
                    node: (p.node.1, p.node.0),
                })
                .collect(),
            label: self.label.clone(),
        }
    }

    /// Embeds the raster in a larger grid with `pad` extra outside nodes per side.
    pub fn padded(&self, pad: usize) -> Self {
        let nx = self.nx + 2 * pad;
        let ny = self.ny + 2 * pad;
        let mut mask = vec![false; nx * ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                mask[(j + pad) * nx + i + pad] = self.mask[j * self.nx + i];
            }
        }
        let shift = self.h * T::from_usize_(pad);
        Self {
            origin: Point::new(self.origin.x - shift, self.origin.y - shift),
            h: self.h,
            nx,
            ny,
            mask,
            punctures: self
                .punctures
                .iter()
                .map(|p| Puncture {
                    point: p.point,
                    node: (p.node.0 + pad, p.node.1 + pad),
                })
                .collect(),
            label: self.label.clone(),
        }
    }

    /// Portable text form: header `frgeo v1 nx ny h ox oy`, `ny` rows of
    /// `0/1` (top row first), then `punctures: x y` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "frgeo v1 {} {} {:e} {:e} {:e}",
            self.nx,
            self.ny,
            self.h.to_f64_(),
            self.origin.x.to_f64_(),
            self.origin.y.to_f64_()
        );
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                s.push(if self.inside(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        for p in &self.punctures {
            let _ = writeln!(s, "punctures: {:e} {:e}", p.point.x.to_f64_(), p.point.y.to_f64_());
        }
        if !self.label.is_empty() {
            let _ = writeln!(s, "label: {}", self.label);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let f: Vec<&str> = header.split_whitespace().collect();
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.into() };
        if f.len() != 7 || f[0] != "frgeo" || f[1] != "v1" {
            return Err(perr(ln, "expected header `frgeo v1 nx ny h ox oy`"));
        }
        let nx: usize = f[2].parse().map_err(|_| perr(ln, "bad nx"))?;
        let ny: usize = f[3].parse().map_err(|_| perr(ln, "bad ny"))?;
        let num = |s: &str| -> Result<T> {
            s.parse::<f64>().map(lit).map_err(|_| perr(ln, "bad number"))
        };
        let h = num(f[4])?;
        let origin = Point::new(num(f[5])?, num(f[6])?);
        let mut mask = vec![false; nx * ny];
        for r in 0..ny {
            let (ln, row) = lines.next().ok_or(perr(ln, "missing mask rows"))?;
            let row = row.trim();
            if row.len() != nx {
                return Err(perr(ln, "mask row has wrong length"));
            }
            let j = ny - 1 - r;
            for (i, c) in row.chars().enumerate() {
                mask[j * nx + i] = match c {
                    '1' => true,
                    '0' => false,
                    _ => return Err(perr(ln, "mask must be 0/1")),
                };
            }
        }
        let mut dom = Self::new(origin, h, nx, ny, mask)?;
        for (ln, line) in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("punctures:") {
                let v: Vec<&str> = rest.split_whitespace().collect();
                if v.len() != 2 {
                    return Err(perr(ln, "puncture needs two coordinates"));
                }
                let p = Point::new(
                    v[0].parse::<f64>().map(lit).map_err(|_| perr(ln, "bad puncture"))?,
                    v[1].parse::<f64>().map(lit).map_err(|_| perr(ln, "bad puncture"))?,
                );
                dom.add_puncture(p)?;
            } else if let Some(rest) = line.strip_prefix("label:") {
                dom.label = rest.trim().to_string();
            } else {
                return Err(perr(ln, "unexpected line"));
            }
        }
        Ok(dom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut d = RasterDomain::<f64>::from_fn(Point::new(-1.0, -1.0), 0.25, 9, 9, |x, y| x * x + y * y < 0.7).unwrap();
        d.add_puncture(Point::new(0.0, 0.0)).unwrap();
        let back = RasterDomain::<f64>::from_text(&d.to_text()).unwrap();
        assert_eq!(back.mask, d.mask);
        assert_eq!(back.punctures, d.punctures);
    }

    #[test]
    fn ring_must_be_outside() {
        let mut mask = vec![false; 9];
        mask[0] = true;
        assert!(RasterDomain::<f64>::new(Point::origin(), 1.0, 3, 3, mask).is_err());
    }

    #[test]
    fn puncture_on_outside_node_rejected() {
        let mut d = RasterDomain::<f64>::from_fn(Point::origin(), 1.0, 5, 5, |_, _| true).unwrap();
        assert!(d.add_puncture(Point::new(0.0, 0.0)).is_err());
        assert!(d.add_puncture(Point::new(2.1, 1.9)).is_ok());
        assert_eq!(d.punctures[0].node, (2, 2));
    }
}

//! Exact, mesh-free description of the stadium `S = R ∪ W`.
//!
//! `R = [-α, α] × [-β, β]` is the central rectangle and the wings `W±` are the
//! half-disks of radius `β` centred at `(±α, 0)` lying outside `R`. The wing
//! coordinate `w = |x| - α` is nonnegative on the wings and vanishes on the
//! gluing lines `R ∩ W`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type Point = [f64; 2];

/// Relative snap tolerance (in units of β) for boundary queries.
pub const BOUNDARY_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StadiumGeometry {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    Rectangle,
    WingPlus,
    WingMinus,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WingZone {
    I,
    II,
    III,
}

/// Which piece of `∂S` a boundary point belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPiece {
    Top,
    Bottom,
    Arc { plus: bool, theta: f64 },
}

impl StadiumGeometry {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(LabError::InvalidGeometry(format!(
                "alpha and beta must be positive and finite, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.alpha * self.beta + std::f64::consts::PI * self.beta * self.beta
    }

    pub fn perimeter(&self) -> f64 {
        4.0 * self.alpha + 2.0 * std::f64::consts::PI * self.beta
    }

    /// Region containing `p`; points on shared boundaries resolve to the inside
    /// tag, and points on `R ∩ W` belong to the rectangle.
    pub fn classify(&self, p: Point) -> RegionTag {
        let [x, y] = p;
        if x.abs() <= self.alpha && y.abs() <= self.beta {
            return RegionTag::Rectangle;
        }
        let b2 = self.beta * self.beta;
        if x > self.alpha && (x - self.alpha).powi(2) + y * y <= b2 {
            RegionTag::WingPlus
        } else if x < -self.alpha && (x + self.alpha).powi(2) + y * y <= b2 {
            RegionTag::WingMinus
        } else {
            RegionTag::Outside
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.classify(p) != RegionTag::Outside
    }

    /// Signed wing coordinate `|x| - α` (negative inside the rectangle).
    pub fn signed_w(&self, p: Point) -> f64 {
        p[0].abs() - self.alpha
    }

    /// `w₊ = max(|x| - α, 0)` on the closure of `S`.
    pub fn weight_w(&self, p: Point) -> Result<f64> {
        if self.classify(p) == RegionTag::Outside && self.boundary_piece(p).is_none() {
            return Err(LabError::Domain(format!("point {p:?} lies outside the stadium")));
        }
        Ok(self.signed_w(p).max(0.0))
    }

    /// Zone of a wing point. Ties report the lower zone.
    pub fn zone(&self, p: Point, lambda: f64, delta: f64) -> Result<WingZone> {
        if !(lambda > 0.0 && delta > 0.0) {
            return Err(LabError::Domain(format!(
                "zone needs lambda > 0 and delta > 0, got lambda={lambda}, delta={delta}"
            )));
        }
        if p[0].abs() < self.alpha || self.classify(p) == RegionTag::Outside {
            return Err(LabError::Domain(format!("point {p:?} is not in a wing")));
        }
        Ok(self.zone_of_w(self.signed_w(p), lambda, delta))
    }

    /// Zone for a given wing coordinate `w ≥ 0`.
    pub fn zone_of_w(&self, w: f64, lambda: f64, delta: f64) -> WingZone {
        let layer = delta / (lambda * lambda);
        if w <= layer {
            WingZone::I
        } else if w <= 0.5 * self.beta {
            WingZone::II
        } else {
            WingZone::III
        }
    }

    /// Locate `p` on `∂S` within the snap tolerance.
    pub fn boundary_piece(&self, p: Point) -> Option<BoundaryPiece> {
        let tol = BOUNDARY_SNAP * self.beta;
        let [x, y] = p;
        if x.abs() <= self.alpha {
            if (y - self.beta).abs() <= tol {
                return Some(BoundaryPiece::Top);
            }
            if (y + self.beta).abs() <= tol {
                return Some(BoundaryPiece::Bottom);
            }
            // Corner points are shared with the arcs and handled above.
            return None;
        }
        let plus = x > 0.0;
        let cx = if plus { self.alpha } else { -self.alpha };
        let (dx, dy) = (x - cx, y);
        let r = dx.hypot(dy);
        if (r - self.beta).abs() <= tol {
            Some(BoundaryPiece::Arc { plus, theta: dy.atan2(dx) })
        } else {
            None
        }
    }

    /// Outward unit normal at a boundary point.
    pub fn boundary_normal(&self, p: Point) -> Result<[f64; 2]> {
        match self.boundary_piece(p) {
            Some(BoundaryPiece::Top) => Ok([0.0, 1.0]),
            Some(BoundaryPiece::Bottom) => Ok([0.0, -1.0]),
            Some(BoundaryPiece::Arc { theta, .. }) => Ok([theta.cos(), theta.sin()]),
            None => Err(LabError::Domain(format!("point {p:?} is not on the stadium boundary"))),
        }
    }

    /// Split `x∂_x = p∂_l + q∂_N` at a boundary point, returning `(p, q)` with
    /// `∂_l` the counter-clockwise unit tangent.
    pub fn tangential_normal_split(&self, pt: Point) -> Result<(f64, f64)> {
        let n = self.boundary_normal(pt)?;
        let x = pt[0];
        // x e_x = x n_x N + x (-n_y) T with T = (-n_y, n_x).
        let q = x * n[0];
        let p = -x * n[1];
        Ok((p, q))
    }

    /// Point on the arc `W±` at angle `theta` measured from `(±α, 0)`.
    pub fn arc_point(&self, plus: bool, theta: f64) -> Point {
        let cx = if plus { self.alpha } else { -self.alpha };
        [cx + self.beta * theta.cos(), self.beta * theta.sin()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn g(a: f64, b: f64) -> StadiumGeometry {
        StadiumGeometry::new(a, b).unwrap()
    }

    #[test]
    fn classify_examples() {
        let s = g(2.0, 1.0);
        assert_eq!(s.classify([0.0, 0.0]), RegionTag::Rectangle);
        assert_eq!(s.classify([2.5, 0.3]), RegionTag::WingPlus);
        assert_eq!(s.classify([3.2, 0.0]), RegionTag::Outside);
        assert_eq!(s.classify([-2.5, 0.3]), RegionTag::WingMinus);
        // Gluing line belongs to the rectangle.
        assert_eq!(s.classify([2.0, 0.5]), RegionTag::Rectangle);
    }

    #[test]
    fn weight_examples() {
        let s = g(2.0, 1.0);
        assert_eq!(s.weight_w([2.5, 0.3]).unwrap(), 0.5);
        assert_eq!(s.weight_w([1.0, 0.9]).unwrap(), 0.0);
        assert_eq!(s.weight_w([-2.25, 0.1]).unwrap(), 0.25);
        assert!(s.weight_w([3.2, 0.0]).is_err());
        // Boundary points are in the closure.
        assert!((s.weight_w([3.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zone_examples() {
        let s = g(2.0, 1.0);
        assert_eq!(s.zone([2.001, 0.0], 20.0, 1.0).unwrap(), WingZone::I);
        assert_eq!(s.zone([2.3, 0.0], 20.0, 1.0).unwrap(), WingZone::II);
        assert_eq!(s.zone([2.6, 0.0], 20.0, 1.0).unwrap(), WingZone::III);
        assert!(s.zone([1.0, 0.0], 20.0, 1.0).is_err());
        assert!(s.zone([2.3, 0.0], 0.0, 1.0).is_err());
        // tie-breaks
        assert_eq!(s.zone_of_w(0.0025, 20.0, 1.0), WingZone::I);
        assert_eq!(s.zone_of_w(0.5, 20.0, 1.0), WingZone::II);
    }

    #[test]
    fn normal_examples() {
        let s = g(1.0, 1.0);
        assert_eq!(s.boundary_normal([0.0, 1.0]).unwrap(), [0.0, 1.0]);
        let n = s
            .boundary_normal([1.0 + FRAC_1_SQRT_2, FRAC_1_SQRT_2])
            .unwrap();
        assert!((n[0] - FRAC_1_SQRT_2).abs() < 1e-12 && (n[1] - FRAC_1_SQRT_2).abs() < 1e-12);
        let n = s.boundary_normal([2.0, 0.0]).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        let n = s.boundary_normal([-2.0, 0.0]).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-15);
        assert!(s.boundary_normal([0.0, 0.0]).is_err());
        assert!(s.boundary_normal([1.5, 0.2]).is_err());
    }

    #[test]
    fn split_examples() {
        let s = g(1.0, 1.0);
        assert_eq!(s.tangential_normal_split([0.7, 1.0]).unwrap().1, 0.0);
        let (_, q) = s.tangential_normal_split([2.0, 0.0]).unwrap();
        assert!((q - 2.0).abs() < 1e-15);
        let (_, q) = s.tangential_normal_split(s.arc_point(true, PI / 2.0)).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn split_reconstructs_x_dx() {
        let s = g(1.3, 0.7);
        for k in 0..50 {
            let th = -PI / 2.0 + PI * (k as f64 + 0.5) / 50.0;
            let p = s.arc_point(k % 2 == 0, if k % 2 == 0 { th } else { PI - th });
            let n = s.boundary_normal(p).unwrap();
            let (pp, q) = s.tangential_normal_split(p).unwrap();
            let t = [-n[1], n[0]];
            let v = [pp * t[0] + q * n[0], pp * t[1] + q * n[1]];
            assert!((v[0] - p[0]).abs() < 1e-12 && v[1].abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_geometry() {
        assert!(StadiumGeometry::new(0.0, 1.0).is_err());
        assert!(StadiumGeometry::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn area_formula() {
        assert!((g(1.0, 1.0).area() - (4.0 + PI)).abs() < 1e-15);
    }
}

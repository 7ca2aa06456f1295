//! Closed-form potential of a rectangular electrode patch in the gapless
//! plane approximation.
//!
//! A rectangle `[x1, x2] × [y1, y2]` in the grounded plane `z = 0`, held at
//! unit bias, produces at `z > 0` the half-space Poisson integral
//!
//! ```text
//! φ(r) = (1/2π) Σ_corners ± atan( u v / (z ρ) ),   ρ = √(u² + v² + z²)
//! ```
//!
//! with `u = xᵢ - x`, `v = yⱼ - y`. φ is harmonic, tends to 1 approaching
//! the patch interior and to 0 far away or over distant ground. First and
//! second derivatives are evaluated analytically from the same corner sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};

/// Axis-aligned rectangle in the electrode plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Rect {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Self> {
        if !(x1 < x2 && y1 < y2) {
            return Err(Error::Layout(format!(
                "degenerate rectangle [{x1:.3e}, {x2:.3e}] x [{y1:.3e}, {y2:.3e}]"
            )));
        }
        Ok(Self { x1, x2, y1, y2 })
    }

    pub fn width_x(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn width_y(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x1 < other.x2 && other.x1 < self.x2 && self.y1 < other.y2 && other.y1 < self.y2
    }

    /// Unit-bias potential at `p` (dimensionless, in [0, 1]).
    pub fn potential(&self, p: &Vec3) -> Result<f64> {
        check_above_plane(p)?;
        let mut sum = 0.0;
        self.corner_sum(p, |c, sign| sum += sign * c.f());
        Ok(sum / (2.0 * std::f64::consts::PI))
    }

    /// Gradient of the unit-bias potential (1/m).
    pub fn gradient(&self, p: &Vec3) -> Result<Vec3> {
        check_above_plane(p)?;
        let mut g = Vec3::zeros();
        self.corner_sum(p, |c, sign| {
            // u = xi - x, v = yj - y: d/dx = -d/du, d/dy = -d/dv.
            g.x -= sign * c.fu();
            g.y -= sign * c.fv();
            g.z += sign * c.fz();
        });
        Ok(g / (2.0 * std::f64::consts::PI))
    }

    /// Hessian of the unit-bias potential (1/m²). The zz entry follows from
    /// Laplace's equation.
    pub fn hessian(&self, p: &Vec3) -> Result<Mat3> {
        check_above_plane(p)?;
        let (mut xx, mut yy, mut xy, mut xz, mut yz) = (0.0, 0.0, 0.0, 0.0, 0.0);
        self.corner_sum(p, |c, sign| {
            xx += sign * c.fuu();
            yy += sign * c.fvv();
            xy += sign * c.fuv();
            xz -= sign * c.fuz();
            yz -= sign * c.fvz();
        });
        let norm = 1.0 / (2.0 * std::f64::consts::PI);
        let (xx, yy, xy, xz, yz) = (xx * norm, yy * norm, xy * norm, xz * norm, yz * norm);
        let zz = -xx - yy;
        Ok(Mat3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz))
    }

    fn corner_sum<F: FnMut(&Corner, f64)>(&self, p: &Vec3, mut visit: F) {
        for (xi, sx) in [(self.x2, 1.0), (self.x1, -1.0)] {
            for (yj, sy) in [(self.y2, 1.0), (self.y1, -1.0)] {
                let c = Corner::new(xi - p.x, yj - p.y, p.z);
                visit(&c, sx * sy);
            }
        }
    }
}

fn check_above_plane(p: &Vec3) -> Result<()> {
    if p.z > 0.0 {
        Ok(())
    } else {
        Err(Error::BelowPlane(p.z))
    }
}

/// One corner term F = atan(uv/(zρ)) and its partial derivatives.
struct Corner {
    u: f64,
    v: f64,
    z: f64,
    rho: f64,
    u2z2: f64,
    v2z2: f64,
}

impl Corner {
    fn new(u: f64, v: f64, z: f64) -> Self {
        let rho = (u * u + v * v + z * z).sqrt();
        Self {
            u,
            v,
            z,
            rho,
            u2z2: u * u + z * z,
            v2z2: v * v + z * z,
        }
    }

    fn f(&self) -> f64 {
        (self.u * self.v / (self.z * self.rho)).atan()
    }

    fn fu(&self) -> f64 {
        self.v * self.z / (self.rho * self.u2z2)
    }

    fn fv(&self) -> f64 {
        self.u * self.z / (self.rho * self.v2z2)
    }

    fn fz(&self) -> f64 {
        let rho2 = self.rho * self.rho;
        -self.u * self.v * (rho2 + self.z * self.z) / (self.rho * self.u2z2 * self.v2z2)
    }

    fn fuu(&self) -> f64 {
        let rho2 = self.rho * self.rho;
        -self.u * self.v * self.z * (self.u2z2 + 2.0 * rho2)
            / (self.rho * rho2 * self.u2z2 * self.u2z2)
    }

    fn fvv(&self) -> f64 {
        let rho2 = self.rho * self.rho;
        -self.u * self.v * self.z * (self.v2z2 + 2.0 * rho2)
            / (self.rho * rho2 * self.v2z2 * self.v2z2)
    }

    fn fuv(&self) -> f64 {
        self.z / (self.rho * self.rho * self.rho)
    }

    fn fuz(&self) -> f64 {
        let rho2 = self.rho * self.rho;
        let uv2 = self.u * self.u + self.v * self.v;
        self.v * (uv2 * self.u2z2 - 2.0 * self.z * self.z * rho2)
            / (self.rho * rho2 * self.u2z2 * self.u2z2)
    }

    fn fvz(&self) -> f64 {
        let rho2 = self.rho * self.rho;
        let uv2 = self.u * self.u + self.v * self.v;
        self.u * (uv2 * self.v2z2 - 2.0 * self.z * self.z * rho2)
            / (self.rho * rho2 * self.v2z2 * self.v2z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_points_below_plane() {
        let r = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(matches!(
            r.potential(&Vec3::new(0.0, 0.0, 0.0)),
            Err(Error::BelowPlane(_))
        ));
        assert!(r.gradient(&Vec3::new(0.0, 0.0, -1e-9)).is_err());
    }

    #[test]
    fn half_plane_symmetry_gives_half() {
        // Two large half-planes tile the plane; by symmetry a point above
        // the shared boundary sees 1/2 from each.
        let half = Rect::new(0.0, 1e3, -1e3, 1e3).unwrap();
        let p = Vec3::new(0.0, 0.0, 25e-6);
        let phi = half.potential(&p).unwrap();
        assert!((phi - 0.5).abs() < 1e-6, "phi = {phi}");
    }

    #[test]
    fn infinite_plane_limit() {
        // Edge deficit scales as z/(π L); 1 µm over a 10 m patch is well
        // inside 1e-6 of the infinite-plane value.
        let big = Rect::new(-5.0, 5.0, -5.0, 5.0).unwrap();
        let phi = big.potential(&Vec3::new(0.0, 0.0, 1e-6)).unwrap();
        assert!((phi - 1.0).abs() < 1e-6, "phi = {phi}");
    }

    #[test]
    fn far_field_decays() {
        let r = Rect::new(-50e-6, 50e-6, -50e-6, 50e-6).unwrap();
        let phi = r.potential(&Vec3::new(0.0, 0.0, 0.1)).unwrap();
        assert!(phi < 1e-4);
        assert!(phi > 0.0);
    }

    #[test]
    fn complementary_patches_sum_to_one() {
        // Four quadrant patches tile a (very large) square around the
        // origin; shared interior edges cancel exactly.
        let e = 1e6;
        let q = [
            Rect::new(0.0, e, 0.0, e).unwrap(),
            Rect::new(-e, 0.0, 0.0, e).unwrap(),
            Rect::new(0.0, e, -e, 0.0).unwrap(),
            Rect::new(-e, 0.0, -e, 0.0).unwrap(),
        ];
        let p = Vec3::new(3e-6, -7e-6, 42e-6);
        let total: f64 = q.iter().map(|r| r.potential(&p).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9, "total = {total}");
    }
}

//! Near-null parameterization of the nulled microwave magnetic field: a
//! planar quadrupole of gradient strength B' rotated by α_MW, plus the
//! simulated shift and Rabi maps built on it.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, MU_B};
use crate::error::Result;
use crate::geom::{quadrupole_matrix, Vec2, Vec3};
use crate::spins::{self, LevelDiagram, LevelLabel, TransitionSpec};

/// Validity radius of the linear quadrupole expansion (m).
pub const QUADRUPOLE_VALIDITY_RADIUS: f64 = 1.5e-6;

/// Quadrupole model of the oscillating field near its null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrupoleModel {
    /// Gradient strength (T/m).
    pub b_prime: f64,
    /// Quadrupole rotation angle (deg).
    pub alpha_mw_deg: f64,
    /// Null position offset (δx, δz) from the trap center (m).
    pub center: [f64; 2],
    /// Drive frequency (Hz).
    pub freq: f64,
}

impl QuadrupoleModel {
    pub fn center_vec(&self) -> Vec2 {
        Vec2::new(self.center[0], self.center[1])
    }

    /// Field amplitude (T) of the cosine drive at a radial displacement
    /// from the trap center. The flag marks points outside the validity
    /// radius of the linear model.
    pub fn field(&self, dr: &Vec2) -> (Vec3, bool) {
        let rel = dr - self.center_vec();
        let radial = self.b_prime * quadrupole_matrix(self.alpha_mw_deg.to_radians()) * rel;
        let outside = rel.norm() > QUADRUPOLE_VALIDITY_RADIUS;
        (Vec3::new(radial.x, 0.0, radial.y), outside)
    }

    /// Direction (deg from x) of maximal |∂B_∥/∂r| for a quantization axis
    /// with no x component: displacements along 2α_MW + 90°.
    pub fn max_gradient_direction_deg(&self) -> f64 {
        let two_alpha = 2.0 * self.alpha_mw_deg;
        let mut dir = two_alpha + 90.0;
        while dir <= -90.0 {
            dir += 180.0;
        }
        while dir > 90.0 {
            dir -= 180.0;
        }
        dir
    }
}

/// Split a real oscillating-field amplitude vector into components parallel
/// and perpendicular to the quantization direction.
pub fn parallel_perp_split(b: &Vec3, b0_dir: &Vec3) -> (f64, f64) {
    let unit = b0_dir.normalize();
    let b_par = b.dot(&unit);
    let perp = b - b_par * unit;
    (b_par, perp.norm())
}

/// Spin-frame phasor of a linearly polarized field: (B_⊥, 0, B_∥) with the
/// quantization axis along ẑ.
pub fn linear_field_phasor(b: &Vec3, b0_dir: &Vec3) -> Vector3<Complex64> {
    let (b_par, b_perp) = parallel_perp_split(b, b0_dir);
    Vector3::new(
        Complex64::new(b_perp, 0.0),
        Complex64::default(),
        Complex64::new(b_par, 0.0),
    )
}

/// One sample of a measured or simulated map over radial displacements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    /// Displacement from the trap center (m).
    pub dr: [f64; 2],
    /// Map value: ac Zeeman shift (Hz) or sideband Rabi rate (rad/s).
    pub value: f64,
    /// Optional per-point noise (same unit as value).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// ac Zeeman shift map (Hz).
    AcZeeman,
    /// Micromotion-sideband Rabi-rate map (rad/s).
    Rabi,
}

/// A field map: grid of radial displacements and measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub kind: MapKind,
    pub points: Vec<MapPoint>,
}

impl FieldMap {
    /// CSV with the schema `dx_um, dz_um, value, sigma` (sigma empty when
    /// absent).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dx_um,dz_um,value,sigma\n");
        for p in &self.points {
            let sigma = p.sigma.map(|s| format!("{s:.9e}")).unwrap_or_default();
            out.push_str(&format!(
                "{:.6},{:.6},{:.9e},{}\n",
                p.dr[0] * 1e6,
                p.dr[1] * 1e6,
                p.value,
                sigma
            ));
        }
        out
    }

    /// Parse the `dx_um, dz_um, value, sigma` schema.
    pub fn from_csv(kind: MapKind, text: &str) -> crate::error::Result<Self> {
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("dx_um") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 3 {
                return Err(crate::error::Error::Config(format!(
                    "map CSV line {}: expected dx_um,dz_um,value[,sigma]",
                    n + 1
                )));
            }
            let parse = |s: &str| -> crate::error::Result<f64> {
                s.trim().parse().map_err(|e| {
                    crate::error::Error::Config(format!("map CSV line {}: {e}", n + 1))
                })
            };
            let sigma = match fields.get(3) {
                Some(s) if !s.trim().is_empty() => Some(parse(s)?),
                _ => None,
            };
            points.push(MapPoint {
                dr: [parse(fields[0])? * 1e-6, parse(fields[1])? * 1e-6],
                value: parse(fields[2])?,
                sigma,
            });
        }
        if points.is_empty() {
            return Err(crate::error::Error::Config("map CSV has no data rows".into()));
        }
        Ok(FieldMap { kind, points })
    }
}

/// Rectangular grid of radial displacements, inclusive of end points (m).
pub fn radial_grid(half_x: f64, half_z: f64, nx: usize, nz: usize) -> Vec<Vec2> {
    let mut pts = Vec::with_capacity(nx * nz);
    for ix in 0..nx {
        let x = if nx > 1 {
            -half_x + 2.0 * half_x * ix as f64 / (nx - 1) as f64
        } else {
            0.0
        };
        for iz in 0..nz {
            let z = if nz > 1 {
                -half_z + 2.0 * half_z * iz as f64 / (nz - 1) as f64
            } else {
                0.0
            };
            pts.push(Vec2::new(x, z));
        }
    }
    pts
}

/// Simulate the ac Zeeman shift of a pair as a function of displacement.
/// Each point evaluates the full second-order shift of the quadrupole's
/// linearly polarized local field (not the quadratic-form shortcut the
/// fitter uses).
pub fn simulate_aczeeman_map(
    model: &QuadrupoleModel,
    b0_dir: &Vec3,
    diagram: &LevelDiagram,
    a: LevelLabel,
    b: LevelLabel,
    grid: &[Vec2],
) -> Result<FieldMap> {
    let mut points = Vec::with_capacity(grid.len());
    for dr in grid {
        let (field, _) = model.field(dr);
        let phasor = linear_field_phasor(&field, b0_dir);
        let value = spins::ac_zeeman_shift_phasor(diagram, a, b, &phasor, model.freq, true)?;
        points.push(MapPoint {
            dr: [dr.x, dr.y],
            value,
            sigma: None,
        });
    }
    Ok(FieldMap {
        kind: MapKind::AcZeeman,
        points,
    })
}

/// Rabi rate (rad/s) of a transition for a linearly polarized amplitude
/// vector, using the Ω = element·B/(2ħ) convention.
pub fn linear_rabi_rate(b: &Vec3, b0_dir: &Vec3, spec: &TransitionSpec) -> f64 {
    let (b_par, b_perp) = parallel_perp_split(b, b0_dir);
    let coupling = if spec.delta_m == 0 {
        spec.element() * b_par.abs()
    } else {
        spec.element() * b_perp
    };
    coupling * MU_B / (2.0 * HBAR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::default_b0_dir;

    #[test]
    fn field_vanishes_at_center() {
        let m = QuadrupoleModel {
            b_prime: 35.3,
            alpha_mw_deg: -26.5,
            center: [-0.11e-6, 0.23e-6],
            freq: 1.686e9,
        };
        let (b, outside) = m.field(&m.center_vec());
        assert!(b.norm() == 0.0);
        assert!(!outside);
    }

    #[test]
    fn unit_displacement_field_magnitude_and_direction() {
        let m = QuadrupoleModel {
            b_prime: 35.3,
            alpha_mw_deg: -26.5,
            center: [0.0, 0.0],
            freq: 1.686e9,
        };
        let (b, _) = m.field(&Vec2::new(1e-6, 0.0));
        assert!((b.norm() - 35.3e-6).abs() < 1e-12);
        let two_alpha = (2.0 * -26.5f64).to_radians();
        assert!((b.x - 35.3e-6 * two_alpha.cos()).abs() < 1e-12);
        assert!((b.z - 35.3e-6 * two_alpha.sin()).abs() < 1e-12);
    }

    #[test]
    fn outside_validity_radius_flagged() {
        let m = QuadrupoleModel {
            b_prime: 35.0,
            alpha_mw_deg: -30.0,
            center: [0.0, 0.0],
            freq: 1.6e9,
        };
        assert!(m.field(&Vec2::new(1.6e-6, 0.0)).1);
        assert!(!m.field(&Vec2::new(1.4e-6, 0.0)).1);
    }

    #[test]
    fn planar_quadrupole_is_divergence_and_curl_free() {
        // Finite differences of the field components; the form is linear so
        // the residual is at rounding level.
        let m = QuadrupoleModel {
            b_prime: 35.3,
            alpha_mw_deg: -26.5,
            center: [0.1e-6, -0.2e-6],
            freq: 1.6e9,
        };
        let h = 1e-8;
        let f = |x: f64, z: f64| m.field(&Vec2::new(x, z)).0;
        let p = Vec2::new(0.4e-6, 0.3e-6);
        let dbx_dx = (f(p.x + h, p.y).x - f(p.x - h, p.y).x) / (2.0 * h);
        let dbz_dz = (f(p.x, p.y + h).z - f(p.x, p.y - h).z) / (2.0 * h);
        let dbx_dz = (f(p.x, p.y + h).x - f(p.x, p.y - h).x) / (2.0 * h);
        let dbz_dx = (f(p.x + h, p.y).z - f(p.x - h, p.y).z) / (2.0 * h);
        let scale = m.b_prime;
        assert!((dbx_dx + dbz_dz).abs() < 1e-9 * scale, "divergence");
        assert!((dbx_dz - dbz_dx).abs() < 1e-9 * scale, "curl");
    }

    #[test]
    fn split_respects_default_quantization_direction() {
        let b0 = default_b0_dir();
        let (par, perp) = parallel_perp_split(&Vec3::new(0.0, b0.y, b0.z), &b0);
        assert!((par - 1.0).abs() < 1e-12);
        assert!(perp < 1e-12);
        let (par_x, perp_x) = parallel_perp_split(&Vec3::new(1.0, 0.0, 0.0), &b0);
        assert!(par_x.abs() < 1e-12);
        assert!((perp_x - 1.0).abs() < 1e-12);
    }
}

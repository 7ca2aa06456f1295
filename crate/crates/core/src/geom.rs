//! Small geometry helpers shared by the field modules.

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

use crate::constants::B0_TILT_DEG;

/// Traceless symmetric quadrupole form `[[cos 2α, sin 2α], [sin 2α, -cos 2α]]`.
pub fn quadrupole_matrix(alpha_rad: f64) -> Mat2 {
    let (s, c) = (2.0 * alpha_rad).sin_cos();
    Mat2::new(c, s, s, -c)
}

/// Project a lab vector onto the radial (x, z) plane.
pub fn radial(v: &Vec3) -> Vec2 {
    Vec2::new(v.x, v.z)
}

/// Embed a radial (x, z) vector in the lab frame with y = 0.
pub fn embed_radial(v: &Vec2) -> Vec3 {
    Vec3::new(v.x, 0.0, v.y)
}

/// Default quantization-field direction: in the y-z plane, tilted
/// [`B0_TILT_DEG`] from the z axis.
pub fn default_b0_dir() -> Vec3 {
    let t = B0_TILT_DEG.to_radians();
    Vec3::new(0.0, t.sin(), t.cos())
}

/// Reduce quadrupole parameters to the canonical branch: amplitude ≥ 0 and
/// angle in (-90°, 90°]. The form `B'·[[cos 2α, sin 2α], [sin 2α, -cos 2α]]`
/// is invariant under `(B', α) → (-B', α ± 90°)` and `α → α + 180°`; for the
/// fields of interest here the canonical angle falls in (-90°, 0°].
pub fn canonical_quadrupole_branch(b_prime: f64, alpha_deg: f64) -> (f64, f64) {
    let two_alpha = 2.0 * alpha_deg.to_radians();
    let m00 = b_prime * two_alpha.cos();
    let m01 = b_prime * two_alpha.sin();
    let b = m00.hypot(m01);
    let mut a = 0.5 * m01.atan2(m00).to_degrees();
    if a <= -90.0 {
        a += 180.0;
    }
    (b, a)
}

/// Angle of a radial-plane vector measured from the x axis, folded to
/// (-90°, 90°] (mode vectors are direction-free).
pub fn mode_angle_deg(v: &Vec2) -> f64 {
    let mut a = v.y.atan2(v.x).to_degrees();
    if a > 90.0 {
        a -= 180.0;
    } else if a <= -90.0 {
        a += 180.0;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrupole_matrix_is_traceless_symmetric() {
        for k in 0..12 {
            let m = quadrupole_matrix(0.5 * k as f64);
            assert!((m.trace()).abs() < 1e-14);
            assert!((m[(0, 1)] - m[(1, 0)]).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_branch_preserves_form() {
        for &(b, a) in &[
            (35.3, -26.5),
            (35.3, 63.5),
            (-35.3, -26.5),
            (12.0, 170.0),
            (7.0, 0.0),
            (-4.0, 120.0),
        ] {
            let (bc, ac) = canonical_quadrupole_branch(b, a);
            assert!(bc >= 0.0, "B' must be non-negative, got {bc}");
            assert!(ac > -90.0 && ac <= 90.0 + 1e-9, "alpha {ac} outside branch");
            let m0 = quadrupole_matrix(a.to_radians()) * b;
            let m1 = quadrupole_matrix(ac.to_radians()) * bc;
            assert!((m0 - m1).norm() < 1e-9 * b.abs().max(1.0), "branch changed the form");
        }
        // Angles already in (-90°, 0°] stay put.
        let (bc, ac) = canonical_quadrupole_branch(35.3, -26.5);
        assert!((bc - 35.3).abs() < 1e-9 && (ac + 26.5).abs() < 1e-9);
    }

    #[test]
    fn mode_angle_folds() {
        assert!((mode_angle_deg(&Vec2::new(1.0, 0.0)) - 0.0).abs() < 1e-12);
        assert!((mode_angle_deg(&Vec2::new(-1.0, 1.0)) - (-45.0)).abs() < 1e-12);
        assert!((mode_angle_deg(&Vec2::new(0.0, -1.0)) - 90.0).abs() < 1e-12);
    }
}

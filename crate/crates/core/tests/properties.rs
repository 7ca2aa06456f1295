//! Property tests over randomized geometry and fields.

use std::collections::BTreeMap;

use mwtrap::geom::{canonical_quadrupole_branch, quadrupole_matrix, Vec3};
use mwtrap::planefield::{static_field, ElectrodeLayout, ElectrodePatch, ElectrodeRole, Rect};
use proptest::prelude::*;

fn patch_strategy() -> impl Strategy<Value = Rect> {
    (
        -100.0f64..100.0,
        1.0f64..120.0,
        -300.0f64..300.0,
        5.0f64..600.0,
    )
        .prop_map(|(x1, w, y1, h)| {
            Rect::new(x1 * 1e-6, (x1 + w) * 1e-6, y1 * 1e-6, (y1 + h) * 1e-6).unwrap()
        })
}

fn point_strategy() -> impl Strategy<Value = Vec3> {
    (
        -200.0f64..200.0,
        -400.0f64..400.0,
        2.0f64..150.0,
    )
        .prop_map(|(x, y, z)| Vec3::new(x * 1e-6, y * 1e-6, z * 1e-6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn patch_potential_is_bounded_and_harmonic(rect in patch_strategy(), p in point_strategy()) {
        let phi = rect.potential(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&phi), "phi = {phi}");
        // Laplace residual against the curvature scale.
        let h = 1e-7;
        let f = |q: &Vec3| rect.potential(q).unwrap();
        let mut lap = 0.0;
        let mut scale = 0.0;
        for axis in 0..3 {
            let mut hi = p;
            let mut lo = p;
            hi[axis] += h;
            lo[axis] -= h;
            let second = (f(&hi) - 2.0 * phi + f(&lo)) / (h * h);
            lap += second;
            scale += second.abs();
        }
        if scale > 1e-3 {
            prop_assert!(lap.abs() < 1e-4 * scale, "Laplacian {lap} vs scale {scale}");
        }
    }

    #[test]
    fn patch_gradient_consistent_with_potential(rect in patch_strategy(), p in point_strategy()) {
        let g = rect.gradient(&p).unwrap();
        let h = 1e-8;
        for axis in 0..3 {
            let mut hi = p;
            let mut lo = p;
            hi[axis] += h;
            lo[axis] -= h;
            let fd = (rect.potential(&hi).unwrap() - rect.potential(&lo).unwrap()) / (2.0 * h);
            prop_assert!((g[axis] - fd).abs() < 1e-5 * g.norm().max(1e-3),
                "axis {axis}: {} vs {fd}", g[axis]);
        }
    }

    #[test]
    fn superposition_is_linear(
        v1 in -5.0f64..5.0,
        v2 in -5.0f64..5.0,
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        p in point_strategy(),
    ) {
        let layout = ElectrodeLayout::new(vec![
            ElectrodePatch {
                name: "A".into(),
                role: ElectrodeRole::Rf,
                rect: Rect::new(-40e-6, -10e-6, -1e-3, 1e-3).unwrap(),
            },
            ElectrodePatch {
                name: "B".into(),
                role: ElectrodeRole::Control,
                rect: Rect::new(10e-6, 40e-6, -1e-3, 1e-3).unwrap(),
            },
        ]).unwrap();
        let mk = |a: f64, b: f64| -> BTreeMap<String, f64> {
            [("A".to_string(), a), ("B".to_string(), b)].into_iter().collect()
        };
        let (e1, p1) = static_field(&layout, &mk(v1, v2), &p).unwrap();
        let (e2, p2) = static_field(&layout, &mk(v2, -v1), &p).unwrap();
        let (ec, pc) = static_field(
            &layout,
            &mk(alpha * v1 + beta * v2, alpha * v2 - beta * v1),
            &p,
        ).unwrap();
        let expect_e = alpha * e1 + beta * e2;
        let expect_p = alpha * p1 + beta * p2;
        prop_assert!((ec - expect_e).norm() <= 1e-9 * expect_e.norm().max(1e-12));
        prop_assert!((pc - expect_p).abs() <= 1e-9 * expect_p.abs().max(1e-12));
    }

    #[test]
    fn quadrupole_form_rotation_covariance(
        b in 0.1f64..100.0,
        alpha_deg in -180.0f64..180.0,
        theta_deg in -90.0f64..90.0,
    ) {
        // Rotating coordinates by θ maps the form to one at α + θ.
        let theta = theta_deg.to_radians();
        let rot = nalgebra::Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
        let m = b * quadrupole_matrix(alpha_deg.to_radians());
        let m_rot = rot.transpose() * m * rot;
        let expect = b * quadrupole_matrix((alpha_deg - theta_deg).to_radians());
        prop_assert!((m_rot - expect).norm() < 1e-9 * b);
        // Canonicalization preserves the form.
        let (bc, ac) = canonical_quadrupole_branch(b, alpha_deg);
        let m_c = bc * quadrupole_matrix(ac.to_radians());
        prop_assert!((m - m_c).norm() < 1e-9 * b);
        prop_assert!(bc >= 0.0 && ac > -90.0 && ac <= 90.0 + 1e-12);
    }
}

//! Quasi-static magnetic fields of thin strip conductors carrying
//! microwave currents along the trap axis, field nulling, and ohmic
//! dissipation estimates.
//!
//! Each electrode is a flat strip in the z = 0 plane with current along y.
//! With ζ = x + iz, the per-ampere complex field F(ζ) = b_x - i·b_z is
//!
//! * edge-peaked profile (isolated-strip current distribution):
//!   `F = i μ₀/(2π) / √((ζ-c)² - (w/2)²)`
//! * uniform profile: `F = i μ₀/(2π w) · ln((ζ-x₁)/(ζ-x₂))`
//!
//! both reducing to the filament law i·μ₀/(2πζ) far away. F is holomorphic,
//! so the in-plane gradient tensor is symmetric and traceless by
//! construction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::MU_0;
use crate::error::{Error, Result};
use crate::geom::{canonical_quadrupole_branch, Vec2};

/// A strip conductor: transverse extent on the electrode plane (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripConductor {
    pub x1: f64,
    pub x2: f64,
}

impl StripConductor {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if !(x1 < x2) {
            return Err(Error::Config(format!(
                "degenerate strip [{x1:.3e}, {x2:.3e}]"
            )));
        }
        Ok(Self { x1, x2 })
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x1 + self.x2)
    }
}

/// Transverse current-density profile across a strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurrentProfile {
    /// 1/√(1-(2u/w)²) edge-peaked distribution of an isolated thin strip.
    EdgePeaked,
    /// Uniform current density (sensitivity-analysis option).
    Uniform,
}

/// Per-electrode complex current amplitudes (A).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentConfiguration {
    pub currents: BTreeMap<String, Complex64>,
}

impl CurrentConfiguration {
    pub fn amplitude_ratio(&self, name: &str, reference: &str) -> Option<f64> {
        let i = self.currents.get(name)?;
        let r = self.currents.get(reference)?;
        Some(i.norm() / r.norm())
    }

    /// Phase of `name` relative to `reference` (deg, in (-180, 180]).
    pub fn phase_deg(&self, name: &str, reference: &str) -> Option<f64> {
        let i = self.currents.get(name)?;
        let r = self.currents.get(reference)?;
        Some((i / r).arg().to_degrees())
    }
}

/// Per-ampere complex field F(ζ) = b_x - i b_z of one strip (T/A).
fn strip_field(strip: &StripConductor, profile: CurrentProfile, zeta: Complex64) -> Complex64 {
    match profile {
        CurrentProfile::EdgePeaked => {
            let c = strip.center();
            let half_w = 0.5 * strip.width();
            let rel = zeta - c;
            // √(rel² - a²) continuous in the upper half-plane, ~rel at ∞.
            let root = (rel - half_w).sqrt() * (rel + half_w).sqrt();
            Complex64::i() * MU_0 / (2.0 * std::f64::consts::PI) / root
        }
        CurrentProfile::Uniform => {
            let l = ((zeta - strip.x1) / (zeta - strip.x2)).ln();
            Complex64::i() * MU_0 / (2.0 * std::f64::consts::PI * strip.width()) * l
        }
    }
}

/// dF/dζ of one strip (T/(A·m)).
fn strip_field_gradient(
    strip: &StripConductor,
    profile: CurrentProfile,
    zeta: Complex64,
) -> Complex64 {
    match profile {
        CurrentProfile::EdgePeaked => {
            let c = strip.center();
            let half_w = 0.5 * strip.width();
            let rel = zeta - c;
            let root = (rel - half_w).sqrt() * (rel + half_w).sqrt();
            -Complex64::i() * MU_0 / (2.0 * std::f64::consts::PI) * rel / (root * root * root)
        }
        CurrentProfile::Uniform => {
            let inv = 1.0 / (zeta - strip.x1) - 1.0 / (zeta - strip.x2);
            Complex64::i() * MU_0 / (2.0 * std::f64::consts::PI * strip.width()) * inv
        }
    }
}

/// Real per-ampere field components (bx, bz) and gradient tensor of one
/// electrode at a radial point. Multi-finger electrodes split the current
/// equally among their fingers.
fn strip_basis(
    fingers: &[StripConductor],
    profile: CurrentProfile,
    point: &Vec2,
) -> Result<(Vector2<f64>, Matrix2<f64>)> {
    if point.y <= 0.0 {
        return Err(Error::BelowPlane(point.y));
    }
    if fingers.is_empty() {
        return Err(Error::Config("electrode has no fingers".into()));
    }
    let zeta = Complex64::new(point.x, point.y);
    let share = 1.0 / fingers.len() as f64;
    let mut b = Vector2::zeros();
    let mut grad = Matrix2::zeros();
    for strip in fingers {
        let f = strip_field(strip, profile, zeta);
        let g = strip_field_gradient(strip, profile, zeta);
        b += share * Vector2::new(f.re, -f.im);
        // F holomorphic: ∂x bx = Re g, ∂z bx = ∂x bz = -Im g, ∂z bz = -Re g.
        grad += share * Matrix2::new(g.re, -g.im, -g.im, -g.re);
    }
    Ok((b, grad))
}

/// Complex field phasor (Bx, Bz) (T) and gradient tensor (T/m) of a set of
/// strips carrying complex currents, at a radial point (x, z) with z > 0.
pub fn field_from_currents(
    strips: &BTreeMap<String, Vec<StripConductor>>,
    profile: CurrentProfile,
    currents: &CurrentConfiguration,
    point: &Vec2,
) -> Result<(Vector2<Complex64>, Matrix2<Complex64>)> {
    if currents.currents.values().all(|i| i.norm() == 0.0) {
        return Err(Error::Config("all currents are zero".into()));
    }
    let mut b = Vector2::<Complex64>::zeros();
    let mut grad = Matrix2::<Complex64>::zeros();
    for (name, current) in &currents.currents {
        let strip = strips
            .get(name)
            .ok_or_else(|| Error::UnknownElectrode(name.clone()))?;
        let (bj, gj) = strip_basis(strip, profile, point)?;
        for i in 0..2 {
            b[i] += current * bj[i];
            for j in 0..2 {
                grad[(i, j)] += current * gj[(i, j)];
            }
        }
    }
    Ok((b, grad))
}

/// Result of nulling the field at a target point.
#[derive(Debug, Clone)]
pub struct NulledConfiguration {
    pub currents: CurrentConfiguration,
    /// |B| at the target after nulling (T).
    pub residual_field: f64,
    /// Complex gradient tensor at the null (T/m).
    pub gradient: Matrix2<Complex64>,
    /// Gradient strength of the dominant quadrature (T/m).
    pub b_prime: f64,
    /// Orientation of the dominant quadrature (deg).
    pub alpha_mw_deg: f64,
    /// Gradient strength of the residual (out-of-phase) quadrature (T/m).
    pub b_prime_residual: f64,
}

/// Decompose a complex gradient tensor into its dominant real quadrature
/// (B', α_MW) plus the strength of the orthogonal quadrature.
pub fn quadrupole_parameters(grad: &Matrix2<Complex64>) -> (f64, f64, f64) {
    let gre = Matrix2::new(grad[(0, 0)].re, grad[(0, 1)].re, grad[(1, 0)].re, grad[(1, 1)].re);
    let gim = Matrix2::new(grad[(0, 0)].im, grad[(0, 1)].im, grad[(1, 0)].im, grad[(1, 1)].im);
    // Phase maximizing ‖Re(e^{iθ} G)‖²_F = ‖cosθ·Gre - sinθ·Gim‖²_F.
    let a = gre.norm_squared();
    let b = gim.norm_squared();
    let c = gre.dot(&gim);
    let theta = 0.5 * (-2.0 * c).atan2(a - b);
    let pick = |th: f64| th.cos() * gre - th.sin() * gim;
    let m0 = pick(theta);
    let m1 = pick(theta + std::f64::consts::FRAC_PI_2);
    let (main, resid) = if m0.norm() >= m1.norm() { (m0, m1) } else { (m1, m0) };
    let b_raw = main[(0, 0)].hypot(main[(0, 1)]);
    let alpha_raw = 0.5 * main[(0, 1)].atan2(main[(0, 0)]).to_degrees();
    let (b_prime, alpha) = canonical_quadrupole_branch(b_raw, alpha_raw);
    (b_prime, alpha, resid[(0, 0)].hypot(resid[(0, 1)]))
}

/// Adjust the non-reference currents so the field phasor vanishes at the
/// target point; the linear model admits an exact null for ≥ 3 strips.
pub fn null_optimize(
    strips: &BTreeMap<String, Vec<StripConductor>>,
    profile: CurrentProfile,
    reference: &str,
    reference_current: f64,
    target: &Vec2,
) -> Result<NulledConfiguration> {
    if !strips.contains_key(reference) {
        return Err(Error::UnknownElectrode(reference.to_string()));
    }
    let free: Vec<&String> = strips.keys().filter(|n| n.as_str() != reference).collect();
    if free.len() < 2 {
        return Err(Error::Singular(format!(
            "{} free currents cannot null 2 complex field components",
            free.len()
        )));
    }
    let (b_ref, _) = strip_basis(&strips[reference], profile, target)?;
    let mut m = DMatrix::<Complex64>::zeros(2, free.len());
    for (j, name) in free.iter().enumerate() {
        let (bj, _) = strip_basis(&strips[name.as_str()], profile, target)?;
        m[(0, j)] = Complex64::new(bj[0], 0.0);
        m[(1, j)] = Complex64::new(bj[1], 0.0);
    }
    let rhs = DVector::<Complex64>::from_vec(vec![
        Complex64::new(-reference_current * b_ref[0], 0.0),
        Complex64::new(-reference_current * b_ref[1], 0.0),
    ]);
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > 1e-12 * smax)
        .count();
    if rank < 2 {
        return Err(Error::Singular(format!(
            "cannot null: strip responses span a rank-{rank} space (degenerate geometry)"
        )));
    }
    let sol = svd
        .solve(&rhs, 1e-12 * smax)
        .map_err(|e| Error::Singular(format!("nulling solve: {e}")))?;

    let mut currents = BTreeMap::new();
    currents.insert(
        reference.to_string(),
        Complex64::new(reference_current, 0.0),
    );
    for (j, name) in free.iter().enumerate() {
        currents.insert((*name).clone(), sol[j]);
    }
    let config = CurrentConfiguration { currents };
    let (b, grad) = field_from_currents(strips, profile, &config, target)?;
    let residual = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    let (b_prime, alpha_mw_deg, b_prime_residual) = quadrupole_parameters(&grad);
    Ok(NulledConfiguration {
        currents: config,
        residual_field: residual,
        gradient: grad,
        b_prime,
        alpha_mw_deg,
        b_prime_residual,
    })
}

/// Cross-section geometry of a microwave electrode for dissipation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripCrossSection {
    /// Width (m).
    pub width: f64,
    /// Metal thickness (m).
    pub thickness: f64,
    /// Dissipating length (m).
    pub length: f64,
}

/// Ohmic power (W) of peak-amplitude currents in resistive strips:
/// P = Σ |I|² ρ L / (w t) / 2 (uniform current approximation).
pub fn dissipation_estimate(
    currents: &CurrentConfiguration,
    geometry: &BTreeMap<String, StripCrossSection>,
    resistivity: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (name, current) in &currents.currents {
        let g = geometry
            .get(name)
            .ok_or_else(|| Error::UnknownElectrode(name.clone()))?;
        if g.width <= 0.0 || g.thickness <= 0.0 {
            return Err(Error::Config(format!("zero cross section for `{name}`")));
        }
        let resistance = resistivity * g.length / (g.width * g.thickness);
        total += current.norm_sqr() * resistance / 2.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_strip(w: f64) -> BTreeMap<String, Vec<StripConductor>> {
        let mut m = BTreeMap::new();
        m.insert(
            "S".to_string(),
            vec![StripConductor::new(-0.5 * w, 0.5 * w).unwrap()],
        );
        m
    }

    fn unit_current(name: &str) -> CurrentConfiguration {
        let mut currents = BTreeMap::new();
        currents.insert(name.to_string(), Complex64::new(1.0, 0.0));
        CurrentConfiguration { currents }
    }

    #[test]
    fn thin_strip_approaches_filament_law() {
        // 1 A at distance 30 µm: |B| = μ0/(2πd) ≈ 6.67 mT.
        let strips = one_strip(1e-6);
        let p = Vec2::new(0.0, 30e-6);
        for profile in [CurrentProfile::EdgePeaked, CurrentProfile::Uniform] {
            let (b, _) = field_from_currents(&strips, profile, &unit_current("S"), &p).unwrap();
            let mag = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
            let expect = MU_0 / (2.0 * std::f64::consts::PI * 30e-6);
            assert!(
                (mag - expect).abs() < 1e-3 * expect,
                "{profile:?}: {mag} vs {expect}"
            );
            assert!((expect - 6.67e-3).abs() < 0.01e-3);
        }
    }

    #[test]
    fn field_above_wire_points_along_x() {
        let strips = one_strip(1e-6);
        let p = Vec2::new(0.0, 30e-6);
        let (b, _) =
            field_from_currents(&strips, CurrentProfile::EdgePeaked, &unit_current("S"), &p)
                .unwrap();
        assert!(b[0].re > 0.0);
        assert!(b[1].norm() < 1e-9 * b[0].norm());
    }

    #[test]
    fn antisymmetric_pair_field_is_vertical_on_axis() {
        // Equal-and-opposite currents in a mirror pair leave only the
        // surface-normal component on the symmetry plane.
        let mut strips = BTreeMap::new();
        strips.insert("L".to_string(), vec![StripConductor::new(-60e-6, -40e-6).unwrap()]);
        strips.insert("R".to_string(), vec![StripConductor::new(40e-6, 60e-6).unwrap()]);
        let mut currents = BTreeMap::new();
        currents.insert("L".to_string(), Complex64::new(1.0, 0.0));
        currents.insert("R".to_string(), Complex64::new(-1.0, 0.0));
        let config = CurrentConfiguration { currents };
        let (b, _) = field_from_currents(
            &strips,
            CurrentProfile::EdgePeaked,
            &config,
            &Vec2::new(0.0, 25e-6),
        )
        .unwrap();
        assert!(b[0].norm() < 1e-12 * b[1].norm(), "Bx = {:?}", b[0]);
        assert!(b[1].norm() > 0.0);
    }

    #[test]
    fn gradient_is_traceless_symmetric() {
        let strips = one_strip(20e-6);
        let (_, g) = field_from_currents(
            &strips,
            CurrentProfile::EdgePeaked,
            &unit_current("S"),
            &Vec2::new(7e-6, 33e-6),
        )
        .unwrap();
        assert!((g[(0, 0)] + g[(1, 1)]).norm() < 1e-12 * g[(0, 0)].norm());
        assert!((g[(0, 1)] - g[(1, 0)]).norm() < 1e-12 * g[(0, 1)].norm().max(1e-12));
    }

    #[test]
    fn degenerate_strip_is_config_error() {
        assert!(StripConductor::new(1e-6, 1e-6).is_err());
    }

    #[test]
    fn mirror_symmetric_triple_nulls_with_real_ratios() {
        let mut strips = BTreeMap::new();
        strips.insert("C".to_string(), vec![StripConductor::new(-10e-6, 10e-6).unwrap()]);
        strips.insert("L".to_string(), vec![StripConductor::new(-50e-6, -30e-6).unwrap()]);
        strips.insert("R".to_string(), vec![StripConductor::new(30e-6, 50e-6).unwrap()]);
        let nulled = null_optimize(
            &strips,
            CurrentProfile::EdgePeaked,
            "C",
            1.0,
            &Vec2::new(0.0, 30e-6),
        )
        .unwrap();
        assert!(nulled.residual_field < 1e-12);
        let il = nulled.currents.currents["L"];
        let ir = nulled.currents.currents["R"];
        assert!((il - ir).norm() < 1e-9 * il.norm(), "symmetry broken");
        // Phases land on 0° or 180°.
        let phase = nulled.currents.phase_deg("L", "C").unwrap().abs();
        assert!(phase < 1e-6 || (phase - 180.0).abs() < 1e-6, "phase {phase}");
    }

    #[test]
    fn single_strip_dissipation() {
        let mut geometry = BTreeMap::new();
        geometry.insert(
            "S".to_string(),
            StripCrossSection {
                width: 50e-6,
                thickness: 10.5e-6,
                length: 400e-6,
            },
        );
        let mut currents = BTreeMap::new();
        currents.insert("S".to_string(), Complex64::new(0.8, 0.0));
        let p = dissipation_estimate(
            &CurrentConfiguration { currents },
            &geometry,
            crate::constants::RHO_GOLD,
        )
        .unwrap();
        assert!((p - 5.4e-3).abs() < 0.05e-3, "P = {p}");
    }

    #[test]
    fn dissipation_scalings() {
        let mut geometry = BTreeMap::new();
        geometry.insert(
            "S".to_string(),
            StripCrossSection {
                width: 50e-6,
                thickness: 10.5e-6,
                length: 400e-6,
            },
        );
        let power = |amps: f64| {
            let mut currents = BTreeMap::new();
            currents.insert("S".to_string(), Complex64::new(amps, 0.0));
            dissipation_estimate(
                &CurrentConfiguration { currents },
                &geometry,
                crate::constants::RHO_GOLD,
            )
            .unwrap()
        };
        assert_eq!(power(0.0), 0.0);
        let p1 = power(1.0);
        let p2 = power(2.0);
        assert!((p2 / p1 - 4.0).abs() < 1e-12);
    }
}

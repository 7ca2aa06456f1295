//! Rf micromotion and its detection through microwave-gradient-driven
//! sideband transitions.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, MU_B};
use crate::error::Result;
use crate::geom::{canonical_quadrupole_branch, quadrupole_matrix, Vec2, Vec3};
use crate::planefield::{rf_field_jacobian, rf_null, ElectrodeLayout, IonSpecies, TrapDrive};
use crate::spins::TransitionSpec;

use super::quadrupole::{linear_rabi_rate, FieldMap, MapKind, MapPoint, QuadrupoleModel};

/// Linearized rf electric quadrupole at the null: E(δr) = E'·Q(2α_RF)·δr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfQuadrupole {
    /// Gradient of the rf field at the null (V/m²).
    pub e_prime: f64,
    /// Quadrupole rotation angle (deg).
    pub alpha_rf_deg: f64,
    /// Rf drive angular frequency (rad/s).
    pub omega_rf: f64,
}

impl RfQuadrupole {
    /// Extract the radial rf quadrupole of a layout at its null.
    pub fn from_layout(layout: &ElectrodeLayout, drive: &TrapDrive) -> Result<Self> {
        let null = rf_null(layout, drive)?;
        let j = rf_field_jacobian(layout, drive, &null)?;
        let (e_prime, alpha) =
            canonical_quadrupole_branch(j[(0, 0)].hypot(j[(0, 2)]), 0.5 * j[(0, 2)].atan2(j[(0, 0)]).to_degrees());
        Ok(Self {
            e_prime,
            alpha_rf_deg: alpha,
            omega_rf: drive.omega_rf,
        })
    }

    /// Instantaneous rf field amplitude at a radial displacement (V/m).
    pub fn field(&self, dr: &Vec2) -> Vec2 {
        self.e_prime * quadrupole_matrix(self.alpha_rf_deg.to_radians()) * dr
    }
}

/// Driven micromotion amplitude vector (m) in the radial plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicromotionState {
    pub amplitude: [f64; 2],
}

impl MicromotionState {
    pub fn vec(&self) -> Vec2 {
        Vec2::new(self.amplitude[0], self.amplitude[1])
    }

    pub fn r_mm(&self) -> f64 {
        self.vec().norm()
    }
}

/// Lowest-order micromotion of an ion held at `dr` from the rf null:
/// amplitude q·E(δr)/(m·Ω_RF²), linear in the displacement.
pub fn micromotion_amplitude(dr: &Vec2, rf: &RfQuadrupole, ion: &IonSpecies) -> MicromotionState {
    let e = rf.field(dr);
    let amp = (ion.charge / (ion.mass * rf.omega_rf * rf.omega_rf)) * e;
    MicromotionState {
        amplitude: [amp.x, amp.y],
    }
}

/// Oscillating field amplitude the ion sees in its rest frame at the
/// micromotion sidebands: ½·B'·Q(2α_MW)·(x_MM, z_MM).
pub fn mm_rest_frame_field(mm: &MicromotionState, model: &QuadrupoleModel) -> Vec3 {
    let radial =
        0.5 * model.b_prime * quadrupole_matrix(model.alpha_mw_deg.to_radians()) * mm.vec();
    Vec3::new(radial.x, 0.0, radial.y)
}

/// Rabi rate (rad/s) of the micromotion sideband of a transition, using
/// the transition's element and the field projections on the quantization
/// axis. Forbidden transitions return zero with a flag.
pub fn mm_sideband_rabi(
    mm: &MicromotionState,
    model: &QuadrupoleModel,
    spec: &TransitionSpec,
    b0_dir: &Vec3,
) -> (f64, bool) {
    let field = mm_rest_frame_field(mm, model);
    let forbidden = spec.element() < 1e-12;
    (linear_rabi_rate(&field, b0_dir, spec), forbidden)
}

/// Smallest micromotion amplitude (m) detectable as a rotation 2ΩT_p ≥ θ
/// on a sideband with ideal quadrupole alignment.
pub fn smallest_detectable_r_mm(
    b_prime: f64,
    element_mu_b: f64,
    t_probe: f64,
    threshold_angle: f64,
) -> f64 {
    // 2·(½ B' r · element·μB/(2ħ))·T = θ
    2.0 * HBAR * threshold_angle / (element_mu_b * MU_B * b_prime * t_probe)
}

/// Simulate a micromotion-sideband Rabi map over ion displacements. The
/// micromotion null sits at `mm_null` (the rf null, possibly offset by an
/// uncompensated stray displacement).
pub fn simulate_mm_map(
    model: &QuadrupoleModel,
    rf: &RfQuadrupole,
    ion: &IonSpecies,
    spec: &TransitionSpec,
    b0_dir: &Vec3,
    mm_null: &Vec2,
    grid: &[Vec2],
) -> FieldMap {
    let points = grid
        .iter()
        .map(|dr| {
            let mm = micromotion_amplitude(&(dr - mm_null), rf, ion);
            let (omega, _) = mm_sideband_rabi(&mm, model, spec, b0_dir);
            MapPoint {
                dr: [dr.x, dr.y],
                value: omega,
                sigma: None,
            }
        })
        .collect();
    FieldMap {
        kind: MapKind::Rabi,
        points,
    }
}

/// CSV map of the instantaneous rf field over the radial plane around the
/// null (`x_um,z_um,Ex,Ez` in V/m), plus the extracted quadrupole.
pub fn rf_field_jacobian_map(
    layout: &ElectrodeLayout,
    drive: &TrapDrive,
    half_width: f64,
    n: usize,
) -> Result<(String, RfQuadrupole)> {
    let null = rf_null(layout, drive)?;
    let rf = RfQuadrupole::from_layout(layout, drive)?;
    let mut csv = String::from("x_um,z_um,Ex,Ez
");
    for ix in 0..n {
        let x = null.x - half_width + 2.0 * half_width * ix as f64 / (n - 1) as f64;
        for iz in 0..n {
            let z = (null.z - half_width + 2.0 * half_width * iz as f64 / (n - 1) as f64)
                .max(1e-6);
            let p = crate::geom::Vec3::new(x, 0.0, z);
            let e = -drive.v_rf * layout.rf_basis_gradient(&p)?;
            csv.push_str(&format!(
                "{:.3},{:.3},{:.6e},{:.6e}
",
                x * 1e6,
                z * 1e6,
                e.x,
                e.z
            ));
        }
    }
    Ok((csv, rf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf() -> RfQuadrupole {
        RfQuadrupole {
            e_prime: 8.2e9,
            alpha_rf_deg: -22.6,
            omega_rf: 2.0 * std::f64::consts::PI * 71.6e6,
        }
    }

    #[test]
    fn micromotion_zero_at_null() {
        let mm = micromotion_amplitude(&Vec2::zeros(), &rf(), &IonSpecies::mg25());
        assert_eq!(mm.r_mm(), 0.0);
    }

    #[test]
    fn micromotion_linear_in_displacement() {
        let ion = IonSpecies::mg25();
        let d1 = micromotion_amplitude(&Vec2::new(0.5e-6, -0.2e-6), &rf(), &ion);
        let d2 = micromotion_amplitude(&Vec2::new(1.0e-6, -0.4e-6), &rf(), &ion);
        assert!((d2.r_mm() - 2.0 * d1.r_mm()).abs() < 1e-12 * d2.r_mm());
    }

    #[test]
    fn ideal_alignment_rest_frame_rate() {
        // r_MM = 0.1 nm, B' = 35 T/m, element μB, ideal alignment:
        // Ω = ½·35·1e-10·μB/(2ħ) ≈ 76.9 rad/s.
        let b_eff = 0.5 * 35.0 * 0.1e-9;
        let omega = b_eff * MU_B / (2.0 * HBAR);
        assert!((omega - 76.9).abs() < 0.15, "Ω = {omega}");
        // And the detectability threshold 2ΩT = π/10 at T = 2 ms lands at
        // about 0.102 nm.
        let r = smallest_detectable_r_mm(35.0, 1.0, 2e-3, std::f64::consts::PI / 10.0);
        assert!((r - 0.102e-9).abs() < 0.002e-9, "r_min = {r}");
    }
}

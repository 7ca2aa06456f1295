//! Ponderomotive effects of the microwave electric field: ion displacement
//! off the trap rf null and radial mode-frequency shifts.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::Result;
use crate::geom::{Vec2, Vec3};
use crate::planefield::{ElectrodeLayout, IonSpecies, ModeSolution};

/// Radial microwave electric field about a reference point: phasor value
/// and gradient at the drive frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MwElectricField {
    /// Field phasor (Ex, Ez) at the reference point (V/m).
    pub e0: Vector2<Complex64>,
    /// Gradient tensor ∂E_i/∂r_j (V/m²).
    pub gradient: Matrix2<Complex64>,
    /// Drive angular frequency (rad/s).
    pub omega: f64,
}

impl MwElectricField {
    /// Quasi-static estimate from electrode voltages V_j = Z_eff·I_j using
    /// the layout's patch potentials (microwave electrodes only).
    pub fn from_electrode_voltages(
        layout: &ElectrodeLayout,
        voltages: &[(String, Complex64)],
        point: &Vec3,
        omega: f64,
    ) -> Result<Self> {
        let mut e0 = Vector2::<Complex64>::zeros();
        let mut gradient = Matrix2::<Complex64>::zeros();
        for (name, volts) in voltages {
            let g = layout.basis_gradient(name, point)?;
            let h = layout.basis_hessian(name, point)?;
            // E = -V ∇φ; radial components only.
            e0[0] -= volts * g.x;
            e0[1] -= volts * g.z;
            gradient[(0, 0)] -= volts * h[(0, 0)];
            gradient[(0, 1)] -= volts * h[(0, 2)];
            gradient[(1, 0)] -= volts * h[(2, 0)];
            gradient[(1, 1)] -= volts * h[(2, 2)];
        }
        Ok(Self {
            e0,
            gradient,
            omega,
        })
    }

    /// Time-averaged pseudopotential (J) at a radial displacement from the
    /// reference point: q²|E(δr)|²/(4 m ω²) with the phasor amplitude.
    pub fn pseudopotential(&self, ion: &IonSpecies, dr: &Vec2) -> f64 {
        let e = self.field_at(dr);
        let coeff = ion.charge * ion.charge / (4.0 * ion.mass * self.omega * self.omega);
        coeff * (e[0].norm_sqr() + e[1].norm_sqr())
    }

    pub fn field_at(&self, dr: &Vec2) -> Vector2<Complex64> {
        let drc = Vector2::new(Complex64::new(dr.x, 0.0), Complex64::new(dr.y, 0.0));
        self.e0 + self.gradient * drc
    }

    /// Gradient of the pseudopotential at a radial displacement (N).
    pub fn pseudopotential_gradient(&self, ion: &IonSpecies, dr: &Vec2) -> Vec2 {
        let e = self.field_at(dr);
        let coeff = ion.charge * ion.charge / (4.0 * ion.mass * self.omega * self.omega);
        let mut grad = Vec2::zeros();
        for j in 0..2 {
            let mut acc = 0.0;
            for i in 0..2 {
                acc += 2.0 * (e[i].conj() * self.gradient[(i, j)]).re;
            }
            grad[j] = coeff * acc;
        }
        grad
    }

    /// Hessian of the pseudopotential (J/m²), constant for a linear field.
    pub fn pseudopotential_hessian(&self, ion: &IonSpecies) -> Matrix2<f64> {
        let coeff = ion.charge * ion.charge / (4.0 * ion.mass * self.omega * self.omega);
        let mut h = Matrix2::zeros();
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = 0.0;
                for i in 0..2 {
                    acc += 2.0 * (self.gradient[(i, j)].conj() * self.gradient[(i, k)]).re;
                }
                h[(j, k)] = coeff * acc;
            }
        }
        h
    }
}

/// Displacement and radial mode-frequency shifts caused by the microwave
/// pseudopotential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwPseudoEffect {
    /// Radial displacement of the equilibrium (m).
    pub displacement: [f64; 2],
    /// Frequency shift of the (LF, HF) radial modes (Hz).
    pub mode_shifts: [f64; 2],
}

/// First-order response of a solved trap to the microwave pseudopotential:
/// displacement = force / (m ω_k²) per radial mode, frequency shifts from
/// the projected pseudopotential curvature.
pub fn mw_pseudopotential(
    field: &MwElectricField,
    sol: &ModeSolution,
    ion: &IonSpecies,
) -> MwPseudoEffect {
    let force = -field.pseudopotential_gradient(ion, &Vec2::zeros());
    let h = field.pseudopotential_hessian(ion);
    let mut displacement = Vec2::zeros();
    let mut shifts = [0.0; 2];
    for (slot, mode) in [&sol.lf, &sol.hf].into_iter().enumerate() {
        let v = Vec2::new(mode.vector[0], mode.vector[2]);
        let omega_k = 2.0 * std::f64::consts::PI * mode.freq;
        let f_k = force.dot(&v);
        displacement += (f_k / (ion.mass * omega_k * omega_k)) * v;
        let dlambda = (h * v).dot(&v);
        shifts[slot] = dlambda / (2.0 * ion.mass * omega_k) / (2.0 * std::f64::consts::PI);
    }
    MwPseudoEffect {
        displacement: [displacement.x, displacement.y],
        mode_shifts: shifts,
    }
}

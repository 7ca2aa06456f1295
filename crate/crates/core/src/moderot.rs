//! Radial-mode orientation control: sweeping the rotation-potential scale,
//! solving the alignment condition, and sideband couplings of the
//! microwave gradient to the motional modes.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, MU_B};
use crate::error::{Error, Result};
use crate::geom::{quadrupole_matrix, Vec2, Vec3};
use crate::nearfield::QuadrupoleModel;
use crate::numeric::brent_root;
use crate::planefield::{Mode, ModeSolution, TrapSystem};
use crate::spins::TransitionSpec;

/// Mode solutions over a grid of rotation-potential scale factors.
#[derive(Debug, Clone)]
pub struct RotationSweep {
    pub s_values: Vec<f64>,
    /// Per-point solution; `None` where the trap is unbound (the sweep is
    /// truncated there with a warning flag rather than failing).
    pub solutions: Vec<Option<ModeSolution>>,
    pub truncated: bool,
}

impl RotationSweep {
    /// (s, α_LF) pairs over the trapped part of the sweep.
    pub fn alpha_series(&self) -> Vec<(f64, f64)> {
        self.s_values
            .iter()
            .zip(&self.solutions)
            .filter_map(|(s, sol)| sol.as_ref().map(|m| (*s, m.alpha_lf_deg)))
            .collect()
    }

    /// (s, f_LF, f_HF) rows over the trapped part of the sweep.
    pub fn frequency_series(&self) -> Vec<(f64, f64, f64)> {
        self.s_values
            .iter()
            .zip(&self.solutions)
            .filter_map(|(s, sol)| sol.as_ref().map(|m| (*s, m.lf.freq, m.hf.freq)))
            .collect()
    }
}

/// Re-solve the full equilibrium and modes at each rotation scale.
pub fn sweep(base: &TrapSystem, s_grid: &[f64]) -> Result<RotationSweep> {
    if s_grid.is_empty() {
        return Err(Error::Config("empty rotation sweep grid".into()));
    }
    let mut solutions = Vec::with_capacity(s_grid.len());
    let mut truncated = false;
    for &s in s_grid {
        let mut system = base.clone();
        system.s_rot = s;
        match system.solve() {
            Ok(sol) => solutions.push(Some(sol)),
            Err(Error::Untrapped { .. }) => {
                solutions.push(None);
                truncated = true;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RotationSweep {
        s_values: s_grid.to_vec(),
        solutions,
        truncated,
    })
}

/// Solve α_LF(s_rot) = α_target by a bracketed root find over [s_lo, s_hi];
/// the achieved angle lands within 0.1°.
pub fn solve_alignment(
    base: &TrapSystem,
    alpha_target_deg: f64,
    s_lo: f64,
    s_hi: f64,
) -> Result<f64> {
    let alpha_at = |s: f64| -> Result<f64> {
        let mut system = base.clone();
        system.s_rot = s;
        Ok(system.solve()?.alpha_lf_deg)
    };
    let a_lo = alpha_at(s_lo)?;
    let a_hi = alpha_at(s_hi)?;
    let (lo, hi) = (a_lo.min(a_hi), a_lo.max(a_hi));
    if alpha_target_deg < lo || alpha_target_deg > hi {
        return Err(Error::OutOfRange {
            target: alpha_target_deg,
            lo,
            hi,
        });
    }
    let s_star = brent_root(
        |s| alpha_at(s).map(|a| a - alpha_target_deg).unwrap_or(f64::NAN),
        s_lo,
        s_hi,
        1e-6,
        100,
    )?;
    let achieved = alpha_at(s_star)?;
    if (achieved - alpha_target_deg).abs() > 0.1 {
        return Err(Error::NonConvergence {
            context: format!("alignment solve reached {achieved:.3} deg"),
            iterations: 100,
            residual: (achieved - alpha_target_deg).abs(),
        });
    }
    Ok(s_star)
}

/// Sideband coupling of a motional mode to the microwave gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandCoupling {
    /// Ground-state sideband Rabi rate (rad/s).
    pub omega_sb: f64,
    /// |∂B_∥/∂r| projected on the mode vector (T/m).
    pub gradient_projection: f64,
    /// Transition is dipole-forbidden.
    pub forbidden: bool,
}

/// Gradient of the field component along the quantization axis, as a
/// radial-plane vector (T/m).
pub fn parallel_gradient(model: &QuadrupoleModel, b0_dir: &Vec3) -> Vec2 {
    let unit = b0_dir.normalize();
    let radial_b0 = Vec2::new(unit.x, unit.z);
    model.b_prime * quadrupole_matrix(model.alpha_mw_deg.to_radians()) * radial_b0
}

/// Ground-state sideband Rabi rate of a Δm = 0 transition driven by the
/// parallel-field gradient: Ω = element·(∂B_∥/∂r · v̂)·a₀·μ_B/(2ħ).
pub fn sideband_rabi(
    mode: &Mode,
    model: &QuadrupoleModel,
    spec: &TransitionSpec,
    b0_dir: &Vec3,
) -> SidebandCoupling {
    let grad = parallel_gradient(model, b0_dir);
    let v = Vec2::new(mode.vector[0], mode.vector[2]);
    let projection = grad.dot(&v).abs();
    let forbidden = spec.element() < 1e-12;
    let omega_sb = spec.element() * MU_B * projection * mode.a0 / (2.0 * HBAR);
    SidebandCoupling {
        omega_sb,
        gradient_projection: projection,
        forbidden,
    }
}

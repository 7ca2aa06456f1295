//! Analytic electrostatics of a gapless planar electrode layout: control
//! potentials, rf pseudopotential, trap equilibrium, depth, normal modes,
//! shim bases and stray-potential models.

pub(crate) mod files;
pub(crate) mod layout;
mod patch;
pub mod presets;
pub(crate) mod shims;
mod solve;

pub use files::{StrayFile, TrapConfigFile};
pub use layout::{static_field, static_hessian, ElectrodeLayout, ElectrodePatch, ElectrodeRole};
pub use patch::Rect;
pub use shims::{design_shims, displacement_resolution, field_nulling_increment, ShimBasis};
pub use solve::{
    axial_rf_curvature_freq, mode_solution_from_hessian, pseudopotential_ev, rf_field_jacobian,
    rf_null, stray_patch_forward, trap_depth, IonSpecies, Mode, ModeSolution, StrayModel,
    TrapDepth, TrapDrive, TrapSystem,
};

use crate::error::Result;
use crate::geom::Vec3;

/// Unit-bias potential of a single patch; the basic electrostatic element.
pub fn patch_potential(patch: &ElectrodePatch, point: &Vec3) -> Result<f64> {
    patch.rect.potential(point)
}

/// Convenience: solve a full scene assembled from parts.
pub fn solve_trap(
    layout: &ElectrodeLayout,
    drive: &TrapDrive,
    stray: &StrayModel,
    s_rot: f64,
    v_rot: &std::collections::BTreeMap<String, f64>,
) -> Result<ModeSolution> {
    TrapSystem::new(
        layout.clone(),
        drive.clone(),
        stray.clone(),
        s_rot,
        v_rot.clone(),
    )?
    .solve()
}

//! Reference trap configuration shipped with the toolkit: a five-wire
//! surface trap with three integrated microwave electrodes, its operating
//! drive, a measured-style stray model and the mode-rotation voltage set.

use std::collections::BTreeMap;

use crate::error::Result;

use super::layout::ElectrodeLayout;
use super::solve::{IonSpecies, StrayModel, TrapDrive, TrapSystem};

/// JSON description of the reference five-wire layout (µm units).
pub const FIVE_WIRE_LAYOUT_JSON: &str = include_str!("../../assets/five_wire_layout.json");

/// The reference five-wire layout: two tapered rf rails around a central
/// microwave strip, two further microwave strips outboard, and two
/// three-segment control rails.
pub fn reference_layout() -> ElectrodeLayout {
    ElectrodeLayout::from_json(FIVE_WIRE_LAYOUT_JSON).expect("shipped layout is valid")
}

/// Operating drive: 35 V rf at 2π × 71.6 MHz and the reference control set.
pub fn reference_drive() -> TrapDrive {
    let v: [(&str, f64); 6] = [
        ("C1", -0.801),
        ("C2", 0.641),
        ("C3", -0.801),
        ("C4", 0.750),
        ("C5", -0.384),
        ("C6", 0.750),
    ];
    TrapDrive {
        v_rf: 35.0,
        omega_rf: 2.0 * std::f64::consts::PI * 71.6e6,
        v_ctrl: v.iter().map(|(k, x)| (k.to_string(), *x)).collect(),
        ion: IonSpecies::mg25(),
    }
}

/// Control set for calibration work at f_axial ≈ 1.5 MHz, designed at the
/// rf null for zero field and zero radial anisotropy. The stray curvature
/// model is strong enough to unbind the soft 0.5 MHz axial well, so
/// stray-on scenes run at this stiffer setting (where the stray model was
/// characterized).
pub fn calibration_drive() -> Result<TrapDrive> {
    let layout = reference_layout();
    let mut drive = reference_drive();
    let null = super::solve::rf_null(&layout, &drive)?;
    let f_axial_target = 1.65e6;
    let omega = 2.0 * std::f64::consts::PI * f_axial_target;
    let phi_yy = drive.ion.mass * omega * omega / drive.ion.charge;

    // Radial deviator of the uncontrolled trap (pseudopotential + stray) at
    // the null, in field-curvature units.
    let mut bare = drive.clone();
    bare.v_ctrl.clear();
    let probe = TrapSystem::new(
        layout.clone(),
        bare,
        StrayModel::none(),
        0.0,
        Default::default(),
    )?;
    let h_ps = probe.total_hessian(&null)? / drive.ion.charge;
    let h_st = reference_stray().h_mat();
    let base_aniso = (h_ps[(0, 0)] - h_ps[(2, 2)]) + (h_st[(0, 0)] - h_st[(2, 2)]);

    // Zero net radial anisotropy: the remaining cross-curvature places the
    // base orientation diagonally, where the rotation sweep can reach the
    // alignment angles of interest on both sides.
    drive.v_ctrl = super::shims::design_control_set(&layout, phi_yy, -base_aniso, &null)?;
    Ok(drive)
}

/// Stray field and curvature representative of surface contamination,
/// expanded about the rf null.
pub fn reference_stray() -> StrayModel {
    StrayModel {
        e_stray: [720.0 * -0.54, 720.0 * 0.10, 720.0 * -0.84],
        h_stray: [
            [1.96e7, 0.44e7, 0.39e7],
            [0.44e7, -1.67e7, -4.23e7],
            [0.39e7, -4.23e7, -0.29e7],
        ],
        patch: None,
    }
}

/// Control-voltage set whose scaled addition rotates the radial modes while
/// leaving the equilibrium position unchanged.
pub fn rotation_voltages() -> BTreeMap<String, f64> {
    let v: [(&str, f64); 6] = [
        ("C1", -1.694),
        ("C2", 2.298),
        ("C3", -1.694),
        ("C4", 0.311),
        ("C5", 0.501),
        ("C6", 0.311),
    ];
    v.iter().map(|(k, x)| (k.to_string(), *x)).collect()
}

/// Assembled reference trap scene: the quoted operating voltages, no stray.
pub fn reference_system(stray: bool, s_rot: f64) -> Result<TrapSystem> {
    TrapSystem::new(
        reference_layout(),
        reference_drive(),
        if stray {
            reference_stray()
        } else {
            StrayModel::none()
        },
        s_rot,
        rotation_voltages(),
    )
}

/// Assembled calibration scene: stiffer axial confinement with the stray
/// model applied; the setting used for shim, map and mode-rotation work.
///
/// As in the lab, the stray field is compensated first: control increments
/// cancel the total static field at the rf null, and the rotation basis is
/// likewise orthogonalized so that scaling it exerts no net force there.
pub fn calibration_system(s_rot: f64) -> Result<TrapSystem> {
    let layout = reference_layout();
    let mut drive = calibration_drive()?;
    let stray = reference_stray();
    let mut v_rot = rotation_voltages();

    let probe = TrapSystem::new(
        layout.clone(),
        drive.clone(),
        stray.clone(),
        0.0,
        v_rot.clone(),
    )?;
    let null = probe.stray_reference();

    let (e_ctrl, _) = super::layout::static_field(&layout, &drive.v_ctrl, &null)?;
    let dv = super::shims::field_nulling_increment(&probe, e_ctrl + stray.e_vec(), &null)?;
    for (name, v) in dv {
        *drive.v_ctrl.entry(name).or_insert(0.0) += v;
    }

    let (e_rot, _) = super::layout::static_field(&layout, &v_rot, &null)?;
    let dv_rot = super::shims::field_nulling_increment(&probe, e_rot, &null)?;
    for (name, v) in dv_rot {
        *v_rot.entry(name).or_insert(0.0) += v;
    }

    TrapSystem::new(layout, drive, stray, s_rot, v_rot)
}

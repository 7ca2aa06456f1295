//! Trap configuration file schema: JSON description of the drive, stray
//! model and rotation set applied to a layout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::layout::ElectrodeLayout;
use super::presets;
use super::solve::{IonSpecies, StrayModel, TrapDrive, TrapSystem};

/// On-disk trap configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapConfigFile {
    /// Rf peak voltage (V).
    pub v_rf: f64,
    /// Rf frequency (MHz).
    pub f_rf_mhz: f64,
    /// Control voltages (V) per electrode.
    pub v_ctrl: BTreeMap<String, f64>,
    /// Stray model: field (V/m) and Hessian (V/m²).
    #[serde(default)]
    pub stray: Option<StrayFile>,
    /// Rotation-potential scale.
    #[serde(default)]
    pub s_rot: f64,
    /// Rotation voltage set (V per electrode at s_rot = 1).
    #[serde(default)]
    pub v_rot: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrayFile {
    pub e: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl TrapConfigFile {
    /// The shipped reference configuration: the quoted operating voltages
    /// with the stray model off (its curvature unbinds this soft axial
    /// setting; see [`TrapConfigFile::calibration`]).
    pub fn reference() -> Self {
        let drive = presets::reference_drive();
        Self {
            v_rf: drive.v_rf,
            f_rf_mhz: drive.omega_rf / (2.0 * std::f64::consts::PI) / 1e6,
            v_ctrl: drive.v_ctrl,
            stray: None,
            s_rot: 0.0,
            v_rot: presets::rotation_voltages(),
        }
    }

    /// The compensated calibration configuration: stiffer designed control
    /// set, stray model included, rotation basis orthogonalized.
    pub fn calibration() -> Result<Self> {
        let system = presets::calibration_system(0.0)?;
        Ok(Self {
            v_rf: system.drive.v_rf,
            f_rf_mhz: system.drive.omega_rf / (2.0 * std::f64::consts::PI) / 1e6,
            v_ctrl: system.drive.v_ctrl.clone(),
            stray: Some(StrayFile {
                e: system.stray.e_stray,
                h: system.stray.h_stray,
            }),
            s_rot: system.s_rot,
            v_rot: system.v_rot.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("trap config JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Assemble a solvable system on a layout.
    pub fn into_system(self, layout: ElectrodeLayout) -> Result<TrapSystem> {
        let drive = TrapDrive {
            v_rf: self.v_rf,
            omega_rf: 2.0 * std::f64::consts::PI * self.f_rf_mhz * 1e6,
            v_ctrl: self.v_ctrl,
            ion: IonSpecies::mg25(),
        };
        let stray = match self.stray {
            Some(s) => StrayModel {
                e_stray: s.e,
                h_stray: s.h,
                patch: None,
            },
            None => StrayModel::none(),
        };
        TrapSystem::new(layout, drive, stray, self.s_rot, self.v_rot)
    }
}

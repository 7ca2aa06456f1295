//! Electrode layout: named rectangular patches with roles, plus superposed
//! static fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};

use super::patch::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElectrodeRole {
    Rf,
    Control,
    Microwave,
    Ground,
}

/// One rectangular patch of a (possibly multi-patch) electrode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodePatch {
    pub name: String,
    pub role: ElectrodeRole,
    pub rect: Rect,
}

/// A planar electrode layout. Electrodes may comprise several patches
/// sharing a name; patches must be pairwise interior-disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeLayout {
    patches: Vec<ElectrodePatch>,
}

impl ElectrodeLayout {
    pub fn new(patches: Vec<ElectrodePatch>) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::Layout("empty layout".into()));
        }
        for (i, a) in patches.iter().enumerate() {
            for b in &patches[i + 1..] {
                if a.rect.overlaps(&b.rect) {
                    return Err(Error::Layout(format!(
                        "patches `{}` and `{}` overlap",
                        a.name, b.name
                    )));
                }
            }
        }
        if !patches.iter().any(|p| p.role == ElectrodeRole::Rf) {
            return Err(Error::Layout("layout has no rf patch".into()));
        }
        if !patches.iter().any(|p| p.role == ElectrodeRole::Control) {
            return Err(Error::Layout("layout has no control patch".into()));
        }
        Ok(Self { patches })
    }

    pub fn patches(&self) -> &[ElectrodePatch] {
        &self.patches
    }

    pub fn patches_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ElectrodePatch> {
        self.patches.iter().filter(move |p| p.name == name)
    }

    pub fn patches_with_role(&self, role: ElectrodeRole) -> impl Iterator<Item = &ElectrodePatch> {
        self.patches.iter().filter(move |p| p.role == role)
    }

    pub fn has_electrode(&self, name: &str) -> bool {
        self.patches.iter().any(|p| p.name == name)
    }

    pub fn electrode_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.patches.iter().map(|p| p.name.clone()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn control_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .patches_with_role(ElectrodeRole::Control)
            .map(|p| p.name.clone())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Unit-bias basis potential of one named electrode (all its patches).
    pub fn basis_potential(&self, name: &str, p: &Vec3) -> Result<f64> {
        let mut found = false;
        let mut acc = 0.0;
        for patch in self.patches_of(name) {
            found = true;
            acc += patch.rect.potential(p)?;
        }
        self.require_found(found, name)?;
        Ok(acc)
    }

    /// Gradient of the unit-bias basis potential (1/m).
    pub fn basis_gradient(&self, name: &str, p: &Vec3) -> Result<Vec3> {
        let mut found = false;
        let mut acc = Vec3::zeros();
        for patch in self.patches_of(name) {
            found = true;
            acc += patch.rect.gradient(p)?;
        }
        self.require_found(found, name)?;
        Ok(acc)
    }

    /// Hessian of the unit-bias basis potential (1/m²).
    pub fn basis_hessian(&self, name: &str, p: &Vec3) -> Result<Mat3> {
        let mut found = false;
        let mut acc = Mat3::zeros();
        for patch in self.patches_of(name) {
            found = true;
            acc += patch.rect.hessian(p)?;
        }
        self.require_found(found, name)?;
        Ok(acc)
    }

    fn require_found(&self, found: bool, name: &str) -> Result<()> {
        if found {
            Ok(())
        } else {
            Err(Error::UnknownElectrode(name.to_string()))
        }
    }

    /// Unit-bias rf basis potential (every rf patch at 1 V).
    pub fn rf_basis_potential(&self, p: &Vec3) -> Result<f64> {
        let mut acc = 0.0;
        for patch in self.patches_with_role(ElectrodeRole::Rf) {
            acc += patch.rect.potential(p)?;
        }
        Ok(acc)
    }

    pub fn rf_basis_gradient(&self, p: &Vec3) -> Result<Vec3> {
        let mut acc = Vec3::zeros();
        for patch in self.patches_with_role(ElectrodeRole::Rf) {
            acc += patch.rect.gradient(p)?;
        }
        Ok(acc)
    }

    pub fn rf_basis_hessian(&self, p: &Vec3) -> Result<Mat3> {
        let mut acc = Mat3::zeros();
        for patch in self.patches_with_role(ElectrodeRole::Rf) {
            acc += patch.rect.hessian(p)?;
        }
        Ok(acc)
    }

    /// Load from a JSON list of `{name, role, x1, x2, y1, y2}` in µm.
    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<PatchFileEntry> =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("layout JSON: {e}")))?;
        let um = 1e-6;
        let patches = entries
            .into_iter()
            .map(|e| {
                Ok(ElectrodePatch {
                    name: e.name,
                    role: e.role,
                    rect: Rect::new(e.x1 * um, e.x2 * um, e.y1 * um, e.y2 * um)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(patches)
    }

    /// Serialize to the JSON file schema (µm units).
    pub fn to_json(&self) -> String {
        let um = 1e6;
        let entries: Vec<PatchFileEntry> = self
            .patches
            .iter()
            .map(|p| PatchFileEntry {
                name: p.name.clone(),
                role: p.role,
                x1: p.rect.x1 * um,
                x2: p.rect.x2 * um,
                y1: p.rect.y1 * um,
                y2: p.rect.y2 * um,
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("layout serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PatchFileEntry {
    name: String,
    role: ElectrodeRole,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

/// Superposed static potential and field of a voltage assignment (V, V/m).
/// The field is linear in the voltages; every named electrode must exist.
pub fn static_field(
    layout: &ElectrodeLayout,
    voltages: &BTreeMap<String, f64>,
    point: &Vec3,
) -> Result<(Vec3, f64)> {
    let mut potential = 0.0;
    let mut e_field = Vec3::zeros();
    for (name, &volts) in voltages {
        potential += volts * layout.basis_potential(name, point)?;
        e_field -= volts * layout.basis_gradient(name, point)?;
    }
    Ok((e_field, potential))
}

/// Hessian of the superposed static potential (V/m²).
pub fn static_hessian(
    layout: &ElectrodeLayout,
    voltages: &BTreeMap<String, f64>,
    point: &Vec3,
) -> Result<Mat3> {
    let mut h = Mat3::zeros();
    for (name, &volts) in voltages {
        h += volts * layout.basis_hessian(name, point)?;
    }
    Ok(h)
}

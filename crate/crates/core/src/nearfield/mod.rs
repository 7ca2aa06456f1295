//! Microwave near-field models: quadrupole parameterization and maps,
//! quasi-static strip-current fields and nulling, map fitting, micromotion
//! detection, dissipation and microwave-pseudopotential effects.

mod currents;
mod fit;
mod micromotion;
mod mwpseudo;
mod quadrupole;

pub use currents::{
    dissipation_estimate, field_from_currents, null_optimize, quadrupole_parameters,
    CurrentConfiguration, CurrentProfile, NulledConfiguration, StripConductor, StripCrossSection,
};
pub use fit::{fit_quadrupole, FittedQuadrupole, MapModel};
pub use micromotion::{
    micromotion_amplitude, mm_rest_frame_field, mm_sideband_rabi, rf_field_jacobian_map,
    simulate_mm_map, smallest_detectable_r_mm, MicromotionState, RfQuadrupole,
};
pub use mwpseudo::{mw_pseudopotential, MwElectricField, MwPseudoEffect};
pub use quadrupole::{
    linear_field_phasor, linear_rabi_rate, parallel_perp_split, radial_grid,
    simulate_aczeeman_map, FieldMap, MapKind, MapPoint, QuadrupoleModel,
    QUADRUPOLE_VALIDITY_RADIUS,
};

use std::collections::BTreeMap;

use crate::error::Result;
use crate::planefield::{ElectrodeLayout, ElectrodeRole};

/// Strip conductors of a layout's microwave electrodes: one finger per
/// distinct transverse extent of each electrode name.
pub fn microwave_strips(layout: &ElectrodeLayout) -> Result<BTreeMap<String, Vec<StripConductor>>> {
    let mut fingers: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for patch in layout.patches_with_role(ElectrodeRole::Microwave) {
        let list = fingers.entry(patch.name.clone()).or_default();
        let extent = (patch.rect.x1, patch.rect.x2);
        if !list.contains(&extent) {
            list.push(extent);
        }
    }
    fingers
        .into_iter()
        .map(|(name, extents)| {
            let strips = extents
                .into_iter()
                .map(|(x1, x2)| StripConductor::new(x1, x2))
                .collect::<Result<Vec<_>>>()?;
            Ok((name, strips))
        })
        .collect()
}

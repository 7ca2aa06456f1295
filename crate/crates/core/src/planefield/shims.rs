//! Shim-field design: control-voltage combinations that displace the ion
//! along one axis at a time, and the position resolution they give for a
//! quantized DAC.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::solve::TrapSystem;

/// Per-axis control-voltage increments producing unit (1 m) displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimBasis {
    /// Axis index 0/1/2 = x/y/z; electrode → V per meter of displacement.
    pub per_axis: [BTreeMap<String, f64>; 3],
    /// Cross-axis displacement fraction measured by re-solving.
    pub crosstalk: [f64; 3],
}

impl ShimBasis {
    /// Voltage map realizing a displacement (m) along `axis`.
    pub fn voltages_for(&self, axis: usize, displacement: f64) -> BTreeMap<String, f64> {
        self.per_axis[axis]
            .iter()
            .map(|(k, v)| (k.clone(), v * displacement))
            .collect()
    }
}

/// Positioning precision per axis (m) for a quantized DAC: every control
/// voltage rounds independently to the LSB, so the worst-case position
/// step is lsb·Σ_e |∂r_i/∂V_e| over the linear-response matrix.
pub fn displacement_resolution(system: &TrapSystem, dac_lsb: f64) -> Result<[f64; 3]> {
    let sol = system.solve()?;
    let r0 = sol.center();
    let h = system.total_hessian(&r0)?;
    let h_inv = h
        .try_inverse()
        .ok_or_else(|| Error::Singular("trap Hessian".into()))?;
    let q = system.drive.ion.charge;
    let mut res = [0.0; 3];
    for name in system.layout.control_names() {
        let e_per_volt = -system.layout.basis_gradient(&name, &r0)?;
        let dr = h_inv * (q * e_per_volt);
        for axis in 0..3 {
            res[axis] += dac_lsb * dr[axis].abs();
        }
    }
    Ok(res)
}

/// Minimum-norm least-squares solve of `m x = b` via SVD, truncating
/// singular values below `1e-10` of the largest. Rows are normalized first
/// so heterogeneous constraint units do not skew the truncation.
fn min_norm_solve(mut m: DMatrix<f64>, mut b: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    for i in 0..m.nrows() {
        let norm = m.row(i).norm();
        if norm > 0.0 {
            for j in 0..m.ncols() {
                m[(i, j)] /= norm;
            }
            b[i] /= norm;
        }
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return Err(Error::Singular(what.into()));
    }
    let x = svd
        .solve(&b, 1e-10 * smax)
        .map_err(|e| Error::Singular(format!("{what}: {e}")))?;
    // Reject solutions that fail a requested constraint outright.
    let residual = (&m * &x - &b).norm();
    if residual > 1e-6 * b.norm().max(1.0) {
        return Err(Error::Singular(format!(
            "{what}: constraints unreachable (residual {residual:.3e})"
        )));
    }
    Ok(x)
}

/// Minimum-norm control increments whose static field at `point` cancels
/// `e_cancel` while leaving the trap curvatures unchanged (the compensation
/// step of micromotion nulling). Constrains the field components and the
/// diagonal curvature changes at `point`.
pub fn field_nulling_increment(
    system: &TrapSystem,
    e_cancel: Vec3,
    point: &Vec3,
) -> Result<BTreeMap<String, f64>> {
    let names = system.layout.control_names();
    if names.len() < 3 {
        return Err(Error::Singular(
            "need at least 3 control electrodes to cancel a field".into(),
        ));
    }
    // Rows: Ex, Ey, Ez, and (when enough electrodes) φ_yy, φ_xx - φ_zz.
    let n_rows = if names.len() >= 5 { 5 } else { 3 };
    let mut m = DMatrix::<f64>::zeros(n_rows, names.len());
    for (j, name) in names.iter().enumerate() {
        let e_per_volt = -system.layout.basis_gradient(name, point)?;
        for i in 0..3 {
            m[(i, j)] = e_per_volt[i];
        }
        if n_rows == 5 {
            let h = system.layout.basis_hessian(name, point)?;
            m[(3, j)] = h[(1, 1)];
            m[(4, j)] = h[(0, 0)] - h[(2, 2)];
        }
    }
    let mut b = DVector::<f64>::zeros(n_rows);
    for i in 0..3 {
        b[i] = -e_cancel[i];
    }
    let dv = min_norm_solve(m, b, "field compensation")?;
    Ok(names.into_iter().zip(dv.iter().copied()).collect())
}

/// Design a control-voltage set realizing, at `point`: zero static field,
/// axial curvature φ_yy (V/m²) and radial anisotropy φ_xx - φ_zz. Five
/// constraints; needs ≥ 5 control electrodes.
pub fn design_control_set(
    layout: &super::layout::ElectrodeLayout,
    phi_yy: f64,
    xx_minus_zz: f64,
    point: &Vec3,
) -> Result<BTreeMap<String, f64>> {
    let names = layout.control_names();
    if names.len() < 5 {
        return Err(Error::Singular(format!(
            "{} control electrodes cannot satisfy 5 curvature/field constraints",
            names.len()
        )));
    }
    let mut m = DMatrix::<f64>::zeros(5, names.len());
    for (j, name) in names.iter().enumerate() {
        let e_per_volt = -layout.basis_gradient(name, point)?;
        let h = layout.basis_hessian(name, point)?;
        m[(0, j)] = e_per_volt[0];
        m[(1, j)] = e_per_volt[1];
        m[(2, j)] = e_per_volt[2];
        m[(3, j)] = h[(1, 1)];
        m[(4, j)] = h[(0, 0)] - h[(2, 2)];
    }
    let mut b = DVector::<f64>::zeros(5);
    b[3] = phi_yy;
    b[4] = xx_minus_zz;
    let dv = min_norm_solve(m, b, "control design")?;
    Ok(names.into_iter().zip(dv.iter().copied()).collect())
}

/// Verification displacement used when measuring cross-talk (m); small
/// enough for linear response.
const VERIFY_DISPLACEMENT: f64 = 0.1e-6;

/// Design minimum-norm shim voltage sets for displacements along x, y, z.
///
/// Linear response about the equilibrium: a per-volt force `q E_e` moves the
/// ion by `H⁻¹ q E_e`. The stacked 3×N response matrix is inverted in the
/// least-squares sense; each axis is then verified by re-solving the trap
/// with the shim applied.
pub fn design_shims(system: &TrapSystem) -> Result<ShimBasis> {
    let sol = system.solve()?;
    let r0 = sol.center();
    let h = system.total_hessian(&r0)?;
    let q = system.drive.ion.charge;
    let names = system.layout.control_names();
    if names.len() < 3 {
        return Err(Error::Singular(format!(
            "{} control electrodes cannot span 3 displacement axes",
            names.len()
        )));
    }

    let h_inv = h
        .try_inverse()
        .ok_or_else(|| Error::Singular("trap Hessian".into()))?;
    let mut response = DMatrix::<f64>::zeros(3, names.len());
    for (j, name) in names.iter().enumerate() {
        let e_per_volt = -system.layout.basis_gradient(name, &r0)?;
        let dr = h_inv * (q * e_per_volt); // m per volt
        for i in 0..3 {
            response[(i, j)] = dr[i];
        }
    }

    // Minimum-norm solution ΔV = Jᵀ (J Jᵀ)⁻¹ e_axis.
    let jjt = &response * response.transpose();
    let jjt_inv = jjt
        .try_inverse()
        .ok_or_else(|| Error::Singular("electrode set cannot produce independent displacements".into()))?;

    let mut per_axis: [BTreeMap<String, f64>; 3] = Default::default();
    let mut crosstalk = [0.0; 3];
    for axis in 0..3 {
        let mut target = DVector::<f64>::zeros(3);
        target[axis] = 1.0;
        let dv = response.transpose() * (&jjt_inv * target); // V per meter
        let map: BTreeMap<String, f64> = names
            .iter()
            .cloned()
            .zip(dv.iter().copied())
            .collect();

        // Verify by re-solving with a small applied displacement.
        let mut shifted = system.clone();
        for (name, v_per_m) in &map {
            *shifted.drive.v_ctrl.entry(name.clone()).or_insert(0.0) +=
                v_per_m * VERIFY_DISPLACEMENT;
        }
        let moved = shifted.solve()?;
        let delta = moved.center() - r0;
        let mut unit = Vec3::zeros();
        unit[axis] = 1.0;
        let along = delta.dot(&unit);
        let cross = (delta - along * unit).norm();
        if along.abs() < 0.5 * VERIFY_DISPLACEMENT {
            return Err(Error::Singular(format!(
                "shim for axis {axis} moved {along:.3e} m instead of {VERIFY_DISPLACEMENT:.3e} m"
            )));
        }
        let frac = cross / along.abs();
        if frac > 0.10 {
            return Err(Error::Config(format!(
                "shim for axis {axis} has {:.1}% cross-axis displacement",
                frac * 100.0
            )));
        }
        // Calibrate the scale to the measured response.
        let scale = VERIFY_DISPLACEMENT / along;
        per_axis[axis] = map
            .into_iter()
            .map(|(k, v)| (k, v * scale))
            .collect();
        crosstalk[axis] = frac;
    }
    Ok(ShimBasis {
        per_axis,
        crosstalk,
    })
}

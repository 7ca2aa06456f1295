//! Equilibrium, normal modes and depth of the combined rf pseudopotential
//! and static control potential.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, Q_E};
use crate::error::{Error, Result};
use crate::geom::{mode_angle_deg, Mat3, Vec3};

use super::layout::{static_field, static_hessian, ElectrodeLayout};
use super::patch::Rect;

/// Trapped-ion species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    /// Mass (kg).
    pub mass: f64,
    /// Charge (C).
    pub charge: f64,
}

impl IonSpecies {
    pub fn mg25() -> Self {
        Self {
            mass: crate::constants::mg25::MASS,
            charge: Q_E,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mass <= 0.0 {
            return Err(Error::Config(format!("ion mass {} must be > 0", self.mass)));
        }
        if self.charge == 0.0 {
            return Err(Error::Config("ion charge must be nonzero".into()));
        }
        Ok(())
    }
}

/// Rf drive and control voltages applied to a layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapDrive {
    /// Rf peak voltage (V), applied to every rf patch in phase.
    pub v_rf: f64,
    /// Rf angular frequency (rad/s).
    pub omega_rf: f64,
    /// Per-electrode control voltages (V).
    pub v_ctrl: BTreeMap<String, f64>,
    pub ion: IonSpecies,
}

impl TrapDrive {
    pub fn validate(&self, layout: &ElectrodeLayout) -> Result<()> {
        if self.v_rf < 0.0 {
            return Err(Error::Config(format!("V_RF = {} must be >= 0", self.v_rf)));
        }
        if self.omega_rf <= 0.0 {
            return Err(Error::Config("rf frequency must be > 0".into()));
        }
        self.ion.validate()?;
        for name in self.v_ctrl.keys() {
            if !layout.has_electrode(name) {
                return Err(Error::UnknownElectrode(name.clone()));
            }
        }
        Ok(())
    }

    /// Pseudopotential prefactor q²V_RF²/(4 m Ω²) (J·m²; multiplies |∇φ_rf|²).
    fn pseudo_coeff(&self) -> f64 {
        let q = self.ion.charge;
        q * q * self.v_rf * self.v_rf / (4.0 * self.ion.mass * self.omega_rf * self.omega_rf)
    }
}

/// Second-order stray potential about a reference point, plus an optional
/// surface-patch forward model (used for consistency checks only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrayModel {
    /// Stray electric field at the reference point (V/m).
    pub e_stray: [f64; 3],
    /// Hessian of the stray potential at the reference point (V/m²).
    pub h_stray: [[f64; 3]; 3],
    /// Optional surface patch (rectangle, bias in V).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<(Rect, f64)>,
}

impl StrayModel {
    pub fn none() -> Self {
        Self {
            e_stray: [0.0; 3],
            h_stray: [[0.0; 3]; 3],
            patch: None,
        }
    }

    pub fn e_vec(&self) -> Vec3 {
        Vec3::from_column_slice(&self.e_stray)
    }

    pub fn h_mat(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.h_stray[i][j])
    }

    /// Symmetry and (approximate) tracelessness required of a Laplace field.
    pub fn validate(&self) -> Result<()> {
        let h = self.h_mat();
        let scale = h.norm();
        if (h - h.transpose()).norm() > 1e-9 * scale.max(1.0) {
            return Err(Error::Config("stray Hessian must be symmetric".into()));
        }
        if scale > 0.0 && h.trace().abs() > 1e-3 * scale {
            return Err(Error::Config(format!(
                "stray Hessian trace {:.3e} exceeds 1e-3 of norm {:.3e}",
                h.trace(),
                scale
            )));
        }
        Ok(())
    }

    /// Stray potential (V) at `r` relative to the reference point `r0`.
    pub fn potential(&self, r: &Vec3, r0: &Vec3) -> f64 {
        let d = r - r0;
        -self.e_vec().dot(&d) + 0.5 * (self.h_mat() * d).dot(&d)
    }

    pub fn gradient(&self, r: &Vec3, r0: &Vec3) -> Vec3 {
        -self.e_vec() + self.h_mat() * (r - r0)
    }
}

/// One normal mode of the trapped ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// Secular frequency (Hz).
    pub freq: f64,
    /// Unit mode vector.
    pub vector: [f64; 3],
    /// Ground-state extent √(ħ/(2mω)) (m).
    pub a0: f64,
}

impl Mode {
    pub fn vec(&self) -> Vec3 {
        Vec3::from_column_slice(&self.vector)
    }
}

/// Equilibrium position and normal-mode decomposition of the total trap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    /// Equilibrium position (m).
    pub trap_center: [f64; 3],
    pub axial: Mode,
    /// Low-frequency radial mode.
    pub lf: Mode,
    /// High-frequency radial mode.
    pub hf: Mode,
    /// Angle of the LF radial mode vector to the x axis (deg, (-90°, 90°]).
    pub alpha_lf_deg: f64,
    /// Raised when the radial modes are frequency-degenerate and the radial
    /// orientation is therefore undefined.
    pub degenerate_radial: bool,
}

impl ModeSolution {
    pub fn center(&self) -> Vec3 {
        Vec3::from_column_slice(&self.trap_center)
    }
}

/// A complete trap scene: layout, drive, stray model and rotation potential.
#[derive(Debug, Clone)]
pub struct TrapSystem {
    pub layout: ElectrodeLayout,
    pub drive: TrapDrive,
    pub stray: StrayModel,
    /// Scale factor applied to the rotation-potential voltage set.
    pub s_rot: f64,
    /// Rotation-potential voltage set (V per electrode at s_rot = 1).
    pub v_rot: BTreeMap<String, f64>,
    /// Reference point for the stray expansion; the bare rf null.
    stray_ref: Vec3,
}

/// Finite-difference step for third-derivative (pseudopotential Hessian)
/// evaluation; small against the ~30 µm field scale.
const HESS_FD_STEP: f64 = 2e-9;

impl TrapSystem {
    pub fn new(
        layout: ElectrodeLayout,
        drive: TrapDrive,
        stray: StrayModel,
        s_rot: f64,
        v_rot: BTreeMap<String, f64>,
    ) -> Result<Self> {
        drive.validate(&layout)?;
        stray.validate()?;
        for name in v_rot.keys() {
            if !layout.has_electrode(name) {
                return Err(Error::UnknownElectrode(name.clone()));
            }
        }
        let stray_ref = rf_null(&layout, &drive)?;
        Ok(Self {
            layout,
            drive,
            stray,
            s_rot,
            v_rot,
            stray_ref,
        })
    }

    pub fn stray_reference(&self) -> Vec3 {
        self.stray_ref
    }

    /// Combined control + scaled rotation voltage map.
    fn effective_voltages(&self) -> BTreeMap<String, f64> {
        let mut v = self.drive.v_ctrl.clone();
        for (name, volts) in &self.v_rot {
            *v.entry(name.clone()).or_insert(0.0) += self.s_rot * volts;
        }
        v
    }

    /// Total potential energy (J): pseudopotential + q·(control + stray).
    pub fn total_potential(&self, p: &Vec3) -> Result<f64> {
        let c = self.drive.pseudo_coeff();
        let g_rf = self.layout.rf_basis_gradient(p)?;
        let (_, v_static) = static_field(&self.layout, &self.effective_voltages(), p)?;
        let v_stray = self.stray.potential(p, &self.stray_ref);
        Ok(c * g_rf.norm_squared() + self.drive.ion.charge * (v_static + v_stray))
    }

    /// Gradient of the total potential energy (N).
    pub fn total_gradient(&self, p: &Vec3) -> Result<Vec3> {
        let c = self.drive.pseudo_coeff();
        let g_rf = self.layout.rf_basis_gradient(p)?;
        let h_rf = self.layout.rf_basis_hessian(p)?;
        let mut g = 2.0 * c * (h_rf * g_rf);
        let (e_static, _) = static_field(&self.layout, &self.effective_voltages(), p)?;
        g -= self.drive.ion.charge * e_static;
        g += self.drive.ion.charge * self.stray.gradient(p, &self.stray_ref);
        Ok(g)
    }

    /// Hessian of the total potential energy (J/m²). The static parts are
    /// analytic; the pseudopotential part differentiates the analytic
    /// gradient by central differences.
    pub fn total_hessian(&self, p: &Vec3) -> Result<Mat3> {
        let mut h = Mat3::zeros();
        let c = self.drive.pseudo_coeff();
        for axis in 0..3 {
            let mut dp = Vec3::zeros();
            dp[axis] = HESS_FD_STEP;
            let gp = self.pseudo_gradient(c, &(p + dp))?;
            let gm = self.pseudo_gradient(c, &(p - dp))?;
            let col = (gp - gm) / (2.0 * HESS_FD_STEP);
            for row in 0..3 {
                h[(row, axis)] += col[row];
            }
        }
        h = 0.5 * (h + h.transpose());
        h += self.drive.ion.charge
            * static_hessian(&self.layout, &self.effective_voltages(), p)?;
        h += self.drive.ion.charge * self.stray.h_mat();
        Ok(h)
    }

    fn pseudo_gradient(&self, coeff: f64, p: &Vec3) -> Result<Vec3> {
        let g_rf = self.layout.rf_basis_gradient(p)?;
        let h_rf = self.layout.rf_basis_hessian(p)?;
        Ok(2.0 * coeff * (h_rf * g_rf))
    }

    /// Find the equilibrium and normal modes, starting from the rf null.
    pub fn solve(&self) -> Result<ModeSolution> {
        let seed = self.stray_ref;
        let r_eq = self.minimize(seed)?;
        let h = self.total_hessian(&r_eq)?;
        mode_solution_from_hessian(&r_eq, &h, self.drive.ion.mass)
    }

    /// Damped Newton descent of the total potential; converges when the
    /// residual force corresponds to a field below 0.01 V/m.
    fn minimize(&self, seed: Vec3) -> Result<Vec3> {
        let force_tol = 0.01 * self.drive.ion.charge.abs(); // N
        let mut r = seed;
        let mut phi = self.total_potential(&r)?;
        for _ in 0..200 {
            let g = self.total_gradient(&r)?;
            if g.norm() < force_tol {
                return Ok(r);
            }
            let mut h = self.total_hessian(&r)?;
            let eig = nalgebra::SymmetricEigen::new(h);
            let lam_min = eig.eigenvalues.min();
            let lam_max = eig.eigenvalues.amax();
            if lam_min <= 0.0 {
                h += Mat3::identity() * (lam_min.abs() + 1e-3 * lam_max.max(1e-30));
            }
            let step = h
                .lu()
                .solve(&(-g))
                .ok_or_else(|| Error::Singular("Newton step".into()))?;
            // Trust region: the quadratic model is only local.
            let max_step = 5e-6;
            let step = if step.norm() > max_step {
                step * (max_step / step.norm())
            } else {
                step
            };
            let mut t = 1.0;
            loop {
                let candidate = r + t * step;
                if candidate.z <= 1e-7 {
                    t *= 0.5; // keep off the electrode plane
                    if t < 1e-6 {
                        return Err(Error::Untrapped {
                            direction: [0.0, 0.0, -1.0],
                        });
                    }
                    continue;
                }
                let phi_c = self.total_potential(&candidate)?;
                if phi_c <= phi + 1e-4 * t * g.dot(&step) || t < 1e-4 {
                    r = candidate;
                    phi = phi_c;
                    break;
                }
                t *= 0.5;
            }
        }
        let res = self.total_gradient(&r)?.norm() / self.drive.ion.charge.abs();
        Err(Error::NonConvergence {
            context: "trap equilibrium".into(),
            iterations: 200,
            residual: res,
        })
    }
}

/// Eigen-decompose a potential Hessian into labelled normal modes.
pub fn mode_solution_from_hessian(r_eq: &Vec3, h: &Mat3, mass: f64) -> Result<ModeSolution> {
    let eig = nalgebra::SymmetricEigen::new(*h);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    for &i in &order {
        if eig.eigenvalues[i] <= 0.0 {
            let v = eig.eigenvectors.column(i);
            return Err(Error::Untrapped {
                direction: [v[0], v[1], v[2]],
            });
        }
    }
    let mode = |i: usize| -> Mode {
        let lam = eig.eigenvalues[i];
        let omega = (lam / mass).sqrt();
        let v = eig.eigenvectors.column(i).into_owned();
        // Orient along +y / +x-ish for reproducibility; modes are axes.
        let v = if v.y < 0.0 || (v.y == 0.0 && v.x < 0.0) { -v } else { v };
        Mode {
            freq: omega / (2.0 * std::f64::consts::PI),
            vector: [v.x, v.y, v.z],
            a0: (HBAR / (2.0 * mass * omega)).sqrt(),
        }
    };
    // Axial = largest |y| component; the remaining two are radial.
    let axial_idx = *order
        .iter()
        .max_by(|&&a, &&b| {
            eig.eigenvectors[(1, a)]
                .abs()
                .total_cmp(&eig.eigenvectors[(1, b)].abs())
        })
        .expect("three modes");
    let radial: Vec<usize> = order.iter().copied().filter(|&i| i != axial_idx).collect();
    let (lf_idx, hf_idx) = (radial[0], radial[1]);
    let lf = mode(lf_idx);
    let hf = mode(hf_idx);
    let degenerate = (hf.freq - lf.freq).abs() < 1e-4 * hf.freq;
    let alpha = mode_angle_deg(&nalgebra::Vector2::new(lf.vector[0], lf.vector[2]));
    Ok(ModeSolution {
        trap_center: [r_eq.x, r_eq.y, r_eq.z],
        axial: mode(axial_idx),
        lf,
        hf,
        alpha_lf_deg: alpha,
        degenerate_radial: degenerate,
    })
}

/// Rf pseudopotential (eV) of the drive at a point.
pub fn pseudopotential_ev(layout: &ElectrodeLayout, drive: &TrapDrive, p: &Vec3) -> Result<f64> {
    drive.validate(layout)?;
    let g_rf = layout.rf_basis_gradient(p)?;
    Ok(drive.pseudo_coeff() * g_rf.norm_squared() / Q_E)
}

/// Jacobian of the instantaneous rf electric field at `p` (V/m²):
/// dE_i/dr_j at peak drive.
pub fn rf_field_jacobian(layout: &ElectrodeLayout, drive: &TrapDrive, p: &Vec3) -> Result<Mat3> {
    Ok(-drive.v_rf * layout.rf_basis_hessian(p)?)
}

/// Locate the rf field null in the radial plane (y = 0).
pub fn rf_null(layout: &ElectrodeLayout, drive: &TrapDrive) -> Result<Vec3> {
    drive.validate(layout)?;
    // Coarse scan of |∇φ_rf|² over the radial plane.
    let mut best = (f64::INFINITY, Vec3::new(0.0, 0.0, 30e-6));
    let nx = 81;
    let nz = 60;
    for ix in 0..nx {
        let x = -80e-6 + 160e-6 * ix as f64 / (nx - 1) as f64;
        for iz in 0..nz {
            let z = 4e-6 + 96e-6 * iz as f64 / (nz - 1) as f64;
            let p = Vec3::new(x, 0.0, z);
            let g = layout.rf_basis_gradient(&p)?;
            let m = g.norm_squared();
            if m < best.0 {
                best = (m, p);
            }
        }
    }
    // Newton polish in (x, z) on |∇φ_rf|².
    let mut p = best.1;
    for _ in 0..60 {
        let g = layout.rf_basis_gradient(&p)?;
        let h = layout.rf_basis_hessian(&p)?;
        // ∇(|g|²)/2 = H g; Hessian ≈ H² near the null.
        let grad2 = h * g;
        let gx = grad2.x;
        let gz = grad2.z;
        if gx.hypot(gz) < 1e-10 * h.norm() * h.norm() * 1e-6 + 1e-30 {
            break;
        }
        let h2 = h * h;
        let det = h2[(0, 0)] * h2[(2, 2)] - h2[(0, 2)] * h2[(2, 0)];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = -(h2[(2, 2)] * gx - h2[(0, 2)] * gz) / det;
        let dz = -(-h2[(2, 0)] * gx + h2[(0, 0)] * gz) / det;
        let step_cap = 10e-6;
        let norm = dx.hypot(dz);
        let scale = if norm > step_cap { step_cap / norm } else { 1.0 };
        p.x += dx * scale;
        p.z = (p.z + dz * scale).max(1e-6);
        if norm * scale < 1e-13 {
            break;
        }
    }
    let g = layout.rf_basis_gradient(&p)?;
    if g.norm() > 1e-4 {
        return Err(Error::NonConvergence {
            context: "rf null".into(),
            iterations: 60,
            residual: g.norm(),
        });
    }
    Ok(p)
}

/// Depth of the trap and the escape saddle location in the radial plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapDepth {
    /// Barrier φ(saddle) - φ(min) (eV).
    pub depth_ev: f64,
    /// Saddle position (m).
    pub saddle: [f64; 3],
}

/// Trap depth: lowest barrier over escape directions in the radial plane
/// through the equilibrium, refined to the stationary saddle point.
pub fn trap_depth(system: &TrapSystem) -> Result<TrapDepth> {
    let sol = system.solve()?;
    let r0 = sol.center();
    let phi0 = system.total_potential(&r0)?;

    // Mountain-pass estimate: lowest over directions of the highest point
    // along each outward ray.
    let n_rays = 144;
    let mut best: Option<(f64, Vec3)> = None;
    for k in 0..n_rays {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_rays as f64;
        let dir = Vec3::new(theta.cos(), 0.0, theta.sin());
        let mut ray_max: Option<(f64, Vec3)> = None;
        let mut r = 0.5e-6;
        while r < 120e-6 {
            let p = r0 + dir * r;
            if p.z <= 0.5e-6 {
                break;
            }
            let phi = system.total_potential(&p)? - phi0;
            match ray_max {
                Some((m, _)) if phi < 0.7 * m => break, // well past the ridge
                Some((m, _)) if phi > m => ray_max = Some((phi, p)),
                None => ray_max = Some((phi, p)),
                _ => {}
            }
            r += 0.5e-6;
        }
        // Rays that never turn over within range do not bound the escape.
        if let Some((m, p)) = ray_max {
            let past_edge = r < 120e-6;
            if past_edge && best.as_ref().map_or(true, |(b, _)| m < *b) {
                best = Some((m, p));
            }
        }
    }
    let (_, mut saddle) = best.ok_or_else(|| Error::NonConvergence {
        context: "trap depth: no escape barrier found in range".into(),
        iterations: n_rays,
        residual: f64::NAN,
    })?;

    // Newton on the in-plane gradient root to land on the stationary point.
    for _ in 0..80 {
        let g = system.total_gradient(&saddle)?;
        let h = system.total_hessian(&saddle)?;
        let det = h[(0, 0)] * h[(2, 2)] - h[(0, 2)] * h[(2, 0)];
        if det.abs() < 1e-300 {
            break;
        }
        let gx = g.x;
        let gz = g.z;
        let dx = -(h[(2, 2)] * gx - h[(0, 2)] * gz) / det;
        let dz = -(-h[(2, 0)] * gx + h[(0, 0)] * gz) / det;
        let norm = dx.hypot(dz);
        let cap = 2e-6;
        let scale = if norm > cap { cap / norm } else { 1.0 };
        saddle.x += dx * scale;
        saddle.z = (saddle.z + dz * scale).max(1e-6);
        if norm * scale < 1e-13 {
            break;
        }
    }

    let h = system.total_hessian(&saddle)?;
    let radial_h = nalgebra::Matrix2::new(h[(0, 0)], h[(0, 2)], h[(2, 0)], h[(2, 2)]);
    let eig = nalgebra::SymmetricEigen::new(radial_h);
    if eig.eigenvalues.min() >= 0.0 {
        return Err(Error::NonConvergence {
            context: "trap depth: refined point is not a saddle".into(),
            iterations: 80,
            residual: eig.eigenvalues.min(),
        });
    }
    let depth = system.total_potential(&saddle)? - phi0;
    if depth <= 0.0 {
        return Err(Error::Untrapped {
            direction: [0.0, 0.0, 0.0],
        });
    }
    Ok(TrapDepth {
        depth_ev: depth / Q_E,
        saddle: [saddle.x, saddle.y, saddle.z],
    })
}

/// Curvature of the axial rf pseudopotential expressed as a secular
/// frequency (Hz) at the rf null.
pub fn axial_rf_curvature_freq(layout: &ElectrodeLayout, drive: &TrapDrive) -> Result<f64> {
    let null = rf_null(layout, drive)?;
    let c = drive.pseudo_coeff();
    let h = 2e-7;
    let g = |y: f64| -> Result<f64> {
        let p = Vec3::new(null.x, y, null.z);
        let g_rf = layout.rf_basis_gradient(&p)?;
        Ok(c * g_rf.norm_squared())
    };
    let d2 = (g(h)? - 2.0 * g(0.0)? + g(-h)?) / (h * h);
    if d2 <= 0.0 {
        return Ok(0.0);
    }
    Ok((d2 / drive.ion.mass).sqrt() / (2.0 * std::f64::consts::PI))
}

/// Field and curvature that a biased surface patch contributes at a point;
/// the forward model for stray-potential hypotheses.
pub fn stray_patch_forward(rect: &Rect, bias: f64, point: &Vec3) -> Result<(Vec3, Mat3)> {
    let e = -bias * rect.gradient(point)?;
    let h = bias * rect.hessian(point)?;
    Ok((e, h))
}

//! Nonlinear least-squares extraction of quadrupole parameters
//! (B', α_MW, center) from shift or Rabi maps: Levenberg-Marquardt with
//! deterministic multi-start over the quadrupole angle and parameter
//! uncertainties from the Jacobian at the optimum.

use nalgebra::{DMatrix, DVector};

use crate::constants::{HBAR, MU_B};
use crate::error::{Error, Result};
use crate::geom::{canonical_quadrupole_branch, quadrupole_matrix, Vec2, Vec3};
use crate::planefield::IonSpecies;

use super::micromotion::RfQuadrupole;
use super::quadrupole::{FieldMap, QuadrupoleModel};

/// Forward model mapping quadrupole parameters to map values.
#[derive(Debug, Clone)]
pub enum MapModel {
    /// δf = c_∥·(B_∥/µT)² + c_⊥·(B_⊥/µT)² of the local linear field.
    AcZeeman {
        c_par: f64,
        c_perp: f64,
        b0_dir: Vec3,
    },
    /// Micromotion-sideband Rabi rate of a transition with the given
    /// element, driven by the rest-frame field of the micromotion.
    Rabi {
        rf: RfQuadrupole,
        ion: IonSpecies,
        element_mu_b: f64,
        delta_m: i32,
        b0_dir: Vec3,
    },
}

impl MapModel {
    /// params = [B' (T/m), α_MW (deg), cx (m), cz (m)].
    pub fn value(&self, params: &[f64; 4], dr: &Vec2) -> f64 {
        let rel = Vec2::new(dr.x - params[2], dr.y - params[3]);
        match self {
            MapModel::AcZeeman {
                c_par,
                c_perp,
                b0_dir,
            } => {
                let radial = params[0] * quadrupole_matrix(params[1].to_radians()) * rel;
                let b = Vec3::new(radial.x, 0.0, radial.y);
                let unit = b0_dir.normalize();
                let b_par = b.dot(&unit) / 1e-6;
                let b_perp = (b - b_par * 1e-6 * unit).norm() / 1e-6;
                c_par * b_par * b_par + c_perp * b_perp * b_perp
            }
            MapModel::Rabi {
                rf,
                ion,
                element_mu_b,
                delta_m,
                b0_dir,
            } => {
                let mm = (ion.charge / (ion.mass * rf.omega_rf * rf.omega_rf))
                    * (rf.e_prime * quadrupole_matrix(rf.alpha_rf_deg.to_radians()) * rel);
                let radial =
                    0.5 * params[0] * quadrupole_matrix(params[1].to_radians()) * mm;
                let b = Vec3::new(radial.x, 0.0, radial.y);
                let unit = b0_dir.normalize();
                let b_par = b.dot(&unit);
                let component = if *delta_m == 0 {
                    b_par.abs()
                } else {
                    (b - b_par * unit).norm()
                };
                element_mu_b * component * MU_B / (2.0 * HBAR)
            }
        }
    }
}

/// Fit result: recovered model, 1σ parameter uncertainties and diagnostics.
#[derive(Debug, Clone)]
pub struct FittedQuadrupole {
    pub model: QuadrupoleModel,
    /// 1σ uncertainties of [B', α_MW (deg), cx, cz].
    pub uncertainties: [f64; 4],
    /// Final weighted sum of squared residuals.
    pub chi2: f64,
    pub iterations: usize,
}

/// Levenberg-Marquardt from one start; returns params and χ².
fn lm_from(
    model: &MapModel,
    map: &FieldMap,
    start: [f64; 4],
    max_iter: usize,
) -> ([f64; 4], f64, usize) {
    let n = map.points.len();
    let weights: Vec<f64> = map
        .points
        .iter()
        .map(|p| 1.0 / p.sigma.unwrap_or(1.0))
        .collect();
    let residuals = |p: &[f64; 4]| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            let pt = &map.points[i];
            (model.value(p, &Vec2::new(pt.dr[0], pt.dr[1])) - pt.value) * weights[i]
        })
    };
    let jacobian = |p: &[f64; 4]| -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n, 4);
        let steps = [
            (p[0].abs() * 1e-7).max(1e-7),
            1e-5,
            1e-11,
            1e-11,
        ];
        for k in 0..4 {
            let mut hi = *p;
            let mut lo = *p;
            hi[k] += steps[k];
            lo[k] -= steps[k];
            let rh = residuals(&hi);
            let rl = residuals(&lo);
            for i in 0..n {
                j[(i, k)] = (rh[i] - rl[i]) / (2.0 * steps[k]);
            }
        }
        j
    };

    let mut p = start;
    let mut r = residuals(&p);
    let mut chi2 = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for iter in 0..max_iter {
        iterations = iter + 1;
        let j = jacobian(&p);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut damped = jtj.clone();
        for k in 0..4 {
            damped[(k, k)] *= 1.0 + lambda;
            damped[(k, k)] += 1e-300;
        }
        let Some(step) = damped.lu().solve(&(-&g)) else {
            break;
        };
        let mut candidate = p;
        for k in 0..4 {
            candidate[k] += step[k];
        }
        let rc = residuals(&candidate);
        let chi2_c = rc.norm_squared();
        if chi2_c < chi2 {
            let rel_step = (0..4)
                .map(|k| (step[k] / (p[k].abs().max(1e-9))).abs())
                .fold(0.0f64, f64::max);
            p = candidate;
            r = rc;
            chi2 = chi2_c;
            lambda = (lambda * 0.3).max(1e-12);
            if rel_step < 1e-10 {
                break;
            }
        } else {
            lambda *= 8.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (p, chi2, iterations)
}

/// Fit a quadrupole model to a map; deterministic multi-start over α_MW.
pub fn fit_quadrupole(map: &FieldMap, model: &MapModel, freq: f64) -> Result<FittedQuadrupole> {
    if map.points.len() < 6 {
        return Err(Error::Config(format!(
            "{} map points cannot constrain 4 parameters",
            map.points.len()
        )));
    }
    // Scale heuristic for B': match the largest map value at the largest
    // displacement radius.
    let r_max = map
        .points
        .iter()
        .map(|p| p.dr[0].hypot(p.dr[1]))
        .fold(0.0f64, f64::max)
        .max(1e-7);
    let v_max = map
        .points
        .iter()
        .map(|p| p.value.abs())
        .fold(0.0f64, f64::max);
    let b_guess = match model {
        MapModel::AcZeeman { c_par, c_perp, .. } => {
            let c = c_par.abs().max(c_perp.abs()).max(1e-6);
            (v_max / c).sqrt() * 1e-6 / r_max
        }
        MapModel::Rabi {
            rf,
            ion,
            element_mu_b,
            ..
        } => {
            let mm_per_m = ion.charge * rf.e_prime / (ion.mass * rf.omega_rf * rf.omega_rf);
            let unit = element_mu_b * MU_B / (2.0 * HBAR);
            2.0 * v_max / (unit * mm_per_m * r_max).max(1e-30)
        }
    };

    let mut best: Option<([f64; 4], f64, usize)> = None;
    for alpha_start in (-80..=-10).step_by(10) {
        let start = [b_guess.max(1e-3), alpha_start as f64, 0.0, 0.0];
        let (p, chi2, iters) = lm_from(model, map, start, 200);
        if best.as_ref().map_or(true, |(_, c, _)| chi2 < *c) {
            best = Some((p, chi2, iters));
        }
    }
    let (p, chi2, iterations) = best.expect("multi-start ran");

    // Reject non-fits: residuals must beat a constant-only description.
    let mean = map.points.iter().map(|q| q.value).sum::<f64>() / map.points.len() as f64;
    let var: f64 = map
        .points
        .iter()
        .map(|q| {
            let w = 1.0 / q.sigma.unwrap_or(1.0);
            ((q.value - mean) * w).powi(2)
        })
        .sum();
    if !(chi2.is_finite()) || (var > 0.0 && chi2 > var) {
        return Err(Error::NonConvergence {
            context: format!("quadrupole fit stalled (chi2 {chi2:.3e} vs variance {var:.3e})"),
            iterations,
            residual: chi2,
        });
    }

    // Covariance from the Jacobian at the optimum.
    let n = map.points.len();
    let weights: Vec<f64> = map
        .points
        .iter()
        .map(|q| 1.0 / q.sigma.unwrap_or(1.0))
        .collect();
    let value_at = |pp: &[f64; 4], i: usize| {
        let pt = &map.points[i];
        (model.value(pp, &Vec2::new(pt.dr[0], pt.dr[1])) - pt.value) * weights[i]
    };
    let mut j = DMatrix::zeros(n, 4);
    let steps = [(p[0].abs() * 1e-7).max(1e-7), 1e-5, 1e-11, 1e-11];
    for k in 0..4 {
        let mut hi = p;
        let mut lo = p;
        hi[k] += steps[k];
        lo[k] -= steps[k];
        for i in 0..n {
            j[(i, k)] = (value_at(&hi, i) - value_at(&lo, i)) / (2.0 * steps[k]);
        }
    }
    let jtj = j.transpose() * &j;
    let cov = jtj.try_inverse().ok_or_else(|| {
        Error::Singular("fit covariance (degenerate parameter directions)".into())
    })?;
    // Without per-point sigmas, scale by the residual variance.
    let has_sigmas = map.points.iter().all(|q| q.sigma.is_some());
    let dof = (n as f64 - 4.0).max(1.0);
    let scale = if has_sigmas { 1.0 } else { chi2 / dof };
    let mut unc = [0.0; 4];
    for k in 0..4 {
        unc[k] = (cov[(k, k)].max(0.0) * scale).sqrt();
    }

    // Map values are quadratic in the field, so (B', α) and (B', α + 90°)
    // generate identical maps; fits report the (-90°, 0°] branch.
    let (b_prime, mut alpha) = canonical_quadrupole_branch(p[0], p[1]);
    if alpha > 0.0 {
        alpha -= 90.0;
    }
    Ok(FittedQuadrupole {
        model: QuadrupoleModel {
            b_prime,
            alpha_mw_deg: alpha,
            center: [p[2], p[3]],
            freq,
        },
        uncertainties: unc,
        chi2,
        iterations,
    })
}

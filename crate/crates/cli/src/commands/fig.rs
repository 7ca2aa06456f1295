//! Figure-data recipes: plot-ready CSV for the standard reproduction
//! scenes (trap potential maps, rf quadrupole, shift/Rabi maps with fits,
//! mode-rotation curves, heating scans).

use clap::Subcommand;
use mwtrap::gates::{self, GateConfig};
use mwtrap::geom::{default_b0_dir, Vec2, Vec3};
use mwtrap::moderot;
use mwtrap::nearfield::{
    fit_quadrupole, radial_grid, rf_field_jacobian_map, simulate_aczeeman_map, simulate_mm_map,
    MapModel, QuadrupoleModel, RfQuadrupole,
};
use mwtrap::planefield::pseudopotential_ev;
use mwtrap::spins::{self, LevelLabel};
use mwtrap::Result;
use rand::{Rng, SeedableRng};

use super::Context;
use crate::util::{artifact_header, write_atomic};

#[derive(Subcommand)]
pub enum FigCmd {
    /// Radial and axial total-potential maps of the configured trap.
    Fig2,
    /// Rf electric field over the radial plane (quadrupole structure).
    Fig4,
    /// Noisy ac Zeeman shift map plus its quadrupole fit.
    Fig6c,
    /// Micromotion-sideband Rabi map plus its quadrupole fit.
    Fig7,
    /// Radial-mode frequencies and orientation versus rotation scale.
    Fig8,
    /// Gate fidelity versus heating rate.
    GateScan,
}

pub fn run(ctx: &Context, cmd: FigCmd) -> Result<()> {
    let inputs = ctx.inputs()?;
    let header = artifact_header(inputs.hash, ctx.seed);
    match cmd {
        FigCmd::Fig2 => {
            let system = inputs.system()?;
            let sol = system.solve()?;
            let c = sol.center();
            let phi0 = system.total_potential(&c)?;
            let mut radial = header.clone();
            radial.push_str("x_um,z_um,phi_meV\n");
            let n = 61;
            for ix in 0..n {
                let x = c.x - 25e-6 + 50e-6 * ix as f64 / (n - 1) as f64;
                for iz in 0..n {
                    let z = (c.z - 25e-6 + 50e-6 * iz as f64 / (n - 1) as f64).max(1e-6);
                    let p = Vec3::new(x, c.y, z);
                    let phi = (system.total_potential(&p)? - phi0)
                        / mwtrap::constants::Q_E
                        * 1e3;
                    radial.push_str(&format!("{:.3},{:.3},{:.6}\n", x * 1e6, z * 1e6, phi));
                }
            }
            write_atomic(&ctx.out.join("fig2_radial.csv"), &radial)?;
            let mut axial = header.clone();
            axial.push_str("y_um,phi_meV,phi_rf_meV\n");
            for iy in 0..201 {
                let y = -300e-6 + 600e-6 * iy as f64 / 200.0;
                let p = Vec3::new(c.x, y, c.z);
                let phi =
                    (system.total_potential(&p)? - phi0) / mwtrap::constants::Q_E * 1e3;
                let phi_rf = pseudopotential_ev(&inputs.layout, &system.drive, &p)? * 1e3;
                axial.push_str(&format!("{:.2},{:.6},{:.6}\n", y * 1e6, phi, phi_rf));
            }
            write_atomic(&ctx.out.join("fig2_axial.csv"), &axial)?;
            println!("wrote fig2_radial.csv and fig2_axial.csv in {}", ctx.out.display());
            Ok(())
        }
        FigCmd::Fig4 => {
            let system = inputs.system()?;
            let (csv, rf) = rf_field_jacobian_map(&inputs.layout, &system.drive, 25e-6, 41)?;
            let mut text = header.clone();
            text.push_str(&csv);
            write_atomic(&ctx.out.join("fig4_rf_quadrupole.csv"), &text)?;
            println!(
                "rf quadrupole: E' = {:.3e} V/m^2, alpha_RF = {:.2} deg",
                rf.e_prime, rf.alpha_rf_deg
            );
            println!("wrote {}", ctx.out.join("fig4_rf_quadrupole.csv").display());
            Ok(())
        }
        FigCmd::Fig6c => {
            let diagram = spins::diagonalize(21.28e-3)?;
            let b0 = default_b0_dir();
            let a = LevelLabel::new(2, 0);
            let b = LevelLabel::new(3, 1);
            let f0 = diagram.frequency(LevelLabel::new(3, 1), LevelLabel::new(2, 1))?;
            let fs = f0 - 10e6;
            let generator = QuadrupoleModel {
                b_prime: 35.3,
                alpha_mw_deg: -26.5,
                center: [-0.11e-6, 0.23e-6],
                freq: fs,
            };
            let grid = radial_grid(1.05e-6, 1.05e-6, 7, 7);
            let mut map = simulate_aczeeman_map(&generator, &b0, &diagram, a, b, &grid)?;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(ctx.seed);
            for p in &mut map.points {
                let n: f64 = rng.sample(rand_distr::StandardNormal);
                p.value += 200.0 * n;
                p.sigma = Some(200.0);
            }
            let mut text = header.clone();
            text.push_str(&map.to_csv());
            write_atomic(&ctx.out.join("fig6c_map.csv"), &text)?;
            let model = MapModel::AcZeeman {
                c_par: spins::coefficient_par(&diagram, a, b, fs)?,
                c_perp: spins::coefficient_perp(&diagram, a, b, fs, 0.0)?,
                b0_dir: b0,
            };
            let fit = fit_quadrupole(&map, &model, fs)?;
            println!(
                "fit: B' = {:.2} +- {:.2} T/m, alpha_MW = {:.2} +- {:.2} deg, center = ({:.3}, {:.3}) um",
                fit.model.b_prime,
                fit.uncertainties[0],
                fit.model.alpha_mw_deg,
                fit.uncertainties[1],
                fit.model.center[0] * 1e6,
                fit.model.center[1] * 1e6
            );
            let mut summary = header.clone();
            summary.push_str(
                &serde_json::to_string_pretty(&serde_json::json!({
                    "generator": generator,
                    "fit": fit.model,
                    "uncertainties": fit.uncertainties,
                }))
                .expect("serializable"),
            );
            summary.push('\n');
            write_atomic(&ctx.out.join("fig6c_fit.json"), &summary)?;
            println!("wrote fig6c_map.csv and fig6c_fit.json in {}", ctx.out.display());
            Ok(())
        }
        FigCmd::Fig7 => {
            let diagram = spins::diagonalize(21.28e-3)?;
            let b0 = default_b0_dir();
            let spec =
                spins::transition(&diagram, LevelLabel::new(2, 0), LevelLabel::new(3, 1))?;
            let drive = inputs.system()?.drive.clone();
            let rf = RfQuadrupole::from_layout(&inputs.layout, &drive)?;
            let generator = QuadrupoleModel {
                b_prime: 35.1,
                alpha_mw_deg: -31.1,
                center: [0.0, 0.0],
                freq: 1.69e9,
            };
            let grid = radial_grid(1.0e-6, 1.0e-6, 7, 7);
            let map = simulate_mm_map(
                &generator,
                &rf,
                &drive.ion,
                &spec,
                &b0,
                &Vec2::zeros(),
                &grid,
            );
            let mut text = header.clone();
            text.push_str(&map.to_csv());
            write_atomic(&ctx.out.join("fig7_map.csv"), &text)?;
            let model = MapModel::Rabi {
                rf,
                ion: drive.ion,
                element_mu_b: spec.element(),
                delta_m: spec.delta_m,
                b0_dir: b0,
            };
            let fit = fit_quadrupole(&map, &model, generator.freq)?;
            println!(
                "fit: B' = {:.2} T/m, alpha_MW = {:.2} deg",
                fit.model.b_prime, fit.model.alpha_mw_deg
            );
            let mut summary = header.clone();
            summary.push_str(
                &serde_json::to_string_pretty(&serde_json::json!({
                    "generator": generator,
                    "fit": fit.model,
                }))
                .expect("serializable"),
            );
            summary.push('\n');
            write_atomic(&ctx.out.join("fig7_fit.json"), &summary)?;
            println!("wrote fig7_map.csv and fig7_fit.json in {}", ctx.out.display());
            Ok(())
        }
        FigCmd::Fig8 => {
            let system = inputs.calibration_system(ctx.config.is_some())?;
            let grid: Vec<f64> = (0..=32).map(|k| -1.0 + 1.6 * k as f64 / 32.0).collect();
            let sweep = moderot::sweep(&system, &grid)?;
            let mut csv = header.clone();
            csv.push_str("s,f_LF_MHz,f_HF_MHz,alpha_LF_deg\n");
            for (s, sol) in sweep.s_values.iter().zip(&sweep.solutions) {
                if let Some(m) = sol {
                    csv.push_str(&format!(
                        "{s:.4},{:.6},{:.6},{:.4}\n",
                        m.lf.freq / 1e6,
                        m.hf.freq / 1e6,
                        m.alpha_lf_deg
                    ));
                }
            }
            write_atomic(&ctx.out.join("fig8_sweep.csv"), &csv)?;
            println!("wrote {}", ctx.out.join("fig8_sweep.csv").display());
            Ok(())
        }
        FigCmd::GateScan => {
            let rates: Vec<f64> = (0..=25).map(|k| k as f64 * 0.2 * 1e3).collect();
            let mut config = GateConfig::reference();
            config.n_max = 22;
            let table = gates::heating_scan(&config, &rates)?;
            let mut csv = header.clone();
            csv.push_str("ndot_per_ms,fidelity\n");
            for (rate, fidelity) in &table {
                csv.push_str(&format!("{:.4},{:.6}\n", rate / 1e3, fidelity));
            }
            write_atomic(&ctx.out.join("gate_scan.csv"), &csv)?;
            println!("wrote {}", ctx.out.join("gate_scan.csv").display());
            Ok(())
        }
    }
}

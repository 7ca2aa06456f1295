use clap::{Subcommand, ValueEnum};
use mwtrap::constants::MW_EFFECTIVE_IMPEDANCE;
use mwtrap::geom::{default_b0_dir, Vec2};
use mwtrap::nearfield::{
    self, fit_quadrupole, microwave_strips, null_optimize, simulate_aczeeman_map, simulate_mm_map,
    CurrentProfile, FieldMap, MapKind, MapModel, MwElectricField, QuadrupoleModel, RfQuadrupole,
};
use mwtrap::planefield::rf_null;
use mwtrap::spins::{self, LevelLabel};
use mwtrap::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::Context;
use crate::util::{artifact_header, write_atomic};

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    Aczeeman,
    Mm,
}

#[derive(Subcommand)]
pub enum NfCmd {
    /// Null the microwave field at the trap center; report currents and
    /// the residual quadrupole.
    Null,
    /// Simulate a shift or Rabi map over radial displacements (CSV).
    Map {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Quadrupole gradient of the generator (T/m).
        #[arg(long, default_value_t = 35.3)]
        bprime: f64,
        /// Quadrupole angle of the generator (deg).
        #[arg(long, default_value_t = -26.5)]
        alpha: f64,
        /// Generator null offset (µm).
        #[arg(long, default_value_t = -0.11)]
        cx: f64,
        #[arg(long, default_value_t = 0.23)]
        cz: f64,
        /// Grid half-width (µm) and points per axis.
        #[arg(long, default_value_t = 1.05)]
        half_um: f64,
        #[arg(long, default_value_t = 7)]
        points: usize,
        /// Per-point Gaussian noise (map units); 0 for noiseless.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Fit a quadrupole model to a map CSV.
    Fit {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Microwave-pseudopotential displacement and mode shifts.
    Mwpseudo {
        /// Gradient the nulled currents are scaled to (T/m).
        #[arg(long, default_value_t = 35.0)]
        bprime: f64,
    },
}

fn map_drive_freq(diagram: &spins::LevelDiagram) -> Result<f64> {
    Ok(diagram.frequency(LevelLabel::new(3, 1), LevelLabel::new(2, 1))? - 10e6)
}

pub fn run(ctx: &Context, cmd: NfCmd) -> Result<()> {
    let inputs = ctx.inputs()?;
    let strips = microwave_strips(&inputs.layout)?;
    let diagram = spins::diagonalize(21.28e-3)?;
    let b0 = default_b0_dir();
    match cmd {
        NfCmd::Null => {
            let drive = inputs.system()?.drive.clone();
            let null = rf_null(&inputs.layout, &drive)?;
            let target = Vec2::new(null.x, null.z);
            let nulled =
                null_optimize(&strips, CurrentProfile::EdgePeaked, "MW1", 1.0, &target)?;
            println!("nulled at ({:.3}, {:.3}) um:", target.x * 1e6, target.y * 1e6);
            for (name, current) in &nulled.currents.currents {
                println!(
                    "  {name}: {:.4} A at {:+.2} deg",
                    current.norm(),
                    current.arg().to_degrees()
                );
            }
            println!(
                "residual |B| = {:.3e} T, B' = {:.2} T/m at alpha_MW = {:.2} deg (out-of-phase {:.3} T/m)",
                nulled.residual_field, nulled.b_prime, nulled.alpha_mw_deg, nulled.b_prime_residual
            );
            let mut text = artifact_header(inputs.hash, ctx.seed);
            text.push_str(
                &serde_json::to_string_pretty(&serde_json::json!({
                    "currents": nulled
                        .currents
                        .currents
                        .iter()
                        .map(|(k, v)| (k.clone(), [v.re, v.im]))
                        .collect::<std::collections::BTreeMap<_, _>>(),
                    "b_prime_t_per_m": nulled.b_prime,
                    "alpha_mw_deg": nulled.alpha_mw_deg,
                    "residual_field_t": nulled.residual_field,
                }))
                .expect("serializable"),
            );
            text.push('\n');
            write_atomic(&ctx.out.join("nf_null.json"), &text)?;
            println!("wrote {}", ctx.out.join("nf_null.json").display());
            Ok(())
        }
        NfCmd::Map {
            kind,
            bprime,
            alpha,
            cx,
            cz,
            half_um,
            points,
            noise,
        } => {
            let grid = nearfield::radial_grid(half_um * 1e-6, half_um * 1e-6, points, points);
            let mut map = match kind {
                KindArg::Aczeeman => {
                    let freq = map_drive_freq(&diagram)?;
                    let model = QuadrupoleModel {
                        b_prime: bprime,
                        alpha_mw_deg: alpha,
                        center: [cx * 1e-6, cz * 1e-6],
                        freq,
                    };
                    simulate_aczeeman_map(
                        &model,
                        &b0,
                        &diagram,
                        LevelLabel::new(2, 0),
                        LevelLabel::new(3, 1),
                        &grid,
                    )?
                }
                KindArg::Mm => {
                    let drive = inputs.system()?.drive.clone();
                    let rf = RfQuadrupole::from_layout(&inputs.layout, &drive)?;
                    let spec = spins::transition(
                        &diagram,
                        LevelLabel::new(2, 0),
                        LevelLabel::new(3, 1),
                    )?;
                    let model = QuadrupoleModel {
                        b_prime: bprime,
                        alpha_mw_deg: alpha,
                        center: [0.0, 0.0],
                        freq: 1.69e9,
                    };
                    let mm_null = Vec2::new(cx * 1e-6, cz * 1e-6);
                    simulate_mm_map(
                        &model,
                        &rf,
                        &inputs.system()?.drive.ion,
                        &spec,
                        &b0,
                        &mm_null,
                        &grid,
                    )
                }
            };
            if noise > 0.0 {
                let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(ctx.seed);
                for p in &mut map.points {
                    let n: f64 = rng.sample(rand_distr::StandardNormal);
                    p.value += noise * n;
                    p.sigma = Some(noise);
                }
            }
            let mut text = artifact_header(inputs.hash, ctx.seed);
            text.push_str(&map.to_csv());
            let name = match kind {
                KindArg::Aczeeman => "map_aczeeman.csv",
                KindArg::Mm => "map_mm.csv",
            };
            write_atomic(&ctx.out.join(name), &text)?;
            println!("wrote {} ({} points)", ctx.out.join(name).display(), map.points.len());
            Ok(())
        }
        NfCmd::Fit { input, kind } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Error::Config(format!("read {}: {e}", input.display())))?;
            let (map, model) = match kind {
                KindArg::Aczeeman => {
                    let map = FieldMap::from_csv(MapKind::AcZeeman, &text)?;
                    let freq = map_drive_freq(&diagram)?;
                    let a = LevelLabel::new(2, 0);
                    let bb = LevelLabel::new(3, 1);
                    let model = MapModel::AcZeeman {
                        c_par: spins::coefficient_par(&diagram, a, bb, freq)?,
                        c_perp: spins::coefficient_perp(&diagram, a, bb, freq, 0.0)?,
                        b0_dir: b0,
                    };
                    (map, model)
                }
                KindArg::Mm => {
                    let map = FieldMap::from_csv(MapKind::Rabi, &text)?;
                    let drive = inputs.system()?.drive.clone();
                    let rf = RfQuadrupole::from_layout(&inputs.layout, &drive)?;
                    let spec = spins::transition(
                        &diagram,
                        LevelLabel::new(2, 0),
                        LevelLabel::new(3, 1),
                    )?;
                    let model = MapModel::Rabi {
                        rf,
                        ion: drive.ion,
                        element_mu_b: spec.element(),
                        delta_m: spec.delta_m,
                        b0_dir: b0,
                    };
                    (map, model)
                }
            };
            let freq = map_drive_freq(&diagram)?;
            let fit = fit_quadrupole(&map, &model, freq)?;
            println!(
                "B' = {:.3} +- {:.3} T/m, alpha_MW = {:.2} +- {:.2} deg",
                fit.model.b_prime, fit.uncertainties[0], fit.model.alpha_mw_deg, fit.uncertainties[1]
            );
            println!(
                "center = ({:.3} +- {:.3}, {:.3} +- {:.3}) um  [chi2 = {:.3e}, {} iterations]",
                fit.model.center[0] * 1e6,
                fit.uncertainties[2] * 1e6,
                fit.model.center[1] * 1e6,
                fit.uncertainties[3] * 1e6,
                fit.chi2,
                fit.iterations
            );
            let mut out = artifact_header(inputs.hash, ctx.seed);
            out.push_str(
                &serde_json::to_string_pretty(&serde_json::json!({
                    "model": fit.model,
                    "uncertainties": fit.uncertainties,
                    "chi2": fit.chi2,
                }))
                .expect("serializable"),
            );
            out.push('\n');
            write_atomic(&ctx.out.join("nf_fit.json"), &out)?;
            println!("wrote {}", ctx.out.join("nf_fit.json").display());
            Ok(())
        }
        NfCmd::Mwpseudo { bprime } => {
            let system = inputs.calibration_system(ctx.config.is_some())?;
            let sol = system.solve()?;
            let center = sol.center();
            let target = Vec2::new(center.x, center.z);
            let nulled =
                null_optimize(&strips, CurrentProfile::EdgePeaked, "MW1", 1.0, &target)?;
            let scale = bprime / nulled.b_prime;
            let omega_s = 2.0 * std::f64::consts::PI * 1.6865e9;
            let voltages: Vec<(String, Complex64)> = nulled
                .currents
                .currents
                .iter()
                .map(|(k, i)| (k.clone(), i * scale * MW_EFFECTIVE_IMPEDANCE))
                .collect();
            let field =
                MwElectricField::from_electrode_voltages(&inputs.layout, &voltages, &center, omega_s)?;
            let effect = nearfield::mw_pseudopotential(&field, &sol, &system.drive.ion);
            println!(
                "displacement = ({:+.3}, {:+.3}) nm  (|{:.3}| nm)",
                effect.displacement[0] * 1e9,
                effect.displacement[1] * 1e9,
                (effect.displacement[0].powi(2) + effect.displacement[1].powi(2)).sqrt() * 1e9
            );
            println!(
                "radial mode shifts: LF {:+.1} Hz, HF {:+.1} Hz",
                effect.mode_shifts[0], effect.mode_shifts[1]
            );
            Ok(())
        }
    }
}

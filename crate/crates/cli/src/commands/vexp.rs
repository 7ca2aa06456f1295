use clap::Subcommand;
use mwtrap::geom::{default_b0_dir, Vec2};
use mwtrap::nearfield::{
    microwave_strips, null_optimize, CurrentProfile, QuadrupoleModel, RfQuadrupole,
};
use mwtrap::planefield::rf_null;
use mwtrap::spins::{self, LevelLabel};
use mwtrap::vexp::{
    self, DetectionModel, KnobQuantization, MmNullScene, NullLoopScene, RamseyEcho,
};
use mwtrap::Result;
use rand::SeedableRng;

use super::Context;
use crate::util::{artifact_header, write_atomic};

#[derive(Subcommand)]
pub enum VexpCmd {
    /// One Ramsey-echo shift measurement with stochastic detection.
    Ramsey {
        /// Shift applied during the field-on window (Hz).
        #[arg(long, default_value_t = 200.0)]
        shift_hz: f64,
        #[arg(long, default_value_t = 400)]
        shots: usize,
    },
    /// Closed-loop microwave field nulling on the ion's ac Zeeman shift.
    NullLoop {
        /// Measurement budget.
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Closed-loop micromotion nulling on the sideband Rabi rates.
    MmNull {
        /// Starting displacement from the rf null (µm).
        #[arg(long, default_value_t = 1.0)]
        start_um: f64,
    },
    /// Track a drifting quantization field with periodic Ramsey probes.
    B0Track {
        /// Linear drift (mT per day).
        #[arg(long, default_value_t = 0.02)]
        drift_mt_per_day: f64,
        /// Sampling interval (minutes).
        #[arg(long, default_value_t = 25.0)]
        interval_min: f64,
        /// Tracked span (hours).
        #[arg(long, default_value_t = 24.0)]
        hours: f64,
    },
}

fn records_jsonl(header: &str, records: &[vexp::RunRecord]) -> String {
    let mut text = String::from(header);
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("serializable"));
        text.push('\n');
    }
    text
}

pub fn run(ctx: &Context, cmd: VexpCmd) -> Result<()> {
    let inputs = ctx.inputs()?;
    let diagram = spins::diagonalize(21.28e-3)?;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(ctx.seed);
    match cmd {
        VexpCmd::Ramsey { shift_hz, shots } => {
            let seq = RamseyEcho {
                field_on: [false, true],
                ..RamseyEcho::shift_probe(250e-6)
            };
            let noise = DetectionModel::default();
            let est = vexp::run_ramsey_echo(&seq, |_| shift_hz, &noise, shots, &mut rng)?;
            let truth = seq.accumulated_phase(|_| shift_hz);
            println!(
                "estimated phase = {:.4} +- {:.4} rad (true {:.4})",
                est.delta_phi, est.sigma, truth
            );
            for (phase, population, n) in &est.fringe {
                println!("  phi_a = {phase:.3}: P = {population:.4} ({n} shots)");
            }
            println!(
                "sensitivity floor at this window: {:.1} Hz",
                vexp::shift_sensitivity_floor(seq.t_probe)
            );
            let record = vexp::RunRecord {
                step: 1,
                knobs: Default::default(),
                counts: est.counts.clone(),
                estimate: est.delta_phi,
            };
            let text = records_jsonl(&artifact_header(inputs.hash, ctx.seed), &[record]);
            write_atomic(&ctx.out.join("vexp_ramsey.jsonl"), &text)?;
            println!("wrote {}", ctx.out.join("vexp_ramsey.jsonl").display());
            Ok(())
        }
        VexpCmd::NullLoop { budget } => {
            let strips = microwave_strips(&inputs.layout)?;
            let drive = inputs.system()?.drive.clone();
            let null = rf_null(&inputs.layout, &drive)?;
            let target = Vec2::new(null.x, null.z);
            let nulled =
                null_optimize(&strips, CurrentProfile::EdgePeaked, "MW1", 1.0, &target)?;
            // Start the loop detuned from the perfect null, as after a cold
            // start of the signal chain.
            let mut base = nulled.currents.clone();
            *base.currents.get_mut("MW2").unwrap() *= 10f64.powf(0.25 / 20.0);
            *base.currents.get_mut("MW3").unwrap() *=
                num_complex::Complex64::from_polar(1.0, (-2.5f64).to_radians());
            let f0 =
                diagram.frequency(LevelLabel::new(3, 1), LevelLabel::new(2, 1))?;
            let scene = NullLoopScene {
                strips,
                profile: CurrentProfile::EdgePeaked,
                base_currents: base,
                target,
                pair: (LevelLabel::new(2, 0), LevelLabel::new(3, 0)),
                freq: f0,
                b0_dir: default_b0_dir(),
                t_probe: 250e-6,
                shots: 150,
                detection: DetectionModel::default(),
                quantization: Some(KnobQuantization::default()),
            };
            let state = vexp::null_loop(&scene, &diagram, budget, &mut rng)?;
            let residual = scene.true_shift(&diagram, &state.knobs)?;
            println!(
                "converged: {} after {} measurements; residual shift {:.1} Hz",
                state.converged, state.measurements, residual
            );
            for (knob, value) in &state.knobs {
                println!("  {knob} = {value:+.4}");
            }
            let text = records_jsonl(&artifact_header(inputs.hash, ctx.seed), &state.records);
            write_atomic(&ctx.out.join("vexp_null_loop.jsonl"), &text)?;
            println!("wrote {}", ctx.out.join("vexp_null_loop.jsonl").display());
            Ok(())
        }
        VexpCmd::MmNull { start_um } => {
            let drive = inputs.system()?.drive.clone();
            let rf = RfQuadrupole::from_layout(&inputs.layout, &drive)?;
            let scene = MmNullScene {
                rf,
                model: QuadrupoleModel {
                    b_prime: 35.0,
                    alpha_mw_deg: -30.0,
                    center: [0.0, 0.0],
                    freq: 1.69e9,
                },
                ion: drive.ion,
                specs: vec![
                    spins::transition(&diagram, LevelLabel::new(2, 0), LevelLabel::new(3, 1))?,
                    spins::transition(&diagram, LevelLabel::new(3, 1), LevelLabel::new(2, 1))?,
                ],
                b0_dir: default_b0_dir(),
                start_offset: Vec2::new(0.8e-6, -0.6e-6).normalize() * start_um * 1e-6,
                t_probe: 2e-3,
                shots: 150,
                detection: DetectionModel::default(),
                shim_step: 1e-9,
            };
            let state = vexp::mm_null_loop(&scene, 50, &mut rng)?;
            let knobs = [state.knobs["shim1"], state.knobs["shim2"]];
            println!(
                "converged: {} after {} measurements; r_MM = {:.3} nm, rate = {:.1} rad/s",
                state.converged,
                state.measurements,
                scene.micromotion(&knobs).r_mm() * 1e9,
                scene.true_rate(&knobs)
            );
            let text = records_jsonl(&artifact_header(inputs.hash, ctx.seed), &state.records);
            write_atomic(&ctx.out.join("vexp_mm_null.jsonl"), &text)?;
            println!("wrote {}", ctx.out.join("vexp_mm_null.jsonl").display());
            Ok(())
        }
        VexpCmd::B0Track {
            drift_mt_per_day,
            interval_min,
            hours,
        } => {
            let constants = spins::HyperfineConstants::mg25();
            let b_ref = 21.28e-3;
            let drift = drift_mt_per_day * 1e-3 / 86400.0;
            let record = vexp::b0_track(
                &constants,
                LevelLabel::new(3, 3),
                LevelLabel::new(2, 2),
                |t| b_ref + drift * t,
                b_ref,
                interval_min * 60.0,
                hours * 3600.0,
                300.0,
                &mut rng,
            )?;
            let worst = record.residuals.iter().cloned().fold(0.0f64, f64::max);
            println!(
                "{} samples; worst residual |B - B_ref| = {:.3} nT",
                record.times.len(),
                worst * 1e9
            );
            let mut csv = artifact_header(inputs.hash, ctx.seed);
            csv.push_str("t_min,correction_uT,residual_nT\n");
            for ((t, c), r) in record
                .times
                .iter()
                .zip(&record.corrections)
                .zip(&record.residuals)
            {
                csv.push_str(&format!(
                    "{:.2},{:.6},{:.4}\n",
                    t / 60.0,
                    c * 1e6,
                    r * 1e9
                ));
            }
            write_atomic(&ctx.out.join("vexp_b0_track.csv"), &csv)?;
            println!("wrote {}", ctx.out.join("vexp_b0_track.csv").display());
            Ok(())
        }
    }
}

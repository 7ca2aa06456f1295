use clap::Subcommand;
use mwtrap::gates::{self, GateConfig};
use mwtrap::{Error, Result};

use super::Context;
use crate::util::{artifact_header, fnv1a64, parse_grid, write_atomic};

#[derive(Subcommand)]
pub enum GateCmd {
    /// Propagate the gate master equation for one configuration.
    Run {
        /// Gate configuration JSON; defaults to the reference operating
        /// point.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
    },
    /// Fidelity versus heating rate.
    Scan {
        /// Heating-rate grid in quanta/ms, as lo:hi:step.
        #[arg(long, default_value = "0:5:0.5")]
        ndot: String,
    },
}

pub fn run(ctx: &Context, cmd: GateCmd) -> Result<()> {
    match cmd {
        GateCmd::Run { config } => {
            let (gate_config, hash) = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Config(format!("read {}: {e}", path.display())))?;
                    let parsed: GateConfig = serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("gate config: {e}")))?;
                    (parsed, fnv1a64(&[text.as_bytes()]))
                }
                None => {
                    let c = GateConfig::reference();
                    let text = serde_json::to_string(&c).expect("serializable");
                    (c, fnv1a64(&[text.as_bytes()]))
                }
            };
            let result = gates::ms_propagate(&gate_config)?;
            println!("Bell fidelity F = {:.5}", result.fidelity);
            println!(
                "trace error {:.2e}, min eigenvalue {:+.2e}, {} integrator steps",
                result.trace_error, result.min_eigenvalue, result.steps
            );
            let (_, n_final) = *result.occupation.last().expect("samples");
            println!("final <n> = {n_final:.4}");
            let mut csv = artifact_header(hash, ctx.seed);
            csv.push_str("t_us,n_mean\n");
            for (t, n) in &result.occupation {
                csv.push_str(&format!("{:.4},{:.8}\n", t * 1e6, n));
            }
            write_atomic(&ctx.out.join("gate_occupation.csv"), &csv)?;
            let spin: Vec<Vec<[f64; 2]>> = (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| {
                            let z = result.rho_spin[(i, j)];
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect();
            let mut text = artifact_header(hash, ctx.seed);
            text.push_str(
                &serde_json::to_string_pretty(&serde_json::json!({
                    "config": gate_config,
                    "fidelity": result.fidelity,
                    "rho_spin": spin,
                    "trace_error": result.trace_error,
                }))
                .expect("serializable"),
            );
            text.push('\n');
            write_atomic(&ctx.out.join("gate_result.json"), &text)?;
            println!("wrote {}", ctx.out.join("gate_result.json").display());
            Ok(())
        }
        GateCmd::Scan { ndot } => {
            let grid_per_ms = parse_grid(&ndot)?;
            let rates: Vec<f64> = grid_per_ms.iter().map(|r| r * 1e3).collect();
            let mut config = GateConfig::reference();
            // Leave truncation room for the hottest scan points.
            config.n_max = 22;
            let table = gates::heating_scan(&config, &rates)?;
            let mut csv = artifact_header(fnv1a64(&[ndot.as_bytes()]), ctx.seed);
            csv.push_str("ndot_per_ms,fidelity\n");
            for (rate, fidelity) in &table {
                csv.push_str(&format!("{:.4},{:.6}\n", rate / 1e3, fidelity));
                println!("ndot = {:.2} quanta/ms: F = {fidelity:.4}", rate / 1e3);
            }
            write_atomic(&ctx.out.join("gate_scan.csv"), &csv)?;
            println!("wrote {}", ctx.out.join("gate_scan.csv").display());
            Ok(())
        }
    }
}

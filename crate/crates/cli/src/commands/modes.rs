use clap::Subcommand;
use mwtrap::moderot;
use mwtrap::Result;

use super::Context;
use crate::util::{artifact_header, parse_grid, write_atomic};

#[derive(Subcommand)]
pub enum ModesCmd {
    /// Sweep the rotation-potential scale; CSV of (s, f_LF, f_HF, alpha_LF).
    Sweep {
        /// Grid as lo:hi:step.
        #[arg(long, default_value = "-1:0.6:0.05")]
        srot: String,
    },
    /// Solve the rotation scale that aligns the LF mode to a target angle.
    Align {
        #[arg(long, default_value_t = -53.0)]
        target_deg: f64,
        #[arg(long, default_value_t = -1.0)]
        s_lo: f64,
        #[arg(long, default_value_t = 0.6)]
        s_hi: f64,
    },
}

pub fn run(ctx: &Context, cmd: ModesCmd) -> Result<()> {
    let inputs = ctx.inputs()?;
    let system = inputs.calibration_system(ctx.config.is_some())?;
    match cmd {
        ModesCmd::Sweep { srot } => {
            let grid = parse_grid(&srot)?;
            let sweep = moderot::sweep(&system, &grid)?;
            if sweep.truncated {
                eprintln!("warning: sweep truncated where the trap is unbound");
            }
            let mut csv = artifact_header(inputs.hash, ctx.seed);
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
            write_atomic(&ctx.out.join("modes_sweep.csv"), &csv)?;
            println!("wrote {}", ctx.out.join("modes_sweep.csv").display());
            Ok(())
        }
        ModesCmd::Align {
            target_deg,
            s_lo,
            s_hi,
        } => {
            let s_star = moderot::solve_alignment(&system, target_deg, s_lo, s_hi)?;
            let mut at = system.clone();
            at.s_rot = s_star;
            let sol = at.solve()?;
            println!("s_rot* = {s_star:.5}");
            println!(
                "alpha_LF = {:.3} deg, f_LF = {:.4} MHz, f_HF = {:.4} MHz",
                sol.alpha_lf_deg,
                sol.lf.freq / 1e6,
                sol.hf.freq / 1e6
            );
            Ok(())
        }
    }
}

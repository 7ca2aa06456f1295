use clap::Subcommand;
use mwtrap::constants::DAC_LSB;
use mwtrap::planefield::{design_shims, displacement_resolution, trap_depth};
use mwtrap::Result;

use super::Context;
use crate::util::{artifact_header, write_atomic};

#[derive(Subcommand)]
pub enum TrapCmd {
    /// Solve the equilibrium and normal modes of the configured trap.
    Solve,
    /// Trap depth and escape-saddle location.
    Depth,
    /// Design shim voltage sets and report the DAC-limited resolution.
    Shims,
}

pub fn run(ctx: &Context, cmd: TrapCmd) -> Result<()> {
    let inputs = ctx.inputs()?;
    let system = inputs.system()?;
    match cmd {
        TrapCmd::Solve => {
            let sol = system.solve()?;
            println!(
                "trap center: ({:.3}, {:.3}, {:.3}) um",
                sol.trap_center[0] * 1e6,
                sol.trap_center[1] * 1e6,
                sol.trap_center[2] * 1e6
            );
            println!(
                "f_axial = {:.4} MHz   f_LF = {:.4} MHz   f_HF = {:.4} MHz",
                sol.axial.freq / 1e6,
                sol.lf.freq / 1e6,
                sol.hf.freq / 1e6
            );
            println!(
                "alpha_LF = {:.2} deg{}",
                sol.alpha_lf_deg,
                if sol.degenerate_radial {
                    "  (radial orientation degenerate)"
                } else {
                    ""
                }
            );
            println!(
                "a0: axial {:.2} nm, LF {:.2} nm, HF {:.2} nm",
                sol.axial.a0 * 1e9,
                sol.lf.a0 * 1e9,
                sol.hf.a0 * 1e9
            );
            let mut text = artifact_header(inputs.hash, ctx.seed);
            text.push_str(&serde_json::to_string_pretty(&sol).expect("serializable"));
            text.push('\n');
            write_atomic(&ctx.out.join("trap_solve.json"), &text)?;
            println!("wrote {}", ctx.out.join("trap_solve.json").display());
            Ok(())
        }
        TrapCmd::Depth => {
            let depth = trap_depth(&system)?;
            println!(
                "depth = {:.2} meV at saddle ({:.2}, {:.2}, {:.2}) um",
                depth.depth_ev * 1e3,
                depth.saddle[0] * 1e6,
                depth.saddle[1] * 1e6,
                depth.saddle[2] * 1e6
            );
            let mut text = artifact_header(inputs.hash, ctx.seed);
            text.push_str(&serde_json::to_string_pretty(&depth).expect("serializable"));
            text.push('\n');
            write_atomic(&ctx.out.join("trap_depth.json"), &text)?;
            println!("wrote {}", ctx.out.join("trap_depth.json").display());
            Ok(())
        }
        TrapCmd::Shims => {
            let basis = design_shims(&system)?;
            let res = displacement_resolution(&system, DAC_LSB)?;
            for (axis, name) in ["x", "y", "z"].iter().enumerate() {
                println!(
                    "{name}-shim (V per um of displacement), cross-talk {:.1}%:",
                    basis.crosstalk[axis] * 100.0
                );
                for (electrode, v_per_m) in &basis.per_axis[axis] {
                    println!("  {electrode}: {:+.4}", v_per_m * 1e-6);
                }
            }
            println!(
                "DAC-limited resolution: x {:.2} nm, y {:.2} nm, z {:.2} nm",
                res[0] * 1e9,
                res[1] * 1e9,
                res[2] * 1e9
            );
            let mut text = artifact_header(inputs.hash, ctx.seed);
            text.push_str(
                &serde_json::to_string_pretty(&serde_json::json!({
                    "basis": basis,
                    "resolution_m": res,
                }))
                .expect("serializable"),
            );
            text.push('\n');
            write_atomic(&ctx.out.join("trap_shims.json"), &text)?;
            println!("wrote {}", ctx.out.join("trap_shims.json").display());
            Ok(())
        }
    }
}

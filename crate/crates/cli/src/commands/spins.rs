use clap::Subcommand;
use mwtrap::spins::{self, HyperfineConstants};
use mwtrap::Result;

use super::Context;
use crate::util::{artifact_header, fnv1a64, parse_field, parse_freq, parse_pair, write_atomic};

#[derive(Subcommand)]
pub enum SpinsCmd {
    /// Level diagram at a field, plus a CSV level table over a field sweep.
    Levels {
        /// Static field, e.g. "21.28mT" (bare numbers are mT).
        #[arg(long, default_value = "21.28mT")]
        b: String,
    },
    /// Clock (field-insensitive) point of a level pair.
    Clock {
        /// Pair as F,m:F,m, e.g. "3,1:2,1".
        #[arg(long, default_value = "3,1:2,1")]
        pair: String,
    },
    /// ac Zeeman shift coefficients of a pair at a drive frequency.
    Aczeeman {
        #[arg(long, default_value = "2,0:3,0")]
        pair: String,
        /// Drive frequency, e.g. "1.686GHz"; defaults to the qubit f0.
        #[arg(long)]
        fs: Option<String>,
        /// Ellipticity of the perpendicular component (rad).
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Static field.
        #[arg(long, default_value = "21.28mT")]
        b: String,
    },
}

pub fn run(ctx: &Context, cmd: SpinsCmd) -> Result<()> {
    let constants = HyperfineConstants::mg25();
    match cmd {
        SpinsCmd::Levels { b } => {
            let b0 = parse_field(&b)?;
            let diagram = spins::diagonalize_with(&constants, b0)?;
            println!("levels at B0 = {:.4} mT (energies in GHz):", b0 * 1e3);
            for level in diagram.levels() {
                println!("  {}: {:+.6}", level.label, level.energy / 1e9);
            }
            // Level table over a sweep up to 1.5 B0.
            let labels: Vec<_> = diagram.levels().iter().map(|l| l.label).collect();
            let mut csv = artifact_header(fnv1a64(&[b.as_bytes()]), ctx.seed);
            csv.push_str("b_mT");
            for label in &labels {
                csv.push_str(&format!(",E({},{})_MHz", label.f, label.m));
            }
            csv.push('\n');
            let n = 200;
            for k in 1..=n {
                let field = 1.5 * b0 * k as f64 / n as f64;
                let d = spins::diagonalize_with(&constants, field)?;
                csv.push_str(&format!("{:.6}", field * 1e3));
                for label in &labels {
                    csv.push_str(&format!(",{:.6}", d.level(*label)?.energy / 1e6));
                }
                csv.push('\n');
            }
            write_atomic(&ctx.out.join("levels.csv"), &csv)?;
            println!("wrote {}", ctx.out.join("levels.csv").display());
            Ok(())
        }
        SpinsCmd::Clock { pair } => {
            let (a, b) = parse_pair(&pair)?;
            let b_star = spins::clock_point(&constants, a, b)?;
            let (d1, d2) = spins::field_sensitivities(&constants, a, b, b_star)?;
            let f = spins::diagonalize_with(&constants, b_star)?.frequency(a, b)?;
            println!("clock point of {a} <-> {b}:");
            println!("  B* = {:.4} mT", b_star * 1e3);
            println!("  f(B*) = {:.6} GHz", f / 1e9);
            println!("  df/dB = {:+.3} kHz/mT (residual)", d1 / 1e6);
            println!("  quadratic deviation = {:.1} kHz/mT^2", 0.5 * d2 / 1e9);
            Ok(())
        }
        SpinsCmd::Aczeeman { pair, fs, eps, b } => {
            let (a, bb) = parse_pair(&pair)?;
            let b0 = parse_field(&b)?;
            let diagram = spins::diagonalize_with(&constants, b0)?;
            let f0 = diagram.frequency(
                spins::LevelLabel::new(3, 1),
                spins::LevelLabel::new(2, 1),
            )?;
            let freq = match fs {
                Some(text) => parse_freq(&text)?,
                None => f0,
            };
            println!(
                "pair {a} <-> {bb} at B0 = {:.4} mT, f_s = {:.6} GHz (f_s - f0 = {:+.3} MHz):",
                b0 * 1e3,
                freq / 1e9,
                (freq - f0) / 1e6
            );
            match spins::coefficient_par(&diagram, a, bb, freq) {
                Ok(c) => println!("  c_par  = {c:+.4} Hz/uT^2"),
                Err(e) => println!("  c_par  unavailable: {e}"),
            }
            match spins::coefficient_perp(&diagram, a, bb, freq, eps) {
                Ok(c) => println!("  c_perp = {c:+.4} Hz/uT^2 (eps = {eps})"),
                Err(e) => println!("  c_perp unavailable: {e}"),
            }
            Ok(())
        }
    }
}

//! Reference-configuration diagnostics. Ignored by default; run with
//! `cargo test -p mwtrap --test tuning -- --ignored --nocapture` to print
//! the characteristic numbers of the shipped geometry after edits.

use mwtrap::geom::canonical_quadrupole_branch;
use mwtrap::planefield::{axial_rf_curvature_freq, presets, rf_field_jacobian, rf_null, trap_depth};

#[test]
#[ignore]
fn report_reference_configuration() {
    let layout = presets::reference_layout();
    let drive = presets::reference_drive();

    let null = rf_null(&layout, &drive).unwrap();
    println!(
        "rf null: x = {:.3} um, z = {:.3} um",
        null.x * 1e6,
        null.z * 1e6
    );

    let j = rf_field_jacobian(&layout, &drive, &null).unwrap();
    let (e_prime, alpha_rf) = canonical_quadrupole_branch(
        j[(0, 0)].hypot(j[(0, 2)]),
        0.5 * j[(0, 2)].atan2(j[(0, 0)]).to_degrees(),
    );
    println!("rf quadrupole: E' = {e_prime:.4e} V/m^2, alpha_RF = {alpha_rf:.2} deg");
    println!(
        "axial rf curvature freq = {:.1} kHz",
        axial_rf_curvature_freq(&layout, &drive).unwrap() / 1e3
    );

    let system = presets::reference_system(false, 0.0).unwrap();
    let sol = system.solve().unwrap();
    println!(
        "reference (stray off): center z = {:.3} um, f_axial = {:.4} MHz, f_LF = {:.4} MHz, f_HF = {:.4} MHz, alpha_LF = {:.2} deg",
        sol.trap_center[2] * 1e6,
        sol.axial.freq / 1e6,
        sol.lf.freq / 1e6,
        sol.hf.freq / 1e6,
        sol.alpha_lf_deg
    );
    let depth = trap_depth(&system).unwrap();
    println!("depth = {:.2} meV", depth.depth_ev * 1e3);

    for s in [-1.0, -0.5, 0.0, 0.5] {
        let sys = presets::calibration_system(s).unwrap();
        let sol = sys.solve().unwrap();
        println!(
            "calibration s_rot = {s:+.2}: f_LF = {:.4} MHz, f_HF = {:.4} MHz, alpha_LF = {:+.2} deg",
            sol.lf.freq / 1e6,
            sol.hf.freq / 1e6,
            sol.alpha_lf_deg
        );
    }
}

//! Virtual experiments: Ramsey/spin-echo sequences, stochastic photon
//! detection, and the closed-loop calibration routines built on them.

mod detect;
mod loops;
mod ramsey;

pub use detect::{poisson_cdf, DetectionModel, DetectionShot};
pub use loops::{
    b0_track, mm_null_loop, null_loop, spin_frame_phasor, CalibrationLoopState,
    KnobQuantization, MmNullScene, NullLoopScene, RunRecord, TrackRecord, NULL_KNOBS,
};
pub use ramsey::{run_ramsey_echo, shift_sensitivity_floor, RamseyEcho, RamseyEstimate};

//! Desk-scale simulator and calibration toolkit for microwave near-field
//! quantum control of trapped ions above a surface-electrode trap.
//!
//! The crate models the full stack needed to design and calibrate such an
//! experiment without hardware:
//!
//! * [`planefield`] — analytic electrostatics of a gapless planar electrode
//!   layout: control potentials, rf pseudopotential, equilibrium position,
//!   trap depth, normal modes, shim bases and stray-potential models.
//! * [`spins`] — hyperfine-Zeeman structure of a nuclear-spin-5/2, J = 1/2
//!   ion (²⁵Mg⁺ by default): level diagrams, transition frequencies and
//!   sensitivities, magnetic-dipole matrix elements, ac Zeeman shifts.
//! * [`nearfield`] — microwave near-field models: quadrupole
//!   parameterization, quasi-static strip-current fields, field nulling,
//!   shift/Rabi maps and their least-squares fits, micromotion detection,
//!   dissipation and microwave-pseudopotential estimates.
//! * [`moderot`] — radial-mode orientation control and sideband coupling.
//! * [`gates`] — two-qubit Mølmer-Sørensen gate under motional heating,
//!   propagated with a Lindblad master equation.
//! * [`vexp`] — virtual experiments: Ramsey/spin-echo sequences, stochastic
//!   photon detection, and closed-loop calibration routines.
//!
//! # Coordinate conventions
//!
//! The electrode plane is `z = 0` with the trap volume at `z > 0`; the trap
//! axis runs along `y`, so the radial plane is `x`-`z`. Radial angles are
//! measured from the `x` axis toward `z`. The static quantization field
//! `B₀` lies in the `y`-`z` plane, tilted −15° from `z` by default.
//! Quantities are SI internally; eV and MHz appear only at presentation
//! boundaries.

pub mod constants;
pub mod error;
pub mod gates;
pub mod geom;
pub mod moderot;
pub mod nearfield;
pub mod numeric;
pub mod planefield;
pub mod spins;
pub mod vexp;

pub use error::{Error, Result};

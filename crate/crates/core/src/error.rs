//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Field point lies on or below the electrode plane.
    #[error("point must satisfy z > 0 (got z = {0:.3e} m)")]
    BelowPlane(f64),

    /// A voltage map references an electrode missing from the layout.
    #[error("unknown electrode `{0}`")]
    UnknownElectrode(String),

    /// Invalid electrode layout (overlap, missing roles, bad rectangle).
    #[error("layout: {0}")]
    Layout(String),

    /// Invalid configuration value.
    #[error("config: {0}")]
    Config(String),

    /// The total potential has no bound minimum; carries the unstable
    /// direction (unit eigenvector of the non-positive Hessian mode).
    #[error("untrapped: unstable along [{:.3}, {:.3}, {:.3}]", direction[0], direction[1], direction[2])]
    Untrapped { direction: [f64; 3] },

    /// Iterative solve did not converge.
    #[error("no convergence in {iterations} iterations ({context}, residual {residual:.3e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// Least-squares system is singular or rank deficient.
    #[error("singular system: {0}")]
    Singular(String),

    /// Perturbative ac Zeeman evaluation invalid: the drive is too close to
    /// resonance with a directly driven transition of the pair.
    #[error("nonperturbative: drive within 10x Rabi rate of `{transition}` (detuning {detuning_hz:.3e} Hz)")]
    Nonperturbative {
        transition: String,
        detuning_hz: f64,
    },

    /// Invalid hyperfine level label.
    #[error("no hyperfine level ({f}, {m})")]
    BadLevel { f: i32, m: i32 },

    /// Fock-space truncation too small for the requested dynamics.
    #[error("increase n_max: top Fock levels reached population {population:.3e} (n_max = {n_max})")]
    Truncation { n_max: usize, population: f64 },

    /// Requested value lies outside the achievable range.
    #[error("target {target:.3} outside achievable range [{lo:.3}, {hi:.3}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },
}

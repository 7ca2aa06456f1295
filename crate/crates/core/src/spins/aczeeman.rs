//! Second-order ac Zeeman shifts of hyperfine transitions, including the
//! Bloch-Siegert (counter-rotating) contributions.
//!
//! For a drive B(t) = Re[b e^{2πi fs t}] the interaction splits as
//! `W e^{iωt} + W† e^{-iωt}` with `W = -μ·b/2`, and each level shifts by
//!
//! ```text
//! δE_k = Σ_{n≠k} |W†_{nk}|²/(E_k - E_n - h fs) + |W_{nk}|²/(E_k - E_n + h fs)
//! ```
//!
//! The second term is the counter-rotating piece; dropping it recovers the
//! rotating-wave shift.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{MU_B, PLANCK};
use crate::error::{Error, Result};

use super::{moment_operators, LevelDiagram, LevelLabel, OscillatingField};

/// Quadratic shift coefficients of a pair: δf = c_⊥ B_⊥² + c_∥ B_∥².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftCoefficients {
    /// Hz/(µT)² for the perpendicular field component (depends on ε).
    pub c_perp: f64,
    /// Hz/(µT)² for the parallel component.
    pub c_par: f64,
    /// Drive frequency the coefficients were evaluated at (Hz).
    pub freq: f64,
    /// Ellipticity they were evaluated at (rad).
    pub epsilon: f64,
}

/// Shift of the a↔b transition frequency (Hz) for a drive given as a
/// complex amplitude vector in the quantization frame (ẑ along B₀).
pub fn ac_zeeman_shift_phasor(
    diagram: &LevelDiagram,
    a: LevelLabel,
    b: LevelLabel,
    phasor: &Vector3<Complex64>,
    freq: f64,
    include_counter_rotating: bool,
) -> Result<f64> {
    if freq <= 0.0 {
        return Err(Error::Config(format!("drive frequency {freq} must be > 0")));
    }
    let mu = moment_operators(&diagram.constants);
    let n = diagram.levels().len();

    // W/h in the eigenbasis (Hz).
    let mut w_product: DMatrix<Complex64> = DMatrix::zeros(n, n);
    for q in 0..3 {
        w_product += &mu[q] * (-0.5 * phasor[q] * MU_B / PLANCK);
    }
    let vecs: Vec<DVector<Complex64>> = diagram
        .levels()
        .iter()
        .map(|l| l.amplitudes.map(|x| Complex64::new(x, 0.0)))
        .collect();
    let w = DMatrix::from_fn(n, n, |r, c| (vecs[r].adjoint() * &w_product * &vecs[c])[(0, 0)]);

    let energies: Vec<f64> = diagram.levels().iter().map(|l| l.energy).collect();
    let idx_of = |label: LevelLabel| -> Result<usize> {
        diagram
            .levels()
            .iter()
            .position(|l| l.label == label)
            .ok_or(Error::BadLevel {
                f: label.f,
                m: label.m,
            })
    };
    let ka = idx_of(a)?;
    let kb = idx_of(b)?;

    // Perturbative validity: the drive must stay detuned from every
    // directly driven transition of the pair.
    for &k in &[ka, kb] {
        for m in 0..n {
            if m == k {
                continue;
            }
            let coupling = w[(m, k)].norm().max(w[(k, m)].norm());
            let rabi_hz = 2.0 * coupling; // resonant Rabi frequency, Hz
            if rabi_hz < 1e-9 {
                continue; // numerically forbidden transition
            }
            let detuning = (energies[m] - energies[k]).abs() - freq;
            if detuning.abs() < 10.0 * rabi_hz {
                return Err(Error::Nonperturbative {
                    transition: format!(
                        "{} <-> {}",
                        diagram.levels()[k].label,
                        diagram.levels()[m].label
                    ),
                    detuning_hz: detuning,
                });
            }
        }
    }

    let mut shift = [0.0; 2]; // δf of levels a, b
    for (slot, &k) in [ka, kb].iter().enumerate() {
        let mut acc = 0.0;
        for m in 0..n {
            if m == k {
                continue;
            }
            let de = energies[k] - energies[m];
            if w[(k, m)].norm().max(w[(m, k)].norm()) < 1e-12 {
                continue; // forbidden partner; avoids 0/0 at exact resonance
            }
            // |⟨m|W†|k⟩|² pairs with the +f (absorption) denominator and
            // |⟨m|W|k⟩|² with -f (emission). Whichever is off-resonant for
            // this partner is its Bloch-Siegert (counter-rotating) piece.
            let absorption = w[(k, m)].norm_sqr() / (de + freq);
            let emission = w[(m, k)].norm_sqr() / (de - freq);
            if include_counter_rotating {
                acc += absorption + emission;
            } else {
                acc += if de < 0.0 { absorption } else { emission };
            }
        }
        shift[slot] = acc;
    }

    // Shift of |E_b - E_a|, signed consistently with the level ordering.
    let delta = if energies[kb] >= energies[ka] {
        shift[1] - shift[0]
    } else {
        shift[0] - shift[1]
    };
    Ok(delta)
}

/// Shift of the a↔b transition for an Eq.-style parameterized field.
pub fn ac_zeeman_shift(
    diagram: &LevelDiagram,
    a: LevelLabel,
    b: LevelLabel,
    field: &OscillatingField,
) -> Result<f64> {
    field.validate()?;
    ac_zeeman_shift_phasor(diagram, a, b, &field.phasor(), field.freq, true)
}

/// Probe amplitude for coefficient evaluation: coefficients are quoted per
/// (µT)², and shifts are quadratic, so a 1 µT probe reads them directly.
const PROBE: f64 = 1e-6;

/// c_∥ (Hz/(µT)²) of the pair at a drive frequency.
pub fn coefficient_par(
    diagram: &LevelDiagram,
    a: LevelLabel,
    b: LevelLabel,
    freq: f64,
) -> Result<f64> {
    let par = OscillatingField {
        b_par: PROBE,
        b_perp: 0.0,
        epsilon: 0.0,
        beta: 0.0,
        gamma: 0.0,
        freq,
    };
    ac_zeeman_shift(diagram, a, b, &par)
}

/// c_⊥ (Hz/(µT)²) of the pair at a drive frequency and ellipticity.
pub fn coefficient_perp(
    diagram: &LevelDiagram,
    a: LevelLabel,
    b: LevelLabel,
    freq: f64,
    epsilon: f64,
) -> Result<f64> {
    let perp = OscillatingField {
        b_par: 0.0,
        b_perp: PROBE,
        epsilon,
        beta: 0.0,
        gamma: 0.0,
        freq,
    };
    ac_zeeman_shift(diagram, a, b, &perp)
}

/// Both quadratic coefficients of the pair. Fails when either probe is
/// near-resonant with a directly driven transition (use the split
/// evaluators in that case).
pub fn coefficients(
    diagram: &LevelDiagram,
    a: LevelLabel,
    b: LevelLabel,
    freq: f64,
    epsilon: f64,
) -> Result<ShiftCoefficients> {
    Ok(ShiftCoefficients {
        c_perp: coefficient_perp(diagram, a, b, freq, epsilon)?,
        c_par: coefficient_par(diagram, a, b, freq)?,
        freq,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spins::diagonalize;

    #[test]
    fn zero_field_zero_shift() {
        let d = diagonalize(21.28e-3).unwrap();
        let f = OscillatingField {
            b_par: 0.0,
            b_perp: 0.0,
            epsilon: 0.0,
            beta: 0.0,
            gamma: 0.0,
            freq: 1.6e9,
        };
        let s = ac_zeeman_shift(&d, LevelLabel::new(2, 0), LevelLabel::new(3, 1), &f).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn near_resonance_rejected() {
        let d = diagonalize(21.28e-3).unwrap();
        let a = LevelLabel::new(3, 1);
        let b = LevelLabel::new(2, 1);
        let f0 = d.frequency(a, b).unwrap();
        let f = OscillatingField {
            b_par: 10e-6,
            b_perp: 0.0,
            epsilon: 0.0,
            beta: 0.0,
            gamma: 0.0,
            freq: f0 + 10.0, // 10 Hz detuned from a strong transition
        };
        assert!(matches!(
            ac_zeeman_shift(&d, a, b, &f),
            Err(Error::Nonperturbative { .. })
        ));
    }

    #[test]
    fn counter_rotating_terms_matter() {
        let d = diagonalize(21.28e-3).unwrap();
        let a = LevelLabel::new(2, 0);
        let b = LevelLabel::new(3, 0);
        let f0 = d
            .frequency(LevelLabel::new(3, 1), LevelLabel::new(2, 1))
            .unwrap();
        let field = OscillatingField {
            b_par: 0.0,
            b_perp: 1e-6,
            epsilon: 0.0,
            beta: 0.0,
            gamma: 0.0,
            freq: f0,
        };
        let full = ac_zeeman_shift_phasor(&d, a, b, &field.phasor(), f0, true).unwrap();
        let rwa = ac_zeeman_shift_phasor(&d, a, b, &field.phasor(), f0, false).unwrap();
        let diff = (full - rwa).abs();
        assert!(
            diff > 1e-3 * full.abs(),
            "Bloch-Siegert contribution invisible: {full} vs {rwa}"
        );
    }
}

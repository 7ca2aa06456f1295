//! Physical constants (CODATA 2018) and ²⁵Mg⁺ atomic data.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Nuclear magneton (J/T).
pub const MU_N: f64 = 5.050_783_746_1e-27;
/// Elementary charge (C).
pub const Q_E: f64 = 1.602_176_634e-19;
/// Unified atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Vacuum permeability (T·m/A).
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Bulk resistivity of electroplated gold (Ω·m).
pub const RHO_GOLD: f64 = 2.2e-8;

/// ²⁵Mg⁺ atomic data.
///
/// Hyperfine constant from Itano and Wineland, Phys. Rev. A 24, 1364 (1981);
/// nuclear moment from the Stone nuclear-moment tables; gJ from standard
/// alkali-like-ion spectroscopy.
pub mod mg25 {
    use super::AMU;

    /// Atomic mass of ²⁵Mg⁺ (kg); 24.985 837 u minus one electron mass.
    pub const MASS: f64 = 24.985_288 * AMU;
    /// Nuclear spin.
    pub const I_NUC: f64 = 2.5;
    /// ²S₁/₂ hyperfine constant A (Hz). Negative: the F = 3 manifold lies
    /// lowest and the zero-field splitting is 3|A| ≈ 1.789 GHz.
    pub const A_HFS: f64 = -596.254_3e6;
    /// Electronic g-factor of the ²S₁/₂ ground state.
    pub const G_J: f64 = 2.002_29;
    /// Nuclear magnetic moment (units of μ_N).
    pub const MU_I: f64 = -0.855_45;
    /// Nuclear g-factor, gI = μI/(I·μN) in the μN convention.
    pub const G_I: f64 = MU_I / I_NUC;
}

/// Tilt of the quantization field from the z axis, in the y-z plane (deg).
pub const B0_TILT_DEG: f64 = -15.0;
/// Default quantization-field magnitude (T).
pub const B0_DEFAULT: f64 = 21.28e-3;

/// Effective electrode voltage per microwave current (Ω) in the
/// quasi-static model of the microwave electric field; a model parameter
/// calibrated once against the ponderomotive displacement scale.
pub const MW_EFFECTIVE_IMPEDANCE: f64 = 16.5;

/// Control-electrode DAC least significant bit (V).
pub const DAC_LSB: f64 = 0.305e-3;
/// Voltage-controlled phase-shifter slope (degrees per volt).
pub const PHASE_SHIFTER_DEG_PER_V: f64 = 12.0;
/// Voltage-controlled attenuator slope (dB per volt).
pub const ATTENUATOR_DB_PER_V: f64 = 1.6;

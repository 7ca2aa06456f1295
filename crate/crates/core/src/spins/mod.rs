//! ²S₁/₂ hyperfine-Zeeman structure of a nuclear-spin-5/2, J = 1/2 ion:
//! level diagrams, transition frequencies and magnetic-field sensitivities,
//! magnetic-dipole matrix elements, ac Zeeman shifts and Rabi rates.
//!
//! The Hamiltonian is `H = h·A I·J + μB·gJ·B·Jz − μN·gI·B·Iz` with the
//! quantization axis along the static field. Energies are handled in Hz.

mod aczeeman;

pub use aczeeman::{
    ac_zeeman_shift, ac_zeeman_shift_phasor, coefficient_par, coefficient_perp, coefficients,
    ShiftCoefficients,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{mg25, HBAR, MU_B, MU_N, PLANCK};
use crate::error::{Error, Result};

/// Coupling constants of the ground-state hyperfine-Zeeman problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineConstants {
    /// Hyperfine constant A (Hz).
    pub a_hfs: f64,
    /// Electronic g-factor.
    pub g_j: f64,
    /// Nuclear g-factor (μN convention, gI = μI/(I·μN)).
    pub g_i: f64,
    /// Nuclear spin quantum number.
    pub i_nuc: f64,
}

impl HyperfineConstants {
    pub fn mg25() -> Self {
        Self {
            a_hfs: mg25::A_HFS,
            g_j: mg25::G_J,
            g_i: mg25::G_I,
            i_nuc: mg25::I_NUC,
        }
    }

    /// Number of |m_I, m_J⟩ product states, (2I+1)(2J+1).
    pub fn dim(&self) -> usize {
        ((2.0 * self.i_nuc) as usize + 1) * 2
    }

    /// F quantum numbers of the two hyperfine manifolds (lower, upper) at
    /// zero field given the sign of A.
    fn f_low_high(&self) -> (f64, f64) {
        let f_plus = self.i_nuc + 0.5;
        let f_minus = self.i_nuc - 0.5;
        if self.a_hfs < 0.0 {
            (f_plus, f_minus)
        } else {
            (f_minus, f_plus)
        }
    }
}

/// Hyperfine level label |F, m_F⟩ (adiabatic: follows the B → 0 manifold).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelLabel {
    pub f: i32,
    pub m: i32,
}

impl LevelLabel {
    pub fn new(f: i32, m: i32) -> Self {
        Self { f, m }
    }
}

impl std::fmt::Display for LevelLabel {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fmt, "|{},{}>", self.f, self.m)
    }
}

/// One eigenstate of the hyperfine-Zeeman Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: LevelLabel,
    /// Energy (Hz), zero-referenced to the hyperfine centroid.
    pub energy: f64,
    /// Amplitudes on the |m_I, m_J⟩ product basis (same order as the
    /// diagram's basis listing).
    pub amplitudes: DVector<f64>,
}

/// All 2(2I+1) eigenstates at one field value.
#[derive(Debug, Clone)]
pub struct LevelDiagram {
    pub b_field: f64,
    pub constants: HyperfineConstants,
    levels: Vec<Level>,
    /// Product basis: (2·m_I, 2·m_J) per index.
    basis: Vec<(i32, i32)>,
}

impl LevelDiagram {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn basis(&self) -> &[(i32, i32)] {
        &self.basis
    }

    pub fn level(&self, label: LevelLabel) -> Result<&Level> {
        self.levels
            .iter()
            .find(|l| l.label == label)
            .ok_or(Error::BadLevel {
                f: label.f,
                m: label.m,
            })
    }

    /// Transition frequency |E_b − E_a| (Hz).
    pub fn frequency(&self, a: LevelLabel, b: LevelLabel) -> Result<f64> {
        Ok((self.level(b)?.energy - self.level(a)?.energy).abs())
    }
}

/// Spin matrices on the |m_I, m_J⟩ product basis (dimensionless).
pub(crate) struct SpinOperators {
    pub jx: DMatrix<f64>,
    pub jy_im: DMatrix<f64>, // Jy = i·jy_im (purely imaginary entries)
    pub jz: DMatrix<f64>,
    pub ix: DMatrix<f64>,
    pub iy_im: DMatrix<f64>,
    pub iz: DMatrix<f64>,
}

pub(crate) fn basis_states(constants: &HyperfineConstants) -> Vec<(i32, i32)> {
    let two_i = (2.0 * constants.i_nuc) as i32;
    let mut basis = Vec::new();
    for mj2 in [-1i32, 1] {
        for mi2 in (-two_i..=two_i).step_by(2) {
            basis.push((mi2, mj2));
        }
    }
    basis
}

pub(crate) fn spin_operators(constants: &HyperfineConstants) -> SpinOperators {
    let basis = basis_states(constants);
    let n = basis.len();
    let i_nuc = constants.i_nuc;
    let mut jx = DMatrix::zeros(n, n);
    let mut jy_im = DMatrix::zeros(n, n);
    let mut jz = DMatrix::zeros(n, n);
    let mut ix = DMatrix::zeros(n, n);
    let mut iy_im = DMatrix::zeros(n, n);
    let mut iz = DMatrix::zeros(n, n);
    let idx = |mi2: i32, mj2: i32| basis.iter().position(|&s| s == (mi2, mj2));
    for (col, &(mi2, mj2)) in basis.iter().enumerate() {
        let mi = mi2 as f64 / 2.0;
        let mj = mj2 as f64 / 2.0;
        jz[(col, col)] = mj;
        iz[(col, col)] = mi;
        // J± on J = 1/2: coefficient 1. Jy = (J+ - J-)/(2i), so a raising
        // move contributes -1/2 to the imaginary part and lowering +1/2.
        if let Some(row) = idx(mi2, mj2 + 2) {
            jx[(row, col)] += 0.5;
            jy_im[(row, col)] -= 0.5;
        }
        if let Some(row) = idx(mi2, mj2 - 2) {
            jx[(row, col)] += 0.5;
            jy_im[(row, col)] += 0.5;
        }
        let c_plus = (i_nuc * (i_nuc + 1.0) - mi * (mi + 1.0)).max(0.0).sqrt();
        if let Some(row) = idx(mi2 + 2, mj2) {
            ix[(row, col)] += 0.5 * c_plus;
            iy_im[(row, col)] -= 0.5 * c_plus;
        }
        let c_minus = (i_nuc * (i_nuc + 1.0) - mi * (mi - 1.0)).max(0.0).sqrt();
        if let Some(row) = idx(mi2 - 2, mj2) {
            ix[(row, col)] += 0.5 * c_minus;
            iy_im[(row, col)] += 0.5 * c_minus;
        }
    }
    SpinOperators {
        jx,
        jy_im,
        jz,
        ix,
        iy_im,
        iz,
    }
}

/// Hamiltonian matrix in Hz on the product basis.
fn hamiltonian(constants: &HyperfineConstants, b_field: f64) -> DMatrix<f64> {
    let ops = spin_operators(constants);
    // I·J = IzJz + (I+J- + I-J+)/2 = IzJz + IxJx + IyJy; with the real/imag
    // split, IyJy = -(iy_im)(jy_im) on real matrices... both are real here.
    let izjz = &ops.iz * &ops.jz;
    let ixjx = &ops.ix * &ops.jx;
    let iyjy = -(&ops.iy_im * &ops.jy_im);
    let idotj = izjz + ixjx + iyjy;
    let zeeman = (MU_B * constants.g_j / PLANCK) * b_field * &ops.jz
        - (MU_N * constants.g_i / PLANCK) * b_field * &ops.iz;
    constants.a_hfs * idotj + zeeman
}

/// Diagonalize at a field value, with adiabatic (F, m_F) labels.
pub fn diagonalize_with(constants: &HyperfineConstants, b_field: f64) -> Result<LevelDiagram> {
    if b_field < 0.0 {
        return Err(Error::Config(format!("B0 = {b_field} must be >= 0")));
    }
    let basis = basis_states(constants);
    let h = hamiltonian(constants, b_field);
    let eig = nalgebra::SymmetricEigen::new(h);
    let n = basis.len();

    // m_F is exact (block structure): read it off the eigenvector support.
    let mut entries: Vec<(i32, f64, DVector<f64>)> = Vec::with_capacity(n);
    for k in 0..n {
        let v = eig.eigenvectors.column(k).into_owned();
        let mut m2_weight = 0.0;
        for (i, &(mi2, mj2)) in basis.iter().enumerate() {
            m2_weight += v[i] * v[i] * (mi2 + mj2) as f64;
        }
        let m2 = m2_weight.round() as i32;
        // Fix the overall sign for reproducibility: largest amplitude > 0.
        let imax = v.iter().map(|x| x.abs()).enumerate().fold((0, 0.0), |acc, (i, x)| {
            if x > acc.1 {
                (i, x)
            } else {
                acc
            }
        });
        let v = if v[imax.0] < 0.0 { -v } else { v };
        entries.push((m2, eig.eigenvalues[k], v));
    }

    let (f_low, f_high) = constants.f_low_high();
    let mut levels = Vec::with_capacity(n);
    let two_i = (2.0 * constants.i_nuc) as i32;
    for m2 in (-(two_i + 1)..=two_i + 1).step_by(2) {
        let mut block: Vec<&(i32, f64, DVector<f64>)> =
            entries.iter().filter(|e| e.0 == m2).collect();
        block.sort_by(|a, b| a.1.total_cmp(&b.1));
        match block.len() {
            1 => {
                // Stretched state: belongs to F = I + 1/2.
                let f = constants.i_nuc + 0.5;
                levels.push(Level {
                    label: LevelLabel::new(f as i32, m2 / 2),
                    energy: block[0].1,
                    amplitudes: block[0].2.clone(),
                });
            }
            2 => {
                // Within a block the lower level continues the lower
                // zero-field manifold (no crossings for J = 1/2).
                for (lvl, f) in block.iter().zip([f_low, f_high]) {
                    levels.push(Level {
                        label: LevelLabel::new(f as i32, m2 / 2),
                        energy: lvl.1,
                        amplitudes: lvl.2.clone(),
                    });
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "unexpected block size {} for 2m_F = {m2}",
                    block.len()
                )))
            }
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(LevelDiagram {
        b_field,
        constants: *constants,
        levels,
        basis,
    })
}

/// Diagonalize the default species (²⁵Mg⁺).
pub fn diagonalize(b_field: f64) -> Result<LevelDiagram> {
    diagonalize_with(&HyperfineConstants::mg25(), b_field)
}

/// Magnetic-dipole transition data between two levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpec {
    pub a: LevelLabel,
    pub b: LevelLabel,
    /// |E_b − E_a| (Hz).
    pub frequency: f64,
    pub delta_m: i32,
    /// ⟨b|μ_x, μ_y, μ_z|a⟩ in units of μ_B (quantization axis z).
    pub dipole: [Complex64; 3],
}

impl TransitionSpec {
    /// Magnitude of the dipole element conventionally quoted for this
    /// transition: |μ_z| for Δm = 0, |μ_x| (the coupling to a linear
    /// transverse drive) for Δm = ±1.
    pub fn element(&self) -> f64 {
        if self.delta_m == 0 {
            self.dipole[2].norm()
        } else {
            self.dipole[0].norm()
        }
    }
}

/// Magnetic-moment operator in μ_B units: μ = −gJ·J − (μN/μB)·gI·I.
pub(crate) fn moment_operators(constants: &HyperfineConstants) -> [DMatrix<Complex64>; 3] {
    let ops = spin_operators(constants);
    let gi_scaled = constants.g_i * MU_N / MU_B;
    let to_c = |re: &DMatrix<f64>, im: &DMatrix<f64>| -> DMatrix<Complex64> {
        DMatrix::from_fn(re.nrows(), re.ncols(), |r, c| {
            Complex64::new(re[(r, c)], im[(r, c)])
        })
    };
    let zero = DMatrix::<f64>::zeros(ops.jx.nrows(), ops.jx.ncols());
    let mux = to_c(&(-(constants.g_j) * &ops.jx - gi_scaled * &ops.ix), &zero);
    let muy = to_c(&zero, &(-(constants.g_j) * &ops.jy_im - gi_scaled * &ops.iy_im));
    let muz = to_c(&(-(constants.g_j) * &ops.jz - gi_scaled * &ops.iz), &zero);
    [mux, muy, muz]
}

/// Transition frequency and dipole matrix elements between two labels.
pub fn transition(diagram: &LevelDiagram, a: LevelLabel, b: LevelLabel) -> Result<TransitionSpec> {
    if a == b {
        return Err(Error::Config(format!("identical levels {a}")));
    }
    let la = diagram.level(a)?;
    let lb = diagram.level(b)?;
    let mu = moment_operators(&diagram.constants);
    let va: DVector<Complex64> = la.amplitudes.map(|x| Complex64::new(x, 0.0));
    let vb: DVector<Complex64> = lb.amplitudes.map(|x| Complex64::new(x, 0.0));
    let mut dipole = [Complex64::default(); 3];
    for (q, m) in mu.iter().enumerate() {
        dipole[q] = (vb.adjoint() * m * &va)[(0, 0)];
    }
    Ok(TransitionSpec {
        a,
        b,
        frequency: (lb.energy - la.energy).abs(),
        delta_m: b.m - a.m,
        dipole,
    })
}

/// First and second derivatives of a transition frequency vs B (Hz/T,
/// Hz/T²), by Richardson-extrapolated central differences.
pub fn field_sensitivities(
    constants: &HyperfineConstants,
    a: LevelLabel,
    b: LevelLabel,
    b_field: f64,
) -> Result<(f64, f64)> {
    let f = |bb: f64| -> Result<f64> { diagonalize_with(constants, bb)?.frequency(a, b) };
    // Step well below the field scale but far above eigensolver noise.
    let h = if b_field > 0.0 {
        (0.45 * b_field).min(2e-4)
    } else {
        2e-4
    };
    let d1 = |h: f64| -> Result<f64> { Ok((f(b_field + h)? - f(b_field - h)?) / (2.0 * h)) };
    let d2 = |h: f64| -> Result<f64> {
        Ok((f(b_field + h)? - 2.0 * f(b_field)? + f(b_field - h)?) / (h * h))
    };
    // Richardson: D(h), D(h/2) → (4 D(h/2) − D(h))/3.
    let df = (4.0 * d1(h / 2.0)? - d1(h)?) / 3.0;
    let d2f = (4.0 * d2(h / 2.0)? - d2(h)?) / 3.0;
    Ok((df, d2f))
}

/// Field at which the pair's frequency is first-order insensitive.
pub fn clock_point(constants: &HyperfineConstants, a: LevelLabel, b: LevelLabel) -> Result<f64> {
    let slope = |bb: f64| -> f64 {
        field_sensitivities(constants, a, b, bb)
            .map(|(d1, _)| d1)
            .unwrap_or(f64::NAN)
    };
    // Bracket by scanning a geometric grid over (0.5 mT, 1 T].
    let grid: Vec<f64> = (0..=120)
        .map(|k| 0.5e-3 * (2000.0_f64).powf(k as f64 / 120.0))
        .collect();
    let mut prev_b = grid[0];
    let mut prev_s = slope(prev_b);
    for &bb in &grid {
        let s = slope(bb);
        if prev_s.is_finite() && s.is_finite() && prev_s * s <= 0.0 {
            return crate::numeric::brent_root(slope, prev_b, bb, 1e-9, 200);
        }
        prev_b = bb;
        prev_s = s;
    }
    Err(Error::Config(format!(
        "no clock point for {a} <-> {b} in (0, 1 T]"
    )))
}

/// Oscillating-field parameterization relative to the quantization axis:
/// amplitudes of the parallel (π) and perpendicular (σ) components, with
/// ellipticity ε (0 linear, ±π/4 circular), ellipse rotation β and phase γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatingField {
    /// Component along B₀ (T).
    pub b_par: f64,
    /// Component perpendicular to B₀ (T).
    pub b_perp: f64,
    /// Ellipticity of the perpendicular component (rad), in [−π/4, π/4].
    pub epsilon: f64,
    /// Rotation of the polarization ellipse (rad).
    pub beta: f64,
    /// Overall phase (rad).
    pub gamma: f64,
    /// Drive frequency (Hz).
    pub freq: f64,
}

impl OscillatingField {
    pub fn validate(&self) -> Result<()> {
        if self.b_par < 0.0 || self.b_perp < 0.0 {
            return Err(Error::Config("field amplitudes must be >= 0".into()));
        }
        if self.epsilon.abs() > std::f64::consts::FRAC_PI_4 + 1e-12 {
            return Err(Error::Config(format!(
                "ellipticity {} outside [-pi/4, pi/4]",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Complex amplitude vector `b` such that B(t) = Re[b e^{2πi f t}], in
    /// the frame with ẑ along B₀.
    pub fn phasor(&self) -> nalgebra::Vector3<Complex64> {
        let e_ig = Complex64::from_polar(1.0, self.gamma);
        let vx = self.b_perp * self.epsilon.cos() * e_ig;
        let vy = Complex64::i() * self.b_perp * self.epsilon.sin() * e_ig;
        let (sb, cb) = self.beta.sin_cos();
        nalgebra::Vector3::new(
            cb * vx - sb * vy,
            sb * vx + cb * vy,
            Complex64::new(self.b_par, 0.0),
        )
    }
}

/// Rabi rate (rad/s) of a transition driven by the field, using the
/// convention Ω = |⟨b|μ·b̂|a⟩|·B/(2ħ): the spin rotates by 2Ω·t, so a π flip
/// takes t_π = π/(2Ω). Returns the rate and a `forbidden` flag.
pub fn rabi_rate(field: &OscillatingField, spec: &TransitionSpec) -> Result<(f64, bool)> {
    field.validate()?;
    let b = field.phasor();
    let mut coupling = Complex64::default();
    for q in 0..3 {
        coupling += spec.dipole[q] * b[q];
    }
    let omega = coupling.norm() * MU_B / (2.0 * HBAR);
    let forbidden = spec.dipole.iter().map(|d| d.norm()).sum::<f64>() < 1e-12;
    Ok((omega, forbidden))
}

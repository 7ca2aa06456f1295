//! Two-qubit Mølmer-Sørensen gate under motional heating: Lindblad master
//! equation for two spins sharing one motional mode, driven by symmetric
//! red/blue sideband tones.
//!
//! In the interaction picture the bichromatic drive reduces to
//!
//! ```text
//! H(t)/ħ = Ω_sb · (a e^{-iθ(t)} + a† e^{+iθ(t)}) · Sx,
//! θ(t) = 2π ∫ δ(t') dt',   Sx = (σx⁽¹⁾ + σx⁽²⁾)/2
//! ```
//!
//! and heating enters through Lindblad terms on a and a† with equal rates
//! ṅ/1 each normalized so that d⟨n⟩/dt = ṅ at zero drive (the
//! infinite-temperature-bath limit). A closed loop (δ·τ = K) with
//! Ω_sb = 2πδ/(2√K) applies the maximally entangling phase π/2.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;

/// Mølmer-Sørensen drive and environment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Sideband Rabi rate per ion (rad/s).
    pub omega_sb: f64,
    /// Symmetric detuning from the red/blue sidebands (Hz).
    pub detuning: f64,
    /// Gate duration (s).
    pub duration: f64,
    /// Motional mode frequency (Hz); bookkeeping only in this picture.
    pub f_mode: f64,
    /// Heating rate (quanta/s).
    pub heating_rate: f64,
    /// Initial thermal occupation.
    pub n_bar0: f64,
    /// Fock truncation: highest retained |n⟩.
    pub n_max: usize,
    /// Linear detuning drift over the gate (Hz): δ ramps from δ to
    /// δ + drift.
    pub drift: f64,
}

impl GateConfig {
    /// Closed-loop configuration: K loops at detuning δ with the drive set
    /// for a maximally entangling π/2 phase.
    pub fn ideal(detuning: f64, loops: u32, n_max: usize) -> Self {
        let delta_omega = 2.0 * std::f64::consts::PI * detuning;
        Self {
            omega_sb: delta_omega / (2.0 * (loops as f64).sqrt()),
            detuning,
            duration: loops as f64 / detuning,
            f_mode: 7.0e6,
            heating_rate: 0.0,
            n_bar0: 0.0,
            n_max,
            drift: 0.0,
        }
    }

    /// Reference operating point: 4.5 kHz detuning, one loop (≈222 µs),
    /// mid-range out-of-phase heating.
    pub fn reference() -> Self {
        Self {
            heating_rate: 350.0,
            ..Self::ideal(4.5e3, 1, 15)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.duration <= 0.0 {
            return Err(Error::Config("gate duration must be > 0".into()));
        }
        if self.heating_rate < 0.0 {
            return Err(Error::Config("heating rate must be >= 0".into()));
        }
        if self.n_bar0 < 0.0 {
            return Err(Error::Config("initial occupation must be >= 0".into()));
        }
        if self.n_max < 3 {
            return Err(Error::Config("n_max must be at least 3".into()));
        }
        Ok(())
    }
}

/// Result of a gate propagation.
#[derive(Debug, Clone)]
pub struct GateResult {
    /// Reduced two-spin density matrix, basis (↓↓, ↓↑, ↑↓, ↑↑).
    pub rho_spin: nalgebra::Matrix4<Complex64>,
    /// Bell fidelity, maximized over the relative phase of the target.
    pub fidelity: f64,
    /// Motional occupation ⟨n⟩ at sample times.
    pub occupation: Vec<(f64, f64)>,
    /// |Tr ρ − 1| at the end of the integration.
    pub trace_error: f64,
    /// Lowest eigenvalue of the final density matrix.
    pub min_eigenvalue: f64,
    pub steps: usize,
}

/// Sparse operator as (row, col, value) triplets.
struct Sparse {
    triplets: Vec<(usize, usize, f64)>,
}

impl Sparse {
    fn from_dense(m: &CMat) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].norm() > 0.0 {
                    triplets.push((i, j, m[(i, j)].re));
                }
            }
        }
        Self { triplets }
    }

    /// out += scale · S · ρ
    fn acc_left(&self, scale: Complex64, rho: &CMat, out: &mut CMat) {
        let d = rho.ncols();
        for &(i, k, v) in &self.triplets {
            let sv = scale * v;
            for j in 0..d {
                out[(i, j)] += sv * rho[(k, j)];
            }
        }
    }

    /// out += scale · ρ · S
    fn acc_right(&self, scale: Complex64, rho: &CMat, out: &mut CMat) {
        let d = rho.nrows();
        for &(k, j, v) in &self.triplets {
            let sv = scale * v;
            for i in 0..d {
                out[(i, j)] += sv * rho[(i, k)];
            }
        }
    }

    /// out += scale · S · ρ · S†  (S real-valued)
    fn acc_sandwich(&self, scale: Complex64, rho: &CMat, out: &mut CMat) {
        for &(i, k, v) in &self.triplets {
            for &(j, l, w) in &self.triplets {
                out[(i, j)] += scale * v * w * rho[(k, l)];
            }
        }
    }
}

struct Operators {
    dim: usize,
    n_levels: usize,
    /// a·Sx (the e^{-iθ} coefficient of H/(ħΩ)).
    m_lower: Sparse,
    m_raise: Sparse,
    /// a (spin-identity ⊗ annihilation).
    a: Sparse,
    a_dag: Sparse,
    /// Diagonal of a†a.
    number_diag: Vec<f64>,
    /// Diagonal of a†a + a·a† under the truncation.
    anti_diag: Vec<f64>,
}

fn build_operators(n_max: usize) -> Operators {
    let n_levels = n_max + 1;
    let dim = 4 * n_levels;
    let mut a = CMat::zeros(dim, dim);
    for s in 0..4 {
        for n in 1..n_levels {
            let row = s * n_levels + (n - 1);
            let col = s * n_levels + n;
            a[(row, col)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    // Sx = (σx⊗1 + 1⊗σx)/2 on the spin index s ∈ {↓↓, ↓↑, ↑↓, ↑↑}:
    // couples states differing in exactly one spin with coefficient 1/2.
    let mut sx = CMat::zeros(dim, dim);
    let pairs: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];
    for (s1, s2) in pairs {
        for n in 0..n_levels {
            let i = s1 * n_levels + n;
            let j = s2 * n_levels + n;
            sx[(i, j)] = Complex64::new(0.5, 0.0);
            sx[(j, i)] = Complex64::new(0.5, 0.0);
        }
    }
    let m_lower = &a * &sx;
    let a_dag = a.adjoint();
    let number_diag = (0..dim).map(|i| (i % n_levels) as f64).collect();
    // Diagonal of a†a + a·a† with the TRUNCATED operators: the top Fock
    // level loses its a·a† = n+1 contribution, and the dissipator must use
    // the same truncation to stay exactly trace preserving.
    let anti_diag = (0..dim)
        .map(|i| {
            let n = i % n_levels;
            let up = if n == n_levels - 1 { 0.0 } else { (n + 1) as f64 };
            n as f64 + up
        })
        .collect();
    let m_raise = m_lower.adjoint();
    Operators {
        dim,
        n_levels,
        m_lower: Sparse::from_dense(&m_lower),
        m_raise: Sparse::from_dense(&m_raise),
        a: Sparse::from_dense(&a),
        a_dag: Sparse::from_dense(&a_dag),
        number_diag,
        anti_diag,
    }
}

/// dρ/dt for the interaction-picture master equation.
fn rhs(config: &GateConfig, ops: &Operators, t: f64, rho: &CMat, out: &mut CMat) {
    // θ(t) with a linear detuning ramp δ(t) = δ + drift·t/τ.
    let theta = 2.0 * std::f64::consts::PI
        * (config.detuning * t + 0.5 * config.drift * t * t / config.duration);
    let phase = Complex64::from_polar(1.0, -theta) * config.omega_sb;
    // -i[H, ρ] with H/ħ = phase·M + conj(phase)·M†, applied sparsely.
    out.fill(Complex64::default());
    let minus_i = Complex64::new(0.0, -1.0);
    ops.m_lower.acc_left(minus_i * phase, rho, out);
    ops.m_raise.acc_left(minus_i * phase.conj(), rho, out);
    ops.m_lower.acc_right(-minus_i * phase, rho, out);
    ops.m_raise.acc_right(-minus_i * phase.conj(), rho, out);

    let ndot = config.heating_rate;
    if ndot > 0.0 {
        // D[a] + D[a†], both at rate γ = ṅ: d⟨n⟩/dt = γ(⟨n⟩+1) − γ⟨n⟩ = ṅ
        // at zero drive (infinite-temperature-bath normalization).
        let gamma = Complex64::new(ndot, 0.0);
        ops.a.acc_sandwich(gamma, rho, out);
        ops.a_dag.acc_sandwich(gamma, rho, out);
        // -γ/2 {a†a + aa†, ρ}; both operators truncated consistently.
        for i in 0..ops.dim {
            for j in 0..ops.dim {
                let anti = 0.5 * (ops.anti_diag[i] + ops.anti_diag[j]);
                out[(i, j)] -= ndot * anti * rho[(i, j)];
            }
        }
    }
}

/// Thermal initial state |↓↓⟩⟨↓↓| ⊗ ρ_thermal(n̄₀).
fn initial_state(config: &GateConfig, ops: &Operators) -> CMat {
    let mut rho = CMat::zeros(ops.dim, ops.dim);
    let r = if config.n_bar0 > 0.0 {
        config.n_bar0 / (1.0 + config.n_bar0)
    } else {
        0.0
    };
    let mut norm = 0.0;
    let mut weights = Vec::with_capacity(ops.n_levels);
    for n in 0..ops.n_levels {
        let w = r.powi(n as i32);
        weights.push(w);
        norm += w;
    }
    for (n, w) in weights.iter().enumerate() {
        rho[(n, n)] = Complex64::new(w / norm, 0.0); // spin block 0 = |↓↓⟩
    }
    rho
}

/// Bell fidelity of a two-spin density matrix against (|↓↓⟩ + e^{iφ}|↑↑⟩)/√2,
/// maximized over φ (equivalently over local Z rotations).
pub fn bell_fidelity(rho_spin: &nalgebra::Matrix4<Complex64>) -> f64 {
    0.5 * (rho_spin[(0, 0)].re + rho_spin[(3, 3)].re) + rho_spin[(0, 3)].norm()
}

const SAMPLES: usize = 160;

/// Propagate the master equation over the gate and report the spin state,
/// Bell fidelity and occupation trajectory.
pub fn ms_propagate(config: &GateConfig) -> Result<GateResult> {
    config.validate()?;
    let ops = build_operators(config.n_max);
    let mut rho = initial_state(config, &ops);
    let mut t = 0.0;
    let mut dt = config.duration / 2000.0;
    let mut occupation = Vec::with_capacity(SAMPLES + 1);
    let mut steps = 0usize;

    let occupancy = |rho: &CMat| -> f64 {
        (0..ops.dim).map(|i| rho[(i, i)].re * ops.number_diag[i]).sum()
    };
    let top_population = |rho: &CMat| -> f64 {
        let mut p = 0.0;
        for s in 0..4 {
            for n in [ops.n_levels - 1, ops.n_levels - 2] {
                p += rho[(s * ops.n_levels + n, s * ops.n_levels + n)].re;
            }
        }
        p
    };

    occupation.push((0.0, occupancy(&rho)));
    let mut k1 = CMat::zeros(ops.dim, ops.dim);
    let mut scratch = CMat::zeros(ops.dim, ops.dim);

    for sample in 1..=SAMPLES {
        let t_target = config.duration * sample as f64 / SAMPLES as f64;
        while t < t_target - 1e-18 * config.duration {
            let step = dt.min(t_target - t);
            // Embedded RK45 (Cash-Karp) with per-entry error control.
            let (next, err_norm) = rk45_step(config, &ops, t, &rho, step, &mut k1, &mut scratch);
            let tol = 1e-11;
            if err_norm <= tol || step < 1e-9 * config.duration {
                rho = next;
                t += step;
                steps += 1;
                let grow = 0.9 * (tol / err_norm.max(1e-300)).powf(0.2);
                dt = (step * grow.clamp(0.2, 5.0)).min(config.duration / 50.0);
            } else {
                let shrink = 0.9 * (tol / err_norm).powf(0.25);
                dt = step * shrink.clamp(0.1, 0.9);
            }
        }
        occupation.push((t, occupancy(&rho)));
        let top = top_population(&rho);
        if top > 1e-4 {
            return Err(Error::Truncation {
                n_max: config.n_max,
                population: top,
            });
        }
    }

    // Reduced spin state by tracing out the motion.
    let mut rho_spin = nalgebra::Matrix4::<Complex64>::zeros();
    for s1 in 0..4 {
        for s2 in 0..4 {
            let mut acc = Complex64::default();
            for n in 0..ops.n_levels {
                acc += rho[(s1 * ops.n_levels + n, s2 * ops.n_levels + n)];
            }
            rho_spin[(s1, s2)] = acc;
        }
    }
    let trace_error = (rho_spin.trace().re - 1.0).abs();
    let eig = rho.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if trace_error > 1e-8 {
        return Err(Error::NonConvergence {
            context: "trace drift in master-equation integration".into(),
            iterations: steps,
            residual: trace_error,
        });
    }
    Ok(GateResult {
        rho_spin,
        fidelity: bell_fidelity(&rho_spin),
        occupation,
        trace_error,
        min_eigenvalue,
        steps,
    })
}

/// One Cash-Karp RK45 step; returns the 5th-order solution and an error
/// norm relative to the embedded 4th-order one.
#[allow(clippy::too_many_arguments)]
fn rk45_step(
    config: &GateConfig,
    ops: &Operators,
    t: f64,
    rho: &CMat,
    h: f64,
    k1: &mut CMat,
    scratch: &mut CMat,
) -> (CMat, f64) {
    const A2: f64 = 0.2;
    const A3: f64 = 0.3;
    const A4: f64 = 0.6;
    const A5: f64 = 1.0;
    const A6: f64 = 0.875;
    const B21: f64 = 0.2;
    const B31: f64 = 3.0 / 40.0;
    const B32: f64 = 9.0 / 40.0;
    const B41: f64 = 0.3;
    const B42: f64 = -0.9;
    const B43: f64 = 1.2;
    const B51: f64 = -11.0 / 54.0;
    const B52: f64 = 2.5;
    const B53: f64 = -70.0 / 27.0;
    const B54: f64 = 35.0 / 27.0;
    const B61: f64 = 1631.0 / 55296.0;
    const B62: f64 = 175.0 / 512.0;
    const B63: f64 = 575.0 / 13824.0;
    const B64: f64 = 44275.0 / 110592.0;
    const B65: f64 = 253.0 / 4096.0;
    const C1: f64 = 37.0 / 378.0;
    const C3: f64 = 250.0 / 621.0;
    const C4: f64 = 125.0 / 594.0;
    const C6: f64 = 512.0 / 1771.0;
    const D1: f64 = 2825.0 / 27648.0;
    const D3: f64 = 18575.0 / 48384.0;
    const D4: f64 = 13525.0 / 55296.0;
    const D5: f64 = 277.0 / 14336.0;
    const D6: f64 = 0.25;

    rhs(config, ops, t, rho, k1);
    *scratch = rho + &*k1 * Complex64::new(h * B21, 0.0);
    let mut k2 = CMat::zeros(ops.dim, ops.dim);
    rhs(config, ops, t + A2 * h, scratch, &mut k2);
    *scratch = rho + &*k1 * Complex64::new(h * B31, 0.0) + &k2 * Complex64::new(h * B32, 0.0);
    let mut k3 = CMat::zeros(ops.dim, ops.dim);
    rhs(config, ops, t + A3 * h, scratch, &mut k3);
    *scratch = rho
        + &*k1 * Complex64::new(h * B41, 0.0)
        + &k2 * Complex64::new(h * B42, 0.0)
        + &k3 * Complex64::new(h * B43, 0.0);
    let mut k4 = CMat::zeros(ops.dim, ops.dim);
    rhs(config, ops, t + A4 * h, scratch, &mut k4);
    *scratch = rho
        + &*k1 * Complex64::new(h * B51, 0.0)
        + &k2 * Complex64::new(h * B52, 0.0)
        + &k3 * Complex64::new(h * B53, 0.0)
        + &k4 * Complex64::new(h * B54, 0.0);
    let mut k5 = CMat::zeros(ops.dim, ops.dim);
    rhs(config, ops, t + A5 * h, scratch, &mut k5);
    *scratch = rho
        + &*k1 * Complex64::new(h * B61, 0.0)
        + &k2 * Complex64::new(h * B62, 0.0)
        + &k3 * Complex64::new(h * B63, 0.0)
        + &k4 * Complex64::new(h * B64, 0.0)
        + &k5 * Complex64::new(h * B65, 0.0);
    let mut k6 = CMat::zeros(ops.dim, ops.dim);
    rhs(config, ops, t + A6 * h, scratch, &mut k6);

    let next = rho
        + &*k1 * Complex64::new(h * C1, 0.0)
        + &k3 * Complex64::new(h * C3, 0.0)
        + &k4 * Complex64::new(h * C4, 0.0)
        + &k6 * Complex64::new(h * C6, 0.0);
    let lower = rho
        + &*k1 * Complex64::new(h * D1, 0.0)
        + &k3 * Complex64::new(h * D3, 0.0)
        + &k4 * Complex64::new(h * D4, 0.0)
        + &k5 * Complex64::new(h * D5, 0.0)
        + &k6 * Complex64::new(h * D6, 0.0);
    let mut err: f64 = 0.0;
    for i in 0..ops.dim {
        for j in 0..ops.dim {
            err = err.max((next[(i, j)] - lower[(i, j)]).norm());
        }
    }
    (next, err)
}

/// Fidelity loss from a linear detuning drift: F(drift = 0) − F(drift).
pub fn drift_error(config: &GateConfig) -> Result<f64> {
    let mut no_drift = *config;
    no_drift.drift = 0.0;
    let base = ms_propagate(&no_drift)?;
    let with = ms_propagate(config)?;
    Ok(base.fidelity - with.fidelity)
}

/// Fidelity versus heating rate (quanta/s).
pub fn heating_scan(config: &GateConfig, rates: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut table = Vec::with_capacity(rates.len());
    for &ndot in rates {
        let mut c = *config;
        c.heating_rate = ndot;
        table.push((ndot, ms_propagate(&c)?.fidelity));
    }
    Ok(table)
}

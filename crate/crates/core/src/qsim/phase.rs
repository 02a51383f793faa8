use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{QfitError, Result};
use crate::linalg::{c64, eig_hermitian, pseudo_reciprocal, CVector, EigDecomposition, EmbeddedOperator, SINGULARITY_TOL};

use super::state::{QuantumState, RegisterLayout};

pub const DEFAULT_CLOCK_SIZE: usize = 1024;

/// Branch probabilities below this are treated as empty.
const EMPTY_BRANCH_TOL: f64 = 1e-24;

/// Relative slack when checking configuration bounds.
const BOUND_SLACK: f64 = 1e-12;

/// Initial clock amplitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ClockWindow {
    /// `√(2/T)·sin(π(τ+½)/T)`: suppresses leakage for generic eigenvalues.
    #[default]
    Sine,
    /// `1/√T`: exact single-bin readout when `E·t₀/2π` is an integer.
    Rectangular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PhaseMode {
    /// Flag weight `C·Ẽ`.
    Multiply,
    /// Flag weight `C/Ẽ`, zero on the `k = 0` bin.
    Invert,
}

impl PhaseMode {
    /// The function a perfect readout would apply to eigenvalue `e`.
    pub fn ideal(self, e: f64, c: f64) -> f64 {
        match self {
            PhaseMode::Multiply => c * e,
            PhaseMode::Invert => c * pseudo_reciprocal(e),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhaseMode::Multiply => "multiply",
            PhaseMode::Invert => "invert",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QftDirection {
    /// Kernel `e^{2πikτ/T}/√T`.
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseEstimationConfig {
    pub clock_size: usize,
    pub evolution_time: f64,
    pub rotation_constant: f64,
    pub mode: PhaseMode,
    #[serde(default)]
    pub window: ClockWindow,
}

impl PhaseEstimationConfig {
    pub fn new(clock_size: usize, evolution_time: f64, rotation_constant: f64, mode: PhaseMode) -> Self {
        Self { clock_size, evolution_time, rotation_constant, mode, window: ClockWindow::Sine }
    }

    pub fn with_window(mut self, window: ClockWindow) -> Self {
        self.window = window;
        self
    }

    /// Automatic evolution time and default rotation constant for `op`.
    pub fn for_operator(op: &SpectralOperator, mode: PhaseMode, clock_size: usize, epsilon: f64) -> Result<Self> {
        let sigma_max = op.spectral_radius();
        let sigma_min = op.smallest_nonzero_magnitude().ok_or(QfitError::ZeroVector)?;
        let t0 = auto_evolution_time(sigma_max, sigma_max / sigma_min, epsilon, clock_size)?;
        Ok(Self::new(clock_size, t0, default_rotation_constant(mode, sigma_max, sigma_min), mode))
    }

    pub fn validate(&self, op: &SpectralOperator) -> Result<()> {
        if self.clock_size < 2 || !self.clock_size.is_power_of_two() {
            return Err(QfitError::InvalidConfig(format!("clock size {} is not a power of two >= 2", self.clock_size)));
        }
        if !(self.evolution_time >= 0.0 && self.evolution_time.is_finite()) {
            return Err(QfitError::InvalidConfig(format!("evolution time {}", self.evolution_time)));
        }
        if !(self.rotation_constant > 0.0 && self.rotation_constant.is_finite()) {
            return Err(QfitError::InvalidConfig(format!("rotation constant {}", self.rotation_constant)));
        }
        let sigma_max = op.spectral_radius();
        let cycles = sigma_max * self.evolution_time / TAU;
        let half = self.clock_size / 2;
        if cycles >= half as f64 {
            return Err(QfitError::Aliasing { cycles, half });
        }
        let c = self.rotation_constant;
        match self.mode {
            PhaseMode::Multiply if sigma_max > 0.0 => {
                let bound = 1.0 / sigma_max;
                if c > bound * (1.0 + BOUND_SLACK) {
                    return Err(QfitError::RotationBound { c, bound, mode: "multiply" });
                }
            }
            PhaseMode::Invert => {
                if let Some(bound) = op.smallest_nonzero_magnitude() {
                    if c > bound * (1.0 + BOUND_SLACK) {
                        return Err(QfitError::RotationBound { c, bound, mode: "invert" });
                    }
                }
            }
            PhaseMode::Multiply => {}
        }
        Ok(())
    }
}

/// `t₀ = 2π·m/σ_max` with `m = round(κ/ε)` limited to `1..T/2`, so that
/// `σ_max` sits exactly on a bin and decoding never aliases.
pub fn auto_evolution_time(sigma_max: f64, kappa: f64, epsilon: f64, clock_size: usize) -> Result<f64> {
    if !(sigma_max > 0.0 && sigma_max.is_finite()) {
        return Err(QfitError::InvalidConfig(format!("largest eigenvalue magnitude {sigma_max}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) || !(kappa >= 1.0 - BOUND_SLACK) {
        return Err(QfitError::InvalidConfig(format!("kappa {kappa}, epsilon {epsilon}")));
    }
    if clock_size < 4 || !clock_size.is_power_of_two() {
        return Err(QfitError::InvalidConfig(format!("automatic evolution time needs a clock size >= 4, got {clock_size}")));
    }
    let max_cycles = (clock_size / 2 - 1) as f64;
    let m = (kappa / epsilon).round().clamp(1.0, max_cycles);
    Ok(TAU * m / sigma_max)
}

/// Multiply: `1/σ_max`; Invert: `σ_min`.
pub fn default_rotation_constant(mode: PhaseMode, sigma_max: f64, sigma_min: f64) -> f64 {
    match mode {
        PhaseMode::Multiply => 1.0 / sigma_max,
        PhaseMode::Invert => sigma_min,
    }
}

/// Hermitian operator held through its spectral decomposition.
///
/// A diagonal operator acts in its own eigenframe and skips the basis
/// change entirely.
#[derive(Clone, Debug)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DMatrix<Complex64>>,
}

impl SpectralOperator {
    pub fn from_embedded(h: &EmbeddedOperator) -> Result<Self> {
        Ok(Self::from_decomposition(eig_hermitian(h)?))
    }

    pub fn from_decomposition(eig: EigDecomposition) -> Self {
        Self { eigenvalues: eig.eigenvalues, eigenvectors: Some(eig.eigenvectors) }
    }

    pub fn diagonal(eigenvalues: Vec<f64>) -> Self {
        Self { eigenvalues, eigenvectors: None }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |acc, e| acc.max(e.abs()))
    }

    pub fn smallest_nonzero_magnitude(&self) -> Option<f64> {
        self.eigenvalues.iter().map(|e| e.abs()).filter(|&a| a > SINGULARITY_TOL).min_by(|a, b| a.total_cmp(b))
    }

    /// The same spectrum acting on eigenframe coordinates.
    pub fn eigenframe(&self) -> Self {
        Self::diagonal(self.eigenvalues.clone())
    }

    /// `β = V†v`.
    pub fn to_eigenframe(&self, v: &CVector) -> CVector {
        match &self.eigenvectors {
            Some(vecs) => vecs.adjoint() * v,
            None => v.clone(),
        }
    }

    /// `v = Vβ`.
    pub fn from_eigenframe(&self, beta: &CVector) -> CVector {
        match &self.eigenvectors {
            Some(vecs) => vecs * beta,
            None => beta.clone(),
        }
    }

    /// `f(H)v`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64, v: &CVector) -> CVector {
        let mut beta = self.to_eigenframe(v);
        for (b, &e) in beta.iter_mut().zip(&self.eigenvalues) {
            *b *= f(e);
        }
        self.from_eigenframe(&beta)
    }

    fn evolve_in_place(&self, x: &mut CVector, time: f64) {
        let mut beta = self.to_eigenframe(x);
        for (b, &e) in beta.iter_mut().zip(&self.eigenvalues) {
            *b *= Complex64::from_polar(1.0, -e * time);
        }
        *x = self.from_eigenframe(&beta);
    }
}

/// Clock amplitudes for a window over `T` slots.
pub fn clock_window(window: ClockWindow, clock_size: usize) -> Result<Vec<Complex64>> {
    if clock_size < 2 || !clock_size.is_power_of_two() {
        return Err(QfitError::InvalidConfig(format!("clock size {clock_size} is not a power of two >= 2")));
    }
    let t = clock_size as f64;
    Ok(match window {
        ClockWindow::Sine => {
            (0..clock_size).map(|tau| c64((2.0 / t).sqrt() * (PI * (tau as f64 + 0.5) / t).sin(), 0.0)).collect()
        }
        ClockWindow::Rectangular => vec![c64(1.0 / t.sqrt(), 0.0); clock_size],
    })
}

/// `√(2/T)·sin(π(τ+½)/T)` for `τ = 0..T`.
pub fn prepare_sine_clock(clock_size: usize) -> Result<Vec<Complex64>> {
    clock_window(ClockWindow::Sine, clock_size)
}

fn require_clock(state: &QuantumState, clock_size: usize) -> Result<RegisterLayout> {
    let layout = state.layout();
    if layout.clock_size != clock_size {
        return Err(QfitError::InvalidConfig(format!(
            "state clock size {} does not match configured {clock_size}",
            layout.clock_size
        )));
    }
    Ok(layout)
}

/// Applies `f` to every clock column (fixed system index and flags).
fn map_clock_columns(state: &QuantumState, mut f: impl FnMut(&mut [Complex64])) -> QuantumState {
    let (layout, mut amps) = state.clone().into_parts();
    let stride = layout.system_dim << layout.flag_count;
    let mut column = vec![c64(0.0, 0.0); layout.clock_size];
    for offset in 0..stride {
        for (tau, c) in column.iter_mut().enumerate() {
            *c = amps[tau * stride + offset];
        }
        f(&mut column);
        for (tau, c) in column.iter().enumerate() {
            amps[tau * stride + offset] = *c;
        }
    }
    QuantumState::from_amplitudes(layout, amps).expect("layout unchanged")
}

/// Maps the clock from `|0⟩` to the window state.
///
/// Uses the Householder reflection sending `|0⟩` to the window, which is
/// its own inverse, so the same call undoes the preparation.
pub fn prepare_clock(state: &QuantumState, window: ClockWindow) -> Result<QuantumState> {
    let t = state.layout().clock_size;
    let w = clock_window(window, t)?;
    let mut u: Vec<Complex64> = w.iter().map(|&a| -a).collect();
    u[0] += 1.0;
    let uu: f64 = u.iter().map(|a| a.norm_sqr()).sum();
    if uu < 1e-30 {
        return Ok(state.clone());
    }
    Ok(map_clock_columns(state, |col| {
        let proj: Complex64 = u.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * (2.0 / uu);
        for (c, a) in col.iter_mut().zip(&u) {
            *c -= a * proj;
        }
    }))
}

fn evolve(state: &QuantumState, op: &SpectralOperator, config: &PhaseEstimationConfig, sign: f64) -> Result<QuantumState> {
    let layout = require_clock(state, config.clock_size)?;
    if op.dim() != layout.system_dim {
        return Err(QfitError::Dimension(format!(
            "operator of dim {} on system register of dim {}",
            op.dim(),
            layout.system_dim
        )));
    }
    if config.evolution_time == 0.0 {
        return Ok(state.clone());
    }
    let (layout, mut amps) = state.clone().into_parts();
    let d = layout.system_dim;
    let flags = layout.flag_states();
    let step = sign * config.evolution_time / layout.clock_size as f64;
    let mut x = CVector::zeros(d);
    for tau in 1..layout.clock_size {
        for flag in 0..flags {
            for p in 0..d {
                x[p] = amps[layout.index(tau, p, flag)];
            }
            op.evolve_in_place(&mut x, step * tau as f64);
            for p in 0..d {
                amps[layout.index(tau, p, flag)] = x[p];
            }
        }
    }
    QuantumState::from_amplitudes(layout, amps)
}

/// Clock branch `τ` carries `exp(−iHτt₀/T)` on the system register.
pub fn conditional_evolution(state: &QuantumState, op: &SpectralOperator, config: &PhaseEstimationConfig) -> Result<QuantumState> {
    evolve(state, op, config, 1.0)
}

pub fn inverse_conditional_evolution(
    state: &QuantumState,
    op: &SpectralOperator,
    config: &PhaseEstimationConfig,
) -> Result<QuantumState> {
    evolve(state, op, config, -1.0)
}

/// Unitary DFT on the clock register.
pub fn qft_clock(state: &QuantumState, direction: QftDirection) -> QuantumState {
    let t = state.layout().clock_size;
    if t == 1 {
        return state.clone();
    }
    let fft_direction = match direction {
        QftDirection::Forward => FftDirection::Inverse,
        QftDirection::Inverse => FftDirection::Forward,
    };
    let fft = FftPlanner::new().plan_fft(t, fft_direction);
    let scale = 1.0 / (t as f64).sqrt();
    map_clock_columns(state, |col| {
        fft.process(col);
        for c in col.iter_mut() {
            *c *= scale;
        }
    })
}

/// `Ẽ = 2πk̃/t₀` with `k̃ = k` below `T/2` and `k − T` from `T/2` on.
pub fn decode_eigenvalue(k: usize, clock_size: usize, evolution_time: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let signed = if k < clock_size / 2 { k as f64 } else { k as f64 - clock_size as f64 };
    TAU * signed / evolution_time
}

/// Flag-`|1⟩` amplitude written for clock value `k`, clipped to `[-1, 1]`.
///
/// The `T/2` bin has no signed partner and gets weight 0, which keeps the
/// effective function exactly odd in the eigenvalue.
pub fn rotation_weight(k: usize, config: &PhaseEstimationConfig) -> f64 {
    let t = config.clock_size;
    if k == 0 || k == t / 2 || config.evolution_time == 0.0 {
        return 0.0;
    }
    let e = decode_eigenvalue(k, t, config.evolution_time);
    let c = config.rotation_constant;
    let w = match config.mode {
        PhaseMode::Multiply => c * e,
        PhaseMode::Invert => c / e,
    };
    w.clamp(-1.0, 1.0)
}

/// Rotates flag 0 from `|0⟩` to `√(1−w_k²)|0⟩ + w_k|1⟩` on clock value `k`.
pub fn controlled_rotation(state: &QuantumState, config: &PhaseEstimationConfig) -> Result<QuantumState> {
    let layout = require_clock(state, config.clock_size)?;
    if layout.flag_count == 0 {
        return Err(QfitError::InvalidConfig("controlled rotation needs a flag qubit".into()));
    }
    let (layout, mut amps) = state.clone().into_parts();
    let block = layout.system_dim << layout.flag_count;
    for k in 0..layout.clock_size {
        let w = rotation_weight(k, config);
        let c = (1.0 - w * w).sqrt();
        for pair in amps[k * block..(k + 1) * block].chunks_exact_mut(2) {
            let (a0, a1) = (pair[0], pair[1]);
            pair[0] = a0 * c - a1 * w;
            pair[1] = a0 * w + a1 * c;
        }
    }
    QuantumState::from_amplitudes(layout, amps)
}

/// Inverse QFT, inverse evolution, and the adjoint of clock preparation.
pub fn uncompute_clock(state: &QuantumState, op: &SpectralOperator, config: &PhaseEstimationConfig) -> Result<QuantumState> {
    require_clock(state, config.clock_size)?;
    let s = qft_clock(state, QftDirection::Inverse);
    let s = inverse_conditional_evolution(&s, op, config)?;
    prepare_clock(&s, config.window)
}

/// Projects flag 0 onto `value`, drops it, and renormalizes.
pub fn postselect_flag(state: &QuantumState, value: bool) -> Result<(QuantumState, f64)> {
    let layout = state.layout();
    if layout.flag_count == 0 {
        return Err(QfitError::InvalidConfig("no flag qubit to postselect".into()));
    }
    let bit = usize::from(value);
    let kept: Vec<Complex64> = state.amplitudes().iter().skip(bit).step_by(2).copied().collect();
    let reduced = RegisterLayout::new(layout.clock_size, layout.system_dim, layout.flag_count - 1)?;
    renormalized(reduced, kept)
}

/// Projects the clock onto `|0⟩`, drops it, and renormalizes.
pub fn project_clock_zero(state: &QuantumState) -> Result<(QuantumState, f64)> {
    let layout = state.layout();
    let block = layout.system_dim << layout.flag_count;
    let kept = state.amplitudes()[..block].to_vec();
    renormalized(RegisterLayout::new(1, layout.system_dim, layout.flag_count)?, kept)
}

fn renormalized(layout: RegisterLayout, mut amps: Vec<Complex64>) -> Result<(QuantumState, f64)> {
    let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if probability <= EMPTY_BRANCH_TOL {
        return Err(QfitError::EmptyPostselection);
    }
    let scale = 1.0 / probability.sqrt();
    for a in amps.iter_mut() {
        *a *= scale;
    }
    Ok((QuantumState::from_amplitudes(layout, amps)?, probability))
}

#[derive(Clone, Debug)]
pub struct PeOutcome {
    /// Normalized system state after the pass.
    pub state: CVector,
    /// Probability of reading the flag as 1.
    pub success_probability: f64,
    /// Probability that the clock returned to `|0⟩` given flag 1.
    pub clock_zero_probability: f64,
    /// `1 − clock_zero_probability`: clock–system entanglement left over.
    pub clock_residual: f64,
}

/// One phase-estimation pass approximating `f(H)ψ/‖f(H)ψ‖`.
///
/// The pass runs in the eigenframe of `op`, where conditional evolution is
/// diagonal, and maps the result back at the end.
pub fn apply_hermitian_via_pe(psi: &CVector, op: &SpectralOperator, config: &PhaseEstimationConfig) -> Result<PeOutcome> {
    config.validate(op)?;
    if psi.len() != op.dim() {
        return Err(QfitError::Dimension(format!("state of dim {} for operator of dim {}", psi.len(), op.dim())));
    }
    let frame = op.eigenframe();
    let s = QuantumState::from_system(&op.to_eigenframe(psi))?.with_clock(config.clock_size)?;
    let s = prepare_clock(&s, config.window)?;
    let s = conditional_evolution(&s, &frame, config)?;
    let s = qft_clock(&s, QftDirection::Forward).with_new_flag()?;
    let s = controlled_rotation(&s, config)?;
    let s = uncompute_clock(&s, &frame, config)?;
    let (s, success_probability) = postselect_flag(&s, true)?;
    let (s, clock_zero_probability) = project_clock_zero(&s)?;
    let state = op.from_eigenframe(&s.system_vector()?);
    Ok(PeOutcome {
        state,
        success_probability,
        clock_zero_probability,
        clock_residual: (1.0 - clock_zero_probability).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{embed, fidelity, normalized, ComplexMatrix};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cv(values: &[f64]) -> CVector {
        CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0)))
    }

    fn pauli_x() -> SpectralOperator {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        SpectralOperator::from_decomposition(crate::linalg::eig_hermitian_matrix(&x).unwrap())
    }

    fn commensurate(mode: PhaseMode, c: f64) -> PhaseEstimationConfig {
        PhaseEstimationConfig::new(8, 4.0 * PI, c, mode)
    }

    fn clock_only(values: &[Complex64]) -> QuantumState {
        QuantumState::product(values, &cv(&[1.0]), 0).unwrap()
    }

    #[test]
    fn sine_clock_examples() {
        let c = prepare_sine_clock(2).unwrap();
        assert_abs_diff_eq!(c[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let c = prepare_sine_clock(4).unwrap();
        for (tau, a) in c.iter().enumerate() {
            let expected = FRAC_1_SQRT_2 * (PI * (2 * tau + 1) as f64 / 8.0).sin();
            assert_abs_diff_eq!(a.re, expected, epsilon = 1e-15);
        }
        for t in [2, 8, 64, 1024] {
            let norm: f64 = prepare_sine_clock(t).unwrap().iter().map(|a| a.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
        assert!(prepare_sine_clock(1).is_err());
        assert!(prepare_sine_clock(6).is_err());
    }

    #[test]
    fn clock_preparation_is_an_involution() {
        let s = QuantumState::from_system(&cv(&[0.6, 0.8])).unwrap().with_clock(16).unwrap();
        let prepared = prepare_clock(&s, ClockWindow::Sine).unwrap();
        let window = prepare_sine_clock(16).unwrap();
        let probs = prepared.clock_probabilities();
        for (p, w) in probs.iter().zip(&window) {
            assert_abs_diff_eq!(*p, w.norm_sqr(), epsilon = 1e-14);
        }
        let back = prepare_clock(&prepared, ClockWindow::Sine).unwrap();
        let diff: f64 = back.amplitudes().iter().zip(s.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-14);
    }

    #[test]
    fn conditional_evolution_examples() {
        let clock = prepare_sine_clock(8).unwrap();
        let plus = cv(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let s = QuantumState::product(&clock, &plus, 0).unwrap();

        let zero_time = PhaseEstimationConfig::new(8, 0.0, 1.0, PhaseMode::Multiply);
        assert_eq!(conditional_evolution(&s, &pauli_x(), &zero_time).unwrap(), s);

        let zero_op = SpectralOperator::diagonal(vec![0.0, 0.0]);
        let cfg = commensurate(PhaseMode::Multiply, 1.0);
        let out = conditional_evolution(&s, &zero_op, &cfg).unwrap();
        assert_eq!(out, s);

        let out = conditional_evolution(&s, &pauli_x(), &cfg).unwrap();
        let layout = s.layout();
        for tau in 0..8 {
            let phase = Complex64::from_polar(1.0, -(tau as f64) * cfg.evolution_time / 8.0);
            for p in 0..2 {
                let i = layout.index(tau, p, 0);
                assert!((out.amplitudes()[i] - s.amplitudes()[i] * phase).norm() < 1e-14);
            }
        }
        let back = inverse_conditional_evolution(&out, &pauli_x(), &cfg).unwrap();
        let diff: f64 = back.amplitudes().iter().zip(s.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-13);
    }

    #[test]
    fn qft_examples() {
        let uniform = clock_only(&[c64(0.5, 0.0); 4]);
        let out = qft_clock(&uniform, QftDirection::Forward);
        assert_abs_diff_eq!(out.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        assert!(out.amplitudes()[1..].iter().all(|a| a.norm() < 1e-15));

        let delta = clock_only(&[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let out = qft_clock(&delta, QftDirection::Forward);
        assert!(out.amplitudes().iter().all(|a| (a - c64(0.5, 0.0)).norm() < 1e-15));

        // Kernel sign: the ramp left by a positive eigenvalue lands on k = 1.
        let ramp: Vec<Complex64> = (0..8).map(|t| Complex64::from_polar(8f64.sqrt().recip(), -TAU * t as f64 / 8.0)).collect();
        let out = qft_clock(&clock_only(&ramp), QftDirection::Forward);
        assert_abs_diff_eq!(out.amplitudes()[1].norm(), 1.0, epsilon = 1e-14);

        let s = QuantumState::product(&prepare_sine_clock(16).unwrap(), &cv(&[0.6, 0.8]), 1).unwrap();
        let back = qft_clock(&qft_clock(&s, QftDirection::Forward), QftDirection::Inverse);
        let diff: f64 = back.amplitudes().iter().zip(s.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() <= 1e-12);
    }

    #[test]
    fn decode_examples() {
        assert_abs_diff_eq!(decode_eigenvalue(2, 8, 4.0 * PI), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(decode_eigenvalue(6, 8, 4.0 * PI), -1.0, epsilon = 1e-15);
        assert_eq!(decode_eigenvalue(0, 8, 4.0 * PI), 0.0);
        assert_eq!(decode_eigenvalue(0, 1024, 1.0), 0.0);
    }

    fn delta_with_flag(t: usize, k: usize) -> QuantumState {
        let mut clock = vec![c64(0.0, 0.0); t];
        clock[k] = c64(1.0, 0.0);
        QuantumState::product(&clock, &cv(&[1.0]), 1).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let cfg = commensurate(PhaseMode::Multiply, 0.5);
        let out = controlled_rotation(&delta_with_flag(8, 2), &cfg).unwrap();
        let l = out.layout();
        assert_abs_diff_eq!(out.amplitudes()[l.index(2, 0, 0)].re, 0.75f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[l.index(2, 0, 1)].re, 0.5, epsilon = 1e-15);

        let cfg = commensurate(PhaseMode::Invert, 0.25);
        assert_abs_diff_eq!(decode_eigenvalue(1, 8, cfg.evolution_time), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rotation_weight(1, &cfg), 0.5, epsilon = 1e-15);
        assert_eq!(rotation_weight(0, &cfg), 0.0);
        let out = controlled_rotation(&delta_with_flag(8, 0), &cfg).unwrap();
        assert_eq!(out.amplitudes()[out.layout().index(0, 0, 1)], c64(0.0, 0.0));
        assert_eq!(rotation_weight(4, &cfg), 0.0);
    }

    #[test]
    fn rotation_bounds_rejected() {
        let op = pauli_x();
        assert!(matches!(commensurate(PhaseMode::Multiply, 1.5).validate(&op), Err(QfitError::RotationBound { .. })));
        assert!(matches!(commensurate(PhaseMode::Invert, 1.5).validate(&op), Err(QfitError::RotationBound { .. })));
        let aliased = PhaseEstimationConfig::new(8, 8.0 * PI, 1.0, PhaseMode::Multiply);
        assert!(matches!(aliased.validate(&op), Err(QfitError::Aliasing { .. })));
        assert!(commensurate(PhaseMode::Multiply, 1.0).validate(&op).is_ok());
    }

    #[test]
    fn postselect_examples() {
        let l = RegisterLayout::new(1, 1, 1).unwrap();
        let s = QuantumState::from_amplitudes(l, vec![c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let (out, p) = postselect_flag(&s, true).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(out.amplitudes(), &[c64(1.0, 0.0)]);

        let l = RegisterLayout::new(1, 2, 1).unwrap();
        let a0 = c64(0.75f64.sqrt() * FRAC_1_SQRT_2, 0.0);
        let a1 = c64(0.5 * FRAC_1_SQRT_2, 0.0);
        let s = QuantumState::from_amplitudes(l, vec![a0, a1, a0, a1]).unwrap();
        let (_, p) = postselect_flag(&s, true).unwrap();
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);

        let s = QuantumState::from_amplitudes(RegisterLayout::new(1, 1, 1).unwrap(), vec![c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!(matches!(postselect_flag(&s, true), Err(QfitError::EmptyPostselection)));
    }

    #[test]
    fn multiply_on_pauli_x_spectrum_succeeds_with_certainty() {
        let cfg = commensurate(PhaseMode::Multiply, 1.0).with_window(ClockWindow::Rectangular);
        let out = apply_hermitian_via_pe(&cv(&[0.0, 1.0]), &pauli_x(), &cfg).unwrap();
        assert_abs_diff_eq!(out.success_probability, 1.0, epsilon = 1e-12);
        assert!(fidelity(&out.state, &cv(&[1.0, 0.0])) > 1.0 - 1e-12);
        assert!(out.clock_residual < 1e-10);
    }

    #[test]
    fn pe_examples_sine_window() {
        let cfg = commensurate(PhaseMode::Multiply, 1.0);
        let out = apply_hermitian_via_pe(&cv(&[0.0, 1.0]), &pauli_x(), &cfg).unwrap();
        assert!(fidelity(&out.state, &cv(&[1.0, 0.0])) > 1.0 - 1e-12);

        let cfg = commensurate(PhaseMode::Invert, 1.0);
        let out = apply_hermitian_via_pe(&cv(&[1.0, 0.0]), &pauli_x(), &cfg).unwrap();
        assert!(fidelity(&out.state, &cv(&[0.0, 1.0])) > 1.0 - 1e-12);
    }

    #[test]
    fn multiply_on_eigenvector_keeps_it() {
        let cfg = commensurate(PhaseMode::Multiply, 0.5).with_window(ClockWindow::Rectangular);
        let plus = cv(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let out = apply_hermitian_via_pe(&plus, &pauli_x(), &cfg).unwrap();
        assert!(fidelity(&out.state, &plus) > 1.0 - 1e-12);
        assert_abs_diff_eq!(out.success_probability, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn commensurate_embedding_disentangles_clock() {
        let f = ComplexMatrix::from_real_rows(&[&[FRAC_1_SQRT_2], &[FRAC_1_SQRT_2]]).unwrap();
        let op = SpectralOperator::from_embedded(&embed(&f).unwrap()).unwrap();
        let cfg = commensurate(PhaseMode::Invert, 1.0).with_window(ClockWindow::Rectangular);
        let psi = cv(&[0.0, 0.0, 1.0]);
        let out = apply_hermitian_via_pe(&psi, &op, &cfg).unwrap();
        assert!(out.clock_residual <= 1e-10);
        let exact = normalized(&op.apply_function(pseudo_reciprocal, &psi)).unwrap();
        assert!(fidelity(&out.state, &exact) >= 1.0 - 1e-12);
    }

    #[test]
    fn zero_time_uncompute_restores_clock() {
        let cfg = PhaseEstimationConfig::new(16, 0.0, 1.0, PhaseMode::Multiply);
        let op = pauli_x();
        let s = QuantumState::from_system(&cv(&[0.6, 0.8])).unwrap().with_clock(16).unwrap();
        let forward = qft_clock(&conditional_evolution(&prepare_clock(&s, cfg.window).unwrap(), &op, &cfg).unwrap(), QftDirection::Forward);
        let back = uncompute_clock(&forward, &op, &cfg).unwrap();
        let (_, p0) = project_clock_zero(&back).unwrap();
        assert_abs_diff_eq!(p0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn generic_residual_shrinks_as_clock_grows() {
        let op = SpectralOperator::diagonal(vec![-0.83, 0.37, 1.0]);
        let psi = normalized(&cv(&[0.5, 0.7, 0.3])).unwrap();
        let mut previous = f64::INFINITY;
        for octave in 0..4 {
            let t = 64 << octave;
            let cfg = PhaseEstimationConfig::new(t, TAU * (10 << octave) as f64, 1.0, PhaseMode::Multiply);
            let residual = apply_hermitian_via_pe(&psi, &op, &cfg).unwrap().clock_residual;
            assert!(residual < previous, "octave {octave}: {residual} >= {previous}");
            previous = residual;
        }
    }

    #[test]
    fn modal_bin_within_resolution() {
        let e = 0.4137;
        let op = SpectralOperator::diagonal(vec![e]);
        let cfg = PhaseEstimationConfig::new(256, TAU * 40.0, 1.0, PhaseMode::Multiply);
        let s = QuantumState::from_system(&cv(&[1.0])).unwrap().with_clock(256).unwrap();
        let s = prepare_clock(&s, ClockWindow::Sine).unwrap();
        let s = qft_clock(&conditional_evolution(&s, &op, &cfg).unwrap(), QftDirection::Forward);
        let probs = s.clock_probabilities();
        let k = (0..256).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap();
        assert!((decode_eigenvalue(k, 256, cfg.evolution_time) - e).abs() <= TAU / cfg.evolution_time);
    }

    #[test]
    fn auto_time_is_commensurate() {
        let t0 = auto_evolution_time(1.0, 2.0, 0.1, 1024).unwrap();
        assert_abs_diff_eq!(t0, TAU * 20.0, epsilon = 1e-12);
        let t0 = auto_evolution_time(0.5, 100.0, 0.01, 64).unwrap();
        assert_abs_diff_eq!(t0 * 0.5 / TAU, 31.0, epsilon = 1e-12);
        assert!(auto_evolution_time(1.0, 1.0, 0.1, 2).is_err());
    }
}

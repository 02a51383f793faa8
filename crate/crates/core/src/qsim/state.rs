use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{QfitError, Result};
use crate::linalg::{c64, CVector};
use crate::problem::FitProblem;
use crate::serde_complex;

use super::sharded_sampling;

/// Upper bound on the number of simulated amplitudes.
pub const MAX_AMPLITUDES: usize = 1 << 24;

/// Register sizes of a simulated state.
///
/// Amplitudes are stored at index `((τ·D + p) << flagCount) | flags`, so
/// flag qubit 0 is the least significant bit. A clock size of 1 means the
/// clock register is absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegisterLayout {
    pub clock_size: usize,
    pub system_dim: usize,
    pub flag_count: u32,
}

impl RegisterLayout {
    pub fn new(clock_size: usize, system_dim: usize, flag_count: u32) -> Result<Self> {
        if clock_size == 0 || !clock_size.is_power_of_two() {
            return Err(QfitError::InvalidConfig(format!("clock size {clock_size} is not a power of two")));
        }
        if system_dim == 0 {
            return Err(QfitError::Dimension("empty system register".into()));
        }
        let layout = Self { clock_size, system_dim, flag_count };
        let total = clock_size
            .checked_mul(system_dim)
            .and_then(|v| v.checked_shl(flag_count))
            .filter(|&v| v <= MAX_AMPLITUDES)
            .ok_or(QfitError::DimensionOverflow {
                dim: clock_size.saturating_mul(system_dim).saturating_mul(1usize << flag_count.min(40)),
                cap: MAX_AMPLITUDES,
            })?;
        debug_assert_eq!(total, layout.len());
        Ok(layout)
    }

    pub fn system(system_dim: usize) -> Result<Self> {
        Self::new(1, system_dim, 0)
    }

    pub fn len(&self) -> usize {
        (self.clock_size * self.system_dim) << self.flag_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flag_states(&self) -> usize {
        1 << self.flag_count
    }

    pub fn index(&self, tau: usize, p: usize, flags: usize) -> usize {
        ((tau * self.system_dim + p) << self.flag_count) | flags
    }
}

/// Dense amplitude vector over a [`RegisterLayout`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuantumState {
    layout: RegisterLayout,
    #[serde(with = "serde_complex::vec")]
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.len() {
            return Err(QfitError::Dimension(format!(
                "{} amplitudes for a layout of {}",
                amplitudes.len(),
                layout.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QfitError::NonFinite);
        }
        Ok(Self { layout, amplitudes })
    }

    /// System-only state.
    pub fn from_system(v: &CVector) -> Result<Self> {
        Self::from_amplitudes(RegisterLayout::system(v.len())?, v.iter().copied().collect())
    }

    /// `|clock⟩ ⊗ |system⟩` with every flag in `|0⟩`.
    pub fn product(clock: &[Complex64], system: &CVector, flag_count: u32) -> Result<Self> {
        let layout = RegisterLayout::new(clock.len(), system.len(), flag_count)?;
        let mut amplitudes = vec![c64(0.0, 0.0); layout.len()];
        for (tau, c) in clock.iter().enumerate() {
            for (p, s) in system.iter().enumerate() {
                amplitudes[layout.index(tau, p, 0)] = c * s;
            }
        }
        Self::from_amplitudes(layout, amplitudes)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn into_parts(self) -> (RegisterLayout, Vec<Complex64>) {
        (self.layout, self.amplitudes)
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// The system register when clock and flags are absent.
    pub fn system_vector(&self) -> Result<CVector> {
        if self.layout.clock_size != 1 || self.layout.flag_count != 0 {
            return Err(QfitError::Dimension(format!("state still carries ancillas: {:?}", self.layout)));
        }
        Ok(CVector::from_column_slice(&self.amplitudes))
    }

    /// Marginal distribution of the clock register.
    pub fn clock_probabilities(&self) -> Vec<f64> {
        let block = self.layout.system_dim << self.layout.flag_count;
        self.amplitudes.chunks(block).map(|c| c.iter().map(|a| a.norm_sqr()).sum()).collect()
    }

    /// Marginal distribution of the system register.
    pub fn system_probabilities(&self) -> Vec<f64> {
        let l = self.layout;
        let mut probs = vec![0.0; l.system_dim];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[(i >> l.flag_count) % l.system_dim] += a.norm_sqr();
        }
        probs
    }

    /// Adds a flag qubit in `|0⟩` as the new flag 0.
    pub fn with_new_flag(&self) -> Result<Self> {
        let l = self.layout;
        let layout = RegisterLayout::new(l.clock_size, l.system_dim, l.flag_count + 1)?;
        let mut amplitudes = vec![c64(0.0, 0.0); layout.len()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            amplitudes[i << 1] = a;
        }
        Self::from_amplitudes(layout, amplitudes)
    }

    /// Appends a clock register in `|0⟩`.
    pub fn with_clock(&self, clock_size: usize) -> Result<Self> {
        if self.layout.clock_size != 1 {
            return Err(QfitError::InvalidConfig("state already has a clock register".into()));
        }
        if clock_size < 2 {
            return Err(QfitError::InvalidConfig(format!("clock size {clock_size} must be at least 2")));
        }
        let layout = RegisterLayout::new(clock_size, self.layout.system_dim, self.layout.flag_count)?;
        let mut amplitudes = vec![c64(0.0, 0.0); layout.len()];
        amplitudes[..self.amplitudes.len()].copy_from_slice(&self.amplitudes);
        Self::from_amplitudes(layout, amplitudes)
    }
}

/// `(0, y)` on the parameter-then-data layout of the embedded operator.
pub fn prepare_data_state(problem: &FitProblem) -> QuantumState {
    QuantumState::from_system(&problem.data_state()).expect("normalized problems have a nonempty system register")
}

/// Samples the system register `shots` times; returns counts per index.
pub fn measure_computational(state: &QuantumState, shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(QfitError::ZeroShots);
    }
    let probs = state.system_probabilities();
    let dist = WeightedIndex::new(&probs).map_err(|_| QfitError::ZeroVector)?;
    Ok(sharded_sampling(
        shots,
        seed,
        vec![0u64; probs.len()],
        |n, rng, acc: &mut Vec<u64>| {
            for _ in 0..n {
                acc[dist.sample(rng)] += 1;
            }
        },
    ))
}

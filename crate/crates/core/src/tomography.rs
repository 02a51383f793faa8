//! Pure-state tomography by linear inversion of interference settings.
//!
//! Magnitudes come from computational-basis counts. The phase of each
//! component `j` relative to a reference component `r` comes from two
//! beam-splitter settings on `span{r, j}`, at relative phases 0 and π/2,
//! whose count differences estimate `2·Re(a_r* a_j)` and `2·Im(a_r* a_j)`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{QfitError, Result};
use crate::linalg::{c64, fidelity, CVector};
use crate::qsim::sharded_sampling;
use crate::seed::derive_seed;
use crate::serde_complex;

pub const METHOD: &str = "linearInversionInterferometry";

/// Default ratio between the reference amplitude floor and `ε`.
pub const DEFAULT_REFERENCE_FACTOR: f64 = 10.0;

/// Multipliers of the settings and shots-per-setting formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BudgetConstants {
    pub settings: f64,
    pub shots: f64,
}

impl Default for BudgetConstants {
    fn default() -> Self {
        Self { settings: 1.0, shots: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TomographyBudget {
    pub m_prime: usize,
    pub settings: u64,
    pub shots_per_setting: u64,
    pub epsilon: f64,
    pub constants: BudgetConstants,
}

impl TomographyBudget {
    pub fn total_shots(&self) -> u64 {
        self.settings * self.shots_per_setting
    }
}

fn ceil_count(x: f64) -> u64 {
    (x - 1e-9).ceil().max(1.0) as u64
}

/// `settings = ⌈M′(log₂M′ + 1)²⌉`, `shotsPerSetting = ⌈M′/ε²⌉`.
pub fn plan_budget(m_prime: usize, epsilon: f64) -> Result<TomographyBudget> {
    plan_budget_with(m_prime, epsilon, BudgetConstants::default())
}

pub fn plan_budget_with(m_prime: usize, epsilon: f64, constants: BudgetConstants) -> Result<TomographyBudget> {
    if m_prime == 0 {
        return Err(QfitError::InvalidConfig("tomography needs at least one component".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(QfitError::InvalidConfig(format!("tomography accuracy {epsilon} outside (0, 1)")));
    }
    if !(constants.settings > 0.0 && constants.shots > 0.0) {
        return Err(QfitError::InvalidConfig(format!("budget constants {constants:?}")));
    }
    let m = m_prime as f64;
    let log_term = m.log2() + 1.0;
    Ok(TomographyBudget {
        m_prime,
        settings: ceil_count(constants.settings * m * log_term * log_term),
        shots_per_setting: ceil_count(constants.shots * m / (epsilon * epsilon)),
        epsilon,
        constants,
    })
}

/// A state that can be prepared afresh for every measurement setting.
pub trait PureStateSource {
    fn prepare(&self) -> Result<CVector>;
}

impl<F: Fn() -> Result<CVector>> PureStateSource for F {
    fn prepare(&self) -> Result<CVector> {
        self()
    }
}

impl PureStateSource for CVector {
    fn prepare(&self) -> Result<CVector> {
        Ok(self.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Setting {
    Computational,
    Interference { index: usize, phase: f64 },
}

/// Raw counts gathered for one setting across all its slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SettingRecord {
    pub setting: Setting,
    pub slots: u64,
    pub shots: u64,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReconstructedState {
    pub method: String,
    #[serde(with = "serde_complex::dvector")]
    pub amplitudes: CVector,
    pub reference_index: usize,
    pub fidelity_vs_oracle: Option<f64>,
    pub budget: TomographyBudget,
    pub total_shots: u64,
    pub records: Vec<SettingRecord>,
}

impl ReconstructedState {
    pub fn with_oracle(mut self, oracle: &CVector) -> Self {
        self.fidelity_vs_oracle = Some(fidelity(&self.amplitudes, oracle));
        self
    }
}

/// Rephases `v` so its first nonzero component is real and positive.
pub fn canonicalize(v: &CVector) -> CVector {
    match v.iter().find(|a| a.norm() > 1e-12) {
        Some(a) => v * (a.conj() / a.norm()),
        None => v.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TomographyOptions {
    /// The reference amplitude must reach `reference_factor · ε`.
    pub reference_factor: f64,
}

impl Default for TomographyOptions {
    fn default() -> Self {
        Self { reference_factor: DEFAULT_REFERENCE_FACTOR }
    }
}

fn outcome_probabilities(state: &CVector, setting: Setting, reference: usize) -> Vec<f64> {
    let mut probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
    if let Setting::Interference { index, phase } = setting {
        let (ar, aj) = (state[reference], state[index] * Complex64::from_polar(1.0, -phase));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        probs[reference] = ((ar + aj) * s).norm_sqr();
        probs[index] = ((ar - aj) * s).norm_sqr();
    }
    probs
}

fn run_slots(
    source: &dyn PureStateSource,
    setting: Setting,
    slots: &[u64],
    shots: u64,
    seed: u64,
    reference: usize,
    dim: usize,
) -> Result<SettingRecord> {
    let mut counts = vec![0u64; dim];
    for &slot in slots {
        let state = source.prepare()?;
        if state.len() != dim {
            return Err(QfitError::Dimension(format!("state source changed dimension to {}", state.len())));
        }
        let probs = outcome_probabilities(&state, setting, reference);
        let dist = WeightedIndex::new(&probs).map_err(|_| QfitError::ZeroVector)?;
        counts = sharded_sampling(shots, derive_seed(seed, slot), counts, |n, rng, acc: &mut Vec<u64>| {
            for _ in 0..n {
                acc[dist.sample(rng)] += 1;
            }
        });
    }
    Ok(SettingRecord { setting, slots: slots.len() as u64, shots: shots * slots.len() as u64, counts })
}

/// Reconstructs the pure state produced by `source` within `budget`.
///
/// Slot `i` of `budget.settings` runs setting `i mod S`, where setting 0
/// is the computational basis and the remaining `S − 1 = 2(M′ − 1)` are
/// the interference pairs, so every needed setting is covered.
pub fn reconstruct_pure_state(
    source: &dyn PureStateSource,
    budget: &TomographyBudget,
    seed: u64,
    options: &TomographyOptions,
) -> Result<ReconstructedState> {
    let dim = budget.m_prime;
    let needed = (2 * dim - 1) as u64;
    if budget.settings < needed {
        return Err(QfitError::InvalidConfig(format!(
            "{} settings cannot cover the {needed} needed for {dim} components",
            budget.settings
        )));
    }
    if budget.shots_per_setting == 0 {
        return Err(QfitError::ZeroShots);
    }
    let slots_for = |setting: u64| -> Vec<u64> { (setting..budget.settings).step_by(needed as usize).collect() };

    let computational = run_slots(source, Setting::Computational, &slots_for(0), budget.shots_per_setting, seed, 0, dim)?;
    let total = computational.shots as f64;
    let probabilities: Vec<f64> = computational.counts.iter().map(|&c| c as f64 / total).collect();
    let reference = (0..dim).fold(0, |best, j| if probabilities[j] > probabilities[best] { j } else { best });
    let reference_amplitude = probabilities[reference].sqrt();
    let threshold = options.reference_factor * budget.epsilon;
    if reference_amplitude < threshold {
        return Err(QfitError::WeakReference { amplitude: reference_amplitude, threshold });
    }

    let mut amplitudes = CVector::zeros(dim);
    amplitudes[reference] = c64(reference_amplitude, 0.0);
    let mut records = vec![computational];
    let others: Vec<usize> = (0..dim).filter(|&j| j != reference).collect();
    for (pair, &j) in others.iter().enumerate() {
        let mut quadratures = [0.0; 2];
        for (q, phase) in [0.0, FRAC_PI_2].into_iter().enumerate() {
            let setting = Setting::Interference { index: j, phase };
            let id = 1 + 2 * pair as u64 + q as u64;
            let record = run_slots(source, setting, &slots_for(id), budget.shots_per_setting, seed, reference, dim)?;
            quadratures[q] = (record.counts[reference] as f64 - record.counts[j] as f64) / record.shots as f64;
            records.push(record);
        }
        let direction = c64(quadratures[0], quadratures[1]);
        amplitudes[j] = if direction.norm() > 0.0 {
            Complex64::from_polar(probabilities[j].sqrt(), direction.arg())
        } else {
            c64(probabilities[j].sqrt(), 0.0)
        };
    }
    let norm = amplitudes.norm();
    let amplitudes = canonicalize(&(amplitudes / c64(norm, 0.0)));
    let total_shots = records.iter().map(|r| r.shots).sum();
    Ok(ReconstructedState {
        method: METHOD.to_string(),
        amplitudes,
        reference_index: reference,
        fidelity_vs_oracle: None,
        budget: *budget,
        total_shots,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn budget_examples() {
        let b = plan_budget(1, 0.1).unwrap();
        assert_eq!((b.settings, b.shots_per_setting), (1, 100));
        let b = plan_budget(2, 0.1).unwrap();
        assert_eq!((b.settings, b.shots_per_setting), (8, 200));
        let b = plan_budget(4, 0.05).unwrap();
        assert_eq!((b.settings, b.shots_per_setting), (36, 1600));
        assert_eq!(b.total_shots(), 36 * 1600);
        assert!(plan_budget(0, 0.1).is_err());
        assert!(plan_budget(2, 1.0).is_err());
    }

    #[test]
    fn halving_epsilon_quadruples_shots() {
        for m in [1, 3, 7] {
            for eps in [0.2, 0.1, 0.05] {
                let a = plan_budget(m, eps).unwrap().shots_per_setting;
                let b = plan_budget(m, eps / 2.0).unwrap().shots_per_setting;
                assert_eq!(b, 4 * a);
            }
        }
    }

    #[test]
    fn basis_state_is_exact() {
        let e0 = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let r = reconstruct_pure_state(&e0, &plan_budget(3, 0.05).unwrap(), 1, &TomographyOptions::default())
            .unwrap()
            .with_oracle(&e0);
        assert_eq!(r.amplitudes, e0);
        assert_eq!(r.fidelity_vs_oracle, Some(1.0));
    }

    #[test]
    fn phase_is_recovered() {
        let v = CVector::from_vec(vec![c64(FRAC_1_SQRT_2, 0.0), c64(0.0, FRAC_1_SQRT_2)]);
        let budget = plan_budget(2, 0.05).unwrap();
        for seed in 0..20 {
            let r = reconstruct_pure_state(&v, &budget, seed, &TomographyOptions::default()).unwrap().with_oracle(&v);
            assert!(r.fidelity_vs_oracle.unwrap() >= 0.995, "seed {seed}");
            assert_eq!(r.records.len(), 3);
            assert_eq!(r.total_shots, budget.total_shots());
        }
    }

    #[test]
    fn weak_reference_rejected() {
        let v = CVector::from_vec(vec![c64(0.5, 0.0); 4]);
        let err = reconstruct_pure_state(&v, &plan_budget(4, 0.1).unwrap(), 0, &TomographyOptions::default()).unwrap_err();
        assert!(matches!(err, QfitError::WeakReference { .. }));
        let relaxed = TomographyOptions { reference_factor: 1.0 };
        assert!(reconstruct_pure_state(&v, &plan_budget(4, 0.1).unwrap(), 0, &relaxed).is_ok());
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let v = CVector::from_vec(vec![c64(0.0, 0.0), c64(0.0, -0.6), c64(0.8, 0.0)]);
        let c = canonicalize(&v);
        assert!(c[1].im.abs() < 1e-15 && c[1].re > 0.0);
        assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn deterministic_under_seed() {
        let v = CVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.48), c64(-0.64, 0.0)]);
        let budget = plan_budget(3, 0.05).unwrap();
        let a = reconstruct_pure_state(&v, &budget, 4, &TomographyOptions::default()).unwrap();
        let b = reconstruct_pure_state(&v, &budget, 4, &TomographyOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}

//! Asymptotic query-cost and repetition model.
//!
//! Every formula is evaluated with unit constants and `log₂ N`. The values
//! describe scaling, not gate counts.

use serde::{Deserialize, Serialize};

use crate::error::{QfitError, Result};

pub const COST_MODEL_LABEL: &str = "asymptotic model with unit constants, not a gate count";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CostAlgorithm {
    /// `log N · s³κ⁶/ε`.
    Alg1Eq3,
    /// `log N · sκ⁶/ε²`.
    Alg1Eq4,
    /// `log N · s³κ⁴/(εδ²)`.
    Alg2,
    /// `log N · s³(κ⁴/(εδ²) + M′²κ⁶/ε³)`.
    Alg3,
}

impl CostAlgorithm {
    pub const ALL: [CostAlgorithm; 4] = [CostAlgorithm::Alg1Eq3, CostAlgorithm::Alg1Eq4, CostAlgorithm::Alg2, CostAlgorithm::Alg3];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CostQuery {
    pub n: u64,
    pub s: u64,
    pub kappa: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub m_prime: u64,
    pub algorithm: CostAlgorithm,
    pub amplitude_amplification: bool,
}

impl CostQuery {
    pub fn new(algorithm: CostAlgorithm, n: u64, s: u64, kappa: f64, epsilon: f64) -> Self {
        Self { n, s, kappa, epsilon, delta: 1.0, m_prime: 1, algorithm, amplitude_amplification: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.m_prime == 0 {
            return Err(QfitError::InvalidConfig(format!(
                "n = {}, s = {}, mPrime = {} must all be positive",
                self.n, self.s, self.m_prime
            )));
        }
        if !(self.kappa >= 1.0 && self.kappa.is_finite()) {
            return Err(QfitError::InvalidConfig(format!("kappa {} must be at least 1", self.kappa)));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(QfitError::InvalidConfig(format!("{name} {v} outside (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, algorithm: CostAlgorithm) -> f64 {
        let log_n = (self.n as f64).log2();
        let s = self.s as f64;
        let k = self.kappa;
        let (e, d) = (self.epsilon, self.delta);
        let mp = self.m_prime as f64;
        match algorithm {
            CostAlgorithm::Alg1Eq3 => log_n * s.powi(3) * k.powi(6) / e,
            CostAlgorithm::Alg1Eq4 => log_n * s * k.powi(6) / (e * e),
            CostAlgorithm::Alg2 => log_n * s.powi(3) * k.powi(4) / (e * d * d),
            CostAlgorithm::Alg3 => log_n * s.powi(3) * (k.powi(4) / (e * d * d) + mp * mp * k.powi(6) / e.powi(3)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FormulaValues {
    pub alg1_eq3: f64,
    pub alg1_eq4: f64,
    pub alg2: f64,
    pub alg3: f64,
}

/// Expected attempts until postselection succeeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepetitionCounts {
    /// Applying `I(F†)` without amplitude amplification: `κ²`.
    pub prepare_plain: f64,
    /// Applying `I(F†)` with amplitude amplification: `κ`.
    pub prepare_amplified: f64,
    /// One standalone `I(F)⁻¹` without amplification: `κ²`.
    pub inversion_plain: f64,
    /// One standalone `I(F)⁻¹` with amplification: `κ`.
    pub inversion_amplified: f64,
    /// `A⁻¹I(F†)` with amplification on the preparation only: `κ⁵`.
    pub total_amplified: f64,
    /// `A⁻¹I(F†)` without amplification anywhere: `κ⁶`.
    pub total_plain: f64,
    /// The total matching the query's amplification flag.
    pub total_selected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CostReport {
    pub label: String,
    pub query: CostQuery,
    pub queries: f64,
    pub formulas: FormulaValues,
    pub repetitions: RepetitionCounts,
}

pub fn repetition_counts(kappa: f64, amplitude_amplification: bool) -> RepetitionCounts {
    let k = kappa;
    let total_amplified = k.powi(5);
    let total_plain = k.powi(6);
    RepetitionCounts {
        prepare_plain: k * k,
        prepare_amplified: k,
        inversion_plain: k * k,
        inversion_amplified: k,
        total_amplified,
        total_plain,
        total_selected: if amplitude_amplification { total_amplified } else { total_plain },
    }
}

pub fn cost_model(query: &CostQuery) -> Result<CostReport> {
    query.validate()?;
    Ok(CostReport {
        label: COST_MODEL_LABEL.to_string(),
        query: *query,
        queries: query.evaluate(query.algorithm),
        formulas: FormulaValues {
            alg1_eq3: query.evaluate(CostAlgorithm::Alg1Eq3),
            alg1_eq4: query.evaluate(CostAlgorithm::Alg1Eq4),
            alg2: query.evaluate(CostAlgorithm::Alg2),
            alg3: query.evaluate(CostAlgorithm::Alg3),
        },
        repetitions: repetition_counts(query.kappa, query.amplitude_amplification),
    })
}

//! Fit-parameter state preparation, fit-quality estimation and sparse
//! learning, composed from simulator passes over the embedded operator.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cost::{cost_model, CostAlgorithm, CostQuery, CostReport};
use crate::error::{QfitError, Result};
use crate::linalg::{embed, fidelity, normalized, CVector};
use crate::problem::{classical_fit, FitProblem};
use crate::qsim::{
    apply_hermitian_via_pe, auto_evolution_time, default_rotation_constant, measure_computational, swap_test_from_overlap,
    ClockWindow, PhaseEstimationConfig, PhaseMode, QuantumState, SpectralOperator, SwapTestPlan, SwapTestResult,
    DEFAULT_CLOCK_SIZE,
};
use crate::seed::{stream_seed, SeedStream};
use crate::serde_complex;
use crate::tomography::{
    plan_budget_with, reconstruct_pure_state, BudgetConstants, ReconstructedState, TomographyOptions,
    DEFAULT_REFERENCE_FACTOR,
};

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_SUPPORT_ALPHA: f64 = 20.0;

/// A number, or `"auto"` to derive it from the problem.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum AutoValue {
    #[default]
    Auto,
    Value(f64),
}

impl AutoValue {
    pub fn resolve(self, auto: impl FnOnce() -> Result<f64>) -> Result<f64> {
        match self {
            AutoValue::Auto => auto(),
            AutoValue::Value(v) => Ok(v),
        }
    }
}

impl std::str::FromStr for AutoValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(AutoValue::Auto);
        }
        s.parse::<f64>().map(AutoValue::Value).map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

impl Serialize for AutoValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AutoValue::Auto => s.serialize_str("auto"),
            AutoValue::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AutoValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(AutoValue::Value(v)),
            Repr::Text(t) if t == "auto" => Ok(AutoValue::Auto),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"auto\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PipelineVariant {
    /// Multiply, Invert, Invert: `A⁻¹ I(F†)` with `A = I(F)²`.
    #[default]
    PaperFaithful3Stage,
    /// One pseudo-inversion of `I(F)`.
    FusedInverse,
}

impl PipelineVariant {
    pub fn modes(self) -> &'static [PhaseMode] {
        match self {
            PipelineVariant::PaperFaithful3Stage => &[PhaseMode::Multiply, PhaseMode::Invert, PhaseMode::Invert],
            PipelineVariant::FusedInverse => &[PhaseMode::Invert],
        }
    }
}

/// Phase-estimation settings shared by every stage of a pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineSettings {
    pub variant: PipelineVariant,
    pub clock_size: usize,
    pub evolution_time: AutoValue,
    pub rotation_constant: AutoValue,
    pub epsilon: f64,
    pub window: ClockWindow,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            variant: PipelineVariant::default(),
            clock_size: DEFAULT_CLOCK_SIZE,
            evolution_time: AutoValue::Auto,
            rotation_constant: AutoValue::Auto,
            epsilon: DEFAULT_EPSILON,
            window: ClockWindow::Sine,
        }
    }
}

impl PipelineSettings {
    pub fn with_variant(mut self, variant: PipelineVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_clock(mut self, clock_size: usize, evolution_time: AutoValue) -> Self {
        self.clock_size = clock_size;
        self.evolution_time = evolution_time;
        self
    }

    pub fn with_window(mut self, window: ClockWindow) -> Self {
        self.window = window;
        self
    }

    fn stage(&self, op: &SpectralOperator, mode: PhaseMode) -> Result<PhaseEstimationConfig> {
        let sigma_max = op.spectral_radius();
        let sigma_min = op.smallest_nonzero_magnitude().ok_or(QfitError::ZeroVector)?;
        let t0 = self
            .evolution_time
            .resolve(|| auto_evolution_time(sigma_max, sigma_max / sigma_min, self.epsilon, self.clock_size))?;
        let c = self.rotation_constant.resolve(|| Ok(default_rotation_constant(mode, sigma_max, sigma_min)))?;
        let config = PhaseEstimationConfig::new(self.clock_size, t0, c, mode).with_window(self.window);
        config.validate(op)?;
        Ok(config)
    }
}

/// Resolved stages of a pipeline, all acting with `I(F)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineSpec {
    pub variant: PipelineVariant,
    pub stages: Vec<PhaseEstimationConfig>,
}

impl PipelineSpec {
    pub fn resolve(op: &SpectralOperator, settings: &PipelineSettings) -> Result<Self> {
        let stages = settings.variant.modes().iter().map(|&m| settings.stage(op, m)).collect::<Result<_>>()?;
        Ok(Self { variant: settings.variant, stages })
    }

    /// The same stages followed by one multiplication by `I(F)`.
    pub fn with_fit_stage(&self, op: &SpectralOperator, settings: &PipelineSettings) -> Result<Self> {
        let mut stages = self.stages.clone();
        stages.push(settings.stage(op, PhaseMode::Multiply)?);
        Ok(Self { variant: self.variant, stages })
    }
}

/// Spectral form of `I(F)` for a problem.
pub fn problem_operator(problem: &FitProblem) -> Result<SpectralOperator> {
    SpectralOperator::from_embedded(&embed(problem.design_matrix())?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageOutcome {
    pub mode: PhaseMode,
    pub success_probability: f64,
    pub clock_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineRun {
    /// Normalized system state on the `M + N` layout.
    #[serde(with = "serde_complex::dvector")]
    pub state: CVector,
    pub stages: Vec<StageOutcome>,
}

impl PipelineRun {
    pub fn success_probabilities(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.success_probability).collect()
    }
}

pub fn run_pipeline(op: &SpectralOperator, spec: &PipelineSpec, input: &CVector) -> Result<PipelineRun> {
    let mut state = input.clone();
    let mut stages = Vec::with_capacity(spec.stages.len());
    for config in &spec.stages {
        let out = apply_hermitian_via_pe(&state, op, config)?;
        stages.push(StageOutcome {
            mode: config.mode,
            success_probability: out.success_probability,
            clock_residual: out.clock_residual,
        });
        state = out.state;
    }
    Ok(PipelineRun { state, stages })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LambdaState {
    pub pipeline: PipelineSpec,
    pub run: PipelineRun,
    /// `|⟨λ_exact|λ_sim⟩|²` over the whole system register.
    pub oracle_fidelity: f64,
    /// Probability mass left in the data sector.
    pub data_sector_weight: f64,
}

impl LambdaState {
    /// Parameter-sector amplitudes, renormalized.
    pub fn parameters(&self, m: usize) -> Result<CVector> {
        normalized(&self.run.state.rows(0, m).into_owned())
    }
}

fn lambda_reference(problem: &FitProblem) -> Result<CVector> {
    let lambda = classical_fit(problem)?.lambda;
    let mut padded = CVector::zeros(problem.m() + problem.n());
    padded.rows_mut(0, problem.m()).copy_from(&lambda);
    Ok(padded)
}

/// Prepares the state proportional to `(F⁺y, 0)`.
pub fn algorithm1_prepare_lambda(problem: &FitProblem, settings: &PipelineSettings) -> Result<LambdaState> {
    let op = problem_operator(problem)?;
    let pipeline = PipelineSpec::resolve(&op, settings)?;
    let run = run_pipeline(&op, &pipeline, &problem.data_state())?;
    let oracle_fidelity = fidelity(&run.state, &lambda_reference(problem)?);
    let m = problem.m();
    let data_sector_weight = run.state.rows(m, problem.n()).norm_squared();
    Ok(LambdaState { pipeline, run, oracle_fidelity, data_sector_weight })
}

/// Overlap quantities computed from exact projections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactFitQuality {
    /// `‖P_col(F) y‖²` for the normalized `y`.
    pub overlap_sq: f64,
    /// `1 − overlapSq`: residual energy of the normalized problem.
    pub normalized_residual: f64,
    /// `2(1 − √overlapSq)`.
    pub e_bound: f64,
}

impl ExactFitQuality {
    pub fn from_overlap_sq(overlap_sq: f64) -> Self {
        let ov = overlap_sq.clamp(0.0, 1.0);
        Self { overlap_sq: ov, normalized_residual: 1.0 - ov, e_bound: e_bound(ov) }
    }
}

/// `2(1 − √overlapSq)`.
pub fn e_bound(overlap_sq: f64) -> f64 {
    2.0 * (1.0 - overlap_sq.clamp(0.0, 1.0).sqrt())
}

pub fn exact_fit_quality(problem: &FitProblem) -> Result<ExactFitQuality> {
    let fitted = classical_fit(problem)?.fitted_vector;
    Ok(ExactFitQuality::from_overlap_sq(fitted.norm_squared()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeedRecord {
    pub swap_test: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitReport {
    pub pipeline: PipelineSpec,
    pub success_probabilities: Vec<f64>,
    pub clock_residuals: Vec<f64>,
    /// The fitted state vanishes: `y` is orthogonal to the column space.
    pub postselection_empty: bool,
    pub swap_test: SwapTestResult,
    pub overlap_sq_estimate: f64,
    pub std_error: f64,
    pub e_bound: f64,
    /// Overlap of the simulated fitted state with `|y⟩`, from amplitudes.
    pub overlap_sq_simulated: f64,
    pub exact: ExactFitQuality,
    /// `1 − overlapSq` from the oracle.
    pub e_exact_reference: f64,
    /// Residual energy of the unnormalized problem.
    pub residual_energy: f64,
    /// `eBound ≥ eExactReference − 3·stdError`.
    pub bound_holds: bool,
    /// `2(1 − ov) ≥ 1 − ov²` at the estimated `ov`.
    pub bound_identity_holds: bool,
    pub total_shots: u64,
    pub seeds: SeedRecord,
    pub cost: CostReport,
}

/// Swap-tests the fitted state `I(F)|λ⟩` against `|y⟩`.
pub fn algorithm2_fit_quality(problem: &FitProblem, settings: &PipelineSettings, plan: &SwapTestPlan) -> Result<FitReport> {
    if plan.shots == 0 {
        return Err(QfitError::ZeroShots);
    }
    let op = problem_operator(problem)?;
    let pipeline = PipelineSpec::resolve(&op, settings)?.with_fit_stage(&op, settings)?;
    let y = problem.data_state();
    let (stages, overlap_sq_simulated, postselection_empty) = match run_pipeline(&op, &pipeline, &y) {
        Ok(run) => (run.stages, run.state.dotc(&y).norm_sqr(), false),
        Err(QfitError::EmptyPostselection) => (Vec::new(), 0.0, true),
        Err(e) => return Err(e),
    };
    let swap = swap_test_from_overlap(overlap_sq_simulated, plan)?;
    let exact = exact_fit_quality(problem)?;
    let ov = swap.overlap_sq_estimate.sqrt();
    let bound = e_bound(swap.overlap_sq_estimate);
    let cond = problem.condition();
    let delta = plan.delta.unwrap_or(1.0 / (plan.shots as f64).sqrt()).min(1.0);
    let query = CostQuery {
        delta,
        ..CostQuery::new(CostAlgorithm::Alg2, problem.n() as u64, problem.sparsity().s as u64, cond.kappa, settings.epsilon.min(1.0))
    };
    Ok(FitReport {
        success_probabilities: stages.iter().map(|s| s.success_probability).collect(),
        clock_residuals: stages.iter().map(|s| s.clock_residual).collect(),
        postselection_empty,
        pipeline,
        overlap_sq_estimate: swap.overlap_sq_estimate,
        std_error: swap.std_error,
        e_bound: bound,
        overlap_sq_simulated,
        e_exact_reference: exact.normalized_residual,
        residual_energy: problem.unnormalize_residual(exact.normalized_residual),
        exact,
        bound_holds: bound >= exact.normalized_residual - 3.0 * swap.std_error - 1e-12,
        bound_identity_holds: 2.0 * (1.0 - ov) >= 1.0 - ov * ov - 1e-12,
        total_shots: swap.shots,
        seeds: SeedRecord { swap_test: plan.seed },
        swap_test: swap,
        cost: cost_model(&query)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnSettings {
    pub pipeline: PipelineSettings,
    pub m_prime: usize,
    /// Support sampling uses `⌈α·M′·ln(M′+1)⌉` shots.
    pub alpha: f64,
    /// Tomography accuracy target.
    pub epsilon: f64,
    pub budget_constants: BudgetConstants,
    pub reference_factor: f64,
    pub swap_shots: u64,
}

impl LearnSettings {
    pub fn new(m_prime: usize) -> Self {
        Self {
            pipeline: PipelineSettings::default(),
            m_prime,
            alpha: DEFAULT_SUPPORT_ALPHA,
            epsilon: 0.05,
            budget_constants: BudgetConstants::default(),
            reference_factor: DEFAULT_REFERENCE_FACTOR,
            swap_shots: 10_000,
        }
    }
}

pub fn support_shots(m_prime: usize, alpha: f64) -> u64 {
    let m = m_prime as f64;
    (alpha * m * (m + 1.0).ln() - 1e-9).ceil().max(1.0) as u64
}

/// The `m_prime` largest counts, ties to the smaller index, ascending.
pub fn top_support(counts: &[u64], m_prime: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut support: Vec<usize> = order.into_iter().take(m_prime).collect();
    support.sort_unstable();
    support
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnSeeds {
    pub support_sampling: u64,
    pub tomography: u64,
    pub reduced_swap_test: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnReport {
    pub m_prime: usize,
    pub lambda_oracle_fidelity: f64,
    pub support_shots: u64,
    /// Counts per fit function; data-sector outcomes are discarded.
    pub histogram: Vec<u64>,
    pub discarded_shots: u64,
    pub support: Vec<usize>,
    pub reconstruction: ReconstructedState,
    pub reduced_fit: FitReport,
    pub reduced_exact: ExactFitQuality,
    pub full_exact: ExactFitQuality,
    /// Growth of the normalized residual caused by dropping fit functions.
    pub residual_increase: f64,
    pub degraded: bool,
    pub seeds: LearnSeeds,
    pub cost: CostReport,
}

/// Residual growth below this is not reported as degradation.
const DEGRADATION_TOL: f64 = 1e-9;

/// Learns a fit restricted to the `m_prime` most relevant fit functions.
pub fn algorithm3_learn(problem: &FitProblem, settings: &LearnSettings, seed: u64) -> Result<LearnReport> {
    let m = problem.m();
    let m_prime = settings.m_prime;
    if m_prime == 0 || m_prime > m {
        return Err(QfitError::InvalidConfig(format!("mPrime = {m_prime} must lie in 1..={m}")));
    }
    if !(settings.alpha > 0.0 && settings.alpha.is_finite()) {
        return Err(QfitError::InvalidConfig(format!("support sampling constant {}", settings.alpha)));
    }
    let seeds = LearnSeeds {
        support_sampling: stream_seed(seed, SeedStream::SupportSampling),
        tomography: stream_seed(seed, SeedStream::Tomography),
        reduced_swap_test: stream_seed(seed, SeedStream::ReducedSwapTest),
    };

    let lambda = algorithm1_prepare_lambda(problem, &settings.pipeline)?;
    let shots = support_shots(m_prime, settings.alpha);
    let counts = measure_computational(&QuantumState::from_system(&lambda.run.state)?, shots, seeds.support_sampling)?;
    let histogram = counts[..m].to_vec();
    let discarded_shots = counts[m..].iter().sum();
    let support = top_support(&histogram, m_prime);

    let reduced = problem.restrict_columns(&support)?;
    let reduced_lambda = algorithm1_prepare_lambda(&reduced, &settings.pipeline)?;
    let prepared = reduced_lambda.parameters(m_prime)?;
    let budget = plan_budget_with(m_prime, settings.epsilon, settings.budget_constants)?;
    let options = TomographyOptions { reference_factor: settings.reference_factor };
    let oracle = normalized(&classical_fit(&reduced)?.lambda)?;
    let reconstruction = reconstruct_pure_state(&prepared, &budget, seeds.tomography, &options)?.with_oracle(&oracle);

    let reduced_fit = algorithm2_fit_quality(&reduced, &settings.pipeline, &SwapTestPlan::new(settings.swap_shots, seeds.reduced_swap_test))?;
    let reduced_exact = reduced_fit.exact;
    let full_exact = exact_fit_quality(problem)?;
    let residual_increase = reduced_exact.normalized_residual - full_exact.normalized_residual;

    let cond = problem.condition();
    let query = CostQuery {
        delta: (1.0 / (settings.swap_shots as f64).sqrt()).min(1.0),
        m_prime: m_prime as u64,
        ..CostQuery::new(
            CostAlgorithm::Alg3,
            problem.n() as u64,
            problem.sparsity().s as u64,
            cond.kappa,
            settings.epsilon.min(1.0),
        )
    };
    Ok(LearnReport {
        m_prime,
        lambda_oracle_fidelity: lambda.oracle_fidelity,
        support_shots: shots,
        histogram,
        discarded_shots,
        support,
        reconstruction,
        reduced_fit,
        reduced_exact,
        full_exact,
        residual_increase,
        degraded: residual_increase > DEGRADATION_TOL,
        seeds,
        cost: cost_model(&query)?,
    })
}

/// Normalized `F⁺y` padded to the system register, for comparisons.
pub fn lambda_oracle_state(problem: &FitProblem) -> Result<CVector> {
    normalized(&lambda_reference(problem)?)
}

/// `(0, P_col(F) y)` normalized: the ideal fitted state.
pub fn fitted_oracle_state(problem: &FitProblem) -> Result<CVector> {
    let fitted = classical_fit(problem)?.fitted_vector;
    let mut padded = CVector::zeros(problem.m() + problem.n());
    padded.rows_mut(problem.m(), problem.n()).copy_from(&fitted);
    normalized(&padded)
}

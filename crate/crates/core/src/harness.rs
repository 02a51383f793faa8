//! Command layer behind the `qfit` binary: versioned report files that
//! embed the configuration needed to regenerate them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    algorithm1_prepare_lambda, algorithm2_fit_quality, algorithm3_learn, AutoValue, FitReport, LearnReport,
    LearnSettings, PipelineSettings, PipelineVariant, DEFAULT_EPSILON, DEFAULT_SUPPORT_ALPHA,
};
use crate::cost::{cost_model, CostAlgorithm, CostQuery, CostReport};
use crate::error::{QfitError, Result};
use crate::linalg::CVector;
use crate::problem::{classical_fit, generate_problem, FitProblem, FitSolution, ProblemKind, ProblemSpec};
use crate::qsim::{ClockWindow, SwapTestPlan, DEFAULT_CLOCK_SIZE};
use crate::seed::{stream_seed, SeedStream};
use crate::serde_complex;
use crate::tomography::{BudgetConstants, DEFAULT_REFERENCE_FACTOR};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "QFIT_SEED";

/// A report together with the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile<C, R> {
    pub schema_version: u32,
    pub command: String,
    pub config: C,
    pub report: R,
}

impl<C, R> ReportFile<C, R> {
    fn new(command: &str, config: C, report: R) -> Self {
        Self { schema_version: REPORT_SCHEMA_VERSION, command: command.to_string(), config, report }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `{"schemaVersion": 1, "error": {"kind": ..., "message": ...}}`.
pub fn error_json(err: &QfitError) -> String {
    serde_json::json!({
        "schemaVersion": REPORT_SCHEMA_VERSION,
        "error": { "kind": err.kind(), "message": err.to_string() },
    })
    .to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenerateConfig {
    pub spec: ProblemSpec,
    pub seed: u64,
}

pub fn cmd_generate(config: &GenerateConfig) -> Result<FitProblem> {
    generate_problem(&config.spec, config.seed)
}

pub fn load_problem(path: &Path) -> Result<FitProblem> {
    read_json(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub problem: PathBuf,
    pub clock_size: usize,
    pub evolution_time: AutoValue,
    pub rotation_constant: AutoValue,
    pub variant: PipelineVariant,
    pub window: ClockWindow,
    pub shots: u64,
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub m_prime: Option<usize>,
    pub alpha: f64,
    pub tomography_epsilon: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: impl Into<PathBuf>, seed: u64) -> Self {
        Self {
            problem: problem.into(),
            clock_size: DEFAULT_CLOCK_SIZE,
            evolution_time: AutoValue::Auto,
            rotation_constant: AutoValue::Auto,
            variant: PipelineVariant::default(),
            window: ClockWindow::Sine,
            shots: 10_000,
            delta: None,
            epsilon: DEFAULT_EPSILON,
            m_prime: None,
            alpha: DEFAULT_SUPPORT_ALPHA,
            tomography_epsilon: 0.05,
            seed,
            output: None,
        }
    }

    pub fn pipeline(&self) -> PipelineSettings {
        PipelineSettings {
            variant: self.variant,
            clock_size: self.clock_size,
            evolution_time: self.evolution_time,
            rotation_constant: self.rotation_constant,
            epsilon: self.epsilon,
            window: self.window,
        }
    }

    pub fn swap_plan(&self) -> SwapTestPlan {
        SwapTestPlan { shots: self.shots, delta: self.delta, seed: stream_seed(self.seed, SeedStream::SwapTest) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LambdaSummary {
    /// Parameter-sector amplitudes of the prepared state, renormalized.
    #[serde(with = "serde_complex::dvector")]
    pub amplitudes: CVector,
    pub oracle_fidelity: f64,
    pub data_sector_weight: f64,
    pub success_probabilities: Vec<f64>,
    pub clock_residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub lambda: LambdaSummary,
    pub fit: FitReport,
}

pub type RunReportFile = ReportFile<RunConfig, RunReport>;

/// Algorithm 1 followed by the swap-test fit-quality estimate.
pub fn cmd_run(config: &RunConfig) -> Result<RunReportFile> {
    let problem = load_problem(&config.problem)?;
    let pipeline = config.pipeline();
    let lambda = algorithm1_prepare_lambda(&problem, &pipeline)?;
    let fit = algorithm2_fit_quality(&problem, &pipeline, &config.swap_plan())?;
    let summary = LambdaSummary {
        amplitudes: lambda.parameters(problem.m())?,
        oracle_fidelity: lambda.oracle_fidelity,
        data_sector_weight: lambda.data_sector_weight,
        success_probabilities: lambda.run.success_probabilities(),
        clock_residuals: lambda.run.stages.iter().map(|s| s.clock_residual).collect(),
    };
    Ok(ReportFile::new("run", config.clone(), RunReport { lambda: summary, fit }))
}

pub type LearnReportFile = ReportFile<RunConfig, LearnReport>;

pub fn cmd_learn(config: &RunConfig) -> Result<LearnReportFile> {
    let problem = load_problem(&config.problem)?;
    let m_prime = config.m_prime.ok_or_else(|| QfitError::InvalidConfig("learn needs mPrime".into()))?;
    let settings = LearnSettings {
        pipeline: config.pipeline(),
        m_prime,
        alpha: config.alpha,
        epsilon: config.tomography_epsilon,
        budget_constants: BudgetConstants::default(),
        reference_factor: DEFAULT_REFERENCE_FACTOR,
        swap_shots: config.shots,
    };
    let report = algorithm3_learn(&problem, &settings, config.seed)?;
    Ok(ReportFile::new("learn", config.clone(), report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleConfig {
    pub problem: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    /// Solution of the normalized problem.
    pub normalized: FitSolution,
    /// Parameters of the problem before normalization.
    #[serde(with = "serde_complex::dvector")]
    pub lambda_original: CVector,
    pub residual_energy_original: f64,
}

pub type OracleReportFile = ReportFile<OracleConfig, OracleReport>;

pub fn cmd_oracle(config: &OracleConfig) -> Result<OracleReportFile> {
    let problem = load_problem(&config.problem)?;
    let solution = classical_fit(&problem)?;
    let report = OracleReport {
        lambda_original: problem.unnormalize_lambda(&solution.lambda),
        residual_energy_original: problem.unnormalize_residual(solution.residual_energy),
        normalized: solution,
    };
    Ok(ReportFile::new("oracle", config.clone(), report))
}

/// Cost query where every numeric parameter may list several values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CostConfig {
    pub algorithm: CostAlgorithm,
    pub n: Vec<u64>,
    pub s: Vec<u64>,
    pub kappa: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    pub m_prime: Vec<u64>,
    pub amplitude_amplification: bool,
}

impl CostConfig {
    /// Cartesian product of the listed values, `n` varying slowest.
    pub fn queries(&self) -> Vec<CostQuery> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &s in &self.s {
                for &kappa in &self.kappa {
                    for &epsilon in &self.epsilon {
                        for &delta in &self.delta {
                            for &m_prime in &self.m_prime {
                                out.push(CostQuery {
                                    n,
                                    s,
                                    kappa,
                                    epsilon,
                                    delta,
                                    m_prime,
                                    algorithm: self.algorithm,
                                    amplitude_amplification: self.amplitude_amplification,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub type CostReportFile = ReportFile<CostConfig, Vec<CostReport>>;

pub fn cmd_cost(config: &CostConfig) -> Result<CostReportFile> {
    let queries = config.queries();
    if queries.is_empty() {
        return Err(QfitError::InvalidConfig("cost sweep has no points".into()));
    }
    let reports = queries.iter().map(cost_model).collect::<Result<Vec<_>>>()?;
    Ok(ReportFile::new("cost", config.clone(), reports))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CostRow {
    algorithm: CostAlgorithm,
    n: u64,
    s: u64,
    kappa: f64,
    epsilon: f64,
    delta: f64,
    m_prime: u64,
    amplitude_amplification: bool,
    queries: f64,
    repetitions: f64,
}

/// One CSV row per evaluated query.
pub fn write_cost_csv(reports: &[CostReport], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in reports {
        let q = r.query;
        writer
            .serialize(CostRow {
                algorithm: q.algorithm,
                n: q.n,
                s: q.s,
                kappa: q.kappa,
                epsilon: q.epsilon,
                delta: q.delta,
                m_prime: q.m_prime,
                amplitude_amplification: q.amplitude_amplification,
                queries: r.queries,
                repetitions: r.repetitions.total_selected,
            })
            .map_err(|e| QfitError::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

/// Problem family names accepted on the command line.
pub fn problem_kind(name: &str) -> Result<ProblemKind> {
    match name {
        "identity" => Ok(ProblemKind::Identity),
        "poly" | "polynomial" => Ok(ProblemKind::Polynomial),
        "fourier" => Ok(ProblemKind::Fourier),
        "random" => Ok(ProblemKind::Random),
        other => Err(QfitError::InvalidSpec(format!("unknown problem kind {other:?}"))),
    }
}

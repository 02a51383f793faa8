use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qfit::algorithms::{AutoValue, PipelineVariant};
use qfit::cost::CostAlgorithm;
use qfit::harness::{
    cmd_cost, cmd_generate, cmd_learn, cmd_oracle, cmd_run, emit, error_json, problem_kind,
    to_json, write_cost_csv, CostConfig, GenerateConfig, OracleConfig, RunConfig, SEED_ENV,
};
use qfit::problem::ProblemSpec;
use qfit::qsim::ClockWindow;
use qfit::Result;

#[derive(Parser)]
#[command(name = "qfit", version, about = "Simulated quantum least-squares fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic problem file.
    Generate(GenerateArgs),
    /// Prepare the fit-parameter state and estimate fit quality.
    Run(RunArgs),
    /// Learn a fit restricted to the most relevant fit functions.
    Learn(LearnArgs),
    /// Solve the problem classically.
    Oracle(OracleArgs),
    /// Evaluate the query-cost model.
    Cost(CostArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    /// identity, poly, fourier or random.
    #[arg(long, default_value = "random")]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Comma-separated planted support, e.g. `2,5`.
    #[arg(long, value_delimiter = ',')]
    planted: Option<Vec<usize>>,
    #[arg(long, requires = "planted")]
    mass: Option<f64>,
    /// Target condition number.
    #[arg(long)]
    condition: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Paper,
    Fused,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Sine,
    Rectangular,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Clock register size T.
    #[arg(long, default_value_t = qfit::qsim::DEFAULT_CLOCK_SIZE)]
    clock: usize,
    /// Evolution time t0, or `auto`.
    #[arg(long, default_value = "auto")]
    t0: AutoValue,
    /// Rotation constant C, or `auto`.
    #[arg(long, default_value = "auto")]
    c: AutoValue,
    #[arg(long, value_enum, default_value = "paper")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "sine")]
    window: WindowArg,
    /// Swap-test shots; defaults to ⌈1/δ²⌉ when --delta is given, else 10000.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = qfit::algorithms::DEFAULT_EPSILON)]
    epsilon: f64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> RunConfig {
        let mut config = RunConfig::new(&self.problem, self.seed.seed);
        config.clock_size = self.clock;
        config.evolution_time = self.t0;
        config.rotation_constant = self.c;
        config.variant = match self.variant {
            VariantArg::Paper => PipelineVariant::PaperFaithful3Stage,
            VariantArg::Fused => PipelineVariant::FusedInverse,
        };
        config.window = match self.window {
            WindowArg::Sine => ClockWindow::Sine,
            WindowArg::Rectangular => ClockWindow::Rectangular,
        };
        config.delta = self.delta;
        config.shots = match (self.shots, self.delta) {
            (Some(s), _) => s,
            (None, Some(d)) if d > 0.0 => (1.0 / (d * d) - 1e-9).ceil() as u64,
            _ => config.shots,
        };
        config.epsilon = self.epsilon;
        config.output = self.out.clone();
        config
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Number of fit functions to keep.
    #[arg(long)]
    m_prime: usize,
    /// Support sampling constant.
    #[arg(long, default_value_t = qfit::algorithms::DEFAULT_SUPPORT_ALPHA)]
    alpha: f64,
    /// Tomography accuracy target.
    #[arg(long, default_value_t = 0.05)]
    tomography_epsilon: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Eq3,
    Eq4,
    Alg2,
    Alg3,
}

#[derive(Args)]
struct CostArgs {
    /// Values may be comma-separated lists; the sweep covers every combination.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    s: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    kappa: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    m_prime: Vec<u64>,
    #[arg(long, value_enum, default_value = "eq3")]
    alg: AlgArg,
    /// Count repetitions without amplitude amplification.
    #[arg(long)]
    no_amplification: bool,
    /// Also write the sweep as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => {
            let mut spec = ProblemSpec::new(a.n, a.m, problem_kind(&a.kind)?).with_noise(a.noise);
            spec.planted_support = a.planted;
            spec.planted_mass = spec.planted_support.as_ref().map(|_| a.mass.unwrap_or(0.9));
            spec.condition_target = a.condition;
            let problem = cmd_generate(&GenerateConfig { spec, seed: a.seed.seed })?;
            emit(&to_json(&problem)?, a.out.as_deref())
        }
        Command::Run(a) => {
            let config = a.pipeline.config();
            emit(&to_json(&cmd_run(&config)?)?, config.output.as_deref())
        }
        Command::Learn(a) => {
            let mut config = a.pipeline.config();
            config.m_prime = Some(a.m_prime);
            config.alpha = a.alpha;
            config.tomography_epsilon = a.tomography_epsilon;
            emit(&to_json(&cmd_learn(&config)?)?, config.output.as_deref())
        }
        Command::Oracle(a) => emit(&to_json(&cmd_oracle(&OracleConfig { problem: a.problem })?)?, a.out.as_deref()),
        Command::Cost(a) => {
            let config = CostConfig {
                algorithm: match a.alg {
                    AlgArg::Eq3 => CostAlgorithm::Alg1Eq3,
                    AlgArg::Eq4 => CostAlgorithm::Alg1Eq4,
                    AlgArg::Alg2 => CostAlgorithm::Alg2,
                    AlgArg::Alg3 => CostAlgorithm::Alg3,
                },
                n: a.n,
                s: a.s,
                kappa: a.kappa,
                epsilon: a.eps,
                delta: a.delta,
                m_prime: a.m_prime,
                amplitude_amplification: !a.no_amplification,
            };
            let file = cmd_cost(&config)?;
            if let Some(path) = &a.csv {
                write_cost_csv(&file.report, std::fs::File::create(path)?)?;
            }
            emit(&to_json(&file)?, a.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::FAILURE
        }
    }
}

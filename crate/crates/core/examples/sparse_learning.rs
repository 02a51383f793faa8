//! Recovering the two relevant fit functions out of eight and refitting on
//! them alone.

use qfit::algorithms::{algorithm3_learn, LearnSettings};
use qfit::problem::{generate_problem, ProblemKind, ProblemSpec};

fn main() -> qfit::Result<()> {
    let spec = ProblemSpec::new(16, 8, ProblemKind::Random).with_condition(2.0).planted(vec![2, 5], 0.99);
    let problem = generate_problem(&spec, 7)?;
    let mut settings = LearnSettings::new(2);
    settings.pipeline.clock_size = 256;

    let r = algorithm3_learn(&problem, &settings, 11)?;
    println!("histogram over fit functions: {:?} ({} data-sector shots discarded)", r.histogram, r.discarded_shots);
    println!("support {:?} from {} shots", r.support, r.support_shots);
    println!(
        "tomography: {} settings x {} shots, fidelity {:.4}",
        r.reconstruction.budget.settings,
        r.reconstruction.budget.shots_per_setting,
        r.reconstruction.fidelity_vs_oracle.unwrap_or(f64::NAN)
    );
    println!(
        "normalized residual: full {:.5}, reduced {:.5}, degraded {}",
        r.full_exact.normalized_residual, r.reduced_exact.normalized_residual, r.degraded
    );
    Ok(())
}

//! Infidelity of the prepared parameter state as the clock and the accuracy
//! target tighten together, written as CSV on stdout. With a fixed accuracy
//! target the automatic evolution time stays put and a larger clock alone
//! stops helping; the second block shows that plateau.

use qfit::algorithms::{algorithm1_prepare_lambda, AutoValue, PipelineSettings, PipelineVariant};
use qfit::problem::{generate_problem, ProblemKind, ProblemSpec};

fn main() -> qfit::Result<()> {
    let problem = generate_problem(&ProblemSpec::new(10, 4, ProblemKind::Random).with_condition(3.0), 3)?;
    println!("variant,clock,epsilon,infidelity");
    for scale_epsilon in [true, false] {
        for variant in [PipelineVariant::PaperFaithful3Stage, PipelineVariant::FusedInverse] {
            for log_t in 6..=12 {
                let clock = 1usize << log_t;
                let mut settings = PipelineSettings::default().with_variant(variant).with_clock(clock, AutoValue::Auto);
                if scale_epsilon {
                    settings.epsilon = 0.1 * 64.0 / clock as f64;
                }
                let out = algorithm1_prepare_lambda(&problem, &settings)?;
                println!("{variant:?},{clock},{:.3e},{:.3e}", settings.epsilon, 1.0 - out.oracle_fidelity);
            }
        }
    }
    Ok(())
}

//! Both pipeline variants on F = (1, 1)/sqrt(2), y = (0, 1), with a clock on
//! which the eigenvalues are exact, and with the default accuracy settings.

use std::f64::consts::PI;

use num_complex::Complex64;
use qfit::algorithms::{algorithm1_prepare_lambda, AutoValue, PipelineSettings, PipelineVariant};
use qfit::linalg::{CVector, ComplexMatrix};
use qfit::problem::normalize_problem;
use qfit::qsim::ClockWindow;

fn main() -> qfit::Result<()> {
    let f = ComplexMatrix::from_real_rows(&[&[1.0], &[1.0]])?;
    let y = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let problem = normalize_problem(&f, &y)?;

    let exact_clock = PipelineSettings::default().with_clock(8, AutoValue::Value(4.0 * PI)).with_window(ClockWindow::Rectangular);
    for settings in [exact_clock, PipelineSettings::default()] {
        for variant in [PipelineVariant::PaperFaithful3Stage, PipelineVariant::FusedInverse] {
            let out = algorithm1_prepare_lambda(&problem, &settings.with_variant(variant))?;
            println!(
                "T={:4} {:?} {variant:?}: fidelity {:.10}, stages {:?}",
                settings.clock_size,
                settings.window,
                out.oracle_fidelity,
                out.run.stages.iter().map(|s| (s.mode.name(), s.success_probability)).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}

//! Swap-test estimate of fit quality and the resulting residual bound,
//! repeated over several seeds.

use num_complex::Complex64;
use qfit::algorithms::{algorithm2_fit_quality, PipelineSettings};
use qfit::linalg::{CVector, ComplexMatrix};
use qfit::problem::normalize_problem;
use qfit::qsim::SwapTestPlan;

fn main() -> qfit::Result<()> {
    let f = ComplexMatrix::from_real_rows(&[&[1.0], &[1.0]])?;
    let y = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let problem = normalize_problem(&f, &y)?;

    println!("seed  overlap^2  stderr   eBound   exact E");
    for seed in 0..5 {
        let r = algorithm2_fit_quality(&problem, &PipelineSettings::default(), &SwapTestPlan::for_accuracy(0.01, seed)?)?;
        println!(
            "{seed:4}  {:.4}     {:.4}   {:.4}   {:.4}",
            r.overlap_sq_estimate, r.std_error, r.e_bound, r.e_exact_reference
        );
    }
    Ok(())
}

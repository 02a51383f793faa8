//! Quadratic fit to noisy samples: classical answer versus the simulated
//! quantum state for the fit parameters.

use qfit::algorithms::{algorithm1_prepare_lambda, PipelineSettings};
use qfit::problem::{build_design_matrix, classical_fit, DataSet, FitBasis, FitProblem};

fn main() -> qfit::Result<()> {
    let xs: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
    let noise = [0.01, -0.02, 0.015, 0.0, -0.01, 0.02, -0.005, 0.01];
    let ys: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| 0.5 - x + 2.0 * x * x + e).collect();

    let data = DataSet::from_real(&xs, &ys)?;
    let basis = FitBasis::Polynomial { m: 3 };
    let f = build_design_matrix(&data, &basis)?;
    let problem = FitProblem::new(data.clone(), basis, &f, &data.ordinates(), None)?;

    let exact = classical_fit(&problem)?;
    let coefficients = problem.unnormalize_lambda(&exact.lambda);
    println!("classical coefficients: {:.4?}", coefficients.iter().map(|c| c.re).collect::<Vec<_>>());
    println!("kappa {:.2}", problem.condition().kappa);

    let state = algorithm1_prepare_lambda(&problem, &PipelineSettings::default())?;
    let lambda = state.parameters(problem.m())?;
    println!("simulated direction:    {:.4?}", lambda.iter().map(|c| c.re).collect::<Vec<_>>());
    println!("fidelity with F+y: {:.6}", state.oracle_fidelity);
    println!("success probabilities: {:.4?}", state.run.success_probabilities());
    Ok(())
}

//! One phase-estimation pass applying 1/x to a diagonal operator, with both
//! clock windows, on eigenvalues that do and do not sit on clock bins.

use std::f64::consts::PI;

use num_complex::Complex64;
use qfit::linalg::CVector;
use qfit::qsim::{apply_hermitian_via_pe, ClockWindow, PhaseEstimationConfig, PhaseMode, SpectralOperator};

fn main() -> qfit::Result<()> {
    let psi = CVector::from_element(4, Complex64::new(0.5, 0.0));
    for (label, eigen) in [("on bins", vec![1.0, -1.0, 0.5, -0.5]), ("off bins", vec![0.9, -0.8, 0.45, -0.6])] {
        let op = SpectralOperator::diagonal(eigen.clone());
        for window in [ClockWindow::Rectangular, ClockWindow::Sine] {
            let config = PhaseEstimationConfig::new(16, 4.0 * PI, 0.4, PhaseMode::Invert).with_window(window);
            let out = apply_hermitian_via_pe(&psi, &op, &config)?;
            let ideal: Vec<f64> = eigen.iter().map(|e| 0.4 / e).collect();
            let got: Vec<f64> = out.state.iter().map(|a| a.re).collect();
            println!(
                "{label:9} {window:?}: success {:.4}, clock residual {:.2e}\n  state {got:.4?}\n  ideal {ideal:.4?} (unnormalized)",
                out.success_probability, out.clock_residual
            );
        }
    }
    Ok(())
}

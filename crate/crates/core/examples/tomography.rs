//! Pure-state reconstruction from computational and interference
//! measurements at several accuracy targets.

use num_complex::Complex64;
use qfit::linalg::{fidelity, CVector};
use qfit::tomography::{plan_budget, reconstruct_pure_state, TomographyOptions};

fn main() -> qfit::Result<()> {
    let c = Complex64::new;
    let state = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.48), c(-0.36, 0.2), c(0.1, -0.4829)]);
    let state = &state / c(state.norm(), 0.0);
    for epsilon in [0.2, 0.1, 0.05, 0.02] {
        let budget = plan_budget(4, epsilon)?;
        let r = reconstruct_pure_state(&state, &budget, 1, &TomographyOptions { reference_factor: 1.0 })?;
        println!(
            "eps {epsilon:<5} {:3} settings x {:6} shots  reference {}  fidelity {:.5}",
            budget.settings,
            budget.shots_per_setting,
            r.reference_index,
            fidelity(&r.amplitudes, &state)
        );
    }
    Ok(())
}

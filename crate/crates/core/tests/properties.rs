use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use qfit::algorithms::{algorithm1_prepare_lambda, AutoValue, PipelineSettings};
use qfit::cost::{cost_model, CostAlgorithm, CostQuery};
use qfit::linalg::{embed, fidelity, pseudoinverse, vector_norm, CVector, ComplexMatrix};
use qfit::problem::{classical_fit, normalize_problem, FitProblem};
use qfit::qsim::{
    conditional_evolution, inverse_conditional_evolution, prepare_clock, qft_clock, swap_test, ClockWindow,
    PhaseEstimationConfig, PhaseMode, QftDirection, QuantumState, SpectralOperator, SwapTestPlan,
};
use qfit::tomography::{canonicalize, plan_budget, reconstruct_pure_state, TomographyOptions};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector(len: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(complex(), len)
        .prop_filter("non-zero", |v| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(CVector::from_vec)
}

/// A tall matrix with a well-separated smallest singular value, plus data.
fn problem_input() -> impl Strategy<Value = (ComplexMatrix, CVector)> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(m, extra)| {
        let n = m + extra;
        (prop::collection::vec(complex(), n * m), vector(n)).prop_filter_map("ill conditioned", move |(entries, y)| {
            let f = ComplexMatrix::from_row_major(n, m, entries).ok()?;
            let sv = f.singular_values();
            (sv[m - 1] > 0.05 * sv[0]).then_some((f, y))
        })
    })
}

fn normalize(v: CVector) -> CVector {
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_hermitian_and_chiral((f, _) in problem_input()) {
        let h = embed(&f).unwrap();
        let mat = h.matrix().as_dmatrix();
        prop_assert!((mat - mat.adjoint()).norm() < 1e-14);
        let (m, n) = (f.cols(), f.rows());
        let parity = DMatrix::<Complex64>::from_fn(m + n, m + n, |i, j| {
            if i != j { Complex64::new(0.0, 0.0) } else if i < m { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) }
        });
        prop_assert!((&parity * mat * &parity + mat).norm() < 1e-14);
    }

    #[test]
    fn pseudoinverse_satisfies_penrose_conditions((f, _) in problem_input()) {
        let a = f.as_dmatrix();
        let p = pseudoinverse(&f).unwrap().into_dmatrix();
        let scale = a.norm() * p.norm();
        prop_assert!((a * &p * a - a).norm() <= 1e-10 * scale * a.norm());
        prop_assert!((&p * a * &p - &p).norm() <= 1e-10 * scale * p.norm());
        let ap = a * &p;
        prop_assert!((&ap - ap.adjoint()).norm() <= 1e-10 * scale);
        let pa = &p * a;
        prop_assert!((&pa - pa.adjoint()).norm() <= 1e-10 * scale);
    }

    #[test]
    fn rescaled_problems_share_their_normalized_form((f, y) in problem_input(), a in 0.1..10.0f64, b in 0.1..10.0f64) {
        let base = normalize_problem(&f, &y).unwrap();
        let scaled = normalize_problem(&f.scaled(a), &(&y * Complex64::new(b, 0.0))).unwrap();
        prop_assert!((base.design_matrix().as_dmatrix() - scaled.design_matrix().as_dmatrix()).norm() < 1e-12);
        prop_assert!((base.y() - scaled.y()).norm() < 1e-12);
        let l0 = base.unnormalize_lambda(&classical_fit(&base).unwrap().lambda);
        let l1 = scaled.unnormalize_lambda(&classical_fit(&scaled).unwrap().lambda);
        prop_assert!((&l0 * Complex64::new(b / a, 0.0) - l1).norm() <= 1e-9 * (1.0 + l0.norm() * b / a));
    }

    #[test]
    fn phase_estimation_operations_preserve_norm(psi in vector(4), log_t in 2u32..6, t0 in 0.1..20.0f64, eigen in prop::collection::vec(-1.0..1.0f64, 4)) {
        let clock = 1usize << log_t;
        let op = SpectralOperator::diagonal(eigen);
        let config = PhaseEstimationConfig::new(clock, t0, 1.0, PhaseMode::Multiply);
        let state = prepare_clock(&QuantumState::from_system(&normalize(psi)).unwrap().with_clock(clock).unwrap(), ClockWindow::Sine).unwrap();
        prop_assert!((state.norm_squared() - 1.0).abs() < 1e-12);
        let evolved = conditional_evolution(&state, &op, &config).unwrap();
        prop_assert!((evolved.norm_squared() - 1.0).abs() < 1e-12);
        let transformed = qft_clock(&evolved, QftDirection::Forward);
        prop_assert!((transformed.norm_squared() - 1.0).abs() < 1e-12);
        let back = qft_clock(&transformed, QftDirection::Inverse);
        let undone = inverse_conditional_evolution(&back, &op, &config).unwrap();
        let diff: f64 = undone.amplitudes().iter().zip(state.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
        prop_assert!(diff.sqrt() < 1e-10);
    }

    #[test]
    fn swap_test_tracks_overlap(a in vector(3), b in vector(3), seed in any::<u64>()) {
        let (a, b) = (normalize(a), normalize(b));
        let overlap = a.dotc(&b).norm_sqr();
        let r = swap_test(&a, &b, &SwapTestPlan::new(20_000, seed)).unwrap();
        prop_assert!((r.p_one_exact - (1.0 - overlap) / 2.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.overlap_sq_estimate));
        prop_assert!((r.p_one_estimate - r.p_one_exact).abs() < 6.0 * (0.25f64 / 20_000.0).sqrt());
    }

    #[test]
    fn canonicalize_is_idempotent_and_phase_blind(v in vector(5), phase in 0.0..(2.0 * PI)) {
        let once = canonicalize(&v);
        prop_assert!((canonicalize(&once) - &once).norm() < 1e-12);
        let rotated = &v * Complex64::from_polar(1.0, phase);
        prop_assert!((canonicalize(&rotated) - &once).norm() < 1e-12);
        prop_assert!((vector_norm(&once) - vector_norm(&v)).abs() < 1e-12);
    }

    #[test]
    fn cost_grows_with_every_parameter(
        n in 2u64..1_000_000, s in 1u64..16, kappa in 1.0..50.0f64,
        epsilon in 0.01..1.0f64, delta in 0.01..1.0f64, m_prime in 1u64..16, factor in 1.01..3.0f64,
    ) {
        let base = CostQuery { n, s, kappa, epsilon, delta, m_prime, algorithm: CostAlgorithm::Alg3, amplitude_amplification: true };
        for alg in CostAlgorithm::ALL {
            let q = CostQuery { algorithm: alg, ..base };
            let v = cost_model(&q).unwrap().queries;
            let bigger = [
                CostQuery { n: n * 2, ..q },
                CostQuery { s: s + 1, ..q },
                CostQuery { kappa: kappa * factor, ..q },
                CostQuery { epsilon: epsilon / factor, ..q },
                CostQuery { delta: delta / factor, ..q },
                CostQuery { m_prime: m_prime + 1, ..q },
            ];
            for b in bigger {
                prop_assert!(cost_model(&b).unwrap().queries >= v);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn larger_clocks_do_not_lose_fidelity((f, y) in problem_input()) {
        let problem: FitProblem = normalize_problem(&f, &y).unwrap();
        prop_assume!(problem.y().norm() > 0.0);
        let run = |t: usize| algorithm1_prepare_lambda(&problem, &PipelineSettings::default().with_clock(t, AutoValue::Auto));
        let (small, large) = match (run(256), run(2048)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok(()),
        };
        prop_assert!(large.oracle_fidelity >= 0.99);
        prop_assert!(large.oracle_fidelity >= small.oracle_fidelity - 1e-3);
    }
}

#[test]
fn tomography_error_shrinks_with_budget() {
    let v = normalize(CVector::from_vec(vec![
        Complex64::new(0.6, 0.1),
        Complex64::new(-0.2, 0.5),
        Complex64::new(0.3, -0.4),
        Complex64::new(0.1, 0.2),
    ]));
    let median_infidelity = |epsilon: f64| {
        let budget = plan_budget(4, epsilon).unwrap();
        let mut infidelities: Vec<f64> = (0..15)
            .map(|seed| {
                let r = reconstruct_pure_state(&v, &budget, seed, &TomographyOptions { reference_factor: 1.0 }).unwrap();
                1.0 - fidelity(&r.amplitudes, &v)
            })
            .collect();
        infidelities.sort_by(f64::total_cmp);
        infidelities[infidelities.len() / 2]
    };
    let coarse = median_infidelity(0.2);
    let fine = median_infidelity(0.05);
    assert!(fine < coarse, "median infidelity {fine} at ε=0.05 vs {coarse} at ε=0.2");
    assert!(fine <= 5.0 * 0.05);
}

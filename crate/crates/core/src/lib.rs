//! Least-squares curve fitting on a simulated quantum linear-systems
//! pipeline.
//!
//! A fit problem pairs a design matrix `F` (N data points by M fit
//! functions) with data `y`. The quantum routines act on the Hermitian
//! embedding `I(F) = [[0, F†], [F, 0]]` through phase estimation on a dense
//! state vector, and every quantity they produce is checked against the
//! classical pseudoinverse solution `λ = F⁺y`.
//!
//! - [`linalg`]: complex matrices, pseudoinverse, embedding, eigen-decomposition.
//! - [`problem`]: fit problems, normalization, synthetic generators, classical oracle.
//! - [`qsim`]: registers, phase estimation, controlled rotation, swap test.
//! - [`algorithms`]: parameter-state preparation, fit-quality estimation, sparse learning.
//! - [`tomography`]: pure-state reconstruction with a planned shot budget.
//! - [`cost`]: query-cost formulas.
//! - [`harness`]: seeded, self-describing JSON reports behind the `qfit` binary.
//!
//! ```
//! use num_complex::Complex64;
//! use qfit::algorithms::{algorithm1_prepare_lambda, PipelineSettings};
//! use qfit::linalg::{CVector, ComplexMatrix};
//! use qfit::problem::normalize_problem;
//!
//! let f = ComplexMatrix::from_real_rows(&[&[1.0], &[1.0]]).unwrap();
//! let y = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
//! let problem = normalize_problem(&f, &y).unwrap();
//! let state = algorithm1_prepare_lambda(&problem, &PipelineSettings::default()).unwrap();
//! assert!(state.oracle_fidelity > 0.99);
//! ```

pub mod algorithms;
pub mod cost;
pub mod harness;
mod error;
pub mod linalg;
pub mod problem;
pub mod qsim;
pub mod seed;
mod serde_complex;
pub mod tomography;

pub use error::{QfitError, Result};

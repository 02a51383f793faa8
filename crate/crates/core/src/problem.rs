//! Least-squares instances: fit bases, design matrices, normalization and
//! the classical pseudoinverse solution.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QfitError, Result};
use crate::linalg::{c64, condition_estimate, pseudoinverse, CVector, ComplexMatrix, ConditionEstimate, SparsityProfile};
use crate::seed::rng_from_seed;
use crate::serde_complex;

pub const PROBLEM_SCHEMA_VERSION: u32 = 1;

const NORMALIZATION_TOL: f64 = 1e-10;

/// Family of fit functions `f_j`, `j = 0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FitBasis {
    /// `f_j(x) = x^j`.
    Polynomial { m: usize },
    /// `f_j(x) = exp(2πi·j·x)`.
    Fourier { m: usize },
    /// Explicit design matrix; not evaluable from abscissas.
    CustomMatrix { m: usize },
}

impl FitBasis {
    pub fn m(&self) -> usize {
        match *self {
            FitBasis::Polynomial { m } | FitBasis::Fourier { m } | FitBasis::CustomMatrix { m } => m,
        }
    }

    fn evaluate(&self, j: usize, x: Complex64) -> Option<Complex64> {
        match self {
            FitBasis::Polynomial { .. } => Some(if j == 0 { c64(1.0, 0.0) } else { x.powu(j as u32) }),
            FitBasis::Fourier { .. } => {
                Some((Complex64::i() * 2.0 * std::f64::consts::PI * j as f64 * x).exp())
            }
            FitBasis::CustomMatrix { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    #[serde(with = "serde_complex::scalar")]
    pub x: Complex64,
    #[serde(with = "serde_complex::scalar")]
    pub y: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    pub points: Vec<DataPoint>,
}

impl DataSet {
    pub fn from_real(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(QfitError::Dimension(format!("{} abscissas, {} ordinates", xs.len(), ys.len())));
        }
        Ok(Self {
            points: xs.iter().zip(ys).map(|(&x, &y)| DataPoint { x: c64(x, 0.0), y: c64(y, 0.0) }).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ordinates(&self) -> CVector {
        CVector::from_iterator(self.len(), self.points.iter().map(|p| p.y))
    }
}

/// `F_ij = f_j(x_i)`.
pub fn build_design_matrix(data: &DataSet, basis: &FitBasis) -> Result<ComplexMatrix> {
    if let FitBasis::CustomMatrix { .. } = basis {
        return Err(QfitError::InvalidSpec("a custom basis carries its own design matrix".into()));
    }
    let (n, m) = (data.len(), basis.m());
    if n == 0 || m == 0 {
        return Err(QfitError::Dimension(format!("{n} points, {m} fit functions")));
    }
    let mut entries = Vec::with_capacity(n * m);
    for p in &data.points {
        for j in 0..m {
            let v = basis.evaluate(j, p.x).unwrap_or(c64(f64::NAN, 0.0));
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(QfitError::BasisEvaluation { x: format!("{}", p.x) });
            }
            entries.push(v);
        }
    }
    ComplexMatrix::from_row_major(n, m, entries)
}

/// Factors applied during normalization: `F ← c_f·F`, `y ← c_y·y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NormScale {
    pub c_f: f64,
    pub c_y: f64,
}

/// A normalized least-squares instance: `‖F†F‖ = 1` and `|y| = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct FitProblem {
    data_set: DataSet,
    basis: FitBasis,
    design_matrix: ComplexMatrix,
    y_vector: CVector,
    norm_scale: NormScale,
    seed: Option<u64>,
}

/// On-disk layout of a problem file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemFile {
    pub schema_version: u32,
    pub data_set: DataSet,
    pub basis: FitBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_matrix: Option<ComplexMatrix>,
    #[serde(with = "serde_complex::dvector")]
    pub y_vector: CVector,
    pub norm_scale: NormScale,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl From<FitProblem> for ProblemFile {
    fn from(p: FitProblem) -> Self {
        ProblemFile {
            schema_version: PROBLEM_SCHEMA_VERSION,
            data_set: p.data_set,
            basis: p.basis,
            design_matrix: Some(p.design_matrix),
            y_vector: p.y_vector,
            norm_scale: p.norm_scale,
            seed: p.seed,
        }
    }
}

impl TryFrom<ProblemFile> for FitProblem {
    type Error = QfitError;

    fn try_from(file: ProblemFile) -> Result<Self> {
        if file.schema_version != PROBLEM_SCHEMA_VERSION {
            return Err(QfitError::Schema(format!(
                "problem schema version {} (expected {PROBLEM_SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let design_matrix = match file.design_matrix {
            Some(f) => f,
            None => build_design_matrix(&file.data_set, &file.basis)?.scaled(file.norm_scale.c_f),
        };
        let problem = FitProblem {
            data_set: file.data_set,
            basis: file.basis,
            design_matrix,
            y_vector: file.y_vector,
            norm_scale: file.norm_scale,
            seed: file.seed,
        };
        problem.check_invariants()?;
        Ok(problem)
    }
}

impl FitProblem {
    /// Normalizes raw data into a problem.
    pub fn new(data_set: DataSet, basis: FitBasis, raw_f: &ComplexMatrix, raw_y: &CVector, seed: Option<u64>) -> Result<Self> {
        if raw_f.rows() != raw_y.len() {
            return Err(QfitError::Dimension(format!("F has {} rows, y has {} entries", raw_f.rows(), raw_y.len())));
        }
        if raw_f.cols() != basis.m() {
            return Err(QfitError::Dimension(format!("F has {} columns, basis has {}", raw_f.cols(), basis.m())));
        }
        let y_norm = crate::linalg::vector_norm(raw_y);
        if y_norm == 0.0 || !y_norm.is_finite() {
            return Err(QfitError::ZeroVector);
        }
        let cond = condition_estimate(raw_f)?;
        let norm_scale = NormScale { c_f: 1.0 / cond.sigma_max, c_y: 1.0 / y_norm };
        let problem = FitProblem {
            data_set,
            basis,
            design_matrix: raw_f.scaled(norm_scale.c_f),
            y_vector: raw_y * c64(norm_scale.c_y, 0.0),
            norm_scale,
            seed,
        };
        problem.check_invariants()?;
        Ok(problem)
    }

    fn check_invariants(&self) -> Result<()> {
        let (n, m) = (self.design_matrix.rows(), self.design_matrix.cols());
        if self.y_vector.len() != n || self.data_set.len() != n || self.basis.m() != m {
            return Err(QfitError::Schema(format!(
                "inconsistent dimensions: F {n}x{m}, y {}, {} points, basis m = {}",
                self.y_vector.len(),
                self.data_set.len(),
                self.basis.m()
            )));
        }
        let cond = condition_estimate(&self.design_matrix)?;
        let gram_norm = cond.sigma_max * cond.sigma_max;
        if (gram_norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QfitError::Schema(format!("‖F†F‖ = {gram_norm} is not normalized")));
        }
        let y_norm = crate::linalg::vector_norm(&self.y_vector);
        if (y_norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QfitError::Schema(format!("|y| = {y_norm} is not normalized")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.design_matrix.rows()
    }

    pub fn m(&self) -> usize {
        self.design_matrix.cols()
    }

    pub fn data_set(&self) -> &DataSet {
        &self.data_set
    }

    pub fn basis(&self) -> &FitBasis {
        &self.basis
    }

    pub fn design_matrix(&self) -> &ComplexMatrix {
        &self.design_matrix
    }

    pub fn y(&self) -> &CVector {
        &self.y_vector
    }

    pub fn norm_scale(&self) -> NormScale {
        self.norm_scale
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn condition(&self) -> ConditionEstimate {
        condition_estimate(&self.design_matrix).expect("normalized problems are well-posed")
    }

    pub fn sparsity(&self) -> SparsityProfile {
        self.design_matrix.sparsity()
    }

    /// `(0, y)` on the embedded `M + N` layout.
    pub fn data_state(&self) -> CVector {
        let mut v = CVector::zeros(self.m() + self.n());
        v.rows_mut(self.m(), self.n()).copy_from(&self.y_vector);
        v
    }

    /// Parameters of the unnormalized problem from those of this one.
    pub fn unnormalize_lambda(&self, lambda: &CVector) -> CVector {
        lambda * c64(self.norm_scale.c_f / self.norm_scale.c_y, 0.0)
    }

    /// Residual energy of the unnormalized problem.
    pub fn unnormalize_residual(&self, residual: f64) -> f64 {
        residual / (self.norm_scale.c_y * self.norm_scale.c_y)
    }

    /// Problem restricted to the given fit functions, renormalized.
    pub fn restrict_columns(&self, columns: &[usize]) -> Result<FitProblem> {
        let sub = self.design_matrix.select_columns(columns)?;
        let cond = condition_estimate(&sub)?;
        let extra = 1.0 / cond.sigma_max;
        let problem = FitProblem {
            data_set: self.data_set.clone(),
            basis: FitBasis::CustomMatrix { m: columns.len() },
            design_matrix: sub.scaled(extra),
            y_vector: self.y_vector.clone(),
            norm_scale: NormScale { c_f: self.norm_scale.c_f * extra, c_y: self.norm_scale.c_y },
            seed: self.seed,
        };
        problem.check_invariants()?;
        Ok(problem)
    }
}

/// Normalizes a bare `(F, y)` pair; abscissas are the row indices.
pub fn normalize_problem(f: &ComplexMatrix, y: &CVector) -> Result<FitProblem> {
    if f.rows() != y.len() {
        return Err(QfitError::Dimension(format!("F has {} rows, y has {} entries", f.rows(), y.len())));
    }
    let data = DataSet {
        points: y.iter().enumerate().map(|(i, &yi)| DataPoint { x: c64(i as f64, 0.0), y: yi }).collect(),
    };
    FitProblem::new(data, FitBasis::CustomMatrix { m: f.cols() }, f, y, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitSolution {
    #[serde(with = "serde_complex::dvector")]
    pub lambda: CVector,
    /// `|Fλ − y|²`.
    pub residual_energy: f64,
    #[serde(with = "serde_complex::dvector")]
    pub fitted_vector: CVector,
}

/// `λ = F⁺y` and its residual energy.
pub fn classical_fit(problem: &FitProblem) -> Result<FitSolution> {
    let f = problem.design_matrix();
    let lambda = pseudoinverse(f)?.apply(problem.y())?;
    let fitted_vector = f.apply(&lambda)?;
    let residual_energy = (&fitted_vector - problem.y()).norm_squared();
    Ok(FitSolution { lambda, residual_energy, fitted_vector })
}

/// Design-matrix family for generated problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ProblemKind {
    /// `[I_M; 0]`.
    Identity,
    /// Monomials at equispaced abscissas on `[-1, 1]`.
    Polynomial,
    /// Fourier modes at `x_i = i/N`.
    Fourier,
    /// Complex Gaussian entries, or a random isometry with log-spaced
    /// singular values when a condition target is set.
    Random,
    /// Random isometry with exactly these singular values.
    Spectrum { singular_values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemSpec {
    pub n: usize,
    pub m: usize,
    pub kind: ProblemKind,
    #[serde(default)]
    pub planted_support: Option<Vec<usize>>,
    #[serde(default)]
    pub planted_mass: Option<f64>,
    #[serde(default)]
    pub condition_target: Option<f64>,
    /// Per-entry standard deviation of the residual noise.
    pub noise: f64,
}

impl ProblemSpec {
    pub fn new(n: usize, m: usize, kind: ProblemKind) -> Self {
        Self { n, m, kind, planted_support: None, planted_mass: None, condition_target: None, noise: 0.1 }
    }

    pub fn planted(mut self, support: Vec<usize>, mass: f64) -> Self {
        self.planted_support = Some(support);
        self.planted_mass = Some(mass);
        self
    }

    pub fn with_condition(mut self, kappa: f64) -> Self {
        self.condition_target = Some(kappa);
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    gaussian_matrix(rng, n, n).qr().q()
}

fn with_singular_values<R: Rng>(rng: &mut R, n: usize, sv: &[f64]) -> Result<ComplexMatrix> {
    let m = sv.len();
    let u = random_unitary(rng, n);
    let w = random_unitary(rng, m);
    let mut core = DMatrix::zeros(n, m);
    for (i, &s) in sv.iter().enumerate() {
        core[(i, i)] = c64(s, 0.0);
    }
    ComplexMatrix::from_dmatrix(u * core * w.adjoint())
}

fn planted_lambda<R: Rng>(rng: &mut R, m: usize, support: &[usize], mass: f64) -> Result<CVector> {
    let mut seen = vec![false; m];
    for &j in support {
        if j >= m || std::mem::replace(&mut seen[j], true) {
            return Err(QfitError::InvalidSpec(format!("planted support {support:?} invalid for m = {m}")));
        }
    }
    if support.is_empty() {
        return Err(QfitError::InvalidSpec("planted support is empty".into()));
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(QfitError::InvalidSpec(format!("planted mass {mass} outside (0, 1]")));
    }
    if support.len() == m && mass < 1.0 {
        return Err(QfitError::InvalidSpec("planted support covers every fit function but mass < 1".into()));
    }
    let mut inside = CVector::zeros(m);
    let mut outside = CVector::zeros(m);
    for j in 0..m {
        if seen[j] {
            let magnitude = rng.random_range(0.5..1.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            inside[j] = Complex64::from_polar(magnitude, phase);
        } else {
            outside[j] = gaussian(rng);
        }
    }
    let mut lambda = &inside * c64((mass / inside.norm_squared()).sqrt(), 0.0);
    if mass < 1.0 {
        lambda += &outside * c64(((1.0 - mass) / outside.norm_squared()).sqrt(), 0.0);
    }
    Ok(lambda)
}

/// Reproducible synthetic problem.
///
/// `y = Fλ* + r` where `r` is complex Gaussian noise projected onto the
/// orthogonal complement of the column space, so `λ*` is exactly the
/// least-squares optimum.
pub fn generate_problem(spec: &ProblemSpec, seed: u64) -> Result<FitProblem> {
    let (n, m) = (spec.n, spec.m);
    if m == 0 || n < m {
        return Err(QfitError::InvalidSpec(format!("need n >= m >= 1, got n = {n}, m = {m}")));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(QfitError::InvalidSpec(format!("noise amplitude {}", spec.noise)));
    }
    if let Some(kappa) = spec.condition_target {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(QfitError::InfeasibleCondition { target: kappa, reason: "condition numbers are at least 1".into() });
        }
    }
    let mut rng = rng_from_seed(seed);
    let index_abscissas = || (0..n).map(|i| c64(i as f64, 0.0)).collect::<Vec<_>>();

    let (xs, basis, f) = match &spec.kind {
        ProblemKind::Identity => {
            let f = ComplexMatrix::from_dmatrix(DMatrix::identity(n, m))?;
            (index_abscissas(), FitBasis::CustomMatrix { m }, f)
        }
        ProblemKind::Polynomial | ProblemKind::Fourier => {
            let (xs, basis): (Vec<Complex64>, FitBasis) = if spec.kind == ProblemKind::Polynomial {
                let step = if n > 1 { 2.0 / (n - 1) as f64 } else { 0.0 };
                ((0..n).map(|i| c64(-1.0 + step * i as f64, 0.0)).collect(), FitBasis::Polynomial { m })
            } else {
                ((0..n).map(|i| c64(i as f64 / n as f64, 0.0)).collect(), FitBasis::Fourier { m })
            };
            let data = DataSet { points: xs.iter().map(|&x| DataPoint { x, y: c64(0.0, 0.0) }).collect() };
            let f = build_design_matrix(&data, &basis)?;
            (xs, basis, f)
        }
        ProblemKind::Random => {
            let f = match spec.condition_target {
                Some(kappa) => {
                    if m == 1 && kappa > 1.0 {
                        return Err(QfitError::InfeasibleCondition {
                            target: kappa,
                            reason: "a single column always has condition number 1".into(),
                        });
                    }
                    let sv: Vec<f64> = (0..m)
                        .map(|i| if m == 1 { 1.0 } else { kappa.powf(-(i as f64) / (m - 1) as f64) })
                        .collect();
                    with_singular_values(&mut rng, n, &sv)?
                }
                None => ComplexMatrix::from_dmatrix(gaussian_matrix(&mut rng, n, m) / c64((n as f64).sqrt(), 0.0))?,
            };
            (index_abscissas(), FitBasis::CustomMatrix { m }, f)
        }
        ProblemKind::Spectrum { singular_values } => {
            if singular_values.len() != m || singular_values.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                return Err(QfitError::InvalidSpec(format!("need {m} positive singular values, got {singular_values:?}")));
            }
            (index_abscissas(), FitBasis::CustomMatrix { m }, with_singular_values(&mut rng, n, singular_values)?)
        }
    };

    let cond = condition_estimate(&f)?;
    if let Some(kappa) = spec.condition_target {
        if cond.kappa > kappa * (1.0 + 1e-9) {
            return Err(QfitError::InfeasibleCondition {
                target: kappa,
                reason: format!("the {:?} design matrix has condition number {:.4}", spec.kind, cond.kappa),
            });
        }
    }

    let lambda_star = match (&spec.planted_support, spec.planted_mass) {
        (Some(support), Some(mass)) => planted_lambda(&mut rng, m, support, mass)?,
        (None, None) => CVector::from_fn(m, |_, _| gaussian(&mut rng)),
        _ => return Err(QfitError::InvalidSpec("planted support and mass must be given together".into())),
    };
    let signal = f.apply(&lambda_star)?;
    let raw_noise = CVector::from_fn(n, |_, _| gaussian(&mut rng) * spec.noise);
    let projector_image = f.apply(&pseudoinverse(&f)?.apply(&raw_noise)?)?;
    let y = signal + (raw_noise - projector_image);

    let data = DataSet { points: xs.into_iter().zip(y.iter()).map(|(x, &y)| DataPoint { x, y }).collect() };
    FitProblem::new(data, basis, &f, &y, Some(seed))
}

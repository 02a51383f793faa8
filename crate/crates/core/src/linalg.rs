//! Dense complex linear algebra: the Hermitian embedding of a design matrix,
//! its spectral decomposition, the Moore-Penrose pseudoinverse, and the
//! condition/sparsity diagnostics that the phase-estimation pipeline needs.
//!
//! Everything here is exact to double precision and serves as the classical
//! oracle that the simulated pipeline is checked against.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QfitError, Result};

pub type CVector = DVector<Complex64>;

/// Smallest singular value treated as nonzero.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// Default cap on the embedded dimension `M + N`.
pub const DEFAULT_MAX_SYSTEM_DIM: usize = 128;

const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix with finite entries and nonzero shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QfitError::Dimension(format!("matrix shape {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(QfitError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(QfitError::Dimension(format!(
                "matrix shape {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(QfitError::NonFinite);
        }
        Ok(Self { inner })
    }

    /// Builds a real-valued matrix from row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(QfitError::Dimension("ragged rows".into()));
        }
        let entries = rows.iter().flat_map(|r| r.iter().map(|&x| c64(x, 0.0))).collect();
        Self::from_row_major(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be nonzero");
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix shape must be nonzero");
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { inner: self.inner.map(|c| c * factor) }
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(QfitError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self { inner: &self.inner * &other.inner })
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.cols() {
            return Err(QfitError::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols()
            )));
        }
        Ok(&self.inner * v)
    }

    /// Submatrix made of the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() || columns.iter().any(|&c| c >= self.cols()) {
            return Err(QfitError::Dimension(format!(
                "column selection {columns:?} out of range for {} columns",
                self.cols()
            )));
        }
        Self::from_dmatrix(self.inner.select_columns(columns))
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.inner.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn row_major_entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn sparsity(&self) -> SparsityProfile {
        let zero = Complex64::new(0.0, 0.0);
        let per_row = (0..self.rows()).map(|i| self.inner.row(i).iter().filter(|&&c| c != zero).count());
        let per_col = (0..self.cols()).map(|j| self.inner.column(j).iter().filter(|&&c| c != zero).count());
        let max_per_row = per_row.max().unwrap_or(0);
        let max_per_column = per_col.max().unwrap_or(0);
        SparsityProfile {
            s: max_per_row.max(max_per_column),
            nnz: self.inner.iter().filter(|&&c| c != zero).count(),
            max_per_row,
            max_per_column,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Dense { rows: usize, cols: usize, entries: Vec<[f64; 2]> },
    Sparse { rows: usize, cols: usize, triplets: Vec<[f64; 4]> },
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr::Dense {
            rows: self.rows(),
            cols: self.cols(),
            entries: crate::serde_complex::to_pairs(&self.row_major_entries()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        match MatrixRepr::deserialize(d)? {
            MatrixRepr::Dense { rows, cols, entries } => {
                ComplexMatrix::from_row_major(rows, cols, crate::serde_complex::from_pairs(&entries))
                    .map_err(D::Error::custom)
            }
            MatrixRepr::Sparse { rows, cols, triplets } => {
                if rows == 0 || cols == 0 {
                    return Err(D::Error::custom(format!("matrix shape {rows}x{cols}")));
                }
                let mut m = DMatrix::zeros(rows, cols);
                for [i, j, re, im] in triplets {
                    let valid = |x: f64, bound: usize| x >= 0.0 && x.fract() == 0.0 && (x as usize) < bound;
                    if !valid(i, rows) || !valid(j, cols) {
                        return Err(D::Error::custom(format!("triplet index ({i}, {j}) out of range")));
                    }
                    m[(i as usize, j as usize)] += c64(re, im);
                }
                ComplexMatrix::from_dmatrix(m).map_err(D::Error::custom)
            }
        }
    }
}

/// Nonzero structure of a matrix. `s` is the largest nonzero count in any
/// row or column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SparsityProfile {
    pub s: usize,
    pub nnz: usize,
    pub max_per_row: usize,
    pub max_per_column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionEstimate {
    pub kappa: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

/// Singular-value condition number of `f`.
///
/// Fails when the smallest singular value is below [`SINGULARITY_TOL`].
pub fn condition_estimate(f: &ComplexMatrix) -> Result<ConditionEstimate> {
    let sv = f.singular_values();
    let sigma_max = sv[0];
    let sigma_min = *sv.last().unwrap();
    if sigma_min <= SINGULARITY_TOL {
        return Err(QfitError::Singular { sigma_min });
    }
    Ok(ConditionEstimate { kappa: sigma_max / sigma_min, sigma_max, sigma_min })
}

/// `F⁺ = (F†F)⁻¹F†` through a Cholesky solve of the normal equations.
pub fn pseudoinverse(f: &ComplexMatrix) -> Result<ComplexMatrix> {
    let cond = condition_estimate(f)?;
    let adj = f.inner.adjoint();
    let gram = &adj * &f.inner;
    let chol = Cholesky::new(gram).ok_or(QfitError::Singular { sigma_min: cond.sigma_min })?;
    ComplexMatrix::from_dmatrix(chol.solve(&adj))
}

/// Hermitian embedding of a rectangular `N×M` matrix on `M + N` dimensions,
/// parameter sector (indices `0..M`) first and data sector (`M..M+N`) second.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedOperator {
    matrix: ComplexMatrix,
    params: usize,
    data: usize,
}

impl EmbeddedOperator {
    pub fn dim(&self) -> usize {
        self.params + self.data
    }

    /// Size `M` of the parameter sector.
    pub fn params(&self) -> usize {
        self.params
    }

    /// Size `N` of the data sector.
    pub fn data(&self) -> usize {
        self.data
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        self.matrix.apply(v)
    }
}

pub fn embed(f: &ComplexMatrix) -> Result<EmbeddedOperator> {
    embed_with_cap(f, DEFAULT_MAX_SYSTEM_DIM)
}

pub fn embed_with_cap(f: &ComplexMatrix, cap: usize) -> Result<EmbeddedOperator> {
    let (n, m) = (f.rows(), f.cols());
    let dim = n + m;
    if dim > cap {
        return Err(QfitError::DimensionOverflow { dim, cap });
    }
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for p in 0..m {
            let v = f.get(i, p);
            h[(m + i, p)] = v;
            h[(p, m + i)] = v.conj();
        }
    }
    Ok(EmbeddedOperator { matrix: ComplexMatrix { inner: h }, params: m, data: n })
}

/// Spectral decomposition `H = Σ E_j |μ_j⟩⟨μ_j|`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
    pub input_coefficients: Option<Vec<Complex64>>,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `β_j = ⟨μ_j|v⟩`.
    pub fn coefficients(&self, v: &CVector) -> Vec<Complex64> {
        (self.eigenvectors.adjoint() * v).iter().copied().collect()
    }

    pub fn with_input(mut self, v: &CVector) -> Self {
        self.input_coefficients = Some(self.coefficients(v));
        self
    }

    /// `Σ_j f(E_j) β_j |μ_j⟩`.
    pub fn apply_function<F: Fn(f64) -> Complex64>(&self, f: F, v: &CVector) -> CVector {
        let beta = self.eigenvectors.adjoint() * v;
        let scaled = CVector::from_iterator(
            beta.len(),
            beta.iter().zip(&self.eigenvalues).map(|(b, &e)| b * f(e)),
        );
        &self.eigenvectors * scaled
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| c64(e, 0.0)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |acc, e| acc.max(e.abs()))
    }

    /// Smallest eigenvalue magnitude above [`SINGULARITY_TOL`], if any.
    pub fn smallest_nonzero_magnitude(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .map(|e| e.abs())
            .filter(|&a| a > SINGULARITY_TOL)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// `1/E`, with zero eigenvalues sent to zero.
pub fn pseudo_reciprocal(e: f64) -> f64 {
    if e.abs() <= SINGULARITY_TOL {
        0.0
    } else {
        1.0 / e
    }
}

pub fn eig_hermitian(h: &EmbeddedOperator) -> Result<EigDecomposition> {
    eig_hermitian_matrix(&h.matrix)
}

/// Spectral decomposition of any Hermitian matrix.
///
/// Each eigenvector is rephased so that its largest-magnitude component
/// (lowest index on ties) is real and positive.
pub fn eig_hermitian_matrix(h: &ComplexMatrix) -> Result<EigDecomposition> {
    let m = &h.inner;
    if m.nrows() != m.ncols() {
        return Err(QfitError::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let skew = (m - m.adjoint()).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if skew > 1e-12 * h.frobenius_norm().max(1.0) {
        return Err(QfitError::Dimension(format!("matrix is not Hermitian (skew norm {skew:e})")));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or(QfitError::EigenFailure)?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let max = v.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
        let pivot = v.iter().position(|c| c.norm() >= max * (1.0 - 1e-10)).unwrap_or(0);
        let phase = v[pivot].conj() / v[pivot].norm();
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase;
        }
    }
    Ok(EigDecomposition {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: vectors,
        input_coefficients: None,
    })
}

/// Applies `f(H)` to `v` through an exact spectral decomposition.
pub fn apply_matrix_function_exact<F: Fn(f64) -> Complex64>(
    h: &EmbeddedOperator,
    f: F,
    v: &CVector,
) -> Result<CVector> {
    if v.len() != h.dim() {
        return Err(QfitError::Dimension(format!("vector of length {} for operator of dim {}", v.len(), h.dim())));
    }
    Ok(eig_hermitian(h)?.apply_function(f, v))
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &CVector) -> Result<CVector> {
    let n = vector_norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(QfitError::ZeroVector);
    }
    Ok(v / c64(n, 0.0))
}

/// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    let na = a.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let nb = b.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dotc(b).norm_sqr() / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn cv(values: &[f64]) -> CVector {
        CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0)))
    }

    #[test]
    fn embed_scalar() {
        let h = embed(&real(&[&[1.0]])).unwrap();
        assert_eq!(h.matrix(), &real(&[&[0.0, 1.0], &[1.0, 0.0]]));
    }

    #[test]
    fn embed_zero_matrix() {
        let h = embed(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(h.matrix(), &ComplexMatrix::zeros(4, 4));
    }

    #[test]
    fn embed_column_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = embed(&real(&[&[s], &[s]])).unwrap();
        let eig = eig_hermitian(&h).unwrap();
        for (got, want) in eig.eigenvalues.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn embed_places_adjoint_image_in_parameter_sector() {
        let f = ComplexMatrix::from_row_major(
            3,
            2,
            vec![c64(1.0, 0.5), c64(0.0, -1.0), c64(2.0, 0.0), c64(0.3, 0.3), c64(-1.0, 0.0), c64(0.0, 0.0)],
        )
        .unwrap();
        let h = embed(&f).unwrap();
        let y = CVector::from_vec(vec![c64(0.2, 0.0), c64(-0.4, 0.1), c64(0.5, 0.5)]);
        let mut padded = CVector::zeros(5);
        padded.rows_mut(2, 3).copy_from(&y);
        let out = h.apply(&padded).unwrap();
        let expected = f.adjoint().apply(&y).unwrap();
        for p in 0..2 {
            assert_eq!(out[p], expected[p]);
        }
        for i in 2..5 {
            assert_eq!(out[i], c64(0.0, 0.0));
        }
    }

    #[test]
    fn embed_rejects_oversized() {
        let err = embed_with_cap(&ComplexMatrix::zeros(10, 10), 16).unwrap_err();
        assert!(matches!(err, QfitError::DimensionOverflow { dim: 20, cap: 16 }));
    }

    #[test]
    fn pseudoinverse_examples() {
        let id = ComplexMatrix::identity(2);
        assert!((pseudoinverse(&id).unwrap().into_dmatrix() - id.into_dmatrix()).norm() < 1e-15);

        let p = pseudoinverse(&real(&[&[2.0]])).unwrap();
        assert_abs_diff_eq!(p.get(0, 0).re, 0.5, epsilon = 1e-15);

        let p = pseudoinverse(&real(&[&[1.0], &[1.0]])).unwrap();
        assert_eq!((p.rows(), p.cols()), (1, 2));
        assert_abs_diff_eq!(p.get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(0, 1).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pseudoinverse_rejects_rank_deficient() {
        let err = pseudoinverse(&real(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap_err();
        assert!(matches!(err, QfitError::Singular { .. }));
    }

    #[test]
    fn eig_examples() {
        let x = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let eig = eig_hermitian_matrix(&x).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], 1.0, epsilon = 1e-14);

        let d = real(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let eig = eig_hermitian_matrix(&d).unwrap();
        assert_eq!(eig.eigenvalues, vec![2.0, 3.0]);
        assert_abs_diff_eq!(eig.eigenvectors[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.eigenvectors[(1, 1)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eig_phase_convention_is_real_positive_pivot() {
        let h = ComplexMatrix::from_row_major(2, 2, vec![c64(1.0, 0.0), c64(0.0, 2.0), c64(0.0, -2.0), c64(-0.5, 0.0)])
            .unwrap();
        let eig = eig_hermitian_matrix(&h).unwrap();
        for j in 0..2 {
            let col = eig.eigenvectors.column(j);
            let pivot = (0..2).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
            assert!(col[pivot].im.abs() < 1e-15 && col[pivot].re > 0.0);
        }
        assert!((eig.reconstruct() - h.as_dmatrix()).norm() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        assert!(eig_hermitian_matrix(&real(&[&[0.0, 1.0], &[0.0, 0.0]])).is_err());
    }

    #[test]
    fn matrix_function_examples() {
        let h = embed(&real(&[&[1.0]])).unwrap();
        let out = apply_matrix_function_exact(&h, |e| c64(e, 0.0), &cv(&[1.0, 0.0])).unwrap();
        assert!((out - cv(&[0.0, 1.0])).norm() < 1e-14);

        let out = apply_matrix_function_exact(&h, |e| c64(pseudo_reciprocal(e), 0.0), &cv(&[0.0, 1.0])).unwrap();
        assert!((out - cv(&[1.0, 0.0])).norm() < 1e-14);

        let v = CVector::from_vec(vec![c64(0.3, -0.1), c64(0.7, 0.2)]);
        let out = apply_matrix_function_exact(&h, |_| c64(1.0, 0.0), &v).unwrap();
        assert!((out - v).norm() < 1e-14);
    }

    #[test]
    fn condition_examples() {
        assert_abs_diff_eq!(condition_estimate(&ComplexMatrix::identity(3)).unwrap().kappa, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            condition_estimate(&real(&[&[1.0, 0.0], &[0.0, 0.5]])).unwrap().kappa,
            2.0,
            epsilon = 1e-14
        );
        // Singular values of [[1,0],[1,1]] are the square roots of the
        // eigenvalues (3 ± √5)/2 of FᵀF.
        let s5 = 5f64.sqrt();
        let expected = ((3.0 + s5) / (3.0 - s5)).sqrt();
        let got = condition_estimate(&real(&[&[1.0, 0.0], &[1.0, 1.0]])).unwrap().kappa;
        assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(got, 2.618033988749895, epsilon = 1e-12);
    }

    #[test]
    fn condition_rejects_zero() {
        assert!(matches!(condition_estimate(&ComplexMatrix::zeros(2, 2)), Err(QfitError::Singular { .. })));
    }

    #[test]
    fn sparsity_counts() {
        let p = real(&[&[1.0, 0.0, 0.0], &[1.0, 2.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]).sparsity();
        assert_eq!(p.nnz, 4);
        assert_eq!(p.max_per_row, 2);
        assert_eq!(p.max_per_column, 3);
        assert_eq!(p.s, 3);
    }

    #[test]
    fn json_dense_and_sparse_agree() {
        let dense: ComplexMatrix =
            serde_json::from_str(r#"{"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0],[0,-2]]}"#).unwrap();
        let sparse: ComplexMatrix =
            serde_json::from_str(r#"{"rows":2,"cols":2,"triplets":[[0,0,1,0],[1,1,0,-2]]}"#).unwrap();
        assert_eq!(dense, sparse);
        let back: ComplexMatrix = serde_json::from_str(&serde_json::to_string(&dense).unwrap()).unwrap();
        assert_eq!(back, dense);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"triplets":[[2,0,1,0]]}"#).is_err());
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":0,"cols":2,"entries":[]}"#).is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(matches!(
            ComplexMatrix::from_row_major(1, 1, vec![c64(f64::NAN, 0.0)]),
            Err(QfitError::NonFinite)
        ));
    }
}

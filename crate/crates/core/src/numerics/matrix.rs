use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const NEG_EIGEN_TOL: f64 = 1e-10;

/// Symmetric PSD square root `Γ'^{1/2}` of a correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceFactor {
    matrix: DMatrix<f64>,
}

impl CovarianceFactor {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// `out = S · z`
    #[inline]
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let n = self.dimension();
        debug_assert_eq!(z.len(), n);
        debug_assert_eq!(out.len(), n);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, zj) in z.iter().enumerate() {
                acc += self.matrix[(i, j)] * zj;
            }
            *o = acc;
        }
    }
}

/// Unique symmetric PSD square root via eigendecomposition. Eigenvalues in
/// `[-1e-10, 0)` are clamped to zero.
pub fn sym_matrix_sqrt(gamma: &DMatrix<f64>) -> Result<CovarianceFactor> {
    let n = gamma.nrows();
    if n == 0 || gamma.ncols() != n {
        return Err(Error::InvalidMatrix(format!(
            "expected a non-empty square matrix, got {}x{}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (gamma[(i, j)] - gamma[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "not symmetric at ({i},{j}): {} vs {}",
                    gamma[(i, j)],
                    gamma[(j, i)]
                )));
            }
        }
    }
    let sym = (gamma + gamma.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if min < -NEG_EIGEN_TOL {
            return Err(Error::InvalidMatrix(format!(
                "indefinite: smallest eigenvalue {min:e}"
            )));
        }
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let mut root = v * DMatrix::from_diagonal(&roots) * v.transpose();
    // Symmetrise away rounding so the factor is exactly symmetric.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (root[(i, j)] + root[(j, i)]);
            root[(i, j)] = m;
            root[(j, i)] = m;
        }
    }
    Ok(CovarianceFactor { matrix: root })
}

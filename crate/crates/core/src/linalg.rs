//! Dense Hermitian matrices and their spectral decompositions (backed by `faer`).

use faer::{Mat, MatRef, Side};

use crate::ensembles::{EnsembleKind, PerturbationKind};
use crate::error::{Error, Result};
use crate::C64;

/// Which ensemble (if any) a matrix was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixClass {
    Ensemble(EnsembleKind),
    Perturbation(PerturbationKind),
    /// Built by hand, e.g. a diagonal `H₀ + εV` or a test fixture.
    Custom,
}

/// Dense `N×N` Hermitian operator. Hermiticity is exact: the upper triangle is the
/// bitwise conjugate of the lower one.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    entries: Mat<C64>,
    class: MatrixClass,
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from its lower triangle (`fill(i, j)` with `j <= i`).
    /// Diagonal entries keep only their real part.
    pub fn from_lower(n: usize, class: MatrixClass, mut fill: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Mat::<C64>::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let z = fill(i, j);
                if i == j {
                    entries[(i, i)] = C64::new(z.re, 0.0);
                } else {
                    entries[(i, j)] = z;
                    entries[(j, i)] = z.conj();
                }
            }
        }
        Self { entries, class }
    }

    /// Validates Hermiticity (exactly) and wraps an existing matrix.
    pub fn from_mat(entries: Mat<C64>, class: MatrixClass) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: entries.ncols() });
        }
        for j in 0..n {
            for i in j..n {
                if entries[(i, j)] != entries[(j, i)].conj() {
                    return Err(Error::InvalidInput(format!("matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries, class })
    }

    pub fn diagonal(levels: &[f64]) -> Self {
        Self::from_lower(levels.len(), MatrixClass::Custom, |i, j| if i == j { C64::new(levels[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn class(&self) -> MatrixClass {
        self.class
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, C64> {
        self.entries.as_ref()
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.entries
    }

    /// Returns `diag(levels) + scale·self`, the perturbed Hamiltonian in the eigenbasis of `H₀`.
    pub fn add_to_diagonal(&self, levels: &[f64], scale: f64) -> Result<HermitianMatrix> {
        let n = self.dim();
        if levels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: levels.len() });
        }
        Ok(Self::from_lower(n, MatrixClass::Custom, |i, j| {
            let v = self.entries[(i, j)] * scale;
            if i == j {
                v + levels[i]
            } else {
                v
            }
        }))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.entries[(i, j)].norm());
            }
        }
        m
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.entries.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigensolver { realization: 0 })
    }

    pub fn eigen(&self) -> Result<SpectralDecomposition> {
        let evd = self.entries.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigensolver { realization: 0 })?;
        let s = evd.S().column_vector();
        let eigenvalues = (0..self.dim()).map(|i| s[i].re).collect();
        Ok(SpectralDecomposition { eigenvalues, eigenvectors: evd.U().to_owned() })
    }
}

/// `H = U·diag(E)·U†` with eigenvalues in nondecreasing order and eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `‖H − UΛU†‖_max`.
    pub fn reconstruction_residual(&self, h: &HermitianMatrix) -> f64 {
        let u = self.eigenvectors.as_ref();
        let n = self.dim();
        let mut scaled = u.to_owned();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.eigenvalues[j];
            }
        }
        let recon = &scaled * u.adjoint();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((recon[(i, j)] - h.get(i, j)).norm());
            }
        }
        worst
    }
}

/// Columns `e^{−iHt_j}ψ` for every `t_j` in `times`, using `H = U·diag(E)·U†`.
pub fn propagate(decomp: &SpectralDecomposition, psi: &[C64], times: &[f64]) -> Result<Mat<C64>> {
    let n = decomp.dim();
    if psi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.len() });
    }
    let u = decomp.eigenvectors.as_ref();
    let c = eigenbasis_coefficients(decomp, psi);
    let phased = Mat::<C64>::from_fn(n, times.len(), |k, j| c[k] * C64::cis(-decomp.eigenvalues[k] * times[j]));
    Ok(u * phased)
}

/// `U†ψ`, the components of `ψ` along the eigenvectors.
pub fn eigenbasis_coefficients(decomp: &SpectralDecomposition, psi: &[C64]) -> Vec<C64> {
    let u = decomp.eigenvectors.as_ref();
    let n = decomp.dim();
    (0..n).map(|k| (0..n).fold(C64::new(0.0, 0.0), |acc, a| acc + u[(a, k)].conj() * psi[a])).collect()
}

/// Euclidean norm of a complex vector.
pub fn norm(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

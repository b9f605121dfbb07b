//! Eigendecomposition of coupling matrices and the eigenvector-moment
//! quantities entering the full-system Lyapunov coefficient.
//!
//! For a symmetric (hence normal) coupling matrix the moment sums reduce to
//! `gamma_quartic = sum_phi V_{phi,1}^4` and, for each bulk mode `k >= 2`,
//! `gamma_cross_k = sum_phi V_{phi,k} V_{phi,1}^2`. The spectrally weighted
//! combination `weighted_sum = sum_k gamma_cross_k^2 (-lambda_k)/(4 lambda_k^2 + 9)`
//! is the coupling-induced part of the coefficient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigsolve;
use crate::network::{CouplingMatrix, EIG_TOL, SYM_TOL};

/// Full symmetric eigendecomposition, sorted descending and sign-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    /// Eigenvalues sorted descending: `lambda_1 >= lambda_2 >= ...`.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit-norm eigenvector for `eigenvalues[k]`, with the
    /// largest-magnitude entry positive (ties broken by lowest index).
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not symmetric (defect {defect:e} exceeds {SYM_TOL:e})")]
    NotSymmetric { defect: f64 },
    #[error("eigensolver did not converge within {max_iter} iterations")]
    ConvergenceFailure { max_iter: usize },
    #[error("bulk eigenvalue lambda_{index} = {value} is nonnegative")]
    NonNegativeBulk { index: usize, value: f64 },
    #[error("leading eigenvalue is degenerate (gap {gap:e} below {EIG_TOL:e})")]
    DegenerateLeading { gap: f64 },
}

impl Spectrum {
    /// Leading (largest-eigenvalue) eigenvector.
    pub fn leading_vector(&self) -> DVector<f64> {
        self.vectors.column(0).into_owned()
    }

    pub fn leading(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Gap between the two largest eigenvalues.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0] - self.eigenvalues[1]
    }

    /// Check orthonormality and the eigen-residual against the source matrix.
    /// Intended for tests and validation tooling.
    pub fn check_against(&self, m: &CouplingMatrix) -> Result<(), String> {
        let vtv = self.vectors.transpose() * &self.vectors;
        let eye = DMatrix::identity(self.n, self.n);
        let ortho = (vtv - eye).abs().max();
        if ortho > 1e-9 {
            return Err(format!("orthonormality defect {ortho:e}"));
        }
        for k in 0..self.n {
            let v = self.vectors.column(k);
            let residual = (&m.entries * v - self.eigenvalues[k] * v).abs().max();
            let allowed = 1e-8 * (1.0 + self.eigenvalues[k].abs());
            if residual > allowed {
                return Err(format!("residual {residual:e} on column {k}"));
            }
        }
        Ok(())
    }
}

/// Eigenvector-moment sums for the leading mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSet {
    /// `sum_phi V_{phi,1}^4`, in `(0, 1]` for a unit leading vector.
    pub gamma_quartic: f64,
    /// Entry `k-2` is `sum_phi V_{phi,k} V_{phi,1}^2` for `k = 2..=n`.
    pub gamma_cross: Vec<f64>,
    /// `sum_{k>=2} gamma_cross_k^2 * (-lambda_k) / (4 lambda_k^2 + 9)`.
    pub weighted_sum: f64,
}

/// Decompose a coupling matrix. Fails on asymmetry or solver non-convergence.
pub fn eigendecompose(m: &CouplingMatrix) -> Result<Spectrum, SpectralError> {
    let defect = eigsolve::symmetry_defect(&m.entries);
    if defect > SYM_TOL {
        return Err(SpectralError::NotSymmetric { defect });
    }
    let (eigenvalues, vectors) = eigsolve::symmetric_eigen_sorted(&m.entries).ok_or(
        SpectralError::ConvergenceFailure {
            max_iter: eigsolve::MAX_EIGEN_ITER,
        },
    )?;
    Ok(Spectrum {
        n: m.n,
        eigenvalues,
        vectors,
    })
}

/// Compute the Gamma moment sums from a spectrum with a simple leading
/// eigenvalue and strictly negative bulk.
pub fn gamma_set(s: &Spectrum) -> Result<GammaSet, SpectralError> {
    if s.n >= 2 {
        let gap = s.eigenvalues[0] - s.eigenvalues[1];
        if gap < EIG_TOL {
            return Err(SpectralError::DegenerateLeading { gap });
        }
    }
    for (k, &lambda) in s.eigenvalues.iter().enumerate().skip(1) {
        if lambda >= 0.0 {
            return Err(SpectralError::NonNegativeBulk {
                index: k,
                value: lambda,
            });
        }
    }

    let v1 = s.vectors.column(0);
    let gamma_quartic: f64 = v1.iter().map(|v| v * v * v * v).sum();

    let mut gamma_cross = Vec::with_capacity(s.n.saturating_sub(1));
    let mut weighted_sum = 0.0;
    for k in 1..s.n {
        let vk = s.vectors.column(k);
        let cross: f64 = vk.iter().zip(v1.iter()).map(|(vk, v1)| vk * v1 * v1).sum();
        gamma_cross.push(cross);
        let lambda = s.eigenvalues[k];
        weighted_sum += cross * cross * (-lambda) / (4.0 * lambda * lambda + 9.0);
    }
    Ok(GammaSet {
        gamma_quartic,
        gamma_cross,
        weighted_sum,
    })
}

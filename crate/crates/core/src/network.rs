//! Construction and validation of random coupling matrices.
//!
//! Every construction here yields a real symmetric matrix whose spectrum has
//! one controlled leading eigenvalue and an otherwise strictly negative bulk.
//! Two routes are provided: exact spectral synthesis (sample the spectrum,
//! conjugate by a Haar-random orthogonal matrix) and a Wigner ensemble with a
//! rank-1 deflation that moves only the top eigenvalue.

use std::io::{self, BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigsolve;

/// Maximum tolerated asymmetry `max |M_ij - M_ji|`.
pub const SYM_TOL: f64 = 1e-12;
/// Absolute tolerance for eigenvalue placement checks.
pub const EIG_TOL: f64 = 1e-8;

/// How the bulk eigenvalues are drawn from `[-d_max, -d_min]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BulkDistribution {
    UniformOnInterval,
    SemicircleScaled,
}

/// Target interval for the non-leading eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub distribution: BulkDistribution,
}

impl BulkSpec {
    pub fn uniform(d_min: f64, d_max: f64) -> Self {
        Self {
            d_min,
            d_max,
            distribution: BulkDistribution::UniformOnInterval,
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let ok = self.d_min.is_finite()
            && self.d_max.is_finite()
            && 0.0 < self.d_min
            && self.d_min < self.d_max;
        if ok {
            Ok(())
        } else {
            Err(NetworkError::InvalidBulk {
                d_min: self.d_min,
                d_max: self.d_max,
            })
        }
    }
}

/// Which construction produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    SpectralSynthesis,
    WignerDeflated,
    InputPlusConnectivity,
}

/// A symmetric coupling matrix with one controlled leading eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub n: usize,
    pub entries: DMatrix<f64>,
    pub leading_target: f64,
    pub construction: Construction,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network size must be at least 2, got {0}")]
    InvalidSize(usize),
    #[error("leading eigenvalue {leading} is not separated from the bulk edge {bulk_edge}")]
    LeadingInsideBulk { leading: f64, bulk_edge: f64 },
    #[error("invalid bulk interval: require 0 < d_min < d_max, got d_min={d_min}, d_max={d_max}")]
    InvalidBulk { d_min: f64, d_max: f64 },
    #[error(
        "deflated bulk is not entirely negative (max non-leading eigenvalue {max_bulk}); \
         increase shift"
    )]
    BulkNotNegative { max_bulk: f64 },
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("eigensolver did not converge within {max_iter} iterations")]
    ConvergenceFailure { max_iter: usize },
}

/// Spectral synthesis: `M = Q D Q^T` with `Q` Haar-orthogonal and `D` the
/// sampled spectrum (`D_11 = leading`, the rest drawn from `bulk`).
pub fn build_spectral(
    n: usize,
    bulk: BulkSpec,
    leading: f64,
    seed: u64,
) -> Result<CouplingMatrix, NetworkError> {
    build_spectral_with_spectrum(n, bulk, leading, seed).map(|(m, _)| m)
}

/// Same as [`build_spectral`] but also returns the sampled spectrum, so the
/// construction can be checked against an independent eigensolver.
pub fn build_spectral_with_spectrum(
    n: usize,
    bulk: BulkSpec,
    leading: f64,
    seed: u64,
) -> Result<(CouplingMatrix, Vec<f64>), NetworkError> {
    if n < 2 {
        return Err(NetworkError::InvalidSize(n));
    }
    bulk.validate()?;
    if !leading.is_finite() {
        return Err(NetworkError::InvalidParameter {
            name: "leading",
            requirement: "finite",
            value: leading,
        });
    }
    if leading <= -bulk.d_min + EIG_TOL {
        return Err(NetworkError::LeadingInsideBulk {
            leading,
            bulk_edge: -bulk.d_min,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = haar_orthogonal(n, &mut rng);
    let mut diag = vec![0.0; n];
    diag[0] = leading;
    for d in diag.iter_mut().skip(1) {
        *d = sample_bulk_value(&bulk, &mut rng);
    }

    let qd = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&diag));
    let entries = eigsolve::symmetrize(&(qd * q.transpose()));
    Ok((
        CouplingMatrix {
            n,
            entries,
            leading_target: leading,
            construction: Construction::SpectralSynthesis,
        },
        diag,
    ))
}

/// Result of a Wigner-plus-deflation build, keeping the pre-deflation matrix
/// around so the rank-1 update can be verified externally.
#[derive(Debug, Clone)]
pub struct WignerBuild {
    pub matrix: CouplingMatrix,
    /// The shifted Wigner matrix `A = W - shift*I` before deflation.
    pub base: DMatrix<f64>,
    /// Leading eigenvalue of `A` (the one the deflation moved).
    pub base_leading: f64,
}

/// Wigner ensemble route: sample `W` symmetric Gaussian, shift by `-shift*I`,
/// then move only the top eigenvalue to `leading` via a rank-1 update along
/// the top eigenvector.
pub fn build_wigner_deflated(
    n: usize,
    entry_std: f64,
    shift: f64,
    leading: f64,
    seed: u64,
) -> Result<CouplingMatrix, NetworkError> {
    build_wigner_deflated_detailed(n, entry_std, shift, leading, seed).map(|b| b.matrix)
}

pub fn build_wigner_deflated_detailed(
    n: usize,
    entry_std: f64,
    shift: f64,
    leading: f64,
    seed: u64,
) -> Result<WignerBuild, NetworkError> {
    if n < 2 {
        return Err(NetworkError::InvalidSize(n));
    }
    if !(entry_std >= 0.0) || !entry_std.is_finite() {
        return Err(NetworkError::InvalidParameter {
            name: "entry_std",
            requirement: "nonnegative and finite",
            value: entry_std,
        });
    }
    if !(shift > 0.0) || !shift.is_finite() {
        return Err(NetworkError::InvalidParameter {
            name: "shift",
            requirement: "positive and finite",
            value: shift,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = entry_std / (n as f64).sqrt();
    let mut base = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g: f64 = StandardNormal.sample(&mut rng);
            if i == j {
                // Doubled variance on the diagonal (symmetric-ensemble convention).
                base[(i, i)] = std::f64::consts::SQRT_2 * sigma * g;
            } else {
                base[(i, j)] = sigma * g;
                base[(j, i)] = sigma * g;
            }
        }
    }
    for i in 0..n {
        base[(i, i)] -= shift;
    }

    let (vals, vecs) = eigsolve::symmetric_eigen_sorted(&base).ok_or(
        NetworkError::ConvergenceFailure {
            max_iter: eigsolve::MAX_EIGEN_ITER,
        },
    )?;
    let max_bulk = vals[1];
    if max_bulk >= 0.0 {
        return Err(NetworkError::BulkNotNegative { max_bulk });
    }
    if leading <= max_bulk + EIG_TOL {
        return Err(NetworkError::LeadingInsideBulk {
            leading,
            bulk_edge: max_bulk,
        });
    }

    let u1 = eigsolve::leading_eigenvector(&vecs);
    let update = (leading - vals[0]) * (&u1 * u1.transpose());
    let entries = eigsolve::symmetrize(&(&base + update));
    Ok(WignerBuild {
        matrix: CouplingMatrix {
            n,
            entries,
            leading_target: leading,
            construction: Construction::WignerDeflated,
        },
        base,
        base_leading: vals[0],
    })
}

/// Diagnostic report from [`validate_coupling`]; carries pass/fail flags
/// instead of erroring.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub symmetry_defect: f64,
    pub symmetric: bool,
    /// Number of eigenvalues within [`EIG_TOL`] of `leading_target`.
    pub leading_count: usize,
    /// All eigenvalues other than the one closest to the target are negative.
    pub bulk_negative: bool,
    /// Gap between the two largest eigenvalues, when the solver converged.
    pub spectral_gap: Option<f64>,
    pub pass: bool,
}

/// Check symmetry and eigenvalue layout of a coupling matrix.
///
/// The layout checks run on the symmetrized matrix, so the report is fully
/// populated even when the symmetry check itself fails.
pub fn validate_coupling(m: &CouplingMatrix) -> ValidationReport {
    let symmetry_defect = eigsolve::symmetry_defect(&m.entries);
    let symmetric = symmetry_defect <= SYM_TOL;

    let sym = eigsolve::symmetrize(&m.entries);
    let Some((vals, _)) = eigsolve::symmetric_eigen_sorted(&sym) else {
        return ValidationReport {
            symmetry_defect,
            symmetric,
            leading_count: 0,
            bulk_negative: false,
            spectral_gap: None,
            pass: false,
        };
    };

    let leading_count = vals
        .iter()
        .filter(|v| (*v - m.leading_target).abs() <= EIG_TOL)
        .count();
    let closest = vals
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (*a - m.leading_target)
                .abs()
                .partial_cmp(&(*b - m.leading_target).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let bulk_negative = vals
        .iter()
        .enumerate()
        .all(|(i, v)| i == closest || *v < 0.0);
    let spectral_gap = if vals.len() >= 2 {
        Some(vals[0] - vals[1])
    } else {
        None
    };
    let pass = symmetric && leading_count == 1 && bulk_negative;
    ValidationReport {
        symmetry_defect,
        symmetric,
        leading_count,
        bulk_negative,
        spectral_gap,
        pass,
    }
}

/// Haar-random orthogonal matrix: QR of an i.i.d. standard-normal matrix with
/// the sign convention fixed by a positive diagonal of the triangular factor.
fn haar_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn sample_bulk_value(bulk: &BulkSpec, rng: &mut ChaCha8Rng) -> f64 {
    match bulk.distribution {
        BulkDistribution::UniformOnInterval => -rng.random_range(bulk.d_min..=bulk.d_max),
        BulkDistribution::SemicircleScaled => {
            let center = -(bulk.d_min + bulk.d_max) / 2.0;
            let half = (bulk.d_max - bulk.d_min) / 2.0;
            // Rejection sampling of the semicircle density on [-1, 1].
            loop {
                let x: f64 = rng.random_range(-1.0..=1.0);
                let u: f64 = rng.random();
                if u * u <= 1.0 - x * x {
                    return center + half * x;
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum MatrixCsvError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Write a matrix as CSV: a header line holding `n`, then `n` rows of `n`
/// comma-separated values in shortest round-trip decimal form.
pub fn write_matrix_csv<W: Write>(m: &CouplingMatrix, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", m.n)?;
    for i in 0..m.n {
        let row: Vec<String> = (0..m.n).map(|j| format!("{}", m.entries[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a matrix written by [`write_matrix_csv`]. Returns the raw entries;
/// the caller decides what to wrap them in.
pub fn read_matrix_csv<R: BufRead>(reader: R) -> Result<DMatrix<f64>, MatrixCsvError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(MatrixCsvError::Malformed {
        line: 1,
        message: "empty file".into(),
    })??;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|e| MatrixCsvError::Malformed {
            line: 1,
            message: format!("expected the matrix size, got {header:?}: {e}"),
        })?;
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines.next().ok_or(MatrixCsvError::Malformed {
            line: i + 2,
            message: format!("expected {n} data rows"),
        })??;
        let values: Vec<&str> = line.trim().split(',').collect();
        if values.len() != n {
            return Err(MatrixCsvError::Malformed {
                line: i + 2,
                message: format!("expected {n} values, got {}", values.len()),
            });
        }
        for (j, v) in values.iter().enumerate() {
            entries[(i, j)] = v.trim().parse().map_err(|e| MatrixCsvError::Malformed {
                line: i + 2,
                message: format!("bad value {v:?}: {e}"),
            })?;
        }
    }
    Ok(entries)
}

//! First Lyapunov coefficients and the analytic bifurcation classification.
//!
//! The generic planar form takes all partial derivatives of the nonlinearities
//! at the origin; the subunit and full-network coefficients are specializations
//! of it. The sign of the full coefficient decides the criticality, which for
//! `b < 0` is equivalent to comparing `|a|` against `gamma * sqrt(-b)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::GammaSet;

/// Relative half-width of the numerical degeneracy band around `l1 = 0`.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Below this, `weighted_sum` counts as zero and the critical ratio is
/// undefined (effectively uncoupled network).
pub const DEGENERATE_SUM_TOL: f64 = 1e-14;

/// Partial derivatives at the origin of the planar nonlinearities `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HopfDerivs {
    pub f_xx: f64,
    pub f_xy: f64,
    pub f_yy: f64,
    pub f_xxx: f64,
    pub f_xxy: f64,
    pub f_xyy: f64,
    pub f_yyy: f64,
    pub g_xx: f64,
    pub g_xy: f64,
    pub g_yy: f64,
    pub g_xxx: f64,
    pub g_xxy: f64,
    pub g_xyy: f64,
    pub g_yyy: f64,
}

/// First Lyapunov coefficient of the planar system
/// `x' = y + f(x,y), y' = -x + g(x,y)` at the origin.
pub fn l1_general(d: &HopfDerivs) -> f64 {
    (d.f_xxx + d.f_xyy + d.g_xxy + d.g_yyy) / 16.0
        + (d.f_xy * (d.f_xx + d.f_yy) - d.g_xy * (d.g_xx + d.g_yy) - d.f_xx * d.g_xx
            + d.f_yy * d.g_yy)
            / 16.0
}

/// Derivatives of the subunit nonlinearity `f(x, y) = a x^2 + b x^3`.
pub fn subunit_derivs(a: f64, b: f64) -> HopfDerivs {
    HopfDerivs {
        f_xx: 2.0 * a,
        f_xxx: 6.0 * b,
        ..HopfDerivs::default()
    }
}

/// Subunit coefficient, `(3/8) b`. The quadratic coefficient drops out, so the
/// subunit criticality is decided by the sign of `b` alone.
pub fn l1_subunit(b: f64) -> f64 {
    l1_general(&subunit_derivs(0.0, b))
}

/// Full-network coefficient:
/// `(3/8) b n gamma_quartic + a^2 n weighted_sum`.
pub fn l1_full(a: f64, b: f64, n: usize, g: &GammaSet) -> f64 {
    let nf = n as f64;
    0.375 * b * nf * g.gamma_quartic + a * a * nf * g.weighted_sum
}

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error(
        "critical ratio undefined: weighted_sum {weighted_sum:e} is at or below \
         {DEGENERATE_SUM_TOL:e} (effectively uncoupled network)"
    )]
    DegenerateDenominator { weighted_sum: f64 },
}

/// Critical ratio `gamma = sqrt((3/8) gamma_quartic / weighted_sum)`.
///
/// Independent of the network size: the `n` factors in the two coefficient
/// terms cancel in the ratio.
pub fn gamma_threshold(g: &GammaSet) -> Result<f64, LyapunovError> {
    if g.weighted_sum <= DEGENERATE_SUM_TOL {
        return Err(LyapunovError::DegenerateDenominator {
            weighted_sum: g.weighted_sum,
        });
    }
    Ok((0.375 * g.gamma_quartic / g.weighted_sum).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Degenerate,
}

/// Analytic classification of a parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationReport {
    pub l1_subunit: f64,
    pub l1_full: f64,
    /// Critical ratio; `None` when the denominator is degenerate.
    pub gamma: Option<f64>,
    /// `gamma * sqrt(-b)`, defined only for `b < 0` with `gamma` defined.
    pub threshold: Option<f64>,
    pub classification: Criticality,
    /// Half-width of the numerical band around `l1_full = 0` inside which the
    /// point is reported as degenerate.
    pub degeneracy_band: f64,
}

/// Classify a parameter point from its Gamma moments.
///
/// The tag comes from the sign of `l1_full` outside a small relative band; for
/// `b < 0` this is algebraically the same as comparing `|a|` with
/// `gamma * sqrt(-b)`, which is asserted as a debug self-check.
pub fn classify_analytic(a: f64, b: f64, n: usize, g: &GammaSet) -> BifurcationReport {
    let nf = n as f64;
    let term_b = 0.375 * b * nf * g.gamma_quartic;
    let term_a = a * a * nf * g.weighted_sum;
    let l1 = term_b + term_a;
    let band = DEGENERACY_TOL * (term_b.abs() + term_a.abs());

    let classification = if l1 > band {
        Criticality::Subcritical
    } else if l1 < -band {
        Criticality::Supercritical
    } else {
        Criticality::Degenerate
    };

    let gamma = gamma_threshold(g).ok();
    let threshold = match gamma {
        Some(gamma) if b < 0.0 => Some(gamma * (-b).sqrt()),
        _ => None,
    };

    #[cfg(debug_assertions)]
    if let Some(thr) = threshold {
        if classification != Criticality::Degenerate {
            let by_threshold = if a.abs() > thr {
                Criticality::Subcritical
            } else {
                Criticality::Supercritical
            };
            debug_assert_eq!(
                by_threshold, classification,
                "sign rule disagrees with the threshold rule at a={a}, b={b}"
            );
        }
    }

    BifurcationReport {
        l1_subunit: l1_subunit(b),
        l1_full: l1,
        gamma,
        threshold,
        classification,
        degeneracy_band: band,
    }
}

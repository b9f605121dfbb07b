//! Bifurcation analysis for networks of randomly coupled Andronov-Hopf
//! oscillators.
//!
//! The crate builds random symmetric coupling matrices with a single
//! controlled leading eigenvalue, evaluates the first Lyapunov coefficient of
//! the full network from eigenvector-moment sums, and cross-checks the
//! resulting supercritical/subcritical classification by direct numerical
//! integration of the 2N-dimensional system
//!
//! ```text
//! dx_i/dt = y_i + a x_i^2 + b x_i^3 + sum_j M_ij x_j
//! dy_i/dt = -x_i
//! ```
//!
//! Modules:
//! - [`network`]: coupling-matrix construction and validation
//! - [`spectral`]: eigendecomposition and the Gamma eigenvector moments
//! - [`lyapunov`]: Lyapunov coefficients, the critical ratio, analytic
//!   classification
//! - [`dynamics`]: fixed-step integration, amplitude measurement, parameter
//!   sweeps, numerical classification
//! - [`recognition`]: input-plus-connectivity networks (Dale/Hebbian
//!   constraints) and the GAS/NH type-switching demonstration

pub mod dynamics;
mod eigsolve;
pub mod lyapunov;
pub mod network;
pub mod recognition;
pub mod spectral;

pub use dynamics::{
    AmplitudeMeasure, BifurcationClass, BistabilityProbe, IntegrationSettings, NetworkFamily,
    OscillatorNetwork, Outcome, StateVector, SweepProtocol, SweepResult, Trajectory,
};
pub use lyapunov::{BifurcationReport, Criticality, HopfDerivs};
pub use network::{BulkDistribution, BulkSpec, Construction, CouplingMatrix, ValidationReport};
pub use recognition::{DemoMode, InputNetworkSpec, PerronReport, TypeDemoReport};
pub use spectral::{GammaSet, Spectrum};

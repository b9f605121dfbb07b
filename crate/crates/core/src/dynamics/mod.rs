//! Direct numerical integration of the coupled-oscillator system and the
//! machinery that turns trajectories into bifurcation evidence.
//!
//! The system is `x_i' = y_i + a x_i^2 + b x_i^3 + (M x)_i`, `y_i' = -x_i`.
//! Near the bifurcation all frequencies sit near 1, so a fixed-step RK4 is
//! accurate and keeps determinism trivial.

mod measure;
mod sweep;

pub use measure::{steady_amplitude, AmplitudeMeasure, Outcome};
pub use sweep::{
    amplitude_sweep, bistability_probe, classify_numeric, fit_amplitude_scaling,
    BifurcationClass, BistabilityProbe, FitSummary, NetworkFamily, NumericClassification,
    NumericEvidence, SweepProtocol, SweepResult, R_SQUARED_MIN,
};

use std::io::{self, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::CouplingMatrix;

/// Relative half-width of the near-threshold exclusion band: numerical
/// classification is only attempted when `| |a| - gamma sqrt(-b) |` exceeds
/// this fraction of `gamma sqrt(-b)`.
pub const EXCLUSION_BAND: f64 = 0.2;

/// The coupled network with its subunit nonlinearity coefficients.
#[derive(Debug, Clone)]
pub struct OscillatorNetwork {
    pub n: usize,
    /// Quadratic coefficient of the subunit nonlinearity.
    pub a: f64,
    /// Cubic coefficient of the subunit nonlinearity.
    pub b: f64,
    pub m: CouplingMatrix,
}

impl OscillatorNetwork {
    pub fn new(a: f64, b: f64, m: CouplingMatrix) -> Self {
        Self { n: m.n, a, b, m }
    }
}

/// Oscillator coordinates, split into the two planar components.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            y: DVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Max-norm over all coordinates.
    pub fn max_abs(&self) -> f64 {
        let mx = self.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let my = self.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        mx.max(my)
    }

    fn axpy_from(&mut self, base: &StateVector, scale: f64, slope: &StateVector) {
        for i in 0..self.x.len() {
            self.x[i] = base.x[i] + scale * slope.x[i];
            self.y[i] = base.y[i] + scale * slope.y[i];
        }
    }
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("state dimension {got} does not match network size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("lambda grid is empty")]
    EmptyGrid,
    #[error("lambda grid must be sorted ascending")]
    GridNotSorted,
    #[error("dt_max must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("t_end must be positive and finite, got {0}")]
    InvalidHorizon(f64),
}

/// Time derivative of the network state.
pub fn rhs(net: &OscillatorNetwork, s: &StateVector) -> Result<StateVector, DynamicsError> {
    if s.x.len() != net.n || s.y.len() != net.n {
        return Err(DynamicsError::DimensionMismatch {
            expected: net.n,
            got: s.x.len().max(s.y.len()),
        });
    }
    let mut out = StateVector::zeros(net.n);
    rhs_into(net, s, &mut out);
    Ok(out)
}

fn rhs_into(net: &OscillatorNetwork, s: &StateVector, out: &mut StateVector) {
    out.x.gemv(1.0, &net.m.entries, &s.x, 0.0);
    for i in 0..net.n {
        let xi = s.x[i];
        out.x[i] += s.y[i] + net.a * xi * xi + net.b * xi * xi * xi;
        out.y[i] = -xi;
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RunEnd {
    /// Reached `t_end`.
    Completed,
    /// Some coordinate exceeded the escape bound at time `t`.
    Escaped { t: f64 },
}

/// Fixed-step classic RK4 with an escape check after every step.
///
/// `observe` is called with `(t, state)` after each accepted step; callers
/// that only need a subsample keep their own stride counter. Returns the final
/// state together with how the run ended. A non-finite state before the escape
/// check trips is an error carrying the time of failure.
pub fn integrate_observed<F>(
    net: &OscillatorNetwork,
    init: &StateVector,
    dt_max: f64,
    t_end: f64,
    escape_bound: f64,
    mut observe: F,
) -> Result<(StateVector, RunEnd), DynamicsError>
where
    F: FnMut(f64, &StateVector),
{
    if init.x.len() != net.n || init.y.len() != net.n {
        return Err(DynamicsError::DimensionMismatch {
            expected: net.n,
            got: init.x.len().max(init.y.len()),
        });
    }
    if !(dt_max > 0.0) || !dt_max.is_finite() {
        return Err(DynamicsError::InvalidStep(dt_max));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(DynamicsError::InvalidHorizon(t_end));
    }

    let n = net.n;
    let mut state = init.clone();
    let mut k1 = StateVector::zeros(n);
    let mut k2 = StateVector::zeros(n);
    let mut k3 = StateVector::zeros(n);
    let mut k4 = StateVector::zeros(n);
    let mut stage = StateVector::zeros(n);

    let full_steps = (t_end / dt_max).floor() as u64;
    let remainder = t_end - full_steps as f64 * dt_max;
    let total_steps = full_steps + u64::from(remainder > 1e-12 * t_end);

    let mut t = 0.0;
    for step in 0..total_steps {
        let dt = if step < full_steps { dt_max } else { remainder };

        rhs_into(net, &state, &mut k1);
        stage.axpy_from(&state, 0.5 * dt, &k1);
        rhs_into(net, &stage, &mut k2);
        stage.axpy_from(&state, 0.5 * dt, &k2);
        rhs_into(net, &stage, &mut k3);
        stage.axpy_from(&state, dt, &k3);
        rhs_into(net, &stage, &mut k4);

        let w = dt / 6.0;
        for i in 0..n {
            state.x[i] += w * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
            state.y[i] += w * (k1.y[i] + 2.0 * k2.y[i] + 2.0 * k3.y[i] + k4.y[i]);
        }
        t = if step + 1 == full_steps {
            // land exactly on multiples of dt_max
            (step + 1) as f64 * dt_max
        } else {
            t + dt
        };

        let m = state.max_abs();
        if !m.is_finite() {
            return Err(DynamicsError::NonFiniteState { t });
        }
        if m > escape_bound {
            return Ok((state, RunEnd::Escaped { t }));
        }
        observe(t, &state);
    }
    Ok((state, RunEnd::Completed))
}

/// Recorded samples of an integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub end: RunEnd,
}

/// Integrate and record `(t, state)` samples every `record_stride` steps
/// (the initial state is always included).
pub fn integrate(
    net: &OscillatorNetwork,
    init: &StateVector,
    dt_max: f64,
    t_end: f64,
    escape_bound: f64,
    record_stride: usize,
) -> Result<Trajectory, DynamicsError> {
    let stride = record_stride.max(1);
    let mut times = vec![0.0];
    let mut states = vec![init.clone()];
    let mut step = 0usize;
    let (_, end) = integrate_observed(net, init, dt_max, t_end, escape_bound, |t, s| {
        step += 1;
        if step % stride == 0 {
            times.push(t);
            states.push(s.clone());
        }
    })?;
    Ok(Trajectory { times, states, end })
}

/// Integration and measurement parameters with the artifact's defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    /// Fixed RK4 step.
    pub dt_max: f64,
    /// Window discarded before measuring.
    pub t_transient: f64,
    /// Measurement window.
    pub t_measure: f64,
    /// Max |projection| below which the run counts as decayed to the origin.
    pub decay_tol: f64,
    /// Max relative spread of projection peaks for a limit-cycle verdict.
    pub cycle_tol: f64,
    /// Escape threshold on the state max-norm.
    pub escape_bound: f64,
    /// Scale of the small fresh initial condition along the leading vector.
    pub init_scale: f64,
    /// Scale of the large initial condition used by bistability probes.
    pub init_scale_large: f64,
    /// Allowed |intercept| of the amplitude^2 fit, as a fraction of the
    /// largest amplitude^2.
    pub fit_tol: f64,
    /// Recording stride for trajectories and projection series.
    pub record_stride: usize,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            dt_max: 1e-3,
            t_transient: 500.0,
            t_measure: 500.0,
            decay_tol: 1e-5,
            cycle_tol: 0.02,
            escape_bound: 1e3,
            init_scale: 1e-3,
            init_scale_large: 5.0,
            fit_tol: 0.2,
            record_stride: 10,
        }
    }
}

/// Export a trajectory as CSV with columns `t, x_1..x_n, y_1..y_n`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let n = traj.states.first().map_or(0, StateVector::dim);
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",x_{i}"));
    }
    for i in 1..=n {
        header.push_str(&format!(",y_{i}"));
    }
    writeln!(out, "{header}")?;
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        let mut row = format!("{t}");
        for v in s.x.iter() {
            row.push_str(&format!(",{v}"));
        }
        for v in s.y.iter() {
            row.push_str(&format!(",{v}"));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Construction;
    use nalgebra::DMatrix;

    pub(crate) fn uncoupled(n: usize, a: f64, b: f64) -> OscillatorNetwork {
        OscillatorNetwork::new(
            a,
            b,
            CouplingMatrix {
                n,
                entries: DMatrix::zeros(n, n),
                leading_target: 0.0,
                construction: Construction::SpectralSynthesis,
            },
        )
    }

    #[test]
    fn origin_is_an_equilibrium() {
        let net = uncoupled(3, 1.7, -0.4);
        let d = rhs(&net, &StateVector::zeros(3)).unwrap();
        assert!(d.x.iter().all(|v| *v == 0.0));
        assert!(d.y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn harmonic_oscillator_rhs() {
        let net = uncoupled(1, 0.0, 0.0);
        let mut s = StateVector::zeros(1);
        s.x[0] = 1.0;
        let d = rhs(&net, &s).unwrap();
        assert_eq!(d.x[0], 0.0);
        assert_eq!(d.y[0], -1.0);
    }

    #[test]
    fn hand_computed_two_unit_rhs() {
        let m = CouplingMatrix {
            n: 2,
            entries: DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.1, 0.0]),
            leading_target: 0.1,
            construction: Construction::SpectralSynthesis,
        };
        let net = OscillatorNetwork::new(1.0, -1.0, m);
        let mut s = StateVector::zeros(2);
        s.x[0] = 1.0;
        let d = rhs(&net, &s).unwrap();
        assert!((d.x[0] - 0.0).abs() < 1e-15);
        assert!((d.x[1] - 0.1).abs() < 1e-15);
        assert_eq!(d.y[0], -1.0);
        assert_eq!(d.y[1], 0.0);
    }

    #[test]
    fn rhs_rejects_dimension_mismatch() {
        let net = uncoupled(2, 0.0, 0.0);
        assert!(matches!(
            rhs(&net, &StateVector::zeros(3)),
            Err(DynamicsError::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn harmonic_period_returns_to_start() {
        let net = uncoupled(1, 0.0, 0.0);
        let mut init = StateVector::zeros(1);
        init.x[0] = 1.0;
        let (end_state, end) = integrate_observed(
            &net,
            &init,
            1e-3,
            2.0 * std::f64::consts::PI,
            1e3,
            |_, _| {},
        )
        .unwrap();
        assert_eq!(end, RunEnd::Completed);
        assert!((end_state.x[0] - 1.0).abs() < 1e-6);
        assert!(end_state.y[0].abs() < 1e-6);
    }

    #[test]
    fn harmonic_energy_is_conserved() {
        let net = uncoupled(1, 0.0, 0.0);
        let mut init = StateVector::zeros(1);
        init.x[0] = 1.0;
        let mut worst = 0.0f64;
        integrate_observed(&net, &init, 1e-3, 100.0, 1e3, |_, s| {
            let e = s.x[0] * s.x[0] + s.y[0] * s.y[0];
            worst = worst.max((e - 1.0).abs());
        })
        .unwrap();
        assert!(worst <= 1e-5, "energy drift {worst:e}");
    }

    #[test]
    fn zero_init_stays_zero() {
        let net = uncoupled(2, 1.0, -1.0);
        let traj = integrate(&net, &StateVector::zeros(2), 1e-2, 1.0, 1e3, 10).unwrap();
        for s in &traj.states {
            assert_eq!(s.max_abs(), 0.0);
        }
    }

    #[test]
    fn step_halving_shows_fourth_order() {
        // Global error against the closed-form harmonic solution.
        let net = uncoupled(1, 0.0, 0.0);
        let mut init = StateVector::zeros(1);
        init.x[0] = 1.0;
        let t_end = 10.0;
        let exact_x = t_end.cos();
        let exact_y = -t_end.sin();
        let err = |h: f64| {
            let (s, _) = integrate_observed(&net, &init, h, t_end, 1e3, |_, _| {}).unwrap();
            ((s.x[0] - exact_x).powi(2) + (s.y[0] - exact_y).powi(2)).sqrt()
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "observed order {order}");
    }

    #[test]
    fn sign_flip_of_a_mirrors_the_trajectory_exactly() {
        let m = CouplingMatrix {
            n: 2,
            entries: DMatrix::from_row_slice(2, 2, &[-0.3, 0.2, 0.2, -0.5]),
            leading_target: 0.0,
            construction: Construction::SpectralSynthesis,
        };
        let plus = OscillatorNetwork::new(0.8, -1.0, m.clone());
        let minus = OscillatorNetwork::new(-0.8, -1.0, m);
        let mut init = StateVector::zeros(2);
        init.x[0] = 0.3;
        init.y[1] = -0.1;
        let mut init_neg = init.clone();
        init_neg.x.neg_mut();
        init_neg.y.neg_mut();

        let (sp, _) = integrate_observed(&plus, &init, 1e-2, 20.0, 1e3, |_, _| {}).unwrap();
        let (sm, _) = integrate_observed(&minus, &init_neg, 1e-2, 20.0, 1e3, |_, _| {}).unwrap();
        for i in 0..2 {
            assert_eq!(sp.x[i].to_bits(), (-sm.x[i]).to_bits());
            assert_eq!(sp.y[i].to_bits(), (-sm.y[i]).to_bits());
        }
    }

    #[test]
    fn escape_is_detected() {
        // b > 0 blows up from a finite kick
        let net = uncoupled(1, 0.0, 1.0);
        let mut init = StateVector::zeros(1);
        init.x[0] = 2.0;
        let traj = integrate(&net, &init, 1e-3, 50.0, 1e3, 10).unwrap();
        assert!(matches!(traj.end, RunEnd::Escaped { .. }));
    }

    #[test]
    fn trajectory_csv_has_expected_header() {
        let net = uncoupled(2, 0.0, 0.0);
        let mut init = StateVector::zeros(2);
        init.x[0] = 1.0;
        let traj = integrate(&net, &init, 1e-2, 0.1, 1e3, 5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x_1,x_2,y_1,y_2\n"));
    }
}

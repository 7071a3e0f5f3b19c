//! Closed-loop simulation of the multiple-model fault-tolerant controller.
//!
//! Every step the harness linearizes along the reference, runs one Kalman
//! filter and one tracking controller per fault hypothesis, updates the
//! posterior over hypotheses from the filter innovations, blends the controls
//! by posterior weight and drives the nonlinear vehicle through the true fault.
//! The hard-switching baseline replaces the blend with a single controller
//! chosen at fixed detection intervals.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod metrics;
mod reference;
mod run;
mod scenario;

pub use metrics::{compute_metrics, crossing_time, pulse_deviation, settling_time, FaultEventMetrics, Metrics};
pub use reference::reference_trajectory;
pub use run::{hard_switch_baseline, run_scenario, simulate, Mode, SimLog, StepRecord};
pub use scenario::{
    two_thruster_models, BaselineSpec, ControllerSpec, CostFormKind, FaultEvent, FeedforwardKind, JacobianKind,
    NoiseSpec, ReferenceSpec, Scenario,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Dynamics(#[from] auv_dynamics::DynamicsError),
    #[error(transparent)]
    Linear(#[from] auv_linear::LinearError),
    #[error(transparent)]
    Lqt(#[from] auv_lqt::LqtError),
    #[error(transparent)]
    Ekf(#[from] auv_ekf::EkfError),
    #[error(transparent)]
    Bayes(#[from] auv_bayes::BayesError),
    #[error("diverged at t = {t:.2} s: tracking error {error_m:.3} m exceeds the abort bound")]
    Diverged { t: f64, error_m: f64, log: Box<SimLog> },
    /// The nonlinear plant failed mid-run. The log holds every step before it.
    #[error("plant failed at t = {t:.2} s: {source}")]
    Plant { t: f64, source: auv_dynamics::DynamicsError, log: Box<SimLog> },
}

impl SimError {
    /// Log up to the failure, for errors raised mid-run.
    pub fn partial_log(&self) -> Option<&SimLog> {
        match self {
            SimError::Diverged { log, .. } | SimError::Plant { log, .. } => Some(log),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

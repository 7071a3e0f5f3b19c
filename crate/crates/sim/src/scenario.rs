use auv_dynamics::{fault_coefficients, FaultModel, VehicleParams, THRUSTERS};
use auv_linear::{pose_output, CostForm};
use auv_lqt::{CostWeights, Feedforward};
use nalgebra::{Matrix6, SMatrix, Vector6};
use serde::{Deserialize, Serialize};

use crate::{Result, SimError};

/// A thruster failure that takes effect at `time_s` and replaces any earlier one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEvent {
    pub time_s: f64,
    /// 1-based thruster indices.
    pub failed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// Standard deviation of the additive body acceleration noise.
    pub process_std_m_s2: f64,
    /// Standard deviation of the pose measurement noise (m and rad).
    pub measurement_std: f64,
    /// Noise levels the filters assume, when they differ from the true ones.
    pub filter_process_std_m_s2: Option<f64>,
    pub filter_measurement_std: Option<f64>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            process_std_m_s2: 0.02,
            measurement_std: 0.02,
            filter_process_std_m_s2: None,
            filter_measurement_std: None,
        }
    }
}

impl NoiseSpec {
    /// `(process, measurement)` standard deviations used by the filters.
    pub fn filter_std(&self) -> (f64, f64) {
        (
            self.filter_process_std_m_s2.unwrap_or(self.process_std_m_s2),
            self.filter_measurement_std.unwrap_or(self.measurement_std),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFormKind {
    /// `diag(Q_velocity, Q_pose, Q_integral)`.
    #[default]
    BlockDiagonal,
    /// `[H I]' Q_output [H I]`.
    OutputGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedforwardKind {
    #[default]
    Optimal,
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianKind {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSpec {
    /// Length of each receding-horizon window.
    pub horizon_steps: usize,
    /// Steps between re-solves of the window.
    pub resolve_steps: usize,
    /// Diagonal of the input weight R.
    pub r_input: f64,
    pub q_velocity: [f64; 6],
    pub q_pose: [f64; 6],
    pub q_integral: [f64; 6],
    /// Used only with `cost_form = "output_gram"`.
    pub q_output: [f64; 6],
    pub cost_form: CostFormKind,
    pub feedforward: FeedforwardKind,
    pub jacobian: JacobianKind,
    pub fd_step: f64,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        Self {
            horizon_steps: 300,
            resolve_steps: 100,
            r_input: 1.0,
            q_velocity: [1.0, 1.0, 1.0, 10.0, 10.0, 1000.0],
            q_pose: [0.0, 0.0, 0.0, 1000.0, 1000.0, 1000.0],
            q_integral: [3.0, 0.0, 0.3, 0.0, 0.0, 0.0],
            q_output: [100.0, 100.0, 100.0, 10.0, 10.0, 10.0],
            cost_form: CostFormKind::BlockDiagonal,
            feedforward: FeedforwardKind::Optimal,
            jacobian: JacobianKind::Analytic,
            fd_step: 1e-6,
        }
    }
}

impl ControllerSpec {
    pub fn cost_form(&self) -> CostForm {
        match self.cost_form {
            CostFormKind::BlockDiagonal => {
                let mut d = [0.0; 12];
                d[..6].copy_from_slice(&self.q_velocity);
                d[6..].copy_from_slice(&self.q_pose);
                CostForm::from_diagonals(&d, &self.q_integral)
            }
            CostFormKind::OutputGram => CostForm::OutputGram { q: Matrix6::from_diagonal(&Vector6::from(self.q_output)) },
        }
    }

    pub fn weights(&self) -> CostWeights<18, 8> {
        CostWeights { q: self.cost_form().q_tilde(&pose_output()), r: SMatrix::identity() * self.r_input, p: None }
    }

    pub fn feedforward(&self) -> Feedforward {
        match self.feedforward {
            FeedforwardKind::Optimal => Feedforward::Optimal,
            FeedforwardKind::Alternate => Feedforward::Alternate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// `x = R sin(w t)`, `y = R cos(w t)`, `z = vz t`, level attitude.
    Helix { radius_m: f64, angular_rate_rad_s: f64, depth_rate_m_s: f64 },
    /// Fixed pose `[x, y, z, phi, theta, psi]`.
    Constant { pose: [f64; 6] },
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec::Helix { radius_m: 1.0, angular_rate_rad_s: 0.02, depth_rate_m_s: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub detection_interval_s: f64,
    /// 1-based model number active before the first detection. Defaults to the
    /// model with the largest prior.
    #[serde(default)]
    pub initial_model: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub vehicle: VehicleParams,
    /// Failed thruster sets (1-based) of Model I, II, ...
    pub model_space: Vec<Vec<usize>>,
    pub initial_priors: Vec<f64>,
    pub fault_schedule: Vec<FaultEvent>,
    pub noise: NoiseSpec,
    pub controller: ControllerSpec,
    pub eps_floor: f64,
    /// Initial estimate covariance, times identity.
    pub initial_covariance: f64,
    pub initial_pose: [f64; 6],
    pub reference: ReferenceSpec,
    pub baseline: Option<BaselineSpec>,
    /// Abort when the 3-D tracking error exceeds this.
    pub abort_error_m: f64,
    /// Log the smallest eigenvalue of every filter covariance (slower).
    pub check_covariance: bool,
}

/// `{T1T2, T1T3, T1T4, T2T3, T2T4, T3T4}`: every pair of horizontal thrusters.
pub fn two_thruster_models() -> Vec<Vec<usize>> {
    vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            duration_s: 120.0,
            dt_s: 0.01,
            seed: 1,
            vehicle: VehicleParams::default(),
            model_space: two_thruster_models(),
            initial_priors: vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.1],
            fault_schedule: vec![FaultEvent { time_s: 0.0, failed: vec![1, 3] }],
            noise: NoiseSpec::default(),
            controller: ControllerSpec::default(),
            eps_floor: 0.006,
            initial_covariance: 1e-2,
            initial_pose: [0.0; 6],
            reference: ReferenceSpec::default(),
            baseline: None,
            abort_error_m: 50.0,
            check_covariance: false,
        }
    }
}

impl Scenario {
    /// Thruster {1,4} fails at start and is replaced by {2,4} at 100 s.
    pub fn fault_shift() -> Self {
        Self {
            name: "shift".into(),
            duration_s: 130.0,
            fault_schedule: vec![
                FaultEvent { time_s: 0.0, failed: vec![1, 4] },
                FaultEvent { time_s: 100.0, failed: vec![2, 4] },
            ],
            ..Self::default()
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration_s / self.dt_s).round() as usize
    }

    pub fn fault_models(&self) -> Result<Vec<FaultModel>> {
        self.model_space
            .iter()
            .enumerate()
            .map(|(i, f)| fault_coefficients(f, i + 1).map_err(SimError::from))
            .collect()
    }

    /// Failed set in force at time `t`; empty before the first event.
    pub fn failed_at(&self, t: f64) -> &[usize] {
        self.fault_schedule
            .iter()
            .rev()
            .find(|e| e.time_s <= t + 1e-9)
            .map(|e| e.failed.as_slice())
            .unwrap_or(&[])
    }

    /// 1-based index of the model whose failed set equals `failed`, 0 if none.
    pub fn model_number(&self, failed: &[usize]) -> usize {
        let mut key = failed.to_vec();
        key.sort_unstable();
        key.dedup();
        self.model_space
            .iter()
            .position(|m| {
                let mut m = m.clone();
                m.sort_unstable();
                m.dedup();
                m == key
            })
            .map_or(0, |i| i + 1)
    }

    /// Every violated constraint, in one list.
    pub fn violations(&self) -> Vec<String> {
        let mut v = vec![];
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.dt_s) {
            v.push(format!("dt_s must be positive, got {}", self.dt_s));
        }
        if !finite_pos(self.duration_s) {
            v.push(format!("duration_s must be positive, got {}", self.duration_s));
        } else if finite_pos(self.dt_s) {
            let n = self.duration_s / self.dt_s;
            if (n - n.round()).abs() > 1e-6 * n.max(1.0) {
                v.push(format!("duration_s {} is not a whole number of dt_s {}", self.duration_s, self.dt_s));
            }
        }
        if self.model_space.is_empty() {
            v.push("model_space is empty".into());
        }
        for (i, m) in self.model_space.iter().enumerate() {
            for t in m {
                if !(1..=THRUSTERS).contains(t) {
                    v.push(format!("model_space[{i}]: unknown thruster index {t}"));
                }
            }
        }
        if self.initial_priors.len() != self.model_space.len() {
            v.push(format!(
                "initial_priors has {} entries but model_space has {}",
                self.initial_priors.len(),
                self.model_space.len()
            ));
        }
        if self.initial_priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
            v.push("initial_priors must be non-negative".into());
        }
        let sum: f64 = self.initial_priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            v.push(format!("initial_priors sum to {sum}, expected 1"));
        }
        let mut last = f64::NEG_INFINITY;
        for (i, e) in self.fault_schedule.iter().enumerate() {
            if !(e.time_s >= 0.0 && e.time_s <= self.duration_s) {
                v.push(format!("fault_schedule[{i}].time_s {} outside [0, duration_s]", e.time_s));
            }
            if e.time_s <= last {
                v.push(format!("fault_schedule[{i}].time_s {} is not after the previous event", e.time_s));
            }
            last = e.time_s;
            for t in &e.failed {
                if !(1..=THRUSTERS).contains(t) {
                    v.push(format!("fault_schedule[{i}]: unknown thruster index {t}"));
                }
            }
        }
        if !(self.noise.process_std_m_s2 >= 0.0) {
            v.push("noise.process_std_m_s2 must be non-negative".into());
        }
        if !(self.noise.measurement_std >= 0.0) {
            v.push("noise.measurement_std must be non-negative".into());
        }
        let (fw, fv) = self.noise.filter_std();
        if !(fw >= 0.0) {
            v.push("noise.filter_process_std_m_s2 must be non-negative".into());
        }
        if !(fv > 0.0) || !fv.is_finite() {
            v.push("the filter measurement noise must be positive; set noise.filter_measurement_std".into());
        }
        if !(self.eps_floor > 0.0 && self.eps_floor < 0.5) {
            v.push(format!("eps_floor must lie in (0, 0.5), got {}", self.eps_floor));
        }
        if !finite_pos(self.initial_covariance) {
            v.push("initial_covariance must be positive".into());
        }
        if !finite_pos(self.abort_error_m) {
            v.push("abort_error_m must be positive".into());
        }
        let c = &self.controller;
        if c.horizon_steps == 0 || c.resolve_steps == 0 || c.resolve_steps > c.horizon_steps {
            v.push(format!(
                "controller needs 1 <= resolve_steps <= horizon_steps, got {} and {}",
                c.resolve_steps, c.horizon_steps
            ));
        }
        if !finite_pos(c.r_input) {
            v.push("controller.r_input must be positive".into());
        }
        let weights = c.q_velocity.iter().chain(&c.q_pose).chain(&c.q_integral).chain(&c.q_output);
        if weights.clone().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            v.push("controller weights must be finite and non-negative".into());
        }
        if c.jacobian == JacobianKind::FiniteDifference && !finite_pos(c.fd_step) {
            v.push("controller.fd_step must be positive".into());
        }
        if let Some(b) = &self.baseline {
            if !(b.detection_interval_s >= self.dt_s - 1e-12) {
                v.push(format!("baseline.detection_interval_s {} is shorter than dt_s", b.detection_interval_s));
            }
            if let Some(m) = b.initial_model {
                if m == 0 || m > self.model_space.len() {
                    v.push(format!("baseline.initial_model {m} outside 1..={}", self.model_space.len()));
                }
            }
        }
        match &self.reference {
            ReferenceSpec::Helix { radius_m, angular_rate_rad_s, depth_rate_m_s } => {
                if ![radius_m, angular_rate_rad_s, depth_rate_m_s].iter().all(|x| x.is_finite()) {
                    v.push("reference parameters must be finite".into());
                }
            }
            ReferenceSpec::Constant { pose } => {
                if pose.iter().any(|x| !x.is_finite()) {
                    v.push("reference pose must be finite".into());
                }
            }
        }
        v.extend(self.vehicle.violations().into_iter().map(|m| format!("vehicle: {m}")));
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SimError::Invalid(v))
        }
    }
}

use auv_bayes::{apply_floor, argmax, blend_controls, log_likelihood, posterior_update_log, Posterior};
use auv_dynamics::{fault_coefficients, BodyState, FaultModel, Vector8, Vehicle};
use auv_ekf::Hypothesis;
use auv_linear::{
    augment_unchecked, check_output_rank, discretize, linearize, linearize_fd, pose_output, LinearModel, Matrix18,
    Matrix6x18,
};
use auv_lqt::{backward_sweep, CostWeights, Feedforward, GainSchedule, Stage};
use nalgebra::{Matrix6, SVector, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{JacobianKind, Result, Scenario, SimError};

type Stage18 = Stage<18, 8, 6>;
type Schedule18 = GainSchedule<18, 8, 6>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Posterior-weighted blend of every hypothesis's control.
    Soft,
    /// One controller at a time, re-selected every `interval_steps` as the
    /// argmax of the log-likelihood accumulated since the last selection.
    /// `initial` is the 0-based model used until the first selection.
    Hard { interval_steps: usize, initial: usize },
}

/// One logged instant. Record `k` holds the state at `t = k dt` and the
/// command that drove the vehicle from `t - dt` to `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub state: BodyState,
    pub reference: [f64; 6],
    pub posterior: Vec<f64>,
    /// Command after saturation.
    pub command: [f64; 8],
    /// Force actually produced by each thruster under the true fault.
    pub applied: [f64; 8],
    /// Reference minus position, north/east/down.
    pub error: [f64; 3],
    /// 1-based model number of the true fault, 0 if outside the model space.
    pub true_model: usize,
    /// 1-based model whose controller produced `command`, under hard switching.
    pub active_model: Option<usize>,
    /// Smallest eigenvalue over all filter covariances, when checked.
    pub min_cov_eig: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLog {
    pub scenario: String,
    pub dt: f64,
    pub model_labels: Vec<String>,
    pub fault_times: Vec<f64>,
    pub records: Vec<StepRecord>,
}

struct Window {
    k0: usize,
    stages: Vec<Vec<Stage18>>,
    schedules: Vec<Schedule18>,
}

struct Setup<'a> {
    s: &'a Scenario,
    vehicle: Vehicle,
    models: Vec<FaultModel>,
    weights: CostWeights<18, 8>,
    feedforward: Feedforward,
    q_tilde: Matrix18,
}

impl Setup<'_> {
    fn linear_model(&self, k: usize) -> Result<LinearModel> {
        let s = self.s;
        let t = k as f64 * s.dt_s;
        let (nu, eta) = (s.reference.velocity(t), s.reference.pose(t));
        let healthy = FaultModel::healthy(0);
        let cm = match s.controller.jacobian {
            JacobianKind::Analytic => linearize(&nu, &eta, &healthy, &self.vehicle)?,
            JacobianKind::FiniteDifference => linearize_fd(&nu, &eta, &healthy, &self.vehicle, s.controller.fd_step)?,
        };
        Ok(discretize(&cm, s.dt_s, k))
    }

    fn window(&self, k0: usize) -> Result<Window> {
        let s = self.s;
        let n = s.controller.horizon_steps;
        let h = pose_output();
        let lin: Vec<LinearModel> = (k0..k0 + n).map(|k| self.linear_model(k)).collect::<Result<_>>()?;
        let refs: Vec<Vector6<f64>> = (0..=n).map(|j| s.reference.pose((k0 + j) as f64 * s.dt_s)).collect();
        let mut stages = Vec::with_capacity(self.models.len());
        let mut schedules = Vec::with_capacity(self.models.len());
        for (i, fault) in self.models.iter().enumerate() {
            let st: Vec<Stage18> = lin
                .iter()
                .map(|lm| {
                    let mut lm = lm.clone();
                    for c in 0..8 {
                        lm.b.column_mut(c).scale_mut(fault.gamma[c]);
                    }
                    let am = augment_unchecked(&lm, &h, self.q_tilde);
                    Stage { a: am.a, b: am.b, br: am.br }
                })
                .collect();
            schedules.push(backward_sweep(&st, &self.weights, &refs, self.feedforward, i)?);
            stages.push(st);
        }
        Ok(Window { k0, stages, schedules })
    }
}

fn clamp(u: &Vector8, limit: f64) -> Vector8 {
    u.map(|x| x.clamp(-limit, limit))
}

fn measurement_matrix() -> Matrix6x18 {
    let mut h = Matrix6x18::zeros();
    h.fixed_view_mut::<6, 6>(0, 6).fill_with_identity();
    h
}

/// Runs the scenario closed loop in the given mode.
pub fn simulate(s: &Scenario, mode: Mode) -> Result<SimLog> {
    s.validate()?;
    let h = pose_output();
    check_output_rank(&h)?;
    let cost = s.controller.cost_form();
    cost.validate()?;
    let weights = s.controller.weights();
    weights.validate()?;
    let models = s.fault_models()?;
    let m = models.len();
    if let Mode::Hard { interval_steps, initial } = mode {
        if interval_steps == 0 || initial >= m {
            return Err(SimError::Invalid(vec![format!(
                "hard switching needs a positive interval and a model below {m}, got {interval_steps} and {initial}"
            )]));
        }
    }
    let setup = Setup {
        s,
        vehicle: Vehicle::new(s.vehicle.clone())?,
        q_tilde: cost.q_tilde(&h),
        weights,
        feedforward: s.controller.feedforward(),
        models: models.clone(),
    };
    let dt = s.dt_s;
    let max_thrust = s.vehicle.max_thrust;
    let (sw, sv) = (s.noise.process_std_m_s2, s.noise.measurement_std);

    // filter noise: acceleration noise integrated over one step on the
    // velocities, none on the pose, measurement noise on the integral states
    let (fw, fv) = s.noise.filter_std();
    let mut qn = Matrix18::zeros();
    for i in 0..6 {
        qn[(i, i)] = (dt * fw).powi(2);
        qn[(12 + i, 12 + i)] = fv * fv;
    }
    let rm = Matrix6::identity() * (fv * fv);
    let hm = measurement_matrix();

    let mut bank: Vec<Hypothesis<18, 6>> = models
        .iter()
        .zip(&s.initial_priors)
        .map(|(f, p)| Hypothesis::new(f.clone(), SVector::zeros(), Matrix18::identity() * s.initial_covariance, *p))
        .collect();
    let mut post = Posterior::new(s.initial_priors.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut gauss = move || -> f64 { StandardNormal.sample(&mut rng) };

    let mut state = BodyState::new(Vector6::zeros(), Vector6::from(s.initial_pose));
    let (mut active, interval) = match mode {
        Mode::Soft => (None, 0),
        Mode::Hard { interval_steps, initial } => (Some(initial), interval_steps),
    };
    let mut window_ll = vec![0.0; m];

    let steps = s.steps();
    let mut log = SimLog {
        scenario: s.name.clone(),
        dt,
        model_labels: models.iter().map(|f| f.label()).collect(),
        fault_times: s.fault_schedule.iter().map(|e| e.time_s).collect(),
        records: Vec::with_capacity(steps + 1),
    };
    let record = |t: f64, state: &BodyState, post: &Posterior, cmd: &Vector8, applied: &Vector8, true_model, active: Option<usize>, eig| {
        let r = s.reference.pose(t);
        StepRecord {
            t,
            state: *state,
            reference: r.into(),
            posterior: post.weights().to_vec(),
            command: (*cmd).into(),
            applied: (*applied).into(),
            error: [r[0] - state.eta[0], r[1] - state.eta[1], r[2] - state.eta[2]],
            true_model,
            active_model: active.map(|a| a + 1),
            min_cov_eig: eig,
        }
    };
    let min_eig = |bank: &[Hypothesis<18, 6>]| -> Option<f64> {
        s.check_covariance.then(|| bank.iter().map(|hy| hy.p.symmetric_eigenvalues().min()).fold(f64::INFINITY, f64::min))
    };

    let mut failed: Vec<usize> = s.failed_at(0.0).to_vec();
    let mut truth = fault_coefficients(&failed, s.model_number(&failed))?;
    log.records.push(record(0.0, &state, &post, &Vector8::zeros(), &Vector8::zeros(), truth.id, active, min_eig(&bank)));

    let resolve = s.controller.resolve_steps;
    let mut window: Option<Window> = None;
    for k in 0..steps {
        let t = k as f64 * dt;
        if k % resolve == 0 {
            window = Some(setup.window(k)?);
        }
        let w = window.as_ref().expect("window built at k = 0");
        let j = k - w.k0;
        let r = s.reference.pose(t);

        let controls: Vec<Vector8> =
            (0..m).map(|i| w.schedules[i].control(j, &bank[i].x_hat, &r)).collect::<std::result::Result<_, _>>()?;
        let u = match active {
            None => blend_controls(&controls, &post)?,
            Some(a) => controls[a],
        };
        let u = clamp(&u, max_thrust);
        let driving = active;

        let now = s.failed_at(t);
        if now != failed.as_slice() {
            failed = now.to_vec();
            truth = fault_coefficients(&failed, s.model_number(&failed))?;
        }
        let w_acc = Vector6::from_fn(|_, _| sw * gauss());
        state = match setup.vehicle.step(&state, &u, &truth, dt, &w_acc) {
            Ok(next) => next,
            Err(source) => return Err(SimError::Plant { t, source, log: Box::new(log) }),
        };
        let y = state.eta + Vector6::from_fn(|_, _| sv * gauss());

        let mut lls = vec![0.0; m];
        for i in 0..m {
            let st = &w.stages[i][j];
            let hy = &mut bank[i];
            hy.predict(&st.a, &st.b, &u, &(st.br * r), &qn)?;
            hy.update(&hm, &y, &rm)?;
            lls[i] = log_likelihood(&hy.innovation, &hy.innovation_cov)?;
        }
        post = apply_floor(&posterior_update_log(&post, &lls)?, s.eps_floor);
        for (hy, p) in bank.iter_mut().zip(post.weights()) {
            hy.posterior = *p;
        }
        if let Some(a) = active.as_mut() {
            for (acc, l) in window_ll.iter_mut().zip(&lls) {
                *acc += l;
            }
            if (k + 1) % interval == 0 {
                *a = argmax(&window_ll);
                window_ll.iter_mut().for_each(|x| *x = 0.0);
            }
        }

        let applied = Vector8::from_fn(|c, _| if truth.gamma[c] == 0.0 { 0.0 } else { truth.gamma[c] * u[c] });
        let t1 = (k + 1) as f64 * dt;
        let rec = record(t1, &state, &post, &u, &applied, truth.id, driving, min_eig(&bank));
        let err = Vector6::new(rec.error[0], rec.error[1], rec.error[2], 0.0, 0.0, 0.0).norm();
        log.records.push(rec);
        if !(err <= s.abort_error_m) {
            return Err(SimError::Diverged { t: t1, error_m: err, log: Box::new(log) });
        }
    }
    Ok(log)
}

/// The adaptive controller with posterior-weighted blending.
pub fn run_scenario(s: &Scenario) -> Result<SimLog> {
    simulate(s, Mode::Soft)
}

/// Hard-switching baseline. The initial model comes from the scenario's
/// baseline section, else the largest prior.
pub fn hard_switch_baseline(s: &Scenario, detection_interval_s: f64) -> Result<SimLog> {
    let interval_steps = (detection_interval_s / s.dt_s).round() as usize;
    if !(detection_interval_s >= s.dt_s - 1e-12) || interval_steps == 0 {
        return Err(SimError::Invalid(vec![format!(
            "detection interval {detection_interval_s} s is shorter than dt_s {}",
            s.dt_s
        )]));
    }
    let initial = match s.baseline.as_ref().and_then(|b| b.initial_model) {
        Some(n) if n >= 1 => n - 1,
        _ => argmax(&s.initial_priors),
    };
    simulate(s, Mode::Hard { interval_steps, initial })
}

use std::f64::consts::PI;

use auv_sim::*;

fn quiet(duration_s: f64) -> Scenario {
    Scenario {
        duration_s,
        model_space: vec![vec![]],
        initial_priors: vec![1.0],
        fault_schedule: vec![],
        noise: NoiseSpec {
            process_std_m_s2: 0.0,
            measurement_std: 0.0,
            filter_process_std_m_s2: None,
            filter_measurement_std: Some(0.02),
        },
        reference: ReferenceSpec::Constant { pose: [0.0; 6] },
        ..Scenario::default()
    }
}

#[test]
fn helix_starts_on_the_y_axis() {
    let r = reference_trajectory(&ReferenceSpec::default(), 0.0);
    assert_eq!(r.as_slice(), &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn helix_quarter_turn() {
    let r = reference_trajectory(&ReferenceSpec::default(), 25.0 * PI);
    assert!((r[0] - 1.0).abs() < 1e-12);
    assert!(r[1].abs() < 1e-12);
    assert!((r[2] - PI / 2.0).abs() < 1e-12);
}

#[test]
fn helix_depth_is_linear() {
    let spec = ReferenceSpec::default();
    for t in [0.0, 1.0, 17.5, 100.0] {
        let dz = spec.pose(t + 1.0)[2] - spec.pose(t)[2];
        assert!((dz - 0.02).abs() < 1e-12);
    }
}

#[test]
fn helix_velocity_is_the_pose_derivative() {
    let spec = ReferenceSpec::default();
    let h = 1e-4;
    for t in [0.0, 3.0, 40.0, 91.0] {
        let fd = (spec.pose(t + h) - spec.pose(t - h)) / (2.0 * h);
        assert!((fd - spec.velocity(t)).amax() < 1e-9, "t = {t}");
    }
}

#[test]
fn equilibrium_hold() {
    let log = run_scenario(&quiet(5.0)).unwrap();
    for r in &log.records {
        assert!(r.error.iter().all(|e| e.abs() <= 1e-9), "t = {}: {:?}", r.t, r.error);
    }
}

#[test]
fn record_count_is_steps_plus_one() {
    let mut s = Scenario::default();
    s.duration_s = 0.5;
    let log = run_scenario(&s).unwrap();
    assert_eq!(log.records.len(), 51);
    assert_eq!(log.records[0].t, 0.0);
    assert!((log.records[50].t - 0.5).abs() < 1e-12);
    assert_eq!(log.records[0].posterior, s.initial_priors);
}

#[test]
fn same_seed_same_log() {
    let mut s = Scenario::fault_shift();
    s.duration_s = 2.0;
    s.fault_schedule[1].time_s = 1.0;
    assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap());
}

#[test]
fn seed_changes_the_noise() {
    let mut s = Scenario::default();
    s.duration_s = 0.2;
    let a = run_scenario(&s).unwrap();
    s.seed = 2;
    let b = run_scenario(&s).unwrap();
    assert_ne!(a.records[20].state, b.records[20].state);
}

#[test]
fn failed_thrusters_apply_exactly_zero() {
    let mut s = Scenario::fault_shift();
    s.duration_s = 3.0;
    s.fault_schedule[1].time_s = 1.5;
    let log = run_scenario(&s).unwrap();
    for r in &log.records[1..] {
        // the command that produced record t was issued at t - dt
        let failed = s.failed_at(r.t - s.dt_s - 1e-9);
        for &th in failed {
            assert_eq!(r.applied[th - 1], 0.0, "t = {}, T{th}", r.t);
        }
    }
    // thruster 1 recovers after the shift and 2 goes dark
    let late = log.records.last().unwrap();
    assert_ne!(late.applied[0], 0.0);
    assert_eq!(late.applied[1], 0.0);
    assert_eq!(late.true_model, 5);
    assert_eq!(log.records[1].true_model, 3);
}

#[test]
fn posterior_stays_a_distribution() {
    let mut s = Scenario::default();
    s.duration_s = 3.0;
    let log = run_scenario(&s).unwrap();
    for r in &log.records {
        assert!((r.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.posterior.iter().all(|p| *p >= 0.0));
    }
}

#[test]
fn single_model_hard_switch_matches_soft() {
    let mut s = Scenario::default();
    s.duration_s = 2.0;
    s.model_space = vec![vec![1, 3]];
    s.initial_priors = vec![1.0];
    let soft = run_scenario(&s).unwrap();
    let hard = hard_switch_baseline(&s, s.dt_s).unwrap();
    assert_eq!(soft.records.len(), hard.records.len());
    for (a, b) in soft.records.iter().zip(&hard.records) {
        assert_eq!(b.active_model, Some(1));
        assert_eq!(a.state, b.state);
        assert_eq!(a.command, b.command);
        assert_eq!(a.posterior, b.posterior);
    }
}

#[test]
fn hard_switch_only_changes_at_interval_multiples() {
    let mut s = Scenario::default();
    s.duration_s = 2.0;
    let log = hard_switch_baseline(&s, 0.5).unwrap();
    assert_eq!(log.records[1].active_model, Some(1));
    for w in log.records.windows(2) {
        if w[0].active_model != w[1].active_model {
            let k = (w[1].t / s.dt_s).round() as usize;
            // the selection made after step 49 first drives step 50, logged as record 51
            assert_eq!(k % 50, 1, "switch at t = {}", w[1].t);
        }
    }
}

#[test]
fn hard_switch_rejects_short_interval() {
    let s = Scenario::default();
    assert!(matches!(hard_switch_baseline(&s, 0.001), Err(SimError::Invalid(_))));
}

#[test]
fn abort_bound_stops_the_run_with_a_partial_log() {
    let mut s = Scenario::default();
    s.duration_s = 5.0;
    s.abort_error_m = 0.5;
    match run_scenario(&s) {
        Err(e @ SimError::Diverged { .. }) => {
            let log = e.partial_log().unwrap();
            assert!(log.records.len() < 501);
            let last = log.records.last().unwrap().error;
            assert!((last[0].powi(2) + last[1].powi(2) + last[2].powi(2)).sqrt() > 0.5);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn covariance_check_is_logged_when_enabled() {
    let mut s = Scenario::default();
    s.duration_s = 0.3;
    s.check_covariance = true;
    let log = run_scenario(&s).unwrap();
    assert!(log.records.iter().all(|r| r.min_cov_eig.is_some_and(|e| e > 0.0)));
    s.check_covariance = false;
    assert!(run_scenario(&s).unwrap().records.iter().all(|r| r.min_cov_eig.is_none()));
}

#[test]
fn finite_difference_jacobians_track_the_analytic_run() {
    let mut s = Scenario::default();
    s.duration_s = 1.0;
    let a = run_scenario(&s).unwrap();
    s.controller.jacobian = JacobianKind::FiniteDifference;
    let b = run_scenario(&s).unwrap();
    let (ra, rb) = (a.records.last().unwrap(), b.records.last().unwrap());
    assert!((ra.state.eta - rb.state.eta).amax() < 1e-6);
}

#[test]
fn validation_lists_every_violation() {
    let mut s = Scenario::default();
    s.dt_s = 0.0;
    s.initial_priors = vec![0.2, 0.2, 0.2, 0.2, 0.05, 0.05];
    s.model_space[0] = vec![1, 9];
    let Err(SimError::Invalid(v)) = s.validate() else { panic!("expected invalid") };
    assert!(v.iter().any(|m| m.contains("dt_s")));
    assert!(v.iter().any(|m| m.contains("initial_priors")));
    assert!(v.iter().any(|m| m.contains("unknown thruster index 9")));
    assert!(v.len() >= 3);
}

#[test]
fn validation_rejects_unordered_schedule() {
    let mut s = Scenario::fault_shift();
    s.fault_schedule[1].time_s = 0.0;
    let Err(SimError::Invalid(v)) = s.validate() else { panic!("expected invalid") };
    assert!(v.iter().any(|m| m.contains("fault_schedule[1]")));
}

#[test]
fn default_scenarios_are_valid() {
    Scenario::default().validate().unwrap();
    Scenario::fault_shift().validate().unwrap();
    assert_eq!(Scenario::default().model_number(&[3, 1]), 2);
    assert_eq!(Scenario::fault_shift().model_number(&[2, 4]), 5);
    assert_eq!(Scenario::default().model_number(&[5]), 0);
}

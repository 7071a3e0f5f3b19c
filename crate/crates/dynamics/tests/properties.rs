use auv_dynamics::*;
use nalgebra::{Matrix3, Vector6};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn vehicle() -> Vehicle {
    Vehicle::new(VehicleParams::default()).unwrap()
}

fn vec8(lim: f64) -> impl Strategy<Value = Vector8> {
    proptest::collection::vec(-lim..lim, 8).prop_map(|v| Vector8::from_column_slice(&v))
}

fn vec6(lim: f64) -> impl Strategy<Value = Vector6<f64>> {
    proptest::collection::vec(-lim..lim, 6).prop_map(|v| Vector6::from_column_slice(&v))
}

fn failed_set() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::btree_set(1usize..=8, 0..=4).prop_map(|s| s.into_iter().collect())
}

fn kinetic_energy(v: &Vehicle, nu: &Vector6<f64>) -> f64 {
    0.5 * (0..6).map(|i| v.mass[i] * nu[i] * nu[i]).sum::<f64>()
}

proptest! {
    #[test]
    fn rotation_is_proper_orthonormal(
        phi in -PI..PI,
        theta in -(FRAC_PI_2 - 1e-3)..(FRAC_PI_2 - 1e-3),
        psi in -PI..PI,
    ) {
        let eta = Vector6::new(0.0, 0.0, 0.0, phi, theta, psi);
        let j = kinematic_transform(&eta).unwrap();
        let j1: Matrix3<f64> = j.fixed_view::<3, 3>(0, 0).into_owned();
        prop_assert!((j1.transpose() * j1 - Matrix3::identity()).abs().max() < 1e-12);
        prop_assert!((j1.determinant() - 1.0).abs() < 1e-12);
        prop_assert!(j.fixed_view::<3, 3>(0, 3).iter().all(|v| *v == 0.0));
        prop_assert!(j.fixed_view::<3, 3>(3, 0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wrench_is_linear(u1 in vec8(20.0), u2 in vec8(20.0), a in -1.0..1.0f64, b in -1.0..1.0f64, failed in failed_set()) {
        let v = vehicle();
        let f = fault_coefficients(&failed, 0).unwrap();
        let w1 = v.thrust_to_wrench(&u1, &f).unwrap();
        let w2 = v.thrust_to_wrench(&u2, &f).unwrap();
        let w = v.thrust_to_wrench(&(u1 * a + u2 * b), &f).unwrap();
        prop_assert!((w - (w1 * a + w2 * b)).abs().max() < 1e-12);
    }

    #[test]
    fn failed_thrusters_never_matter(u in vec8(40.0), delta in -40.0..40.0f64, failed in failed_set(), nu in vec6(0.3)) {
        prop_assume!(!failed.is_empty());
        let v = vehicle();
        let f = fault_coefficients(&failed, 0).unwrap();
        let mut u2 = u;
        u2[failed[0] - 1] = delta;
        prop_assert_eq!(v.thrust_to_wrench(&u, &f).unwrap(), v.thrust_to_wrench(&u2, &f).unwrap());
        let mut s1 = BodyState::new(nu, Vector6::zeros());
        let mut s2 = s1;
        for _ in 0..50 {
            s1 = v.step(&s1, &u, &f, 0.01, &Vector6::zeros()).unwrap();
            s2 = v.step(&s2, &u2, &f, 0.01, &Vector6::zeros()).unwrap();
        }
        prop_assert_eq!(s1, s2);
    }

    // dE/dt = nu' M nu_dot = -nu' D(nu) nu, because C(nu) is skew.
    #[test]
    fn unforced_power_is_dissipative(nu in vec6(2.0), psi in -PI..PI) {
        let v = vehicle();
        let s = BodyState::new(nu, Vector6::new(1.0, -2.0, 3.0, 0.0, 0.0, psi));
        let a = v.rigid_body_accel(&s, &Vector6::zeros()).unwrap();
        let power: f64 = (0..6).map(|i| v.mass[i] * nu[i] * a[i]).sum();
        let p = &v.params;
        let dissipation = damping_force(&nu, &p.linear_damping, &p.quadratic_damping).dot(&nu);
        prop_assert!((power + dissipation).abs() < 1e-9 * (1.0 + dissipation));
        prop_assert!(power <= 1e-12);
    }

    #[test]
    fn unforced_speed_decays(nu in vec6(0.2)) {
        let mut p = VehicleParams::default();
        p.restoring_arm_z = 0.0;
        let v = Vehicle::new(p).unwrap();
        let mut s = BodyState::new(nu, Vector6::zeros());
        let mut e = kinetic_energy(&v, &s.nu);
        for _ in 0..300 {
            s = v.step(&s, &Vector8::zeros(), &FaultModel::healthy(0), 0.01, &Vector6::zeros()).unwrap();
            let e2 = kinetic_energy(&v, &s.nu);
            prop_assert!(e2 <= e + 1e-15, "energy rose from {} to {}", e, e2);
            e = e2;
        }
    }

    #[test]
    fn coriolis_does_no_work(nu in vec6(3.0)) {
        let m = VehicleParams::default().mass_diagonal();
        prop_assert!(coriolis_force(&nu, &m).dot(&nu).abs() < 1e-12);
    }
}

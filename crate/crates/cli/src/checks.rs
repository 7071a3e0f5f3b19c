//! Deterministic oracle checks shared by `verify` and the acceptance suite.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use auv_bayes::{apply_floor, Posterior};
use auv_dynamics::{fault_coefficients, Vehicle, VehicleParams};
use auv_linear::{linearize, linearize_fd};
use auv_lqt::{backward_sweep, closed_loop_inputs, tracking_cost, CostWeights, Feedforward, Stage};
use auv_sim::{crossing_time, reference_trajectory, settling_time, ReferenceSpec};
use nalgebra::{DMatrix, DVector, SMatrix, SVector, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LQT_CASES: usize = 25;
pub const LQT_REL_TOL: f64 = 1e-8;
pub const JACOBIAN_POINTS: usize = 10;
pub const JACOBIAN_REL_TOL: f64 = 1e-5;
/// Entries below this size are compared on an absolute scale.
pub const JACOBIAN_FLOOR: f64 = 1e-3;
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LqtReport {
    pub cases: usize,
    pub max_rel_err: f64,
    pub elapsed: Duration,
}

fn random_mat<const R: usize, const C: usize>(rng: &mut ChaCha8Rng, lim: f64) -> SMatrix<f64, R, C> {
    SMatrix::from_fn(|_, _| rng.random_range(-lim..lim))
}

fn random_psd<const N: usize>(rng: &mut ChaCha8Rng, ridge: f64) -> SMatrix<f64, N, N> {
    let l = random_mat::<N, N>(rng, 1.0);
    l * l.transpose() + SMatrix::identity() * ridge
}

fn dense<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

/// Minimum of the tracking cost over the stacked inputs, by forming the
/// quadratic in `U` explicitly and solving its normal equations.
fn dense_minimum<const NX: usize, const NU: usize, const NR: usize>(
    stages: &[Stage<NX, NU, NR>],
    w: &CostWeights<NX, NU>,
    x0: &SVector<f64, NX>,
    refs: &[SVector<f64, NR>],
) -> f64 {
    let n = stages.len();
    // x_k = F x0 + G U + c
    let mut f = DMatrix::<f64>::identity(NX, NX);
    let mut g = DMatrix::<f64>::zeros(NX, n * NU);
    let mut c = DVector::<f64>::zeros(NX);
    let mut hess = DMatrix::<f64>::zeros(n * NU, n * NU);
    let mut grad = DVector::<f64>::zeros(n * NU);
    let mut konst = 0.0;
    let x0 = DVector::from_column_slice(x0.as_slice());
    for k in 0..=n {
        let wk = dense(if k == n { w.terminal() } else { &w.q });
        let free = &f * &x0 + &c;
        hess += g.transpose() * &wk * &g;
        grad += g.transpose() * &wk * &free;
        konst += 0.5 * free.dot(&(&wk * &free));
        if k == n {
            break;
        }
        let st = &stages[k];
        let a = dense(&st.a);
        f = &a * f;
        g = &a * g;
        g.view_mut((0, k * NU), (NX, NU)).copy_from(&dense(&st.b));
        c = &a * c + dense(&st.br) * DVector::from_column_slice(refs[k].as_slice());
        let mut blk = hess.view_mut((k * NU, k * NU), (NU, NU));
        blk += dense(&w.r);
    }
    let u = -hess.clone().cholesky().expect("input weight is positive definite").solve(&grad);
    0.5 * u.dot(&(&hess * &u)) + grad.dot(&u) + konst
}

fn lqt_case<const NX: usize, const NU: usize, const NR: usize>(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let stages: Vec<Stage<NX, NU, NR>> = (0..n)
        .map(|_| Stage { a: random_mat(rng, 1.2), b: random_mat(rng, 1.0), br: random_mat(rng, 1.0) })
        .collect();
    let w = CostWeights { q: random_psd::<NX>(rng, 0.0), r: random_psd::<NU>(rng, 0.05), p: Some(random_psd(rng, 0.0)) };
    let x0 = random_mat::<NX, 1>(rng, 2.0);
    let refs: Vec<SVector<f64, NR>> = (0..=n).map(|_| random_mat(rng, 2.0)).collect();
    let sched = backward_sweep(&stages, &w, &refs, Feedforward::Optimal, 0).expect("valid instance");
    let u = closed_loop_inputs(&stages, &sched, &x0, &refs).expect("valid schedule");
    let j = tracking_cost(&stages, &w, &x0, &u, &refs).expect("matching lengths");
    let j_star = dense_minimum(&stages, &w, &x0, &refs);
    (j - j_star).abs() / j_star.abs().max(f64::MIN_POSITIVE)
}

/// Sweep cost against the dense minimum on random instances with up to four
/// states and five steps.
pub fn lqt_optimality(cases: usize, seed: u64) -> LqtReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let e = match i % 5 {
            0 => lqt_case::<1, 1, 1>(&mut rng, 2),
            1 => lqt_case::<2, 1, 1>(&mut rng, 3),
            2 => lqt_case::<3, 2, 1>(&mut rng, 4),
            3 => lqt_case::<4, 2, 2>(&mut rng, 5),
            _ => lqt_case::<4, 1, 3>(&mut rng, 5),
        };
        worst = worst.max(e);
    }
    LqtReport { cases, max_rel_err: worst, elapsed: start.elapsed() }
}

/// Largest componentwise error of the analytic Jacobians against central
/// differences, relative to `|fd| + JACOBIAN_FLOOR`, over random points.
pub fn jacobian_vs_fd(points: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vehicle = Vehicle::new(VehicleParams::default()).expect("bundled parameters are valid");
    let faults = auv_sim::two_thruster_models();
    let mut worst = 0.0f64;
    for i in 0..points {
        // quadratic damping has a kink at zero velocity, so keep every
        // component away from it
        let nu = Vector6::from_fn(|_, _| {
            let m: f64 = rng.random_range(0.01..1.0);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        });
        let eta = Vector6::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-PI..PI),
            rng.random_range(-1.2..1.2),
            rng.random_range(-PI..PI),
        );
        let fault = fault_coefficients(&faults[i % faults.len()], 0).expect("valid thrusters");
        let an = linearize(&nu, &eta, &fault, &vehicle).expect("nonsingular attitude");
        let fd = linearize_fd(&nu, &eta, &fault, &vehicle, FD_STEP).expect("nonsingular attitude");
        let pairs = an.a.iter().zip(fd.a.iter()).chain(an.b.iter().zip(fd.b.iter()));
        for (x, y) in pairs {
            worst = worst.max((x - y).abs() / (y.abs() + JACOBIAN_FLOOR));
        }
    }
    worst
}

/// Every check that needs no closed-loop run.
pub fn verify() -> Vec<Check> {
    let mut out = vec![];

    let helix = ReferenceSpec::default();
    let r0 = reference_trajectory(&helix, 0.0);
    let rq = reference_trajectory(&helix, 25.0 * PI);
    let err = (r0 - Vector6::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0))
        .amax()
        .max((rq - Vector6::new(1.0, 0.0, PI / 2.0, 0.0, 0.0, 0.0)).amax());
    out.push(Check { name: "helix reference", pass: err < 1e-12, detail: format!("max error {err:.1e}") });

    let lqt = lqt_optimality(LQT_CASES, 5);
    out.push(Check {
        name: "tracking sweep matches dense minimum",
        pass: lqt.max_rel_err <= LQT_REL_TOL && lqt.elapsed.as_secs_f64() < 5.0,
        detail: format!(
            "{} cases, max relative error {:.2e} (tol {LQT_REL_TOL:.0e}), {:.3} s",
            lqt.cases,
            lqt.max_rel_err,
            lqt.elapsed.as_secs_f64()
        ),
    });

    let jac = jacobian_vs_fd(JACOBIAN_POINTS, 6);
    out.push(Check {
        name: "analytic Jacobians match central differences",
        pass: jac <= JACOBIAN_REL_TOL,
        detail: format!("{JACOBIAN_POINTS} points, max relative error {jac:.2e} (tol {JACOBIAN_REL_TOL:.0e})"),
    });

    let p = Posterior::new(vec![0.999, 0.0005, 0.0005, 0.0, 0.0, 0.0]).expect("sums to one");
    let f = apply_floor(&p, 0.006);
    let sum: f64 = f.weights().iter().sum();
    let pass = (sum - 1.0).abs() < 1e-12 && apply_floor(&f, 0.006) == f && f.weights().iter().all(|w| *w > 0.0);
    out.push(Check { name: "posterior floor", pass, detail: format!("floored weights {:?}", f.weights()) });

    let dt = 1e-3;
    let t: Vec<f64> = (0..10_000).map(|k| k as f64 * dt).collect();
    let e: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
    let ts = settling_time(&t, &e, 0.05).unwrap_or(f64::NAN);
    let p: Vec<f64> = (0..100).map(|k| if k < 37 { 0.0 } else { 1.0 }).collect();
    let tc = crossing_time(&t[..100], &p, 0.9).unwrap_or(f64::NAN);
    out.push(Check {
        name: "metric fixtures",
        pass: (ts - 20f64.ln()).abs() <= dt && (tc - 37.0 * dt).abs() < 1e-15,
        detail: format!("settling {ts:.4} s (ln 20 = {:.4}), crossing {tc} s", 20f64.ln()),
    });
    out
}

use auv_dynamics::{kinematic_transform, BodyState, FaultModel, Vector8, Vehicle};
use nalgebra::{Matrix3, Vector3, Vector6};

use crate::{Matrix12, Matrix12x8, Result, Vector12};

/// Continuous-time Jacobians `(A_c, B_c)` of the vehicle about a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    pub a: Matrix12,
    pub b: Matrix12x8,
}

fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    a.cross_matrix()
}

fn rx(phi: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = phi.sin_cos();
    (
        Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        Matrix3::new(0.0, 0.0, 0.0, 0.0, -s, -c, 0.0, c, -s),
    )
}

fn ry(theta: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = theta.sin_cos();
    (
        Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Matrix3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s),
    )
}

fn rz(psi: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = psi.sin_cos();
    (
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        Matrix3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0),
    )
}

/// Analytic Jacobians of the nonlinear model about `(ref_nu, ref_eta)`.
///
/// `A_c = [-M^-1 (dC + dD), -M^-1 dg; J(eta), d(J nu)/d eta]`,
/// `B_c = [M^-1; 0] T Gamma`.
pub fn linearize(
    ref_nu: &Vector6<f64>,
    ref_eta: &Vector6<f64>,
    fault: &FaultModel,
    vehicle: &Vehicle,
) -> Result<ContinuousModel> {
    let j = kinematic_transform(ref_eta)?;
    let p = &vehicle.params;
    let m = &vehicle.mass;
    let m1 = Matrix3::from_diagonal(&Vector3::new(m[0], m[1], m[2]));
    let m2 = Matrix3::from_diagonal(&Vector3::new(m[3], m[4], m[5]));
    let v = Vector3::new(ref_nu[0], ref_nu[1], ref_nu[2]);
    let w = Vector3::new(ref_nu[3], ref_nu[4], ref_nu[5]);
    let (m1v, m2w) = (m1 * v, m2 * w);

    // d(C(nu) nu)/d nu
    let mut dc = nalgebra::Matrix6::<f64>::zeros();
    dc.fixed_view_mut::<3, 3>(0, 0).copy_from(&(skew(&w) * m1));
    dc.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(&m1v)));
    dc.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(&v) * m1 - skew(&m1v)));
    dc.fixed_view_mut::<3, 3>(3, 3).copy_from(&(skew(&w) * m2 - skew(&m2w)));
    for i in 0..6 {
        dc[(i, i)] += p.linear_damping[i] + 2.0 * p.quadratic_damping[i] * ref_nu[i].abs();
    }

    // dg/d eta
    let (phi, theta, psi) = (ref_eta[3], ref_eta[4], ref_eta[5]);
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let k = vehicle.weight() * p.restoring_arm_z;
    let mut dg = nalgebra::Matrix6::<f64>::zeros();
    dg[(3, 3)] = k * ct * cf;
    dg[(3, 4)] = -k * st * sf;
    dg[(4, 4)] = k * ct;

    // d(J(eta) nu)/d eta, only the angles matter
    let ((rxm, drx), (rym, dry), (rzm, drz)) = (rx(phi), ry(theta), rz(psi));
    let d1 = [rzm * rym * drx * v, rzm * dry * rxm * v, drz * rym * rxm * v];
    let dj2_dphi = Matrix3::new(
        0.0,
        cf * st / ct,
        -sf * st / ct,
        0.0,
        -sf,
        -cf,
        0.0,
        cf / ct,
        -sf / ct,
    );
    let c2 = ct * ct;
    let dj2_dtheta = Matrix3::new(0.0, sf / c2, cf / c2, 0.0, 0.0, 0.0, 0.0, sf * st / c2, cf * st / c2);
    let d2 = [dj2_dphi * w, dj2_dtheta * w];

    let mut a = Matrix12::zeros();
    for r in 0..6 {
        for c in 0..6 {
            a[(r, c)] = -dc[(r, c)] / m[r];
            a[(r, 6 + c)] = -dg[(r, c)] / m[r];
            a[(6 + r, c)] = j[(r, c)];
        }
    }
    for (col, d) in d1.iter().enumerate() {
        a.fixed_view_mut::<3, 1>(6, 9 + col).copy_from(d);
    }
    for (col, d) in d2.iter().enumerate() {
        a.fixed_view_mut::<3, 1>(9, 9 + col).copy_from(d);
    }

    Ok(ContinuousModel { a, b: input_matrix(fault, vehicle) })
}

fn input_matrix(fault: &FaultModel, vehicle: &Vehicle) -> Matrix12x8 {
    let mut b = Matrix12x8::zeros();
    for c in 0..8 {
        let g = fault.gamma[c];
        for r in 0..6 {
            b[(r, c)] = vehicle.alloc[(r, c)] * g / vehicle.mass[r];
        }
    }
    b
}

/// Central finite-difference Jacobians, for checking or as a fallback.
pub fn linearize_fd(
    ref_nu: &Vector6<f64>,
    ref_eta: &Vector6<f64>,
    fault: &FaultModel,
    vehicle: &Vehicle,
    h: f64,
) -> Result<ContinuousModel> {
    let f = |x: &Vector12| -> Result<Vector12> {
        let s = BodyState::new(x.fixed_rows::<6>(0).into(), x.fixed_rows::<6>(6).into());
        let nu_dot = vehicle.rigid_body_accel(&s, &Vector6::zeros())?;
        let eta_dot = kinematic_transform(&s.eta)? * s.nu;
        let mut out = Vector12::zeros();
        out.fixed_rows_mut::<6>(0).copy_from(&nu_dot);
        out.fixed_rows_mut::<6>(6).copy_from(&eta_dot);
        Ok(out)
    };
    let mut x0 = Vector12::zeros();
    x0.fixed_rows_mut::<6>(0).copy_from(ref_nu);
    x0.fixed_rows_mut::<6>(6).copy_from(ref_eta);
    let mut a = Matrix12::zeros();
    for c in 0..12 {
        let mut xp = x0;
        let mut xm = x0;
        xp[c] += h;
        xm[c] -= h;
        let col = (f(&xp)? - f(&xm)?) / (2.0 * h);
        a.set_column(c, &col);
    }
    // the input enters linearly, so B needs no differencing, but do it anyway
    // through the wrench map to keep this independent of `input_matrix`
    let mut b = Matrix12x8::zeros();
    let s = BodyState::new(*ref_nu, *ref_eta);
    let base = vehicle.rigid_body_accel(&s, &Vector6::zeros())?;
    for c in 0..8 {
        let mut u = Vector8::zeros();
        u[c] = 1.0;
        let tau = vehicle.alloc * fault.gamma.component_mul(&u);
        let acc = vehicle.rigid_body_accel(&s, &tau)?;
        b.fixed_view_mut::<6, 1>(0, c).copy_from(&(acc - base));
    }
    Ok(ContinuousModel { a, b })
}

use nalgebra::{Matrix3, Matrix6, Vector6};
use std::f64::consts::FRAC_PI_2;

use crate::{DynamicsError, Result};

/// Distance from pi/2 in pitch below which the Euler-rate matrix is rejected.
pub const SINGULARITY_TOL: f64 = 1e-6;

/// Body-to-earth rotation for ZYX Euler angles.
pub fn rotation_matrix(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    Matrix3::new(
        cp * ct,
        -sp * cf + cp * st * sf,
        sp * sf + cp * cf * st,
        sp * ct,
        cp * cf + sf * st * sp,
        -cp * sf + st * sp * cf,
        -st,
        ct * sf,
        ct * cf,
    )
}

pub(crate) fn check_pitch(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(DynamicsError::NonFinite("pitch angle"));
    }
    if theta.abs() >= FRAC_PI_2 - SINGULARITY_TOL {
        return Err(DynamicsError::SingularAttitude { theta: theta.abs(), tol: SINGULARITY_TOL });
    }
    Ok(())
}

/// Maps body angular rates to Euler angle rates.
pub fn euler_rate_matrix(phi: f64, theta: f64) -> Result<Matrix3<f64>> {
    check_pitch(theta)?;
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let tt = st / ct;
    Ok(Matrix3::new(1.0, sf * tt, cf * tt, 0.0, cf, -sf, 0.0, sf / ct, cf / ct))
}

/// `J(eta) = diag(J1, J2)`.
pub fn kinematic_transform(eta: &Vector6<f64>) -> Result<Matrix6<f64>> {
    let j2 = euler_rate_matrix(eta[3], eta[4])?;
    let j1 = rotation_matrix(eta[3], eta[4], eta[5]);
    let mut j = Matrix6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&j1);
    j.fixed_view_mut::<3, 3>(3, 3).copy_from(&j2);
    Ok(j)
}

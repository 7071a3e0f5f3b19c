use nalgebra::Vector6;

use crate::ReferenceSpec;

impl ReferenceSpec {
    /// Reference pose `[x, y, z, phi, theta, psi]` at time `t`.
    pub fn pose(&self, t: f64) -> Vector6<f64> {
        match *self {
            ReferenceSpec::Helix { radius_m, angular_rate_rad_s: w, depth_rate_m_s } => {
                let (s, c) = (w * t).sin_cos();
                Vector6::new(radius_m * s, radius_m * c, depth_rate_m_s * t, 0.0, 0.0, 0.0)
            }
            ReferenceSpec::Constant { pose } => Vector6::from(pose),
        }
    }

    /// Body-frame velocity along the reference. The reference attitude is
    /// level with zero heading, so this is the earth-frame rate.
    pub fn velocity(&self, t: f64) -> Vector6<f64> {
        match *self {
            ReferenceSpec::Helix { radius_m, angular_rate_rad_s: w, depth_rate_m_s } => {
                let (s, c) = (w * t).sin_cos();
                Vector6::new(radius_m * w * c, -radius_m * w * s, depth_rate_m_s, 0.0, 0.0, 0.0)
            }
            ReferenceSpec::Constant { .. } => Vector6::zeros(),
        }
    }
}

/// Reference pose of the given trajectory at `t`.
pub fn reference_trajectory(spec: &ReferenceSpec, t: f64) -> Vector6<f64> {
    spec.pose(t)
}

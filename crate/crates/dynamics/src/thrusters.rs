use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::{DynamicsError, FaultModel, Matrix6x8, Result, Vector8, VehicleParams};

/// What to do with a command beyond the thrust limit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaturationPolicy {
    Error,
    #[default]
    Clamp,
}

impl SaturationPolicy {
    /// Applies the policy to a command vector.
    pub fn apply(self, u: &Vector8, limit: f64) -> Result<Vector8> {
        let mut out = *u;
        for (i, v) in out.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(DynamicsError::NonFinite("thruster command"));
            }
            if v.abs() > limit {
                match self {
                    SaturationPolicy::Error => {
                        return Err(DynamicsError::Saturation { index: i + 1, value: *v, limit })
                    }
                    SaturationPolicy::Clamp => *v = v.clamp(-limit, limit),
                }
            }
        }
        Ok(out)
    }
}

/// Column `i` is `[d_i; r_i x d_i]`.
pub fn build_allocation_matrix(params: &VehicleParams) -> Matrix6x8 {
    let mut t = Matrix6x8::zeros();
    for (i, rec) in params.thrusters.iter().take(8).enumerate() {
        let d = Vector3::from(rec.direction);
        let r = Vector3::from(rec.position);
        let m = r.cross(&d);
        t.fixed_view_mut::<3, 1>(0, i).copy_from(&d);
        t.fixed_view_mut::<3, 1>(3, i).copy_from(&m);
    }
    t
}

/// `tau = T Gamma u`, after applying the saturation policy to `u`.
pub fn thrust_to_wrench(
    u: &Vector8,
    fault: &FaultModel,
    alloc: &Matrix6x8,
    max_thrust: f64,
    policy: SaturationPolicy,
) -> Result<Vector6<f64>> {
    let u = policy.apply(u, max_thrust)?;
    Ok(alloc * fault.gamma.component_mul(&u))
}

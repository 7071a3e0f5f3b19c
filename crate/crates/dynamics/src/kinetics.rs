use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::kinematics::{check_pitch, kinematic_transform};
use crate::{
    build_allocation_matrix, thrust_to_wrench, DynamicsError, FaultModel, Matrix6x8, Result,
    SaturationPolicy, Vector8, VehicleParams,
};

/// Body velocity and earth-frame pose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub nu: Vector6<f64>,
    pub eta: Vector6<f64>,
}

impl BodyState {
    pub fn new(nu: Vector6<f64>, eta: Vector6<f64>) -> Self {
        Self { nu, eta }
    }

    pub fn is_finite(&self) -> bool {
        self.nu.iter().chain(self.eta.iter()).all(|v| v.is_finite())
    }
}

/// `C(nu) nu` for a diagonal mass matrix (rigid body plus added mass).
pub fn coriolis_force(nu: &Vector6<f64>, mass: &[f64; 6]) -> Vector6<f64> {
    let v = Vector3::new(nu[0], nu[1], nu[2]);
    let w = Vector3::new(nu[3], nu[4], nu[5]);
    let mv = Vector3::new(mass[0] * v[0], mass[1] * v[1], mass[2] * v[2]);
    let mw = Vector3::new(mass[3] * w[0], mass[4] * w[1], mass[5] * w[2]);
    let f = w.cross(&mv);
    let m = v.cross(&mv) + w.cross(&mw);
    Vector6::new(f[0], f[1], f[2], m[0], m[1], m[2])
}

/// `D(nu) nu` with diagonal linear plus quadratic damping.
pub fn damping_force(nu: &Vector6<f64>, linear: &[f64; 6], quadratic: &[f64; 6]) -> Vector6<f64> {
    Vector6::from_fn(|i, _| (linear[i] + quadratic[i] * nu[i].abs()) * nu[i])
}

/// `g(eta)` for a neutrally buoyant vehicle with the centre of buoyancy `bg_z`
/// above the centre of gravity.
pub fn restoring_force(eta: &Vector6<f64>, weight: f64, bg_z: f64) -> Vector6<f64> {
    let sf = eta[3].sin();
    let (st, ct) = eta[4].sin_cos();
    let k = weight * bg_z;
    Vector6::new(0.0, 0.0, 0.0, k * ct * sf, k * st, 0.0)
}

/// Vehicle parameters with the derived quantities the simulation needs.
#[derive(Debug, Clone)]
pub struct Vehicle {
    pub params: VehicleParams,
    pub alloc: Matrix6x8,
    pub mass: [f64; 6],
    pub saturation: SaturationPolicy,
}

impl Vehicle {
    pub fn new(params: VehicleParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::with_allocation(build_allocation_matrix(&params), params))
    }

    /// Uses a supplied allocation matrix instead of the one implied by the
    /// thruster records.
    pub fn with_allocation(alloc: Matrix6x8, params: VehicleParams) -> Self {
        let mass = params.mass_diagonal();
        Self { params, alloc, mass, saturation: SaturationPolicy::Clamp }
    }

    pub fn weight(&self) -> f64 {
        self.params.weight()
    }

    pub fn thrust_to_wrench(&self, u: &Vector8, fault: &FaultModel) -> Result<Vector6<f64>> {
        thrust_to_wrench(u, fault, &self.alloc, self.params.max_thrust, self.saturation)
    }

    /// `nu_dot = M^-1 (tau - C(nu) nu - D(nu) nu - g(eta))`.
    pub fn rigid_body_accel(&self, state: &BodyState, wrench: &Vector6<f64>) -> Result<Vector6<f64>> {
        if !state.is_finite() || wrench.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite("rigid_body_accel input"));
        }
        let p = &self.params;
        let rhs = wrench
            - coriolis_force(&state.nu, &self.mass)
            - damping_force(&state.nu, &p.linear_damping, &p.quadratic_damping)
            - restoring_force(&state.eta, self.weight(), p.restoring_arm_z);
        let acc = Vector6::from_fn(|i, _| rhs[i] / self.mass[i]);
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite("acceleration"));
        }
        Ok(acc)
    }

    /// One forward-Euler step. `process_noise` is added to the body acceleration.
    pub fn step(
        &self,
        state: &BodyState,
        u: &Vector8,
        fault: &FaultModel,
        dt: f64,
        process_noise: &Vector6<f64>,
    ) -> Result<BodyState> {
        check_pitch(state.eta[4])?;
        let tau = self.thrust_to_wrench(u, fault)?;
        let nu_dot = self.rigid_body_accel(state, &tau)?;
        let j = kinematic_transform(&state.eta)?;
        let next = BodyState {
            nu: state.nu + (nu_dot + process_noise) * dt,
            eta: state.eta + j * state.nu * dt,
        };
        if !next.is_finite() {
            return Err(DynamicsError::NonFinite("state"));
        }
        Ok(next)
    }
}

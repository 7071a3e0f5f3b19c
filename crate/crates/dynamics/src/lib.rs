//! Nonlinear 6-DOF model of an eight-thruster underwater vehicle.
//!
//! State is split into the body-frame velocity `nu = [u, v, w, p, q, r]` and the
//! earth-frame pose `eta = [x, y, z, phi, theta, psi]` (NED, ZYX Euler angles).
//! The kinetics follow the usual Fossen form
//!
//! ```text
//! M nu_dot + C(nu) nu + D(nu) nu + g(eta) = tau,    tau = T Gamma u
//! eta_dot = J(eta) nu
//! ```
//!
//! with a diagonal mass matrix (rigid body plus added mass), diagonal linear and
//! quadratic damping, and restoring moments from a vertical metacentric arm.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod fault;
mod kinematics;
mod kinetics;
mod params;
mod thrusters;

pub use error::DynamicsError;
pub use fault::{fault_coefficients, FaultModel};
pub use kinematics::{euler_rate_matrix, kinematic_transform, rotation_matrix, SINGULARITY_TOL};
pub use kinetics::{coriolis_force, damping_force, restoring_force, BodyState, Vehicle};
pub use params::{ThrusterRecord, VehicleParams};
pub use thrusters::{build_allocation_matrix, thrust_to_wrench, SaturationPolicy};

use nalgebra::{SMatrix, SVector};

/// Number of thrusters on the vehicle.
pub const THRUSTERS: usize = 8;

/// Standard gravity, used for the kgf conversion in logs.
pub const KGF: f64 = 9.80665;

pub type Vector8 = SVector<f64, 8>;
pub type Matrix6x8 = SMatrix<f64, 6, 8>;

pub type Result<T> = std::result::Result<T, DynamicsError>;

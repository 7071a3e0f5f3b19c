//! Linear time-varying model of the vehicle along a reference trajectory and
//! the integral-augmented system used for tracking.
//!
//! The 12-state vector is `x = [nu; eta]`. Augmenting with the accumulated
//! output error `z_{k+1} = z_k + r_k - H x_k` gives the 18-state
//!
//! ```text
//! x~_{k+1} = A~ x~_k + B~ u_k + B~_r r_k,   A~ = [A 0; -H I],  B~ = [B; 0],  B~_r = [0; I]
//! ```

mod augment;
mod jacobian;

pub use augment::{augment, augment_unchecked, check_output_rank, discretize, AugmentedModel, CostForm, LinearModel};
pub use jacobian::{linearize, linearize_fd, ContinuousModel};

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

pub type Vector12 = SVector<f64, 12>;
pub type Vector18 = SVector<f64, 18>;
pub type Matrix12 = SMatrix<f64, 12, 12>;
pub type Matrix18 = SMatrix<f64, 18, 18>;
pub type Matrix12x8 = SMatrix<f64, 12, 8>;
pub type Matrix18x8 = SMatrix<f64, 18, 8>;
pub type Matrix18x6 = SMatrix<f64, 18, 6>;
pub type Matrix6x12 = SMatrix<f64, 6, 12>;
pub type Matrix6x18 = SMatrix<f64, 6, 18>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error(transparent)]
    Dynamics(#[from] auv_dynamics::DynamicsError),
    #[error("output matrix H has rank {rank}, expected 6")]
    RankDeficient { rank: usize },
    #[error("weight matrix {0} is not symmetric positive semidefinite")]
    NotPsd(&'static str),
}

pub type Result<T> = std::result::Result<T, LinearError>;

/// `H = [0 I6]`: the pose is measured, velocities are not.
pub fn pose_output() -> Matrix6x12 {
    let mut h = Matrix6x12::zeros();
    h.fixed_view_mut::<6, 6>(0, 6).fill_with_identity();
    h
}

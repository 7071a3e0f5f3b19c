//! Kalman filter bank over fault hypotheses.
//!
//! Each hypothesis carries its own estimate of the augmented state. Around the
//! reference trajectory the model is linear time-varying, so the extended filter
//! reduces to the linear recursions with per-step `(A, B)`:
//!
//! ```text
//! predict:  x = A x + B u + d,         P = A P A' + Qn
//! update:   z~ = y - H x,   Pz = H P H' + R,   F = P H' Pz^-1
//!           x += F z~,      P = (I - F H) P (I - F H)' + F R F'
//! ```
//!
//! `d` is any known exogenous input (the reference injection into the integral
//! states). The covariance update is the Joseph form.

use auv_dynamics::FaultModel;
use nalgebra::{SMatrix, SVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EkfError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("innovation covariance is not positive definite")]
    SingularInnovation,
}

pub type Result<T> = std::result::Result<T, EkfError>;

/// Default initial covariance scale.
pub const INITIAL_COVARIANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<const NX: usize, const NY: usize> {
    pub fault: FaultModel,
    pub x_hat: SVector<f64, NX>,
    pub p: SMatrix<f64, NX, NX>,
    pub innovation: SVector<f64, NY>,
    pub innovation_cov: SMatrix<f64, NY, NY>,
    /// Posterior weight mirrored from the supervisor, for logging.
    pub posterior: f64,
}

impl<const NX: usize, const NY: usize> Hypothesis<NX, NY> {
    pub fn new(fault: FaultModel, x0: SVector<f64, NX>, p0: SMatrix<f64, NX, NX>, posterior: f64) -> Self {
        Self {
            fault,
            x_hat: x0,
            p: p0,
            innovation: SVector::zeros(),
            innovation_cov: SMatrix::identity(),
            posterior,
        }
    }

    pub fn with_defaults(fault: FaultModel, posterior: f64) -> Self {
        Self::new(fault, SVector::zeros(), SMatrix::identity() * INITIAL_COVARIANCE, posterior)
    }

    /// Propagates mean and covariance through `x' = A x + B u + d`.
    pub fn predict<const NU: usize>(
        &mut self,
        a: &SMatrix<f64, NX, NX>,
        b: &SMatrix<f64, NX, NU>,
        u: &SVector<f64, NU>,
        d: &SVector<f64, NX>,
        qn: &SMatrix<f64, NX, NX>,
    ) -> Result<()> {
        let x = a * self.x_hat + b * u + d;
        let p = a * self.p * a.transpose() + qn;
        if x.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(EkfError::NonFinite("prediction"));
        }
        self.x_hat = x;
        self.p = (p + p.transpose()) * 0.5;
        Ok(())
    }

    /// Measurement update. Stores the innovation and its covariance and
    /// returns the gain.
    pub fn update(
        &mut self,
        h: &SMatrix<f64, NY, NX>,
        y: &SVector<f64, NY>,
        r: &SMatrix<f64, NY, NY>,
    ) -> Result<SMatrix<f64, NX, NY>> {
        let innov = y - h * self.x_hat;
        let ph = self.p * h.transpose();
        let pz = h * ph + r;
        let pz = (pz + pz.transpose()) * 0.5;
        let chol = pz.cholesky().ok_or(EkfError::SingularInnovation)?;
        // F = P H' Pz^-1, solved as Pz F' = H P
        let gain = chol.solve(&ph.transpose()).transpose();
        let ikh = SMatrix::<f64, NX, NX>::identity() - gain * h;
        let p = ikh * self.p * ikh.transpose() + gain * r * gain.transpose();
        let x = self.x_hat + gain * innov;
        if x.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(EkfError::NonFinite("update"));
        }
        self.x_hat = x;
        self.p = (p + p.transpose()) * 0.5;
        self.innovation = innov;
        self.innovation_cov = pz;
        Ok(gain)
    }
}

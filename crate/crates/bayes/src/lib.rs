//! Posterior weights over a finite set of fault hypotheses.
//!
//! Each step, hypothesis `i` contributes the Gaussian likelihood of its
//! innovation `L_i = |Pz|^-1/2 exp(-1/2 z' Pz^-1 z)` and the weights follow
//! Bayes' rule `p_i <- L_i p_i / sum_j L_j p_j`. All arithmetic is in log space.
//!
//! Once one weight exceeds `1 - eps` the vector is reset to `1 - eps` for the
//! dominant model and `eps / M` for the rest, then renormalised. Keeping every
//! alternative alive is what lets the supervisor follow a later change of fault.

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("innovation covariance is not positive definite")]
    SingularCovariance,
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("posterior has no remaining mass; every hypothesis is ruled out")]
    NoMass,
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
}

pub type Result<T> = std::result::Result<T, BayesError>;

/// `ln L = -1/2 ln|Pz| - 1/2 z' Pz^-1 z`.
pub fn log_likelihood<const N: usize>(innovation: &SVector<f64, N>, cov: &SMatrix<f64, N, N>) -> Result<f64> {
    let chol = cov.cholesky().ok_or(BayesError::SingularCovariance)?;
    let l = chol.l_dirty();
    let log_det: f64 = (0..N).map(|i| 2.0 * l[(i, i)].ln()).sum();
    let w = chol.l().solve_lower_triangular(innovation).ok_or(BayesError::SingularCovariance)?;
    Ok(-0.5 * log_det - 0.5 * w.norm_squared())
}

pub fn likelihood<const N: usize>(innovation: &SVector<f64, N>, cov: &SMatrix<f64, N, N>) -> Result<f64> {
    log_likelihood(innovation, cov).map(f64::exp)
}

/// Probability vector over hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    weights: Vec<f64>,
}

impl Posterior {
    /// Priors must be non-negative and sum to 1 within 1e-9.
    pub fn new(priors: Vec<f64>) -> Result<Self> {
        if priors.is_empty() {
            return Err(BayesError::InvalidPrior("empty".into()));
        }
        if priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(BayesError::InvalidPrior(format!("negative or non-finite entry in {priors:?}")));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(BayesError::InvalidPrior(format!("sums to {sum}")));
        }
        Ok(Self { weights: priors })
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Index of the largest weight; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.weights)
    }
}

/// Index of the largest entry, lowest index on ties. NaN never wins.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] || v[best].is_nan() {
            best = i;
        }
    }
    best
}

/// Bayes update from log-likelihoods.
pub fn posterior_update_log(prior: &Posterior, log_likelihoods: &[f64]) -> Result<Posterior> {
    let m = prior.len();
    if log_likelihoods.len() != m {
        return Err(BayesError::Length { expected: m, got: log_likelihoods.len() });
    }
    let logs: Vec<f64> = prior
        .weights
        .iter()
        .zip(log_likelihoods)
        .map(|(p, l)| if *p > 0.0 && !l.is_nan() { p.ln() + l } else { f64::NEG_INFINITY })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(BayesError::NoMass);
    }
    let mut w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    Ok(Posterior { weights: w })
}

/// Bayes update from plain likelihoods.
pub fn posterior_update(prior: &Posterior, likelihoods: &[f64]) -> Result<Posterior> {
    let logs: Vec<f64> = likelihoods.iter().map(|l| if *l > 0.0 { l.ln() } else { f64::NEG_INFINITY }).collect();
    posterior_update_log(prior, &logs)
}

/// Resets a near-degenerate posterior to `1 - eps` / `eps / M` and renormalises.
/// Returns the input unchanged when no weight exceeds `1 - eps`.
pub fn apply_floor(posterior: &Posterior, eps: f64) -> Posterior {
    let m = posterior.len();
    let top = posterior.argmax();
    if posterior.weights[top] <= 1.0 - eps || m < 2 {
        return posterior.clone();
    }
    let mut w = vec![eps / m as f64; m];
    w[top] = 1.0 - eps;
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    Posterior { weights: w }
}

/// `u* = sum_i p_i u_i`.
pub fn blend_controls<const N: usize>(controls: &[SVector<f64, N>], posterior: &Posterior) -> Result<SVector<f64, N>> {
    if controls.len() != posterior.len() {
        return Err(BayesError::Length { expected: posterior.len(), got: controls.len() });
    }
    Ok(controls.iter().zip(&posterior.weights).fold(SVector::zeros(), |acc, (u, p)| acc + u * *p))
}

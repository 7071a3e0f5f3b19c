//! Finite-horizon discrete linear quadratic tracking for time-varying systems
//! with a known additive reference input
//!
//! ```text
//! x_{k+1} = A_k x_k + B_k u_k + Br_k r_k
//! J = 1/2 x_N' P x_N + 1/2 sum_{k<N} (x_k' Q x_k + u_k' R u_k)
//! ```
//!
//! The backward sweep produces the Riccati matrices `S_k`, the feedforward
//! sequence `Tau_k` and the gains, and the optimal input is
//!
//! ```text
//! u_k = Kv_k Tau_{k+1} - K_k x_k - Kv_k S_{k+1} Br_k r_k
//! K_k  = (R + B' S_{k+1} B)^-1 B' S_{k+1} A
//! Kv_k = (R + B' S_{k+1} B)^-1 B'
//! S_k  = Q + A' S_{k+1} (A - B K_k)
//! Tau_k = (A - B K_k)' (Tau_{k+1} - S_{k+1} Br r_k),   Tau_N = 0
//! ```
//!
//! Dimensions are const generic so the same code runs the 18-state vehicle
//! model and small test systems.

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LqtError {
    #[error("weight {0} is not symmetric positive semidefinite")]
    NotPsd(&'static str),
    #[error("control weight R is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("R + B'SB is singular at step {0}")]
    Singular(usize),
    #[error("step {k} outside schedule of length {n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("expected {expected} {what}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, LqtError>;

/// One step of the time-varying model.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage<const NX: usize, const NU: usize, const NR: usize> {
    pub a: SMatrix<f64, NX, NX>,
    pub b: SMatrix<f64, NX, NU>,
    pub br: SMatrix<f64, NX, NR>,
}

/// Boundary handling of the feedforward sequence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Feedforward {
    /// `Tau_N = 0` and `Tau_k = Acl' (Tau_{k+1} - S Br r_k)`: the optimal form.
    #[default]
    Optimal,
    /// `Tau_N = Acl_{N-1}' Q Br r_N` and `Tau_k = Acl' (Tau_{k+1} + S Br r_k)`.
    /// Not optimal for the cost above; kept for comparison runs.
    Alternate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights<const NX: usize, const NU: usize> {
    pub q: SMatrix<f64, NX, NX>,
    pub r: SMatrix<f64, NU, NU>,
    /// Terminal weight; `None` means `P = Q`.
    pub p: Option<SMatrix<f64, NX, NX>>,
}

fn check_psd<const N: usize>(m: &SMatrix<f64, N, N>, name: &'static str) -> Result<()> {
    let scale = m.abs().max().max(1.0);
    if m.iter().any(|v| !v.is_finite()) || (m - m.transpose()).abs().max() > 1e-12 * scale {
        return Err(LqtError::NotPsd(name));
    }
    // a PSD matrix plus a small ridge always has a Cholesky factor
    let ridge = SMatrix::<f64, N, N>::identity() * (1e-10 * scale);
    if (m + ridge).cholesky().is_none() {
        return Err(LqtError::NotPsd(name));
    }
    Ok(())
}

impl<const NX: usize, const NU: usize> CostWeights<NX, NU> {
    pub fn terminal(&self) -> &SMatrix<f64, NX, NX> {
        self.p.as_ref().unwrap_or(&self.q)
    }

    pub fn validate(&self) -> Result<()> {
        check_psd(&self.q, "Q")?;
        if let Some(p) = &self.p {
            check_psd(p, "P")?;
        }
        let r = &self.r;
        let scale = r.abs().max().max(1.0);
        if (r - r.transpose()).abs().max() > 1e-12 * scale || r.cholesky().is_none() {
            return Err(LqtError::NotPositiveDefinite);
        }
        Ok(())
    }
}

/// Output of one backward sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSchedule<const NX: usize, const NU: usize, const NR: usize> {
    /// `S_0 ..= S_N`
    pub s: Vec<SMatrix<f64, NX, NX>>,
    /// `Tau_0 ..= Tau_N`
    pub tau: Vec<SVector<f64, NX>>,
    pub k: Vec<SMatrix<f64, NU, NX>>,
    pub kv: Vec<SMatrix<f64, NU, NX>>,
    /// `Kv_k S_{k+1} Br_k`
    pub kv_s_br: Vec<SMatrix<f64, NU, NR>>,
    /// `Kv_k Tau_{k+1}`
    pub ff: Vec<SVector<f64, NU>>,
    pub fault_id: usize,
}

impl<const NX: usize, const NU: usize, const NR: usize> GainSchedule<NX, NU, NR> {
    pub fn horizon(&self) -> usize {
        self.k.len()
    }

    /// `u_k = Kv_k Tau_{k+1} - K_k x_k - Kv_k S_{k+1} Br_k r_k`.
    pub fn control(&self, k: usize, x: &SVector<f64, NX>, r: &SVector<f64, NR>) -> Result<SVector<f64, NU>> {
        if k >= self.horizon() {
            return Err(LqtError::IndexOutOfRange { k, n: self.horizon() });
        }
        Ok(self.ff[k] - self.k[k] * x - self.kv_s_br[k] * r)
    }
}

/// Backward sweep over `stages.len() = N` steps with references `r_0 ..= r_N`.
///
/// Weights are assumed validated; see [`CostWeights::validate`].
pub fn backward_sweep<const NX: usize, const NU: usize, const NR: usize>(
    stages: &[Stage<NX, NU, NR>],
    weights: &CostWeights<NX, NU>,
    refs: &[SVector<f64, NR>],
    form: Feedforward,
    fault_id: usize,
) -> Result<GainSchedule<NX, NU, NR>> {
    let n = stages.len();
    if refs.len() != n + 1 {
        return Err(LqtError::Length { what: "references", expected: n + 1, got: refs.len() });
    }
    let q = &weights.q;
    let mut s = vec![SMatrix::<f64, NX, NX>::zeros(); n + 1];
    let mut tau = vec![SVector::<f64, NX>::zeros(); n + 1];
    let mut kk = vec![SMatrix::<f64, NU, NX>::zeros(); n];
    let mut kv = vec![SMatrix::<f64, NU, NX>::zeros(); n];
    let mut kv_s_br = vec![SMatrix::<f64, NU, NR>::zeros(); n];
    let mut ff = vec![SVector::<f64, NU>::zeros(); n];
    s[n] = *weights.terminal();

    for k in (0..n).rev() {
        let st = &stages[k];
        let sn = s[k + 1];
        let bt = st.b.transpose();
        let inner = weights.r + bt * sn * st.b;
        let chol = inner.cholesky().ok_or(LqtError::Singular(k))?;
        let kvk = chol.solve(&bt);
        let kvs = kvk * sn;
        let kgain = kvs * st.a;
        let acl = st.a - st.b * kgain;
        let sk = q + st.a.transpose() * sn * acl;
        s[k] = (sk + sk.transpose()) * 0.5;
        let s_br_r = sn * (st.br * refs[k]);
        if k == n - 1 && form == Feedforward::Alternate {
            tau[n] = acl.transpose() * (q * (st.br * refs[n]));
        }
        tau[k] = match form {
            Feedforward::Optimal => acl.transpose() * (tau[k + 1] - s_br_r),
            Feedforward::Alternate => acl.transpose() * (tau[k + 1] + s_br_r),
        };
        ff[k] = kvk * tau[k + 1];
        kv_s_br[k] = kvs * st.br;
        kk[k] = kgain;
        kv[k] = kvk;
    }
    if s[0].iter().any(|v| !v.is_finite()) || tau[0].iter().any(|v| !v.is_finite()) {
        return Err(LqtError::NonFinite("gain schedule"));
    }
    Ok(GainSchedule { s, tau, k: kk, kv, kv_s_br, ff, fault_id })
}

/// Evaluates `J` for an input sequence by forward simulation.
pub fn tracking_cost<const NX: usize, const NU: usize, const NR: usize>(
    stages: &[Stage<NX, NU, NR>],
    weights: &CostWeights<NX, NU>,
    x0: &SVector<f64, NX>,
    inputs: &[SVector<f64, NU>],
    refs: &[SVector<f64, NR>],
) -> Result<f64> {
    let n = stages.len();
    if inputs.len() != n {
        return Err(LqtError::Length { what: "inputs", expected: n, got: inputs.len() });
    }
    if refs.len() < n {
        return Err(LqtError::Length { what: "references", expected: n, got: refs.len() });
    }
    let mut x = *x0;
    let mut j = 0.0;
    for k in 0..n {
        let u = &inputs[k];
        j += 0.5 * (x.dot(&(weights.q * x)) + u.dot(&(weights.r * u)));
        let st = &stages[k];
        x = st.a * x + st.b * u + st.br * refs[k];
    }
    Ok(j + 0.5 * x.dot(&(weights.terminal() * x)))
}

/// Runs the schedule in closed loop from `x0` on the noise-free model and
/// returns the inputs it applies.
pub fn closed_loop_inputs<const NX: usize, const NU: usize, const NR: usize>(
    stages: &[Stage<NX, NU, NR>],
    schedule: &GainSchedule<NX, NU, NR>,
    x0: &SVector<f64, NX>,
    refs: &[SVector<f64, NR>],
) -> Result<Vec<SVector<f64, NU>>> {
    let mut x = *x0;
    let mut out = Vec::with_capacity(stages.len());
    for (k, st) in stages.iter().enumerate() {
        let u = schedule.control(k, &x, &refs[k])?;
        x = st.a * x + st.b * u + st.br * refs[k];
        out.push(u);
    }
    Ok(out)
}

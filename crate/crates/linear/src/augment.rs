use nalgebra::{DMatrix, Matrix6, SMatrix};

use crate::{
    ContinuousModel, LinearError, Matrix12, Matrix12x8, Matrix18, Matrix18x6, Matrix18x8,
    Matrix6x12, Matrix6x18, Result,
};

/// Sampled model `x_{k+1} = A x_k + B u_k` at step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a: Matrix12,
    pub b: Matrix12x8,
    pub dt: f64,
    pub step: usize,
}

/// Forward-Euler sampling: `A = I + dt A_c`, `B = dt B_c`.
pub fn discretize(cm: &ContinuousModel, dt: f64, step: usize) -> LinearModel {
    LinearModel { a: Matrix12::identity() + cm.a * dt, b: cm.b * dt, dt, step }
}

/// How the 18×18 state weight is assembled.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum CostForm {
    /// `diag(Q_x, Q_z)`: weights the state and the accumulated error separately.
    BlockDiagonal { state: Matrix12, integral: Matrix6<f64> },
    /// `[H I]' Q [H I]`, i.e. `[H'QH, H'Q; QH, Q]`.
    OutputGram { q: Matrix6<f64> },
}

impl CostForm {
    pub fn from_diagonals(state: &[f64; 12], integral: &[f64; 6]) -> Self {
        CostForm::BlockDiagonal {
            state: Matrix12::from_diagonal(&(*state).into()),
            integral: Matrix6::from_diagonal(&(*integral).into()),
        }
    }

    pub fn q_tilde(&self, h: &Matrix6x12) -> Matrix18 {
        match self {
            CostForm::BlockDiagonal { state, integral } => {
                let mut q = Matrix18::zeros();
                q.fixed_view_mut::<12, 12>(0, 0).copy_from(state);
                q.fixed_view_mut::<6, 6>(12, 12).copy_from(integral);
                q
            }
            CostForm::OutputGram { q } => {
                let mut g = Matrix6x18::zeros();
                g.fixed_view_mut::<6, 12>(0, 0).copy_from(h);
                g.fixed_view_mut::<6, 6>(0, 12).fill_with_identity();
                g.transpose() * q * g
            }
        }
    }

    /// Checks that every weight block is symmetric positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        fn psd<const N: usize>(m: &SMatrix<f64, N, N>, name: &'static str) -> Result<()> {
            let scale = m.abs().max().max(1.0);
            if (m - m.transpose()).abs().max() > 1e-12 * scale {
                return Err(LinearError::NotPsd(name));
            }
            let min = DMatrix::from_column_slice(N, N, m.as_slice()).symmetric_eigenvalues().min();
            if min < -1e-10 * scale {
                return Err(LinearError::NotPsd(name));
            }
            Ok(())
        }
        match self {
            CostForm::BlockDiagonal { state, integral } => {
                psd(state, "Q_state")?;
                psd(integral, "Q_integral")
            }
            CostForm::OutputGram { q } => psd(q, "Q"),
        }
    }
}

/// Integral-augmented model over `x~ = [x; z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    pub a: Matrix18,
    pub b: Matrix18x8,
    pub br: Matrix18x6,
    pub h: Matrix6x18,
    pub q: Matrix18,
    pub step: usize,
}

fn rank(h: &Matrix6x12) -> usize {
    let sv = h.transpose().singular_values();
    let tol = sv.max() * 12.0 * f64::EPSILON;
    sv.iter().filter(|s| **s > tol).count()
}

/// Fails unless `H` has full row rank.
pub fn check_output_rank(h: &Matrix6x12) -> Result<()> {
    match rank(h) {
        6 => Ok(()),
        r => Err(LinearError::RankDeficient { rank: r }),
    }
}

/// Builds the augmented model. The weights are not re-validated here; call
/// [`CostForm::validate`] once when they are configured.
pub fn augment(model: &LinearModel, h: &Matrix6x12, cost: &CostForm) -> Result<AugmentedModel> {
    check_output_rank(h)?;
    Ok(augment_unchecked(model, h, cost.q_tilde(h)))
}

/// [`augment`] without the rank check, with a precomputed `Q~`. For inner
/// loops where `H` was checked once up front.
pub fn augment_unchecked(model: &LinearModel, h: &Matrix6x12, q: Matrix18) -> AugmentedModel {
    let mut a = Matrix18::zeros();
    a.fixed_view_mut::<12, 12>(0, 0).copy_from(&model.a);
    a.fixed_view_mut::<6, 12>(12, 0).copy_from(&(-h));
    a.fixed_view_mut::<6, 6>(12, 12).fill_with_identity();
    let mut b = Matrix18x8::zeros();
    b.fixed_view_mut::<12, 8>(0, 0).copy_from(&model.b);
    let mut br = Matrix18x6::zeros();
    br.fixed_view_mut::<6, 6>(12, 0).fill_with_identity();
    let mut ht = Matrix6x18::zeros();
    ht.fixed_view_mut::<6, 12>(0, 0).copy_from(h);
    AugmentedModel { a, b, br, h: ht, q, step: model.step }
}

//! Sample-space (dual) solver.
//!
//! Introducing `z^μ = Σ_i m_i w_i x_i^μ` with Lagrange multipliers `λ^μ`
//! replaces the `n × n` system `chi' w = b` by a `p × p` system
//!
//! ```text
//! A_μν = δ_μν + (1/p) Σ_i [m_i / (1 - m_i)] x_i^μ x_i^ν / chi_ii,   A ŷ = y
//! 1/beta = (1/p) Σ_μ ŷ^μ y^μ,   λ = beta ŷ,
//! w_i = Σ_μ λ^μ x_i^μ / (beta p chi_ii (1 - m_i))
//! ```
//!
//! Per iteration the cost is one `p × p` Cholesky plus `O(n p²)` to build `A`,
//! so it is the cheaper route once `n ≥ p`. The free energy is evaluated with
//! products against `x` and never forms `chi`.

use nalgebra::{DMatrix, DVector};

use crate::data::{CenteredDataset, SufficientStats};
use crate::error::{Result, VgError};
use crate::linalg::cholesky;
use crate::solver::{cap_beta, iterate, BetaUpdate, Inner, SolveOptions, VgSolution};

/// Smallest `1 - m_i` the dual system uses. Weights `m / (1 - m)` beyond
/// `1e8` push the condition number of `A` past `1/sqrt(eps)` and cost more
/// accuracy in `ŷ` than the saturation itself changes the solution.
pub const DUAL_SATURATION: f64 = 1e-8;

fn saturate(m: f64) -> f64 {
    m.min(1.0 - DUAL_SATURATION)
}

/// Builds `A = I + (1/p) Σ_i [m_i / (1 - m_i)] x_i x_iᵀ / chi_ii`.
///
/// Features with `chi_ii = 0` do not contribute, and `m_i` is held below
/// `1 - DUAL_SATURATION`. The result is symmetrized so that `A == Aᵀ` holds
/// exactly.
pub fn dual_matrix(m: &DVector<f64>, x_c: &DMatrix<f64>, chi_diag: &DVector<f64>) -> Result<DMatrix<f64>> {
    let (p, n) = x_c.shape();
    if m.len() != n || chi_diag.len() != n {
        return Err(VgError::Dimension(format!(
            "m has {} entries, chi_diag {}, for {n} features",
            m.len(),
            chi_diag.len()
        )));
    }
    if let Some(i) = m.iter().position(|&v| !(0.0..1.0).contains(&v)) {
        return Err(VgError::InvalidArgument(format!("m[{i}] = {} must lie in [0, 1)", m[i])));
    }
    let pf = p as f64;
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            if chi_diag[i] > 0.0 {
                let m = saturate(m[i]);
                (m / (1.0 - m) / (chi_diag[i] * pf)).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let active: Vec<usize> = (0..n).filter(|&i| scale[i] > 0.0).collect();
    let mut a = DMatrix::identity(p, p);
    if !active.is_empty() {
        let xs = DMatrix::from_fn(p, active.len(), |mu, k| x_c[(mu, active[k])] * scale[active[k]]);
        a.gemm(1.0, &xs, &xs.transpose(), 1.0);
        for i in 0..p {
            for j in 0..i {
                let s = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
    }
    Ok(a)
}

/// Result of one dual evaluation at fixed `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: DVector<f64>,
    pub y_hat: DVector<f64>,
    pub a: DMatrix<f64>,
    /// `z = y - λ / beta`, the model's fitted outputs.
    pub z: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub beta: BetaUpdate,
    pub w: DVector<f64>,
    pub state: DualState,
}

/// Solves the dual system at fixed `m` and maps back to feature weights.
pub fn dual_solve(
    stats: &SufficientStats,
    x_c: &DMatrix<f64>,
    y_c: &DVector<f64>,
    m: &DVector<f64>,
    beta_cap: f64,
) -> Result<DualSolution> {
    let (p, n) = x_c.shape();
    if y_c.len() != p || stats.n != n || stats.p != p {
        return Err(VgError::Dimension(format!(
            "dual solve with x {p}×{n}, y {}, stats {}×{}",
            y_c.len(),
            stats.p,
            stats.n
        )));
    }
    let a = dual_matrix(m, x_c, &stats.chi_diag)?;
    let y_hat = cholesky(a.clone())?.solve(y_c);
    let pf = p as f64;
    let beta = cap_beta(y_hat.dot(y_c) / pf, beta_cap);
    let lambda = &y_hat * beta.beta;
    // beta cancels between λ and the prefactor, so use ŷ directly.
    let xt_yhat = x_c.tr_mul(&y_hat);
    let w = DVector::from_fn(n, |i, _| {
        if stats.chi_diag[i] > 0.0 {
            xt_yhat[i] / (pf * stats.chi_diag[i] * (1.0 - saturate(m[i])))
        } else {
            0.0
        }
    });
    let z = y_c - &lambda / beta.beta;
    Ok(DualSolution { beta, w, state: DualState { lambda, y_hat, a, z } })
}

/// Damped fixed-point iteration at one `gamma` using the dual system.
pub fn solve_dual(
    data: &CenteredDataset,
    stats: &SufficientStats,
    gamma: f64,
    m_init: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<VgSolution> {
    let pf = data.p() as f64;
    iterate(
        stats,
        gamma,
        m_init,
        opts,
        |m| {
            let sol = dual_solve(stats, &data.x, &data.y, m, opts.beta_cap)?;
            Ok(Inner { w: sol.w, beta: sol.beta })
        },
        |v| (&data.x * v).norm_squared() / pf,
    )
}

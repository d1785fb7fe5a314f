//! Primal variational solver.
//!
//! Every feature `i` carries a selector probability `m_i`, a weight `w_i`, and
//! the model shares one inverse noise variance `beta`. For a fixed sparsity
//! log-odds `gamma` the free energy
//!
//! ```text
//! F = (beta p / 2) [ Σ_ij m_i m_j w_i w_j chi_ij + Σ_i m_i (1 - m_i) w_i² chi_ii
//!                    - 2 Σ_i m_i w_i b_i + sigma_y² ]
//!     - gamma Σ_i m_i + Σ_i [m_i log m_i + (1 - m_i) log(1 - m_i)]
//!     - (p / 2) log(beta / 2π)
//! ```
//!
//! is minimized by iterating three stationarity conditions: `w` solves
//! `chi' w = b` with `chi'_ij = chi_ij m_j + (1 - m_j) chi_jj δ_ij`, `beta` is
//! the inverse of the unexplained variance, and `m_i = σ(gamma + beta p w_i²
//! chi_ii / 2)`. The `m` update is damped by a step `eta` that halves
//! whenever a damped step still moves some `m_i` by more than 0.1.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::SufficientStats;
use crate::error::{Result, VgError};
use crate::linalg::{logit, lu_solve, neg_entropy, sigmoid};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_M_CLIP: f64 = 1e-12;
pub const ETA_JUMP_THRESHOLD: f64 = 0.1;
pub const DEFAULT_BETA_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub m_clip: f64,
    pub eta_jump_threshold: f64,
    pub beta_cap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            m_clip: DEFAULT_M_CLIP,
            eta_jump_threshold: ETA_JUMP_THRESHOLD,
            beta_cap: DEFAULT_BETA_CAP,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(VgError::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.m_clip > 0.0 && self.m_clip < 0.5) {
            return Err(VgError::InvalidArgument(format!(
                "m_clip must lie in (0, 0.5), got {}",
                self.m_clip
            )));
        }
        if !(self.beta_cap > 0.0) || self.max_iter == 0 {
            return Err(VgError::InvalidArgument("beta_cap and max_iter must be positive".into()));
        }
        Ok(())
    }

    pub fn clip(&self, m: f64) -> f64 {
        m.clamp(self.m_clip, 1.0 - self.m_clip)
    }
}

/// A point in variational parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct VgState {
    pub m: DVector<f64>,
    pub w: DVector<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl VgState {
    pub fn new(m: DVector<f64>, w: DVector<f64>, beta: f64, gamma: f64) -> Self {
        Self { m, w, beta, gamma, eta: 1.0 }
    }
}

/// A converged (or abandoned, see `converged`) solution at one `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgSolution {
    #[serde(with = "dvec")]
    pub m: DVector<f64>,
    #[serde(with = "dvec")]
    pub w: DVector<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub free_energy: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Explained variance reached the output variance and `beta` was capped.
    #[serde(default)]
    pub beta_capped: bool,
}

impl VgSolution {
    /// Effective regression weights `v_i = m_i w_i`.
    pub fn v(&self) -> DVector<f64> {
        self.m.component_mul(&self.w)
    }

    /// Count of features with `m_i > 0.5`.
    pub fn nonzero(&self) -> usize {
        self.m.iter().filter(|&&m| m > 0.5).count()
    }

    pub fn state(&self) -> VgState {
        VgState::new(self.m.clone(), self.w.clone(), self.beta, self.gamma)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| VgError::Parse(e.to_string()))
    }
}

pub(crate) mod dvec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

fn check_dims(state: &VgState, stats: &SufficientStats) -> Result<()> {
    if state.m.len() != stats.n || state.w.len() != stats.n {
        return Err(VgError::Dimension(format!(
            "state has {}/{} entries for {} features",
            state.m.len(),
            state.w.len(),
            stats.n
        )));
    }
    Ok(())
}

/// Free energy from a precomputed quadratic term `Σ_ij v_i v_j chi_ij`
/// (`v = m ∘ w`). Lets the dual path avoid forming `chi`.
pub(crate) fn free_energy_with_quadratic(
    m: &DVector<f64>,
    w: &DVector<f64>,
    beta: f64,
    gamma: f64,
    quadratic: f64,
    stats: &SufficientStats,
) -> f64 {
    let p = stats.p as f64;
    let mut diag = 0.0;
    let mut linear = 0.0;
    let mut prior = 0.0;
    for i in 0..stats.n {
        diag += m[i] * (1.0 - m[i]) * w[i] * w[i] * stats.chi_diag[i];
        linear += m[i] * w[i] * stats.b[i];
        prior += -gamma * m[i] + neg_entropy(m[i]);
    }
    let residual = quadratic + diag - 2.0 * linear + stats.sigma_y2;
    0.5 * beta * p * residual + prior - 0.5 * p * (beta / (2.0 * PI)).ln()
}

/// Evaluates the variational free energy. Requires the full `chi`.
pub fn free_energy(state: &VgState, stats: &SufficientStats, m_clip: f64) -> Result<f64> {
    check_dims(state, stats)?;
    let chi = stats.chi_or_err()?;
    let lo = m_clip * (1.0 - 1e-9);
    if let Some(i) = state.m.iter().position(|&m| !(m >= lo && m <= 1.0 - m_clip)) {
        return Err(VgError::InvalidArgument(format!(
            "m[{i}] = {} outside [{m_clip}, 1 - {m_clip}]",
            state.m[i]
        )));
    }
    if !(state.beta > 0.0) {
        return Err(VgError::InvalidArgument(format!("beta must be positive, got {}", state.beta)));
    }
    let v = state.m.component_mul(&state.w);
    let quadratic = v.dot(&(chi * &v));
    Ok(free_energy_with_quadratic(&state.m, &state.w, state.beta, state.gamma, quadratic, stats))
}

/// Analytic partial derivatives of the free energy.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyGradient {
    pub dm: DVector<f64>,
    pub dw: DVector<f64>,
    pub dbeta: f64,
}

pub fn free_energy_gradient(state: &VgState, stats: &SufficientStats) -> Result<FreeEnergyGradient> {
    check_dims(state, stats)?;
    let chi = stats.chi_or_err()?;
    let p = stats.p as f64;
    let (m, w, beta) = (&state.m, &state.w, state.beta);
    let v = m.component_mul(w);
    let chi_v = chi * &v;
    let mut dm = DVector::zeros(stats.n);
    let mut dw = DVector::zeros(stats.n);
    let mut diag = 0.0;
    for i in 0..stats.n {
        let c = stats.chi_diag[i];
        // chi_v includes the j = i term; the (1 - 2m) diagonal piece folds it back.
        let off = chi_v[i] - v[i] * c;
        dm[i] = 0.5 * beta * p * (2.0 * w[i] * off + w[i] * w[i] * c - 2.0 * w[i] * stats.b[i])
            - state.gamma
            + logit(m[i]);
        let chi_prime_w = chi_v[i] + (1.0 - m[i]) * c * w[i];
        dw[i] = beta * p * m[i] * (chi_prime_w - stats.b[i]);
        diag += m[i] * (1.0 - m[i]) * w[i] * w[i] * c;
    }
    let residual = v.dot(&chi_v) + diag - 2.0 * v.dot(&stats.b) + stats.sigma_y2;
    Ok(FreeEnergyGradient { dm, dw, dbeta: 0.5 * p * residual - 0.5 * p / beta })
}

/// Largest projected partial derivative of `F`. For `m` this is the box
/// projected gradient `|clip(m - dF/dm) - m|`, so components pinned at the
/// clip with the gradient pointing outward contribute nothing. Close to 1 a
/// one-ulp change of `m` moves `logit(m)` by about `eps / (1 - m)`, which
/// bounds how small `dF/dm` can get at any representable `m`; that much is
/// forgiven.
pub fn stationarity(solution: &VgSolution, stats: &SufficientStats, m_clip: f64) -> Result<f64> {
    let g = free_energy_gradient(&solution.state(), stats)?;
    let mut worst = g.dw.amax();
    if !solution.beta_capped {
        worst = worst.max(g.dbeta.abs());
    }
    for (i, &m) in solution.m.iter().enumerate() {
        if stats.is_excluded(i) {
            continue;
        }
        let projected = (m - g.dm[i]).clamp(m_clip, 1.0 - m_clip) - m;
        let resolution = f64::EPSILON / (1.0 - m);
        worst = worst.max(projected.abs() - resolution);
    }
    Ok(worst)
}

/// Solves `chi' w = b` for the included features; excluded ones get `w = 0`.
pub fn w_update(m: &DVector<f64>, stats: &SufficientStats) -> Result<DVector<f64>> {
    let chi = stats.chi_or_err()?;
    if m.len() != stats.n {
        return Err(VgError::Dimension(format!("m has {} entries for {} features", m.len(), stats.n)));
    }
    let idx = stats.included();
    let k = idx.len();
    let mut w = DVector::zeros(stats.n);
    if k == 0 {
        return Ok(w);
    }
    let chi_prime = DMatrix::from_fn(k, k, |a, c| {
        let (i, j) = (idx[a], idx[c]);
        let mut v = chi[(i, j)] * m[j];
        if i == j {
            v += (1.0 - m[j]) * chi[(j, j)];
        }
        v
    });
    let rhs = DVector::from_fn(k, |a, _| stats.b[idx[a]]);
    let sol = lu_solve(chi_prime, &rhs)?;
    for (a, &i) in idx.iter().enumerate() {
        w[i] = sol[a];
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaUpdate {
    pub beta: f64,
    /// Set when the unexplained variance was non-positive or `1/beta` fell
    /// below `1/beta_cap`.
    pub capped: bool,
}

/// `1/beta = sigma_y² - Σ m_i w_i b_i`, valid when `w` solves `chi' w = b`.
pub fn beta_update(
    m: &DVector<f64>,
    w: &DVector<f64>,
    stats: &SufficientStats,
    beta_cap: f64,
) -> BetaUpdate {
    let explained: f64 = (0..stats.n).map(|i| m[i] * w[i] * stats.b[i]).sum();
    cap_beta(stats.sigma_y2 - explained, beta_cap)
}

pub(crate) fn cap_beta(unexplained: f64, beta_cap: f64) -> BetaUpdate {
    if unexplained > 0.0 && 1.0 / unexplained <= beta_cap {
        BetaUpdate { beta: 1.0 / unexplained, capped: false }
    } else {
        BetaUpdate { beta: beta_cap, capped: true }
    }
}

/// `σ(gamma + beta p w_i² chi_ii / 2)` clipped to `[m_clip, 1 - m_clip]`.
pub fn m_proposal(state: &VgState, stats: &SufficientStats, m_clip: f64) -> DVector<f64> {
    let half_bp = 0.5 * state.beta * stats.p as f64;
    DVector::from_fn(stats.n, |i, _| {
        if stats.is_excluded(i) {
            return m_clip;
        }
        let field = state.gamma + half_bp * state.w[i] * state.w[i] * stats.chi_diag[i];
        sigmoid(field).clamp(m_clip, 1.0 - m_clip)
    })
}

/// One evaluation of `w` and `beta` for a given `m`.
pub(crate) struct Inner {
    pub w: DVector<f64>,
    pub beta: BetaUpdate,
}

/// The damped fixed-point loop shared by the primal and dual solvers.
///
/// `inner` maps `m` to `(w, beta)`; `quadratic` evaluates `vᵀ chi v`.
pub(crate) fn iterate(
    stats: &SufficientStats,
    gamma: f64,
    m_init: &DVector<f64>,
    opts: &SolveOptions,
    mut inner: impl FnMut(&DVector<f64>) -> Result<Inner>,
    quadratic: impl Fn(&DVector<f64>) -> f64,
) -> Result<VgSolution> {
    opts.validate()?;
    if m_init.len() != stats.n {
        return Err(VgError::Dimension(format!(
            "m_init has {} entries for {} features",
            m_init.len(),
            stats.n
        )));
    }
    let mut m = DVector::from_fn(stats.n, |i, _| {
        if stats.is_excluded(i) {
            opts.m_clip
        } else {
            opts.clip(m_init[i])
        }
    });
    let mut eta = 1.0_f64;
    let mut cur = inner(&m)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let state = VgState { m: m.clone(), w: cur.w.clone(), beta: cur.beta.beta, gamma, eta };
        let proposal = m_proposal(&state, stats, opts.m_clip);
        let gap = (&proposal - &m).amax();
        if gap <= opts.tol {
            // Final undamped step so that w and beta are exact for the returned m.
            m = proposal;
            cur = inner(&m)?;
            converged = true;
            break;
        }
        let next = &m * (1.0 - eta) + &proposal * eta;
        if (&next - &m).amax() > opts.eta_jump_threshold {
            eta *= 0.5;
        }
        m = next;
        cur = inner(&m)?;
    }
    let v = m.component_mul(&cur.w);
    let free_energy =
        free_energy_with_quadratic(&m, &cur.w, cur.beta.beta, gamma, quadratic(&v), stats);
    Ok(VgSolution {
        m,
        w: cur.w,
        beta: cur.beta.beta,
        gamma,
        free_energy,
        converged,
        iterations,
        beta_capped: cur.beta.capped,
    })
}

/// Runs the damped fixed-point iteration at one `gamma` using the
/// feature-space system. Needs the full `chi`.
pub fn solve_primal(
    stats: &SufficientStats,
    gamma: f64,
    m_init: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<VgSolution> {
    let chi = stats.chi_or_err()?;
    iterate(
        stats,
        gamma,
        m_init,
        opts,
        |m| {
            let w = w_update(m, stats)?;
            let beta = beta_update(m, &w, stats, opts.beta_cap);
            Ok(Inner { w, beta })
        },
        |v| v.dot(&(chi * v)),
    )
}

/// `ŷ = Σ_i m_i w_i (x_i - x̄_i) + ȳ` for every row of `x_new`.
pub fn predict(
    solution: &VgSolution,
    x_new: &DMatrix<f64>,
    x_mean: &DVector<f64>,
    y_mean: f64,
) -> Result<DVector<f64>> {
    let n = solution.m.len();
    if x_new.ncols() != n || x_mean.len() != n {
        return Err(VgError::Dimension(format!(
            "inputs have {} columns (means {}) for {n} features",
            x_new.ncols(),
            x_mean.len()
        )));
    }
    let v = solution.v();
    let offset = y_mean - v.dot(x_mean);
    Ok((x_new * &v).add_scalar(offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{center, sufficient_stats, Dataset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_stats(p: usize, n: usize, seed: u64) -> SufficientStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w_true = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
        let y = &x * &w_true + DVector::from_fn(p, |_, _| 0.5 * rng.sample::<f64, _>(StandardNormal));
        sufficient_stats(&center(&Dataset::new(x, y).unwrap()), true)
    }

    fn identity_stats(b: &[f64], sigma_y2: f64, p: usize) -> SufficientStats {
        let n = b.len();
        SufficientStats {
            b: DVector::from_column_slice(b),
            chi: Some(DMatrix::identity(n, n)),
            chi_diag: DVector::from_element(n, 1.0),
            sigma_y2,
            p,
            n,
            excluded: vec![],
        }
    }

    /// Term-by-term evaluation with explicit loops, independent of the
    /// matrix-vector path used by `free_energy`.
    fn free_energy_oracle(s: &VgState, st: &SufficientStats) -> f64 {
        let chi = st.chi.as_ref().unwrap();
        let p = st.p as f64;
        let mut q = 0.0;
        for i in 0..st.n {
            for j in 0..st.n {
                q += s.m[i] * s.m[j] * s.w[i] * s.w[j] * chi[(i, j)];
            }
            q += s.m[i] * (1.0 - s.m[i]) * s.w[i] * s.w[i] * chi[(i, i)];
            q -= 2.0 * s.m[i] * s.w[i] * st.b[i];
        }
        q += st.sigma_y2;
        let mut f = s.beta * p / 2.0 * q;
        for i in 0..st.n {
            let m = s.m[i];
            f += -s.gamma * m + m * m.ln() + (1.0 - m) * (1.0 - m).ln();
        }
        f - p / 2.0 * (s.beta / (2.0 * PI)).ln()
    }

    #[test]
    fn free_energy_matches_oracle() {
        let st = random_stats(12, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let s = VgState::new(
                DVector::from_fn(2, |_, _| rng.random_range(0.05..0.95)),
                DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0)),
                rng.random_range(0.2..4.0),
                rng.random_range(-10.0..2.0),
            );
            let f = free_energy(&s, &st, DEFAULT_M_CLIP).unwrap();
            let o = free_energy_oracle(&s, &st);
            assert!((f - o).abs() < 1e-12 * (1.0 + o.abs()), "{f} vs {o}");
        }
    }

    #[test]
    fn free_energy_null_selection() {
        let st = random_stats(20, 3, 5);
        let clip = DEFAULT_M_CLIP;
        let s = VgState::new(DVector::from_element(3, clip), DVector::from_element(3, 1.3), 1.0, -2.0);
        let f = free_energy(&s, &st, clip).unwrap();
        let p = 20.0;
        let expected = p / 2.0 * st.sigma_y2 - p / 2.0 * (1.0 / (2.0 * PI)).ln();
        assert!((f - expected).abs() < 1e-9, "{f} vs {expected}");
    }

    #[test]
    fn free_energy_rejects_unclipped_m() {
        let st = random_stats(8, 2, 1);
        let s = VgState::new(DVector::from_column_slice(&[0.0, 0.5]), DVector::zeros(2), 1.0, 0.0);
        assert!(free_energy(&s, &st, DEFAULT_M_CLIP).is_err());
    }

    #[test]
    fn w_update_all_selected_is_ols() {
        let st = random_stats(30, 4, 9);
        let w = w_update(&DVector::from_element(4, 1.0), &st).unwrap();
        let ols = st.chi.clone().unwrap().lu().solve(&st.b).unwrap();
        assert!((w - ols).amax() < 1e-10);
    }

    #[test]
    fn w_update_identity_design() {
        let st = identity_stats(&[0.3, -1.2, 0.7], 3.0, 50);
        let w = w_update(&DVector::from_column_slice(&[0.1, 0.6, 0.99]), &st).unwrap();
        assert!((w - &st.b).amax() < 1e-14);
    }

    #[test]
    fn w_update_residual() {
        let st = random_stats(15, 3, 21);
        let m = DVector::from_column_slice(&[0.2, 0.8, 0.55]);
        let w = w_update(&m, &st).unwrap();
        let chi = st.chi.as_ref().unwrap();
        let cp = DMatrix::from_fn(3, 3, |i, j| chi[(i, j)] * m[j] + if i == j { (1.0 - m[j]) * chi[(j, j)] } else { 0.0 });
        assert!((cp * w - &st.b).amax() <= 1e-10);
    }

    #[test]
    fn w_update_singular() {
        // Two identical columns, both fully selected.
        let x = DMatrix::from_fn(6, 2, |i, _| i as f64);
        let y = DVector::from_fn(6, |i, _| (i * i) as f64);
        let st = sufficient_stats(&center(&Dataset::new(x, y).unwrap()), true);
        let err = w_update(&DVector::from_element(2, 1.0), &st).unwrap_err();
        assert!(matches!(err, VgError::Singular { .. }));
    }

    #[test]
    fn beta_update_cases() {
        let st = identity_stats(&[0.5, 0.2], 2.0, 10);
        let b = beta_update(&DVector::zeros(2), &DVector::from_element(2, 3.0), &st, 1e12);
        assert_eq!(b.beta, 0.5);
        let m = DVector::from_column_slice(&[0.9, 0.3]);
        let b = beta_update(&m, &st.b, &st, 1e12);
        let expected = 2.0 - (0.25 * 0.9 + 0.04 * 0.3);
        assert!((1.0 / b.beta - expected).abs() < 1e-14);
        let over = identity_stats(&[2.0], 1.0, 10);
        let b = beta_update(&DVector::from_element(1, 1.0), &over.b, &over, 1e12);
        assert!(b.capped);
        assert_eq!(b.beta, 1e12);
    }

    #[test]
    fn beta_update_is_stationary_in_beta() {
        // With w from the linear system, d F / d beta vanishes at the updated beta;
        // check by central finite differences on F.
        let st = random_stats(25, 3, 31);
        let m = DVector::from_column_slice(&[0.7, 0.3, 0.5]);
        let w = w_update(&m, &st).unwrap();
        let beta = beta_update(&m, &w, &st, 1e12).beta;
        let f = |b: f64| free_energy(&VgState::new(m.clone(), w.clone(), b, -1.0), &st, 1e-12).unwrap();
        let h = 1e-5 * beta;
        let d = (f(beta + h) - f(beta - h)) / (2.0 * h);
        assert!(d.abs() < 1e-5, "{d}");
    }

    #[test]
    fn proposal_limits() {
        let st = identity_stats(&[0.5, 0.2], 2.0, 100);
        let s = VgState::new(DVector::from_element(2, 0.3), DVector::zeros(2), 1.0, 0.0);
        assert_eq!(m_proposal(&s, &st, 1e-12), DVector::from_element(2, 0.5));
        let s = VgState::new(DVector::from_element(2, 0.3), DVector::from_element(2, 1.0), 1.0, -1e6);
        assert_eq!(m_proposal(&s, &st, 1e-12), DVector::from_element(2, 1e-12));
        let s = VgState::new(DVector::from_element(2, 0.3), DVector::from_element(2, 1.0), 1.0, -10.0);
        let m = m_proposal(&s, &st, 1e-12);
        // σ(40) rounds to 1 and is held at the clip.
        assert_eq!(m[0], 1.0 - 1e-12);
    }

    #[test]
    fn solve_primal_univariate_fixed_point() {
        // chi = 1, b² / sigma_y² = 0.1, p = 100, gamma = -5: outside any bistable band.
        let st = identity_stats(&[0.1_f64.sqrt()], 1.0, 100);
        let sol = solve_primal(&st, -5.0, &DVector::from_element(1, 0.001), &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        // Fixed point of m = σ(gamma + (p/2) rho / (1 - rho m)) by bisection.
        let g = |m: f64| sigmoid(-5.0 + 50.0 * 0.1 / (1.0 - 0.1 * m)) - m;
        let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 { hi = mid } else { lo = mid }
        }
        assert!((sol.m[0] - 0.5 * (lo + hi)).abs() < 1e-6);
    }

    #[test]
    fn converged_solution_is_stationary() {
        let st = random_stats(40, 6, 77);
        let opts = SolveOptions::default();
        for gamma in [-20.0, -8.0, -2.0, 0.5] {
            let sol = solve_primal(&st, gamma, &DVector::from_element(6, 0.01), &opts).unwrap();
            assert!(sol.converged, "gamma {gamma}");
            let g = stationarity(&sol, &st, opts.m_clip).unwrap();
            assert!(g <= 100.0 * opts.tol, "gamma {gamma}: {g}");
        }
    }

    #[test]
    fn converged_solution_is_local_minimum_in_m() {
        let st = random_stats(40, 4, 8);
        let opts = SolveOptions::default();
        let sol = solve_primal(&st, -6.0, &DVector::from_element(4, 0.01), &opts).unwrap();
        let f0 = sol.free_energy;
        for i in 0..4 {
            for h in [1e-4, -1e-4] {
                let mut s = sol.state();
                s.m[i] = (s.m[i] + h).clamp(opts.m_clip, 1.0 - opts.m_clip);
                if s.m[i] == sol.m[i] {
                    continue;
                }
                let f = free_energy(&s, &st, opts.m_clip).unwrap();
                assert!(f >= f0 - 1e-9, "feature {i}, step {h}: {f} < {f0}");
            }
        }
    }

    #[test]
    fn solve_is_permutation_equivariant() {
        let st = random_stats(30, 4, 12);
        let perm = [2usize, 0, 3, 1];
        let chi = st.chi.as_ref().unwrap();
        let permuted = SufficientStats {
            b: DVector::from_fn(4, |i, _| st.b[perm[i]]),
            chi: Some(DMatrix::from_fn(4, 4, |i, j| chi[(perm[i], perm[j])])),
            chi_diag: DVector::from_fn(4, |i, _| st.chi_diag[perm[i]]),
            ..st.clone()
        };
        let opts = SolveOptions::default();
        let init = DVector::from_element(4, 0.2);
        let a = solve_primal(&st, -4.0, &init, &opts).unwrap();
        let b = solve_primal(&permuted, -4.0, &init, &opts).unwrap();
        for i in 0..4 {
            assert!((a.m[perm[i]] - b.m[i]).abs() < 1e-9);
            assert!((a.w[perm[i]] - b.w[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn predict_identities() {
        let sol = VgSolution {
            m: DVector::zeros(2),
            w: DVector::from_element(2, 4.0),
            beta: 1.0,
            gamma: 0.0,
            free_energy: 0.0,
            converged: true,
            iterations: 1,
            beta_capped: false,
        };
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let mean = DVector::from_column_slice(&[0.2, 0.1]);
        assert_eq!(predict(&sol, &x, &mean, 7.0).unwrap(), DVector::from_element(2, 7.0));
        let mut on = sol.clone();
        on.m.fill(1.0);
        let at_mean = DMatrix::from_row_slice(1, 2, &[0.2, 0.1]);
        assert!((predict(&on, &at_mean, &mean, 7.0).unwrap()[0] - 7.0).abs() < 1e-14);
    }

    #[test]
    fn solution_json_round_trip() {
        let st = random_stats(20, 3, 4);
        let sol = solve_primal(&st, -3.0, &DVector::from_element(3, 0.1), &SolveOptions::default()).unwrap();
        let text = sol.to_json();
        for key in ["\"m\"", "\"w\"", "\"beta\"", "\"gamma\"", "\"free_energy\"", "\"converged\"", "\"iterations\""] {
            assert!(text.contains(key), "{key}");
        }
        assert_eq!(VgSolution::from_json(&text).unwrap(), sol);
    }
}

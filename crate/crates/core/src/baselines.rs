//! Ridge regression and cyclic coordinate-descent lasso, with validation-set
//! selection of the regularizer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{center, sufficient_stats, CenteredDataset, Dataset, SufficientStats};
use crate::error::{Result, VgError};
use crate::linalg::cholesky;
use crate::metrics::mse;

pub const LASSO_TOL: f64 = 1e-9;
pub const LASSO_MAX_SWEEPS: usize = 100_000;
pub const DEFAULT_GRID_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Ridge,
    Lasso,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Ridge => "ridge",
            BaselineMethod::Lasso => "lasso",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSolution {
    #[serde(with = "crate::solver::dvec")]
    pub w: DVector<f64>,
    pub lambda: f64,
    pub method: BaselineMethod,
    pub converged: bool,
}

/// `w = (chi + lambda I)^{-1} b`.
pub fn ridge_fit(stats: &SufficientStats, lambda: f64) -> Result<BaselineSolution> {
    if !(lambda >= 0.0) {
        return Err(VgError::InvalidArgument(format!("ridge penalty must be ≥ 0, got {lambda}")));
    }
    let mut a = stats.chi_or_err()?.clone();
    for i in 0..stats.n {
        a[(i, i)] += lambda;
    }
    let w = cholesky(a)
        .map_err(|_| VgError::Singular { condition: f64::INFINITY })?
        .solve(&stats.b);
    Ok(BaselineSolution { w, lambda, method: BaselineMethod::Ridge, converged: true })
}

/// Ridge weights for many penalties from one thin SVD of the centered inputs:
/// `w(lambda) = V diag(s / (s² + p lambda)) Uᵀ y`.
pub fn ridge_path(data: &CenteredDataset, lambdas: &[f64]) -> Result<Vec<BaselineSolution>> {
    let pf = data.p() as f64;
    let svd = data.x.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(VgError::Singular { condition: f64::INFINITY }),
    };
    let uty = u.tr_mul(&data.y);
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(VgError::InvalidArgument(format!("ridge path needs positive penalties, got {lambda}")));
            }
            let coef = DVector::from_fn(uty.len(), |k, _| {
                let s = svd.singular_values[k];
                s / (s * s + pf * lambda) * uty[k]
            });
            Ok(BaselineSolution { w: vt.tr_mul(&coef), lambda, method: BaselineMethod::Ridge, converged: true })
        })
        .collect()
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimizes `(1/2p) ‖y - X w‖² + lambda ‖w‖₁` on centered data by cyclic
/// coordinate descent. Alternates full sweeps with sweeps over the current
/// nonzeros until a full sweep moves no coordinate by more than `LASSO_TOL`.
pub fn lasso_fit(data: &CenteredDataset, lambda: f64, warm_w: Option<&DVector<f64>>) -> Result<BaselineSolution> {
    let (p, n) = data.x.shape();
    if !(lambda >= 0.0) {
        return Err(VgError::InvalidArgument(format!("lasso penalty must be ≥ 0, got {lambda}")));
    }
    let pf = p as f64;
    let mut w = match warm_w {
        Some(w0) if w0.len() == n => w0.clone(),
        Some(w0) => return Err(VgError::Dimension(format!("warm start has {} entries for {n} features", w0.len()))),
        None => DVector::zeros(n),
    };
    let col_sq: Vec<f64> = data.x.column_iter().map(|c| c.norm_squared() / pf).collect();
    let mut resid = &data.y - &data.x * &w;

    let sweep = |coords: &mut dyn Iterator<Item = usize>, w: &mut DVector<f64>, resid: &mut DVector<f64>| {
        let mut max_change = 0.0_f64;
        for j in coords {
            if col_sq[j] <= 0.0 {
                w[j] = 0.0;
                continue;
            }
            let col = data.x.column(j);
            let rho = col.dot(resid) / pf + col_sq[j] * w[j];
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let delta = new - w[j];
            if delta != 0.0 {
                resid.axpy(-delta, &col, 1.0);
                w[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    };

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < LASSO_MAX_SWEEPS {
        sweeps += 1;
        if sweep(&mut (0..n), &mut w, &mut resid) <= LASSO_TOL {
            converged = true;
            break;
        }
        loop {
            let active: Vec<usize> = (0..n).filter(|&j| w[j] != 0.0).collect();
            sweeps += 1;
            if sweep(&mut active.into_iter(), &mut w, &mut resid) <= LASSO_TOL || sweeps >= LASSO_MAX_SWEEPS {
                break;
            }
        }
    }
    Ok(BaselineSolution { w, lambda, method: BaselineMethod::Lasso, converged })
}

/// `max_i |b_i|`, the smallest lasso penalty with an all-zero solution.
pub fn lambda_max(stats: &SufficientStats) -> f64 {
    stats.b.amax()
}

/// `count` points log-spaced from `hi` down to `lo`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// Default grids, descending. Lasso spans `[1e-4, 1] · lambda_max`; ridge,
/// whose weights only vanish as the penalty diverges, spans
/// `[1e-4, 1e3] · lambda_max`.
pub fn default_grid(method: BaselineMethod, stats: &SufficientStats) -> Vec<f64> {
    let top = lambda_max(stats).max(f64::MIN_POSITIVE);
    match method {
        BaselineMethod::Lasso => log_grid(top * 1e-4, top, DEFAULT_GRID_POINTS),
        BaselineMethod::Ridge => log_grid(top * 1e-4, top * 1e3, DEFAULT_GRID_POINTS),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCv {
    pub best: BaselineSolution,
    pub lambdas: Vec<f64>,
    pub val_mse: Vec<f64>,
    pub best_index: usize,
    pub x_mean: DVector<f64>,
    pub y_mean: f64,
}

impl BaselineCv {
    pub fn predict(&self, x_new: &DMatrix<f64>) -> Result<DVector<f64>> {
        baseline_predict(&self.best, x_new, &self.x_mean, self.y_mean)
    }
}

pub fn baseline_predict(
    sol: &BaselineSolution,
    x_new: &DMatrix<f64>,
    x_mean: &DVector<f64>,
    y_mean: f64,
) -> Result<DVector<f64>> {
    if x_new.ncols() != sol.w.len() || x_mean.len() != sol.w.len() {
        return Err(VgError::Dimension(format!(
            "prediction inputs have {} features, model {}",
            x_new.ncols(),
            sol.w.len()
        )));
    }
    let offset = y_mean - x_mean.dot(&sol.w);
    Ok((x_new * &sol.w).add_scalar(offset))
}

/// Fits the whole grid (sorted descending, lasso warm-started along it) and
/// keeps the penalty with the lowest validation error; ties go to the larger
/// penalty.
pub fn baseline_cv(
    train: &Dataset,
    val: &Dataset,
    method: BaselineMethod,
    lambda_grid: Option<&[f64]>,
) -> Result<BaselineCv> {
    if val.n() != train.n() {
        return Err(VgError::Dimension(format!("validation set has {} features, training set {}", val.n(), train.n())));
    }
    if val.is_empty() {
        return Err(VgError::InvalidData("validation set is empty".into()));
    }
    let data = center(train);
    let stats = sufficient_stats(&data, false);
    let mut lambdas = match lambda_grid {
        Some(g) if g.is_empty() => return Err(VgError::InvalidArgument("empty penalty grid".into())),
        Some(g) => g.to_vec(),
        None => default_grid(method, &stats),
    };
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let fits = match method {
        BaselineMethod::Ridge => ridge_path(&data, &lambdas)?,
        BaselineMethod::Lasso => {
            let mut out: Vec<BaselineSolution> = Vec::with_capacity(lambdas.len());
            for &l in &lambdas {
                let sol = lasso_fit(&data, l, out.last().map(|s| &s.w))?;
                out.push(sol);
            }
            out
        }
    };
    let mut val_mse = Vec::with_capacity(fits.len());
    for f in &fits {
        let pred = baseline_predict(f, val.x(), &data.x_mean, data.y_mean)?;
        val_mse.push(mse(&pred, val.y())?);
    }
    let mut best_index = 0;
    for (k, &e) in val_mse.iter().enumerate() {
        if e < val_mse[best_index] {
            best_index = k;
        }
    }
    Ok(BaselineCv {
        best: fits[best_index].clone(),
        lambdas,
        val_mse,
        best_index,
        x_mean: data.x_mean,
        y_mean: data.y_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(p: usize, n: usize, seed: u64) -> CenteredDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(p, |i, _| 2.0 * x[(i, 0)] - x[(i, 1)] + rng.sample::<f64, _>(StandardNormal));
        center(&Dataset::new(x, y).unwrap())
    }

    /// Columns orthogonal with `x_iᵀ x_i = p` after centering.
    fn orthogonal(p: usize, n: usize, seed: u64) -> CenteredDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw = DMatrix::from_fn(p, n + 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        raw.set_column(0, &DVector::from_element(p, 1.0));
        let q = raw.qr().q();
        let x = q.columns(1, n) * (p as f64).sqrt();
        let y = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal)) + &x * DVector::from_fn(n, |i, _| i as f64 * 0.3);
        center(&Dataset::new(x.into_owned(), y).unwrap())
    }

    fn objective(d: &CenteredDataset, w: &DVector<f64>, lambda: f64) -> f64 {
        (&d.y - &d.x * w).norm_squared() / (2.0 * d.p() as f64) + lambda * w.lp_norm(1)
    }

    #[test]
    fn ridge_limits() {
        let d = random(40, 6, 1);
        let s = sufficient_stats(&d, true);
        let big = ridge_fit(&s, 1e12).unwrap();
        assert!(big.w.amax() < 1e-10);
        let r = ridge_fit(&s, 0.7).unwrap();
        let mut a = s.chi.clone().unwrap();
        a += DMatrix::identity(6, 6) * 0.7;
        assert!((a * &r.w - &s.b).amax() <= 1e-10);
    }

    #[test]
    fn ridge_identity_design() {
        let d = orthogonal(50, 4, 2);
        let s = sufficient_stats(&d, true);
        let r = ridge_fit(&s, 0.5).unwrap();
        for i in 0..4 {
            assert!((r.w[i] - s.b[i] / 1.5).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_singular_unpenalized() {
        let d = random(5, 10, 3);
        let s = sufficient_stats(&d, true);
        assert!(matches!(ridge_fit(&s, 0.0), Err(VgError::Singular { .. })));
    }

    #[test]
    fn ridge_path_matches_direct() {
        for (p, n) in [(40, 6), (10, 25)] {
            let d = random(p, n, 4);
            let s = sufficient_stats(&d, true);
            let path = ridge_path(&d, &[3.0, 0.1]).unwrap();
            for sol in path {
                let direct = ridge_fit(&s, sol.lambda).unwrap();
                assert!((sol.w - direct.w).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn lasso_null_above_lambda_max() {
        let d = random(30, 5, 5);
        let s = sufficient_stats(&d, false);
        let sol = lasso_fit(&d, lambda_max(&s) * 1.0001, None).unwrap();
        assert!(sol.w.iter().all(|&w| w == 0.0));
        assert!(sol.converged);
    }

    #[test]
    fn lasso_orthogonal_closed_form() {
        let d = orthogonal(60, 5, 6);
        let s = sufficient_stats(&d, false);
        for lambda in [0.05, 0.3, 0.8] {
            let sol = lasso_fit(&d, lambda, None).unwrap();
            for i in 0..5 {
                let b = s.b[i];
                let expected = b.signum() * (b.abs() - lambda).max(0.0);
                assert!((sol.w[i] - expected).abs() < 1e-8, "{lambda} {i}");
            }
        }
    }

    /// Proximal gradient descent as an independent reference solver.
    fn ista(d: &CenteredDataset, lambda: f64) -> DVector<f64> {
        let pf = d.p() as f64;
        let chi = d.x.tr_mul(&d.x) / pf;
        let step = 1.0 / chi.symmetric_eigenvalues().max();
        let mut w = DVector::zeros(d.n());
        for _ in 0..200_000 {
            let grad = d.x.tr_mul(&(&d.x * &w - &d.y)) / pf;
            let next = (&w - grad * step).map(|z| soft_threshold(z, lambda * step));
            let done = (&next - &w).amax() < 1e-14;
            w = next;
            if done {
                break;
            }
        }
        w
    }

    #[test]
    fn lasso_matches_proximal_reference() {
        let d = random(30, 5, 7);
        for lambda in [0.01, 0.2, 0.6] {
            let sol = lasso_fit(&d, lambda, None).unwrap();
            let reference = ista(&d, lambda);
            let gap = objective(&d, &sol.w, lambda) - objective(&d, &reference, lambda);
            assert!(gap.abs() < 1e-8, "{lambda}: {gap}");
        }
    }

    #[test]
    fn cv_picks_a_sensible_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = DMatrix::from_fn(200, 10, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(200, |i, _| 3.0 * x[(i, 2)] + 0.5 * rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(x, y).unwrap();
        let train = data.select_rows(&(0..100).collect::<Vec<_>>()).unwrap();
        let val = data.select_rows(&(100..200).collect::<Vec<_>>()).unwrap();
        for method in [BaselineMethod::Lasso, BaselineMethod::Ridge] {
            let cv = baseline_cv(&train, &val, method, None).unwrap();
            assert_eq!(cv.lambdas.len(), 50);
            assert!(cv.lambdas.windows(2).all(|w| w[0] > w[1]));
            assert!((cv.best.w[2] - 3.0).abs() < 0.3, "{method:?}: {}", cv.best.w[2]);
            assert!(cv.val_mse[cv.best_index] < 0.5);
        }
        assert!(baseline_cv(&train, &val, BaselineMethod::Lasso, Some(&[])).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lasso_kkt(seed in any::<u64>(), frac in 0.01f64..0.9) {
            let d = random(25, 8, seed);
            let s = sufficient_stats(&d, false);
            let lambda = frac * lambda_max(&s);
            let sol = lasso_fit(&d, lambda, None).unwrap();
            prop_assert!(sol.converged);
            let grad = d.x.tr_mul(&(&d.y - &d.x * &sol.w)) / d.p() as f64;
            for j in 0..8 {
                if sol.w[j] == 0.0 {
                    prop_assert!(grad[j].abs() <= lambda + 1e-7);
                } else {
                    prop_assert!((grad[j] - lambda * sol.w[j].signum()).abs() <= 1e-7);
                }
            }
        }

        #[test]
        fn lasso_orthogonal_monotone_shrinkage(seed in any::<u64>()) {
            let d = orthogonal(40, 4, seed);
            let s = sufficient_stats(&d, false);
            let grid = log_grid(1e-3 * lambda_max(&s), lambda_max(&s), 12);
            let mut prev: Option<DVector<f64>> = None;
            for lambda in grid.iter().rev() {
                let sol = lasso_fit(&d, *lambda, None).unwrap();
                if let Some(p) = &prev {
                    for i in 0..4 {
                        prop_assert!(sol.w[i].abs() <= p[i].abs() + 1e-10);
                    }
                }
                prev = Some(sol.w);
            }
        }

        #[test]
        fn ridge_continuous(seed in any::<u64>(), lambda in 0.01f64..10.0) {
            let d = random(20, 6, seed);
            let s = sufficient_stats(&d, true);
            let a = ridge_fit(&s, lambda).unwrap();
            let b = ridge_fit(&s, lambda * (1.0 + 1e-8)).unwrap();
            prop_assert!((a.w - b.w).norm() < 1e-6);
        }
    }
}

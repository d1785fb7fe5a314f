//! Prediction error, reconstruction error, support size and ROC-AUC.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineMethod, BaselineSolution};
use crate::error::{Result, VgError};
use crate::solver::VgSolution;

/// A fitted model from any of the compared methods.
#[derive(Debug, Clone, Copy)]
pub enum Fitted<'a> {
    Vg(&'a VgSolution),
    Baseline(&'a BaselineSolution),
}

/// Effective weight vector: `m ∘ w` for VG, `w` for ridge and lasso.
pub fn solution_vector(fit: Fitted<'_>) -> DVector<f64> {
    match fit {
        Fitted::Vg(s) => s.m.component_mul(&s.w),
        Fitted::Baseline(s) => s.w.clone(),
    }
}

/// Support size: `m_i > 0.5` for VG, exact nonzeros for lasso, none for ridge.
pub fn nonzero_count(fit: Fitted<'_>) -> Option<usize> {
    match fit {
        Fitted::Vg(s) => Some(s.m.iter().filter(|&&m| m > 0.5).count()),
        Fitted::Baseline(s) => match s.method {
            BaselineMethod::Lasso => Some(s.w.iter().filter(|&&w| w != 0.0).count()),
            BaselineMethod::Ridge => None,
        },
    }
}

fn same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(VgError::Dimension(format!("{what}: lengths {a} and {b} differ")));
    }
    Ok(())
}

pub fn l1_error(v: &DVector<f64>, w_true: &DVector<f64>) -> Result<f64> {
    same_len(v.len(), w_true.len(), "l1_error")?;
    Ok((v - w_true).lp_norm(1))
}

pub fn mse(y_pred: &DVector<f64>, y_true: &DVector<f64>) -> Result<f64> {
    same_len(y_pred.len(), y_true.len(), "mse")?;
    if y_true.is_empty() {
        return Err(VgError::InvalidData("mse of an empty vector".into()));
    }
    Ok((y_pred - y_true).norm_squared() / y_true.len() as f64)
}

/// Area under the ROC curve for ranking features by `|v_i|` against the
/// truth `w_true_i != 0`. Mann-Whitney statistic with average ranks, so tied
/// scores count one half.
pub fn roc_auc(v: &DVector<f64>, w_true: &DVector<f64>) -> Result<f64> {
    same_len(v.len(), w_true.len(), "roc_auc")?;
    let positives = w_true.iter().filter(|&&w| w != 0.0).count();
    let negatives = w_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(VgError::InvalidArgument(
            "roc_auc needs at least one active and one inactive feature".into(),
        ));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let score = v[order[start]].abs();
        let mut end = start;
        while end < order.len() && v[order[end]].abs() == score {
            end += 1;
        }
        // ranks start..end (1-based start+1..=end) share their average
        let avg = (start + 1 + end) as f64 / 2.0;
        rank_sum += avg * order[start..end].iter().filter(|&&i| w_true[i] != 0.0).count() as f64;
        start = end;
    }
    let pos = positives as f64;
    Ok((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * negatives as f64))
}

/// One row of an evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub train_mse: f64,
    pub val_mse: f64,
    pub test_mse: f64,
    pub l1_error: f64,
    pub nonzero: Option<usize>,
    pub roc_auc: Option<f64>,
}

impl EvalReport {
    pub const HEADER: &'static str = "method,train_mse,val_mse,test_mse,l1_error,nonzero,roc_auc";

    pub fn write_row(&self, mut out: impl Write) -> Result<()> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            self.method,
            self.train_mse,
            self.val_mse,
            self.test_mse,
            self.l1_error,
            opt(self.nonzero.map(|k| k.to_string())),
            opt(self.roc_auc.map(|a| a.to_string()))
        )?;
        Ok(())
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn vg(m: &[f64], w: &[f64]) -> VgSolution {
        VgSolution {
            m: dv(m),
            w: dv(w),
            beta: 1.0,
            gamma: -1.0,
            free_energy: 0.0,
            converged: true,
            iterations: 1,
            beta_capped: false,
        }
    }

    // Explicit threshold sweep with trapezoid integration.
    fn auc_sweep(v: &[f64], truth: &[bool]) -> f64 {
        let mut thresholds: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let pos = truth.iter().filter(|&&t| t).count() as f64;
        let neg = truth.len() as f64 - pos;
        let mut pts = vec![(0.0, 0.0)];
        for t in thresholds {
            let tp = v.iter().zip(truth).filter(|(x, &a)| a && x.abs() >= t).count() as f64;
            let fp = v.iter().zip(truth).filter(|(x, &a)| !a && x.abs() >= t).count() as f64;
            pts.push((fp / neg, tp / pos));
        }
        pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
    }

    #[test]
    fn solution_vector_cases() {
        let s = vg(&[1.0, 1.0], &[2.0, -3.0]);
        assert_eq!(solution_vector(Fitted::Vg(&s)), dv(&[2.0, -3.0]));
        let s = vg(&[0.0, 0.0], &[2.0, -3.0]);
        assert_eq!(solution_vector(Fitted::Vg(&s)), dv(&[0.0, 0.0]));
        let r = BaselineSolution { w: dv(&[0.1, 0.2]), lambda: 1.0, method: BaselineMethod::Ridge, converged: true };
        assert_eq!(solution_vector(Fitted::Baseline(&r)), r.w);
        assert_eq!(nonzero_count(Fitted::Baseline(&r)), None);
    }

    #[test]
    fn nonzero_threshold_is_strict() {
        let s = vg(&[0.9, 0.1, 0.5], &[1.0, 1.0, 1.0]);
        assert_eq!(nonzero_count(Fitted::Vg(&s)), Some(1));
        let l = BaselineSolution { w: dv(&[0.0, 0.0]), lambda: 5.0, method: BaselineMethod::Lasso, converged: true };
        assert_eq!(nonzero_count(Fitted::Baseline(&l)), Some(0));
    }

    #[test]
    fn l1_cases() {
        let w = dv(&[1.0, 0.0, 1.0, 1.0]);
        assert_eq!(l1_error(&w, &w).unwrap(), 0.0);
        assert_eq!(l1_error(&DVector::zeros(4), &w).unwrap(), 3.0);
        let v = dv(&[0.3, -0.2, 1.7, 0.0]);
        let oracle: f64 = (0..4).map(|i| (v[i] - w[i]).abs()).sum();
        assert!((l1_error(&v, &w).unwrap() - oracle).abs() < 1e-15);
        assert!(l1_error(&v, &dv(&[1.0])).is_err());
    }

    #[test]
    fn mse_cases() {
        let y = dv(&[1.0, 2.0, 3.0]);
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(mse(&y.add_scalar(1.0), &y).unwrap(), 1.0);
        let p = dv(&[0.5, 2.5, 2.0]);
        let oracle = (0.25 + 0.25 + 1.0) / 3.0;
        assert!((mse(&p, &y).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn auc_cases() {
        let truth = dv(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(roc_auc(&dv(&[0.9, 0.1, -0.8, 0.0]), &truth).unwrap(), 1.0);
        assert_eq!(roc_auc(&dv(&[0.3; 4]), &truth).unwrap(), 0.5);
        assert!(roc_auc(&dv(&[0.3; 2]), &dv(&[1.0, 1.0])).is_err());
        assert!(roc_auc(&dv(&[0.3; 2]), &dv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn mean_std_sample() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn auc_matches_threshold_sweep(
            pairs in prop::collection::vec((0u8..6, any::<bool>()), 2..30)
        ) {
            let v: Vec<f64> = pairs.iter().map(|(s, _)| *s as f64 * 0.25 - 0.5).collect();
            let truth: Vec<bool> = pairs.iter().map(|(_, t)| *t).collect();
            prop_assume!(truth.iter().any(|&t| t) && truth.iter().any(|&t| !t));
            let w = DVector::from_iterator(truth.len(), truth.iter().map(|&t| t as u8 as f64));
            let a = roc_auc(&DVector::from_vec(v.clone()), &w).unwrap();
            prop_assert!((a - auc_sweep(&v, &truth)).abs() < 1e-12);
        }

        #[test]
        fn auc_rank_invariant(
            pairs in prop::collection::vec((-5.0f64..5.0, any::<bool>()), 2..30)
        ) {
            let truth: Vec<bool> = pairs.iter().map(|(_, t)| *t).collect();
            prop_assume!(truth.iter().any(|&t| t) && truth.iter().any(|&t| !t));
            let w = DVector::from_iterator(truth.len(), truth.iter().map(|&t| t as u8 as f64));
            let v = DVector::from_iterator(pairs.len(), pairs.iter().map(|(x, _)| *x));
            let t = v.map(|x| x.abs().powi(3) + 2.0);
            prop_assert!((roc_auc(&v, &w).unwrap() - roc_auc(&t, &w).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn l1_and_mse_permutation_equivariant(
            rows in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..20),
            seed in any::<u64>()
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let a = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.0));
            let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
            let mut perm: Vec<usize> = (0..rows.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pa = DVector::from_fn(rows.len(), |i, _| a[perm[i]]);
            let pb = DVector::from_fn(rows.len(), |i, _| b[perm[i]]);
            prop_assert!((l1_error(&a, &b).unwrap() - l1_error(&pa, &pb).unwrap()).abs() < 1e-12);
            prop_assert!((mse(&a, &b).unwrap() - mse(&pa, &pb).unwrap()).abs() < 1e-12);
        }
    }
}

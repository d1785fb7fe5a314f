//! Experiment suites: generate instances, fit VG, ridge and lasso, and
//! summarize test error, reconstruction error, support size and timing.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annealing::{fit, FitOptions, SolverKind};
use crate::baselines::{baseline_cv, BaselineMethod};
use crate::error::{Result, VgError};
use crate::generators::{
    example1, example2, gen_instance, random_support, zhao_spec, Covariance, GeneratedInstance, InstanceSpec,
    ZhaoVariant, DEFAULT_BLOCK_CORR, DEFAULT_BLOCK_SIZE, EXAMPLE2_SUPPORT,
};
use crate::metrics::{l1_error, mean_std, mse, nonzero_count, roc_auc, solution_vector, EvalReport, Fitted};

/// Noise variances of the noise sweep.
pub const NOISE_LEVELS: [f64; 6] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];
pub const NOISE_ZETAS: [f64; 2] = [0.5, 0.95];
/// Training-set size as a fraction of the feature count.
pub const SAMPLE_FRACTIONS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const SAMPLE_SPARSITIES: [f64; 2] = [0.10, 0.25];
pub const SCALING_FEATURES: [usize; 4] = [200, 400, 800, 1600];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Example1,
    Example2,
    Zhao,
    NoiseSweep,
    SampleSweep,
    DimScaling,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Example1, Suite::Example2, Suite::Zhao, Suite::NoiseSweep, Suite::SampleSweep, Suite::DimScaling];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Example1 => "example1",
            Suite::Example2 => "example2",
            Suite::Zhao => "zhao",
            Suite::NoiseSweep => "noise_sweep",
            Suite::SampleSweep => "sample_sweep",
            Suite::DimScaling => "dim_scaling",
        }
    }

    pub fn default_instances(self) -> usize {
        match self {
            Suite::Zhao => 100,
            Suite::NoiseSweep => 10,
            _ => 20,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VgError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| VgError::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub suite: Suite,
    pub instances: usize,
    pub seed: u64,
    pub fit: FitOptions,
    pub lambda_grid: Option<Vec<f64>>,
    /// Samples per set for the Zhao examples.
    pub zhao_samples: usize,
    /// Run instances on the rayon pool. Timings are cleaner without it.
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            instances: suite.default_instances(),
            seed,
            fit: FitOptions::default(),
            lambda_grid: None,
            zhao_samples: 1000,
            parallel: suite != Suite::DimScaling,
        }
    }
}

/// One experimental condition within a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub make: CaseKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseKind {
    Example1,
    Example2,
    Zhao(ZhaoVariant),
    Noise { zeta: f64, noise_var: f64 },
    Samples { fraction: f64, sparsity: f64, correlated: bool },
    Scaling { n: usize },
}

pub fn cases(suite: Suite) -> Vec<Case> {
    let case = |label: String, make| Case { label, make };
    match suite {
        Suite::Example1 => vec![case("example1".into(), CaseKind::Example1)],
        Suite::Example2 => vec![case("example2".into(), CaseKind::Example2)],
        Suite::Zhao => [ZhaoVariant::A, ZhaoVariant::B]
            .into_iter()
            .map(|v| case(format!("zhao_{}", if v == ZhaoVariant::A { "a" } else { "b" }), CaseKind::Zhao(v)))
            .collect(),
        Suite::NoiseSweep => NOISE_ZETAS
            .iter()
            .flat_map(|&zeta| {
                NOISE_LEVELS
                    .iter()
                    .map(move |&noise_var| case(format!("zeta={zeta};noise={noise_var:e}"), CaseKind::Noise { zeta, noise_var }))
            })
            .collect(),
        Suite::SampleSweep => [false, true]
            .into_iter()
            .flat_map(|correlated| {
                SAMPLE_SPARSITIES.iter().flat_map(move |&sparsity| {
                    SAMPLE_FRACTIONS.iter().map(move |&fraction| {
                        let cov = if correlated { "block" } else { "identity" };
                        case(
                            format!("{cov};sparsity={sparsity};p/n={fraction}"),
                            CaseKind::Samples { fraction, sparsity, correlated },
                        )
                    })
                })
            })
            .collect(),
        Suite::DimScaling => SCALING_FEATURES.iter().map(|&n| case(format!("n={n}"), CaseKind::Scaling { n })).collect(),
    }
}

/// Seed of instance `index` of case `case`.
pub fn instance_seed(base: u64, case: usize, index: usize) -> u64 {
    base.wrapping_add(case as u64 * 100_000).wrapping_add(index as u64)
}

/// Instance specification for one case and seed.
pub fn case_spec(kind: CaseKind, seed: u64, zhao_samples: usize) -> Result<InstanceSpec> {
    let spec = match kind {
        CaseKind::Example1 => example1(seed),
        CaseKind::Example2 => example2(seed),
        CaseKind::Zhao(v) => zhao_spec(v, zhao_samples, seed),
        CaseKind::Noise { zeta, noise_var } => {
            let n = 100;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            InstanceSpec {
                n,
                p: 100,
                p_val: 20,
                p_test: 400,
                w_true: random_support(n, 20, &mut rng)?,
                noise_sd: noise_var.sqrt(),
                covariance: Covariance::Toeplitz { zeta },
                seed,
            }
        }
        CaseKind::Samples { fraction, sparsity, correlated } => {
            let n = 500;
            let p = ((fraction * n as f64).round() as usize).max(2);
            let divisor = if correlated { 10 } else { 30 };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            InstanceSpec {
                n,
                p,
                p_val: (p / divisor).max(2),
                p_test: 400,
                w_true: random_support(n, (sparsity * n as f64).round() as usize, &mut rng)?,
                noise_sd: 1.0,
                covariance: if correlated {
                    Covariance::Block { block_size: DEFAULT_BLOCK_SIZE, within_corr: DEFAULT_BLOCK_CORR }
                } else {
                    Covariance::Identity
                },
                seed,
            }
        }
        CaseKind::Scaling { n } => {
            let mut w = vec![0.0; n];
            for i in EXAMPLE2_SUPPORT {
                w[i] = 1.0;
            }
            // noise precision 2
            InstanceSpec {
                n,
                p: 100,
                p_val: 100,
                p_test: 400,
                w_true: w,
                noise_sd: 0.5_f64.sqrt(),
                covariance: Covariance::Identity,
                seed,
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub report: EvalReport,
    pub v: DVector<f64>,
    pub seconds: f64,
}

/// Fits VG, ridge and lasso on one instance and evaluates them on its test set.
pub fn evaluate_instance(
    inst: &GeneratedInstance,
    fit_opts: &FitOptions,
    lambda_grid: Option<&[f64]>,
) -> Result<Vec<MethodResult>> {
    let w_true = &inst.w_true;
    let auc = |v: &DVector<f64>| -> Result<Option<f64>> {
        let active = w_true.iter().filter(|&&w| w != 0.0).count();
        if active == 0 || active == w_true.len() {
            Ok(None)
        } else {
            roc_auc(v, w_true).map(Some)
        }
    };
    let mut out = Vec::with_capacity(3);

    let start = Instant::now();
    let vg = fit(&inst.train, &inst.val, fit_opts)?;
    let seconds = start.elapsed().as_secs_f64();
    let v = solution_vector(Fitted::Vg(&vg.best));
    let best = vg.path.best_index;
    out.push(MethodResult {
        report: EvalReport {
            method: "vg".into(),
            train_mse: vg.path.train_mse[best],
            val_mse: vg.path.val_mse[best],
            test_mse: mse(&vg.predict(inst.test.x())?, inst.test.y())?,
            l1_error: l1_error(&v, w_true)?,
            nonzero: nonzero_count(Fitted::Vg(&vg.best)),
            roc_auc: auc(&v)?,
        },
        v,
        seconds,
    });

    for method in [BaselineMethod::Ridge, BaselineMethod::Lasso] {
        let start = Instant::now();
        let cv = baseline_cv(&inst.train, &inst.val, method, lambda_grid)?;
        let seconds = start.elapsed().as_secs_f64();
        let v = solution_vector(Fitted::Baseline(&cv.best));
        out.push(MethodResult {
            report: EvalReport {
                method: method.name().into(),
                train_mse: mse(&cv.predict(inst.train.x())?, inst.train.y())?,
                val_mse: cv.val_mse[cv.best_index],
                test_mse: mse(&cv.predict(inst.test.x())?, inst.test.y())?,
                l1_error: l1_error(&v, w_true)?,
                nonzero: nonzero_count(Fitted::Baseline(&cv.best)),
                roc_auc: auc(&v)?,
            },
            v,
            seconds,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRecord {
    pub case: String,
    pub index: usize,
    pub seed: u64,
    pub methods: Vec<MethodResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub case: String,
    pub method: String,
    pub instances: usize,
    pub test_mse: (f64, f64),
    pub l1_error: (f64, f64),
    pub nonzero: Option<(f64, f64)>,
    pub roc_auc: Option<(f64, f64)>,
    /// Largest `|v_3|` over instances (Zhao suite only).
    pub max_abs_v3: Option<f64>,
    pub seconds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub config: BenchConfig,
    pub records: Vec<InstanceRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every case of the suite over `config.instances` instances. Results
/// come back in (case, instance) order however the work was scheduled.
pub fn run_suite(config: &BenchConfig) -> Result<BenchResult> {
    if config.instances == 0 {
        return Err(VgError::InvalidArgument("instance count must be positive".into()));
    }
    let cases = cases(config.suite);
    let jobs: Vec<(usize, usize)> =
        (0..cases.len()).flat_map(|c| (0..config.instances).map(move |i| (c, i))).collect();
    let run = |&(c, i): &(usize, usize)| -> Result<InstanceRecord> {
        let seed = instance_seed(config.seed, c, i);
        let spec = case_spec(cases[c].make, seed, config.zhao_samples)?;
        let inst = gen_instance(&spec)?;
        let mut fit_opts = config.fit;
        if matches!(cases[c].make, CaseKind::Scaling { .. }) {
            fit_opts.path.solver = SolverKind::Dual;
        }
        let methods = evaluate_instance(&inst, &fit_opts, config.lambda_grid.as_deref())?;
        Ok(InstanceRecord { case: cases[c].label.clone(), index: i, seed, methods })
    };
    let records: Vec<InstanceRecord> = if config.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    let summary = summarize(config.suite, &cases, &records);
    Ok(BenchResult { config: config.clone(), records, summary })
}

fn summarize(suite: Suite, cases: &[Case], records: &[InstanceRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for case in cases {
        let recs: Vec<&InstanceRecord> = records.iter().filter(|r| r.case == case.label).collect();
        let Some(first) = recs.first() else { continue };
        for (k, m) in first.methods.iter().enumerate() {
            let col = |f: &dyn Fn(&MethodResult) -> f64| -> Vec<f64> { recs.iter().map(|r| f(&r.methods[k])).collect() };
            let optional = |f: &dyn Fn(&MethodResult) -> Option<f64>| -> Option<(f64, f64)> {
                recs.iter().map(|r| f(&r.methods[k])).collect::<Option<Vec<f64>>>().map(|v| mean_std(&v))
            };
            rows.push(SummaryRow {
                case: case.label.clone(),
                method: m.report.method.clone(),
                instances: recs.len(),
                test_mse: mean_std(&col(&|r| r.report.test_mse)),
                l1_error: mean_std(&col(&|r| r.report.l1_error)),
                nonzero: optional(&|r| r.report.nonzero.map(|k| k as f64)),
                roc_auc: optional(&|r| r.report.roc_auc),
                max_abs_v3: (suite == Suite::Zhao)
                    .then(|| col(&|r| r.v[2].abs()).into_iter().fold(0.0, f64::max)),
                seconds: mean_std(&col(&|r| r.seconds)),
            });
        }
    }
    rows
}

fn pm(v: Option<(f64, f64)>) -> String {
    v.map_or_else(|| "-".into(), |(m, s)| format!("{m:.4} ± {s:.4}"))
}

fn comment(out: &mut impl Write, header: &[String]) -> Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    Ok(())
}

impl BenchResult {
    /// Per-instance metrics; contains no timing so reruns are byte-identical.
    pub fn write_instances(&self, mut out: impl Write, header: &[String]) -> Result<()> {
        comment(&mut out, header)?;
        writeln!(out, "case,instance,seed,{}", EvalReport::HEADER)?;
        for r in &self.records {
            for m in &r.methods {
                write!(out, "{},{},{},", r.case, r.index, r.seed)?;
                m.report.write_row(&mut out)?;
            }
        }
        Ok(())
    }

    /// Mean ± sample std per case and method.
    pub fn write_summary(&self, mut out: impl Write, header: &[String]) -> Result<()> {
        comment(&mut out, header)?;
        let zhao = self.config.suite == Suite::Zhao;
        write!(out, "case,method,instances,test_mse,l1_error,nonzero,roc_auc")?;
        writeln!(out, "{}", if zhao { ",max_abs_v3" } else { "" })?;
        for r in &self.summary {
            write!(
                out,
                "{},{},{},{},{},{},{}",
                r.case,
                r.method,
                r.instances,
                pm(Some(r.test_mse)),
                pm(Some(r.l1_error)),
                pm(r.nonzero),
                pm(r.roc_auc)
            )?;
            match r.max_abs_v3 {
                Some(v) if zhao => writeln!(out, ",{v:.4}")?,
                _ => writeln!(out)?,
            }
        }
        Ok(())
    }

    /// Wall-clock seconds per case and method.
    pub fn write_timing(&self, mut out: impl Write, header: &[String]) -> Result<()> {
        comment(&mut out, header)?;
        writeln!(out, "case,method,mean_seconds,std_seconds")?;
        for r in &self.summary {
            writeln!(out, "{},{},{:.6},{:.6}", r.case, r.method, r.seconds.0, r.seconds.1)?;
        }
        Ok(())
    }

    pub fn row(&self, case: &str, method: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.case == case && r.method == method)
    }
}

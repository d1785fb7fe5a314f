//! The `gamma` path: warm-started forward and backward sweeps, per-`gamma`
//! choice of the lower free energy branch, and selection by validation error.

use std::io::Write;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{center, sufficient_stats, CenteredDataset, Dataset, SufficientStats};
use crate::dual::solve_dual;
use crate::error::{Result, VgError};
use crate::linalg::logit;
use crate::metrics::mse;
use crate::solver::{predict, solve_primal, SolveOptions, VgSolution};

pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Unexplained variance fraction below which a solution counts as an exact
/// fit of the training outputs.
pub const SATURATION_RATIO: f64 = 1e-7;

/// Most negative `gamma` at which every `m_i` still sits near `epsilon`:
/// `min_i [-p b_i² / (2 sigma_y² chi_ii) + logit(epsilon)]`.
pub fn gamma_min(stats: &SufficientStats, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(VgError::InvalidArgument(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
    }
    let prior = logit(epsilon);
    if !(stats.sigma_y2 > 0.0) {
        return Err(VgError::InvalidData("output has zero variance".into()));
    }
    let p = stats.p as f64;
    let data_term = (0..stats.n)
        .filter(|&i| stats.chi_diag[i] > 0.0)
        .map(|i| p * stats.b[i] * stats.b[i] / (2.0 * stats.sigma_y2 * stats.chi_diag[i]))
        .fold(0.0_f64, f64::max);
    Ok(prior - data_term)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSchedule {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub delta_gamma: f64,
    pub epsilon: f64,
    /// The data-driven schedule was unusable and the fixed fallback was used.
    #[serde(default)]
    pub fallback: bool,
}

impl GammaSchedule {
    pub fn new(gamma_min: f64, gamma_max: f64, delta_gamma: f64, epsilon: f64) -> Result<Self> {
        let s = Self { gamma_min, gamma_max, delta_gamma, epsilon, fallback: false };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_min < self.gamma_max) || !(self.delta_gamma > 0.0) {
            return Err(VgError::InvalidArgument(format!(
                "schedule needs gamma_min < gamma_max and a positive step, got [{}, {}] step {}",
                self.gamma_min, self.gamma_max, self.delta_gamma
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(VgError::InvalidArgument(format!("epsilon must lie in (0, 0.5), got {}", self.epsilon)));
        }
        Ok(())
    }

    /// `gamma_min, gamma_min + Δ, …` up to the first value at or past `gamma_max`.
    pub fn grid(&self) -> Vec<f64> {
        let span = (self.gamma_max - self.gamma_min) / self.delta_gamma;
        let steps = (span - 1e-9).ceil().max(0.0) as usize;
        (0..=steps).map(|k| self.gamma_min + k as f64 * self.delta_gamma).collect()
    }
}

/// `gamma_max = 0.02 gamma_min`, `Δ = -0.02 gamma_min`: 49 steps from
/// `gamma_min`. Falls back to `[-20, 0]` in 50 steps when `gamma_min ≥ 0`.
pub fn default_schedule(stats: &SufficientStats, epsilon: f64) -> Result<GammaSchedule> {
    let gmin = gamma_min(stats, epsilon)?;
    Ok(schedule_from_gamma_min(gmin, epsilon))
}

pub fn schedule_from_gamma_min(gmin: f64, epsilon: f64) -> GammaSchedule {
    if gmin < 0.0 {
        GammaSchedule {
            gamma_min: gmin,
            gamma_max: 0.02 * gmin,
            delta_gamma: -0.02 * gmin,
            epsilon,
            fallback: false,
        }
    } else {
        GammaSchedule { gamma_min: -20.0, gamma_max: 0.0, delta_gamma: 0.4, epsilon, fallback: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Primal when `n < p`, dual otherwise.
    #[default]
    Auto,
    Primal,
    Dual,
}

impl SolverKind {
    pub fn resolve(self, n: usize, p: usize) -> SolverKind {
        match self {
            SolverKind::Auto if n < p => SolverKind::Primal,
            SolverKind::Auto => SolverKind::Dual,
            k => k,
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = VgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolverKind::Auto),
            "primal" => Ok(SolverKind::Primal),
            "dual" => Ok(SolverKind::Dual),
            other => Err(VgError::InvalidArgument(format!("unknown solver {other:?}"))),
        }
    }
}

/// How the first solve of the forward pass is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum InitKind {
    /// `m = epsilon` everywhere.
    #[default]
    Constant,
    /// `m` uniform in `(0, 1)` from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathOptions {
    pub solve: SolveOptions,
    pub solver: SolverKind,
    pub init: InitKind,
}

/// One `gamma` problem bound to its data.
pub struct Problem<'a> {
    data: &'a CenteredDataset,
    stats: SufficientStats,
    kind: SolverKind,
}

impl<'a> Problem<'a> {
    pub fn new(data: &'a CenteredDataset, solver: SolverKind) -> Self {
        let kind = solver.resolve(data.n(), data.p());
        let stats = sufficient_stats(data, kind == SolverKind::Primal);
        Self { data, stats, kind }
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    /// Whether `sol` has run off towards interpolating the training data.
    ///
    /// Once the model reproduces the centered outputs, the free energy
    /// decreases without bound as `beta` grows and its value reflects
    /// numerical limits (the `m` clip, the dual saturation, the `beta` cap)
    /// rather than the fit. Flagged when `beta` was capped, when the support
    /// (`m > 0.5`) holds half the samples or more, so a sparse solution of
    /// that size is no longer identifiable, or when the unexplained fraction
    /// of the output variance `1 / (beta sigma_y²)` is below
    /// [`SATURATION_RATIO`].
    pub fn is_saturated(&self, sol: &VgSolution) -> bool {
        sol.beta_capped
            || 2 * sol.nonzero() >= self.stats.p
            || 1.0 / sol.beta < SATURATION_RATIO * self.stats.sigma_y2
    }

    pub fn solve(&self, gamma: f64, m_init: &DVector<f64>, opts: &SolveOptions) -> Result<VgSolution> {
        match self.kind {
            SolverKind::Dual => solve_dual(self.data, &self.stats, gamma, m_init, opts),
            _ => solve_primal(&self.stats, gamma, m_init, opts),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Forward,
    Backward,
}

/// Forward and backward solutions over the grid, both indexed by grid
/// position, plus the selected branch and its errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaPath {
    pub grid: Vec<f64>,
    pub forward: Vec<VgSolution>,
    pub backward: Vec<VgSolution>,
    pub selected: Vec<VgSolution>,
    pub branch: Vec<Branch>,
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
    pub best_index: usize,
}

impl GammaPath {
    pub fn best(&self) -> &VgSolution {
        &self.selected[self.best_index]
    }

    /// Grid points where a solve hit `max_iter`.
    pub fn unconverged(&self) -> usize {
        self.forward.iter().chain(&self.backward).filter(|s| !s.converged).count()
    }

    /// Grid points where the two branches disagree in free energy.
    pub fn hysteresis_points(&self, tol: f64) -> usize {
        self.forward
            .iter()
            .zip(&self.backward)
            .filter(|(f, b)| (f.free_energy - b.free_energy).abs() > tol * (1.0 + f.free_energy.abs()))
            .count()
    }

    /// Writes `gamma, F_forward, F_backward, F_selected, train_mse, val_mse`
    /// as comma separated rows after `#` header lines.
    pub fn write_table(&self, mut out: impl Write, header: &[String]) -> Result<()> {
        for h in header {
            writeln!(out, "# {h}")?;
        }
        writeln!(out, "gamma,F_forward,F_backward,F_selected,train_mse,val_mse")?;
        for g in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.grid[g],
                self.forward[g].free_energy,
                self.backward[g].free_energy,
                self.selected[g].free_energy,
                self.train_mse[g],
                self.val_mse[g]
            )?;
        }
        Ok(())
    }
}

/// The branch with lower free energy, except that a saturated solution loses
/// to one that is not (see [`Problem::is_saturated`]).
pub fn pick_branch(forward: &VgSolution, backward: &VgSolution, forward_saturated: bool, backward_saturated: bool) -> Branch {
    match (forward_saturated, backward_saturated) {
        (true, false) => Branch::Backward,
        (false, true) => Branch::Forward,
        _ if backward.free_energy < forward.free_energy => Branch::Backward,
        _ => Branch::Forward,
    }
}

/// Forward sweep, backward sweep and per-`gamma` branch selection.
/// No validation data involved.
pub fn anneal(
    problem: &Problem<'_>,
    grid: &[f64],
    m_start: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<(Vec<VgSolution>, Vec<VgSolution>, Vec<VgSolution>, Vec<Branch>)> {
    if grid.is_empty() {
        return Err(VgError::InvalidArgument("empty gamma grid".into()));
    }
    let mut forward = Vec::with_capacity(grid.len());
    let mut m = m_start.clone();
    for &gamma in grid {
        let sol = problem.solve(gamma, &m, opts)?;
        m = sol.m.clone();
        forward.push(sol);
    }
    let mut backward = Vec::with_capacity(grid.len());
    for &gamma in grid.iter().rev() {
        let sol = problem.solve(gamma, &m, opts)?;
        m = sol.m.clone();
        backward.push(sol);
    }
    backward.reverse();
    let (selected, branch) = forward
        .iter()
        .zip(&backward)
        .map(|(f, b)| match pick_branch(f, b, problem.is_saturated(f), problem.is_saturated(b)) {
            Branch::Backward => (b.clone(), Branch::Backward),
            Branch::Forward => (f.clone(), Branch::Forward),
        })
        .unzip();
    Ok((forward, backward, selected, branch))
}

fn initial_m(n: usize, schedule: &GammaSchedule, init: InitKind) -> DVector<f64> {
    match init {
        InitKind::Constant => DVector::from_element(n, schedule.epsilon),
        InitKind::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DVector::from_fn(n, |_, _| rng.random_range(0.0..1.0))
        }
    }
}

/// Runs the full path on centered training data and scores every selected
/// solution on `val`. Ties in validation error go to the larger `gamma`.
pub fn run_path(
    train: &CenteredDataset,
    val: &Dataset,
    schedule: &GammaSchedule,
    opts: &PathOptions,
) -> Result<GammaPath> {
    schedule.validate()?;
    if val.n() != train.n() {
        return Err(VgError::Dimension(format!(
            "validation set has {} features, training set {}",
            val.n(),
            train.n()
        )));
    }
    let problem = Problem::new(train, opts.solver);
    let grid = schedule.grid();
    let m0 = initial_m(train.n(), schedule, opts.init);
    let (forward, backward, selected, branch) = anneal(&problem, &grid, &m0, &opts.solve)?;

    let train_y = train.y.add_scalar(train.y_mean);
    let train_x = {
        let mut x = train.x.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.add_scalar_mut(train.x_mean[j]);
        }
        x
    };
    let mut train_mse = Vec::with_capacity(grid.len());
    let mut val_mse = Vec::with_capacity(grid.len());
    for sol in &selected {
        let fit = predict(sol, &train_x, &train.x_mean, train.y_mean)?;
        train_mse.push(mse(&fit, &train_y)?);
        let pred = predict(sol, val.x(), &train.x_mean, train.y_mean)?;
        val_mse.push(if val.is_empty() { f64::NAN } else { mse(&pred, val.y())? });
    }
    let mut best_index = 0;
    for (g, &e) in val_mse.iter().enumerate() {
        if e <= val_mse[best_index] || val_mse[best_index].is_nan() {
            best_index = g;
        }
    }
    Ok(GammaPath { grid, forward, backward, selected, branch, train_mse, val_mse, best_index })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub path: PathOptions,
    pub epsilon: f64,
    /// Replaces the data-driven schedule when set.
    pub schedule: Option<GammaSchedule>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { path: PathOptions::default(), epsilon: DEFAULT_EPSILON, schedule: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub best: VgSolution,
    pub path: GammaPath,
    pub schedule: GammaSchedule,
    pub solver: SolverKind,
    pub x_mean: DVector<f64>,
    pub y_mean: f64,
    /// Zero-variance training features held out of the fit.
    pub excluded: Vec<usize>,
}

impl FitResult {
    pub fn predict(&self, x_new: &nalgebra::DMatrix<f64>) -> Result<DVector<f64>> {
        predict(&self.best, x_new, &self.x_mean, self.y_mean)
    }
}

/// Center, compute statistics, build the schedule, run the path and return
/// the solution with the lowest validation error.
pub fn fit(train: &Dataset, val: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    if val.p() < 1 {
        return Err(VgError::InvalidData("validation set is empty".into()));
    }
    let centered = center(train);
    let solver = opts.path.solver.resolve(train.n(), train.p());
    let stats = sufficient_stats(&centered, false);
    let schedule = match opts.schedule {
        Some(s) => s,
        None => default_schedule(&stats, opts.epsilon)?,
    };
    let path = run_path(&centered, val, &schedule, &opts.path)?;
    Ok(FitResult {
        best: path.best().clone(),
        schedule,
        solver,
        x_mean: centered.x_mean.clone(),
        y_mean: centered.y_mean,
        excluded: stats.excluded.clone(),
        path,
    })
}

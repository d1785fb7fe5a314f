//! `vgarrote`: fit datasets, generate benchmark instances, trace
//! regularization paths, tabulate the univariate phase diagram and run
//! experiment suites.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use vgarrote::annealing::{default_schedule, GammaSchedule, DEFAULT_EPSILON};
use vgarrote::baselines::{baseline_cv, default_grid, lasso_fit, ridge_path, BaselineMethod};
use vgarrote::bench::{run_suite, BenchConfig, Suite};
use vgarrote::data::{center, split, sufficient_stats};
use vgarrote::generators::{example1, example2, gen_instance, zhao_spec, InstanceSpec, ZhaoVariant};
use vgarrote::metrics::{l1_error, mse, nonzero_count, roc_auc, solution_vector, EvalReport, Fitted};
use vgarrote::orthogonal::{phase_diagram, univariate_shrinkage_curves, write_shrinkage, ShrinkageParams};
use vgarrote::solver::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use vgarrote::{fit, Dataset, FitOptions, FitResult, SolverKind, VgError};

#[derive(Parser, Debug)]
#[command(name = "vgarrote", version, about = "Sparse linear regression with the Variational Garrote")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Fit one dataset, choosing gamma on a validation set.
    Fit(FitArgs),
    /// Write synthetic train/validation/test sets.
    Gen(GenArgs),
    /// Trace VG, lasso and ridge coefficients along their regularization paths.
    Sweep(SweepArgs),
    /// Tabulate the univariate phase diagram and shrinkage curves.
    Phase(PhaseArgs),
    /// Run an experiment suite and summarize every method.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolveArgs {
    /// auto, primal or dual.
    #[arg(long, default_value = "auto")]
    solver: SolverKind,
    /// Sparsity level that sets the first grid point.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, allow_hyphen_values = true)]
    gamma_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_step: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

impl SolveArgs {
    fn fit_options(&self, train: &Dataset) -> vgarrote::Result<FitOptions> {
        let mut opts = FitOptions { epsilon: self.epsilon, ..FitOptions::default() };
        opts.path.solver = self.solver;
        opts.path.solve.tol = self.tol;
        opts.path.solve.max_iter = self.max_iter;
        opts.path.solve.validate()?;
        if self.gamma_min.is_some() || self.gamma_max.is_some() || self.gamma_step.is_some() {
            let base = default_schedule(&sufficient_stats(&center(train), false), self.epsilon)?;
            let schedule = GammaSchedule {
                gamma_min: self.gamma_min.unwrap_or(base.gamma_min),
                gamma_max: self.gamma_max.unwrap_or(base.gamma_max),
                delta_gamma: self.gamma_step.unwrap_or(base.delta_gamma),
                epsilon: self.epsilon,
                fallback: false,
            };
            schedule.validate()?;
            opts.schedule = Some(schedule);
        }
        Ok(opts)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct DataArgs {
    /// Training data, or all data when --val is not given.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    val: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// True weights, one per line, for reconstruction metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Fraction of --input held out for validation when --val is absent.
    #[arg(long, default_value_t = 0.2)]
    val_fraction: f64,
    /// Seed of the train/validation split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Loaded {
    train: Dataset,
    val: Dataset,
    test: Option<Dataset>,
    truth: Option<DVector<f64>>,
}

impl DataArgs {
    fn load(&self) -> vgarrote::Result<Loaded> {
        let input = Dataset::read_path(&self.input)?;
        let (train, val) = match &self.val {
            Some(path) => (input, Dataset::read_path(path)?),
            None => {
                if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
                    return Err(VgError::InvalidArgument("--val-fraction must lie in (0, 1)".into()));
                }
                let p_val = ((input.p() as f64 * self.val_fraction).round() as usize).max(1);
                let (train, val, _) = split(&input, input.p() - p_val, p_val, 0, self.seed)?;
                (train, val)
            }
        };
        let test = self.test.as_ref().map(Dataset::read_path).transpose()?;
        let truth = self.truth.as_ref().map(|p| read_vector(p)).transpose()?;
        for (name, d) in [("validation", Some(&val)), ("test", test.as_ref())] {
            if let Some(d) = d {
                if d.n() != train.n() {
                    return Err(VgError::Dimension(format!("{name} set has {} features, training set {}", d.n(), train.n())));
                }
            }
        }
        if let Some(t) = &truth {
            if t.len() != train.n() {
                return Err(VgError::Dimension(format!("truth has {} weights, data {} features", t.len(), train.n())));
            }
        }
        Ok(Loaded { train, val, test, truth })
    }
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// Penalties for the ridge and lasso comparison rows.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    /// example1, example2, zhao-a or zhao-b.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// Instance specification in TOML.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances to write; instance i uses seed + i.
    #[arg(long, default_value_t = 1)]
    instances: usize,
    /// Samples per set for the Zhao presets.
    #[arg(long, default_value_t = 1000)]
    zhao_samples: usize,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct PhaseArgs {
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// rho takes the values k / rho_steps for k < rho_steps.
    #[arg(long, default_value_t = 100)]
    rho_steps: usize,
    #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
    gamma_min: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma_step: f64,
    /// VG sparsity for the shrinkage curves.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    shrink_gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_var: f64,
    #[arg(long, default_value_t = 0.5)]
    ridge_lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    lasso_gamma: f64,
    #[arg(long, default_value_t = 0.25)]
    garrote_gamma: f64,
    #[arg(long, default_value_t = 3.0)]
    w_max: f64,
    #[arg(long, default_value_t = 300)]
    w_steps: usize,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    /// example1, example2, zhao, noise_sweep, sample_sweep or dim_scaling.
    #[arg(long)]
    suite: Suite,
    /// Defaults to 20 (100 for zhao, 10 for noise_sweep).
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    zhao_samples: usize,
    /// Run instances one at a time (default for dim_scaling).
    #[arg(long)]
    sequential: bool,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

fn read_vector(path: &Path) -> vgarrote::Result<DVector<f64>> {
    let text = fs::read_to_string(path)?;
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|_| VgError::Parse(format!("cannot parse weight {l:?}"))))
        .collect::<vgarrote::Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(VgError::Parse(format!("{} holds no weights", path.display())));
    }
    Ok(DVector::from_vec(values))
}

/// Comment lines that make every output reproducible.
fn header(command: &Command) -> Vec<String> {
    let seed = match command {
        Command::Fit(a) => Some(a.data.seed),
        Command::Sweep(a) => Some(a.data.seed),
        Command::Gen(a) => Some(a.seed),
        Command::Bench(a) => Some(a.seed),
        Command::Phase(_) => None,
    };
    let config = serde_json::to_string(command).unwrap_or_default();
    vec![
        format!("vgarrote {}", env!("CARGO_PKG_VERSION")),
        format!("seed: {}", seed.map_or_else(|| "none".into(), |s| s.to_string())),
        format!("config: {config}"),
    ]
}

fn create(dir: &Path, name: &str) -> vgarrote::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> vgarrote::Result<()>,
) -> vgarrote::Result<()> {
    let mut out = create(dir, name)?;
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

fn evaluate_vg(result: &FitResult, data: &Loaded) -> vgarrote::Result<EvalReport> {
    let best = result.path.best_index;
    let v = solution_vector(Fitted::Vg(&result.best));
    let test_mse = match &data.test {
        Some(t) => mse(&result.predict(t.x())?, t.y())?,
        None => f64::NAN,
    };
    let (l1, auc) = truth_metrics(&v, data.truth.as_ref())?;
    Ok(EvalReport {
        method: "vg".into(),
        train_mse: result.path.train_mse[best],
        val_mse: result.path.val_mse[best],
        test_mse,
        l1_error: l1,
        nonzero: nonzero_count(Fitted::Vg(&result.best)),
        roc_auc: auc,
    })
}

fn truth_metrics(v: &DVector<f64>, truth: Option<&DVector<f64>>) -> vgarrote::Result<(f64, Option<f64>)> {
    let Some(t) = truth else { return Ok((f64::NAN, None)) };
    let active = t.iter().filter(|&&w| w != 0.0).count();
    let auc = if active > 0 && active < t.len() { Some(roc_auc(v, t)?) } else { None };
    Ok((l1_error(v, t)?, auc))
}

fn evaluate_baseline(method: BaselineMethod, data: &Loaded, grid: Option<&[f64]>) -> vgarrote::Result<EvalReport> {
    let cv = baseline_cv(&data.train, &data.val, method, grid)?;
    let v = solution_vector(Fitted::Baseline(&cv.best));
    let test_mse = match &data.test {
        Some(t) => mse(&cv.predict(t.x())?, t.y())?,
        None => f64::NAN,
    };
    let (l1, auc) = truth_metrics(&v, data.truth.as_ref())?;
    Ok(EvalReport {
        method: method.name().into(),
        train_mse: mse(&cv.predict(data.train.x())?, data.train.y())?,
        val_mse: cv.val_mse[cv.best_index],
        test_mse,
        l1_error: l1,
        nonzero: nonzero_count(Fitted::Baseline(&cv.best)),
        roc_auc: auc,
    })
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    header: &'a [String],
    solver: SolverKind,
    schedule: &'a GammaSchedule,
    excluded: &'a [usize],
    x_mean: Vec<f64>,
    y_mean: f64,
    solution: &'a vgarrote::VgSolution,
}

fn cmd_fit(args: &FitArgs, head: &[String]) -> vgarrote::Result<()> {
    let data = args.data.load()?;
    let opts = args.solve.fit_options(&data.train)?;
    let result = fit(&data.train, &data.val, &opts)?;
    let dir = &args.output_dir;
    write_file(dir, "solution.json", |out| {
        let file = SolutionFile {
            header: head,
            solver: result.solver,
            schedule: &result.schedule,
            excluded: &result.excluded,
            x_mean: result.x_mean.iter().copied().collect(),
            y_mean: result.y_mean,
            solution: &result.best,
        };
        serde_json::to_writer_pretty(&mut *out, &file).map_err(|e| VgError::Parse(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    })?;
    write_file(dir, "path.csv", |out| result.path.write_table(out, head))?;
    let grid = args.lambda_grid.as_deref();
    let reports = [
        evaluate_vg(&result, &data)?,
        evaluate_baseline(BaselineMethod::Ridge, &data, grid)?,
        evaluate_baseline(BaselineMethod::Lasso, &data, grid)?,
    ];
    write_file(dir, "report.csv", |out| {
        for h in head {
            writeln!(out, "# {h}")?;
        }
        writeln!(out, "{}", EvalReport::HEADER)?;
        reports.iter().try_for_each(|r| r.write_row(&mut *out))
    })?;
    if result.path.unconverged() > 0 {
        eprintln!("warning: {} grid points did not converge", result.path.unconverged());
    }
    println!(
        "gamma {:.4}  nonzero {}  val_mse {:.6}  test_mse {:.6}",
        result.best.gamma, reports[0].nonzero.unwrap_or(0), reports[0].val_mse, reports[0].test_mse
    );
    Ok(())
}

fn preset_spec(name: &str, seed: u64, zhao_samples: usize) -> vgarrote::Result<InstanceSpec> {
    Ok(match name {
        "example1" => example1(seed),
        "example2" => example2(seed),
        "zhao-a" => zhao_spec(ZhaoVariant::A, zhao_samples, seed),
        "zhao-b" => zhao_spec(ZhaoVariant::B, zhao_samples, seed),
        other => return Err(VgError::InvalidArgument(format!("unknown preset {other:?}"))),
    })
}

fn cmd_gen(args: &GenArgs, head: &[String]) -> vgarrote::Result<()> {
    if args.instances == 0 {
        return Err(VgError::InvalidArgument("--instances must be positive".into()));
    }
    let base = match (&args.preset, &args.spec) {
        (Some(name), None) => preset_spec(name, args.seed, args.zhao_samples)?,
        (None, Some(path)) => {
            let mut spec = InstanceSpec::read_path(path)?;
            spec.seed = args.seed;
            spec
        }
        _ => return Err(VgError::InvalidArgument("give exactly one of --preset or --spec".into())),
    };
    for i in 0..args.instances {
        let spec = InstanceSpec { seed: args.seed.wrapping_add(i as u64), ..base.clone() };
        let inst = gen_instance(&spec)?;
        let dir = if args.instances == 1 { args.output_dir.clone() } else { args.output_dir.join(format!("instance_{i:03}")) };
        fs::create_dir_all(&dir)?;
        let mut lines = head.to_vec();
        lines.push(format!("instance seed: {}", spec.seed));
        inst.train.write_path(dir.join("train.csv"), &lines)?;
        inst.val.write_path(dir.join("val.csv"), &lines)?;
        inst.test.write_path(dir.join("test.csv"), &lines)?;
        write_file(&dir, "w_true.csv", |out| {
            for h in &lines {
                writeln!(out, "# {h}")?;
            }
            inst.w_true.iter().try_for_each(|w| writeln!(out, "{w}").map_err(VgError::from))
        })?;
        write_file(&dir, "spec.toml", |out| {
            for h in &lines {
                writeln!(out, "# {h}")?;
            }
            write!(out, "{}", spec.to_toml())?;
            Ok(())
        })?;
    }
    println!("wrote {} instance(s) to {}", args.instances, args.output_dir.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, head: &[String]) -> vgarrote::Result<()> {
    let data = args.data.load()?;
    let opts = args.solve.fit_options(&data.train)?;
    let result = fit(&data.train, &data.val, &opts)?;
    let dir = &args.output_dir;
    let n = data.train.n();
    let columns = |prefix: &str| (1..=n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",");
    let row = |v: &DVector<f64>| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");

    write_file(dir, "vg_path.csv", |out| result.path.write_table(out, head))?;
    write_file(dir, "vg_coefficients.csv", |out| {
        for h in head {
            writeln!(out, "# {h}")?;
        }
        writeln!(out, "gamma,branch,{},{}", columns("m_"), columns("v_"))?;
        for (g, sol) in result.path.selected.iter().enumerate() {
            let branch = format!("{:?}", result.path.branch[g]).to_lowercase();
            writeln!(out, "{},{branch},{},{}", result.path.grid[g], row(&sol.m), row(&sol.v()))?;
        }
        Ok(())
    })?;

    let centered = center(&data.train);
    let stats = sufficient_stats(&centered, false);
    for method in [BaselineMethod::Lasso, BaselineMethod::Ridge] {
        let mut lambdas = match &args.lambda_grid {
            Some(g) => g.clone(),
            None => default_grid(method, &stats),
        };
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let fits = match method {
            BaselineMethod::Ridge => ridge_path(&centered, &lambdas)?,
            BaselineMethod::Lasso => {
                let mut fits: Vec<vgarrote::baselines::BaselineSolution> = Vec::with_capacity(lambdas.len());
                for &l in &lambdas {
                    let sol = lasso_fit(&centered, l, fits.last().map(|s| &s.w))?;
                    fits.push(sol);
                }
                fits
            }
        };
        write_file(dir, &format!("{}_path.csv", method.name()), |out| {
            for h in head {
                writeln!(out, "# {h}")?;
            }
            writeln!(out, "lambda,val_mse,{}", columns("w_"))?;
            for f in &fits {
                let pred = vgarrote::baselines::baseline_predict(f, data.val.x(), &centered.x_mean, centered.y_mean)?;
                writeln!(out, "{},{},{}", f.lambda, mse(&pred, data.val.y())?, row(&f.w))?;
            }
            Ok(())
        })?;
    }
    println!("wrote paths over {} gamma and lambda values to {}", result.path.grid.len(), dir.display());
    Ok(())
}

fn cmd_phase(args: &PhaseArgs, head: &[String]) -> vgarrote::Result<()> {
    if args.rho_steps == 0 || args.w_steps == 0 || !(args.gamma_step > 0.0) || !(args.gamma_min <= args.gamma_max) {
        return Err(VgError::InvalidArgument("grids need positive steps and gamma_min ≤ gamma_max".into()));
    }
    let rho: Vec<f64> = (0..args.rho_steps).map(|k| k as f64 / args.rho_steps as f64 * (1.0 - args.delta)).collect();
    let count = ((args.gamma_max - args.gamma_min) / args.gamma_step + 1e-9).floor() as usize;
    let gamma: Vec<f64> = (0..=count).map(|k| args.gamma_min + k as f64 * args.gamma_step).collect();
    let diagram = phase_diagram(args.p, &rho, &gamma, args.delta)?;
    let dir = &args.output_dir;
    write_file(dir, "phase_grid.csv", |out| diagram.write_cells(out, head))?;
    write_file(dir, "phase_boundary.csv", |out| diagram.write_boundary(out, head))?;
    let w: Vec<f64> = (0..=args.w_steps).map(|k| k as f64 * args.w_max / args.w_steps as f64).collect();
    let params = ShrinkageParams {
        gamma_vg: args.shrink_gamma,
        p: args.p,
        noise_var: args.noise_var,
        ridge_lambda: args.ridge_lambda,
        lasso_gamma: args.lasso_gamma,
        garrote_gamma: args.garrote_gamma,
    };
    let rows = univariate_shrinkage_curves(&w, &params)?;
    write_file(dir, "shrinkage.csv", |out| write_shrinkage(&rows, out, head))?;
    println!("rho* {:.6} (approx {:.6})  gamma* {:.4}", diagram.rho_star, diagram.rho_star_approx, diagram.gamma_star);
    Ok(())
}

fn cmd_bench(args: &BenchArgs, head: &[String]) -> vgarrote::Result<()> {
    let mut config = BenchConfig::new(args.suite, args.seed);
    if let Some(k) = args.instances {
        config.instances = k;
    }
    config.lambda_grid = args.lambda_grid.clone();
    config.zhao_samples = args.zhao_samples;
    if args.sequential {
        config.parallel = false;
    }
    let solve = &args.solve;
    config.fit.epsilon = solve.epsilon;
    config.fit.path.solver = solve.solver;
    config.fit.path.solve.tol = solve.tol;
    config.fit.path.solve.max_iter = solve.max_iter;
    config.fit.path.solve.validate()?;
    if solve.gamma_min.is_some() || solve.gamma_max.is_some() || solve.gamma_step.is_some() {
        let (Some(lo), Some(hi), Some(step)) = (solve.gamma_min, solve.gamma_max, solve.gamma_step) else {
            return Err(VgError::InvalidArgument("bench needs all of --gamma-min, --gamma-max and --gamma-step".into()));
        };
        config.fit.schedule = Some(GammaSchedule::new(lo, hi, step, solve.epsilon)?);
    }
    let result = run_suite(&config)?;
    let dir = &args.output_dir;
    write_file(dir, "instances.csv", |out| result.write_instances(out, head))?;
    write_file(dir, "summary.csv", |out| result.write_summary(out, head))?;
    write_file(dir, "timing.csv", |out| result.write_timing(out, head))?;
    let mut stdout = std::io::stdout().lock();
    result.write_summary(&mut stdout, &[])?;
    Ok(())
}

fn exit_code(err: &VgError) -> u8 {
    match err {
        VgError::InvalidArgument(_) => 1,
        VgError::Singular { .. } | VgError::NotPositiveDefinite(_) => 3,
        VgError::InvalidData(_) | VgError::Dimension(_) | VgError::Parse(_) | VgError::Io(_) => 2,
    }
}

fn run(cli: &Cli) -> vgarrote::Result<()> {
    let head = header(&cli.command);
    let dir = match &cli.command {
        Command::Fit(a) => &a.output_dir,
        Command::Gen(a) => &a.output_dir,
        Command::Sweep(a) => &a.output_dir,
        Command::Phase(a) => &a.output_dir,
        Command::Bench(a) => &a.output_dir,
    };
    fs::create_dir_all(dir)?;
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, &head),
        Command::Gen(a) => cmd_gen(a, &head),
        Command::Sweep(a) => cmd_sweep(a, &head),
        Command::Phase(a) => cmd_phase(a, &head),
        Command::Bench(a) => cmd_bench(a, &head),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

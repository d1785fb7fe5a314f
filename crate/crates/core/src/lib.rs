//! Sparse linear regression with the Variational Garrote.
//!
//! Each feature gets a binary selector whose posterior is approximated by a
//! factorized distribution with means `m_i`; weights `w_i` and the noise
//! precision `beta` are fitted by MAP. The sparsity log-odds `gamma` is swept
//! over a grid with warm starts in both directions and picked by validation
//! error.
//!
//! Modules:
//! - [`data`]: datasets, centering, sufficient statistics, splits and file IO.
//! - [`generators`]: synthetic benchmark instances.
//! - [`solver`]: the primal fixed-point solver and the free energy.
//! - [`dual`]: the sample-space solver for many features and few samples.
//! - [`annealing`]: the `gamma` path driver and model selection.
//! - [`orthogonal`]: closed forms for orthogonal designs and the univariate
//!   phase structure.
//! - [`baselines`]: ridge regression and coordinate-descent lasso.
//! - [`metrics`]: prediction and reconstruction measures.
//! - [`bench`]: the experiment suites behind the `bench` command.

pub mod annealing;
pub mod baselines;
pub mod bench;
pub mod data;
pub mod dual;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod metrics;
pub mod orthogonal;
pub mod solver;

pub use annealing::{fit, run_path, FitOptions, FitResult, GammaPath, GammaSchedule, SolverKind};
pub use data::{center, split, sufficient_stats, CenteredDataset, Dataset, SufficientStats};
pub use error::{Result, VgError};
pub use solver::{predict, solve_primal, SolveOptions, VgSolution, VgState};

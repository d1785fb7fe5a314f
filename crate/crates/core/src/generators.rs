//! Synthetic regression instances: Gaussian inputs with a chosen covariance,
//! outputs from a fixed teacher plus Gaussian noise.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Result, VgError};
use crate::linalg::cholesky;

pub const DEFAULT_BLOCK_SIZE: usize = 10;
pub const DEFAULT_BLOCK_CORR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Covariance {
    Identity,
    /// `chi_ij = zeta^|i-j|`.
    Toeplitz { zeta: f64 },
    /// Block diagonal with constant correlation inside each block.
    Block { block_size: usize, within_corr: f64 },
    /// Three inputs with `x3 = (2/3) x1 + (2/3) x2 + noise`.
    Zhao,
}

impl Covariance {
    /// Dense covariance matrix for `n` features.
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        match *self {
            Covariance::Identity => DMatrix::identity(n, n),
            Covariance::Toeplitz { zeta } => DMatrix::from_fn(n, n, |i, j| zeta.powi(i.abs_diff(j) as i32)),
            Covariance::Block { block_size, within_corr } => DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    1.0
                } else if i / block_size == j / block_size {
                    within_corr
                } else {
                    0.0
                }
            }),
            Covariance::Zhao => {
                let c = 2.0 / 3.0;
                DMatrix::from_row_slice(3, 3, &[1.0, 0.0, c, 0.0, 1.0, c, c, c, 1.0 + 2.0 * c * c])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub p: usize,
    pub p_val: usize,
    pub p_test: usize,
    pub w_true: Vec<f64>,
    pub noise_sd: f64,
    pub covariance: Covariance,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(VgError::InvalidArgument(msg));
        if self.n == 0 || self.p < 2 {
            return bad(format!("need n ≥ 1 and p ≥ 2, got n={} p={}", self.n, self.p));
        }
        if self.w_true.len() != self.n {
            return bad(format!("teacher has {} weights for n={}", self.w_true.len(), self.n));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad(format!("noise_sd must be finite and ≥ 0, got {}", self.noise_sd));
        }
        if self.w_true.iter().any(|w| !w.is_finite()) {
            return bad("teacher weights must be finite".into());
        }
        match self.covariance {
            Covariance::Toeplitz { zeta } if !(0.0..1.0).contains(&zeta) => bad(format!("zeta must lie in [0, 1), got {zeta}")),
            Covariance::Block { block_size, within_corr } if block_size == 0 || !(0.0..1.0).contains(&within_corr) => {
                bad(format!("block needs size ≥ 1 and correlation in [0, 1), got {block_size}, {within_corr}"))
            }
            Covariance::Zhao if self.n != 3 => bad(format!("the Zhao design has 3 features, got n={}", self.n)),
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance spec is always representable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| VgError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn w_true(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.w_true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    pub w_true: DVector<f64>,
    pub spec: InstanceSpec,
}

/// Row sampler: `x = Lz` with `L` the Cholesky factor of the covariance.
enum Sampler {
    Identity,
    Factor(DMatrix<f64>),
    Blocks { size: usize, factor: DMatrix<f64> },
    Zhao,
}

impl Sampler {
    fn new(cov: &Covariance, n: usize) -> Result<Self> {
        Ok(match *cov {
            Covariance::Identity => Sampler::Identity,
            Covariance::Toeplitz { .. } => Sampler::Factor(cholesky(cov.matrix(n))?.unpack()),
            Covariance::Block { block_size, .. } => Sampler::Blocks {
                size: block_size,
                factor: cholesky(cov.matrix(block_size.min(n)))?.unpack(),
            },
            Covariance::Zhao => Sampler::Zhao,
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng, rows: usize, n: usize) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(rows, n);
        for r in 0..rows {
            for c in 0..n {
                z[(r, c)] = rng.sample(StandardNormal);
            }
        }
        match self {
            Sampler::Identity => z,
            Sampler::Factor(l) => z * l.transpose(),
            Sampler::Blocks { size, factor } => {
                let mut x = DMatrix::zeros(rows, n);
                let mut start = 0;
                while start < n {
                    let width = (*size).min(n - start);
                    let l = factor.view((0, 0), (width, width));
                    let block = z.columns(start, width) * l.transpose();
                    x.columns_mut(start, width).copy_from(&block);
                    start += width;
                }
                x
            }
            Sampler::Zhao => {
                let c = 2.0 / 3.0;
                for r in 0..rows {
                    z[(r, 2)] += c * z[(r, 0)] + c * z[(r, 1)];
                }
                z
            }
        }
    }
}

/// Draws train, validation and test sets (in that order) from one seeded
/// stream.
pub fn gen_instance(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let sampler = Sampler::new(&spec.covariance, spec.n)?;
    let w_true = spec.w_true();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |rows: usize| -> (DMatrix<f64>, DVector<f64>) {
        let x = sampler.draw(&mut rng, rows, spec.n);
        let noise = DVector::from_fn(rows, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &x * &w_true + noise * spec.noise_sd;
        (x, y)
    };
    let (x, y) = draw(spec.p);
    let train = Dataset::new(x, y)?;
    let mut held_out = |rows: usize| -> Result<Dataset> {
        let (x, y) = draw(rows);
        Dataset::held_out(x, y)
    };
    let val = held_out(spec.p_val)?;
    let test = held_out(spec.p_test)?;
    Ok(GeneratedInstance { train, val, test, w_true, spec: spec.clone() })
}

/// One active feature with weight 1, identity inputs, unit noise,
/// 50/50/400 samples.
pub fn example1(seed: u64) -> InstanceSpec {
    let mut w = vec![0.0; 100];
    w[0] = 1.0;
    InstanceSpec { n: 100, p: 50, p_val: 50, p_test: 400, w_true: w, noise_sd: 1.0, covariance: Covariance::Identity, seed }
}

/// Features 1, 2, 5, 10 and 50 (1-based) active, Toeplitz 0.5 inputs.
pub fn example2(seed: u64) -> InstanceSpec {
    let mut w = vec![0.0; 100];
    for i in EXAMPLE2_SUPPORT {
        w[i] = 1.0;
    }
    InstanceSpec {
        n: 100,
        p: 50,
        p_val: 50,
        p_test: 400,
        w_true: w,
        noise_sd: 1.0,
        covariance: Covariance::Toeplitz { zeta: 0.5 },
        seed,
    }
}

/// Zero-based active indices of [`example2`].
pub const EXAMPLE2_SUPPORT: [usize; 5] = [0, 1, 4, 9, 49];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZhaoVariant {
    A,
    B,
}

impl ZhaoVariant {
    pub fn w_true(self) -> [f64; 3] {
        match self {
            ZhaoVariant::A => [2.0, 3.0, 0.0],
            ZhaoVariant::B => [-2.0, 3.0, 0.0],
        }
    }
}

pub fn zhao_spec(variant: ZhaoVariant, p: usize, seed: u64) -> InstanceSpec {
    InstanceSpec {
        n: 3,
        p,
        p_val: p,
        p_test: p,
        w_true: variant.w_true().to_vec(),
        noise_sd: 1.0,
        covariance: Covariance::Zhao,
        seed,
    }
}

/// The Zhao and Yu design with equally sized train, validation and test sets.
pub fn gen_zhao(variant: ZhaoVariant, p: usize, seed: u64) -> Result<GeneratedInstance> {
    if p < 3 {
        return Err(VgError::InvalidArgument(format!("zhao instances need p ≥ 3, got {p}")));
    }
    gen_instance(&zhao_spec(variant, p, seed))
}

/// Teacher with `k` unit weights at indices drawn uniformly without
/// replacement.
pub fn random_support(n: usize, k: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if k > n {
        return Err(VgError::InvalidArgument(format!("cannot choose {k} of {n} features")));
    }
    let mut w = vec![0.0; n];
    for i in rand::seq::index::sample(rng, n, k) {
        w[i] = 1.0;
    }
    Ok(w)
}

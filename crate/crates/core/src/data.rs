//! Datasets, centering, sufficient statistics and splitting.
//!
//! Samples are rows and features are columns: `x` is `p × n` for `p`
//! samples of `n` features. The primal solver only ever sees the data through
//! [`SufficientStats`]; the dual solver also needs the centered inputs.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VgError};

/// A raw regression dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(VgError::InvalidData(format!(
                "need at least 2 samples, got {}",
                x.nrows()
            )));
        }
        Self::held_out(x, y)
    }

    /// Like [`Dataset::new`] but accepts fewer than two samples, for
    /// validation and test sets.
    pub fn held_out(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(VgError::Dimension(format!(
                "x has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() < 1 {
            return Err(VgError::InvalidData("need at least 1 feature".into()));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % x.nrows(), pos / x.nrows());
            return Err(VgError::InvalidData(format!(
                "non-finite input at sample {r}, feature {c}"
            )));
        }
        if let Some(r) = y.iter().position(|v| !v.is_finite()) {
            return Err(VgError::InvalidData(format!("non-finite output at sample {r}")));
        }
        Ok(Self { x, y })
    }

    /// Builds a dataset from row-major inputs.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(VgError::Dimension("ragged input rows".into()));
        }
        let x = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        Self::new(x, DVector::from_column_slice(y))
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Number of samples.
    pub fn p(&self) -> usize {
        self.x.nrows()
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    /// Keeps the given rows, in the given order. The result may have fewer
    /// than two rows (an empty split, for instance); fitting rejects those.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.p()) {
            return Err(VgError::InvalidArgument(format!("row {bad} out of range")));
        }
        let x = DMatrix::from_fn(rows.len(), self.n(), |i, j| self.x[(rows[i], j)]);
        let y = DVector::from_fn(rows.len(), |i, _| self.y[rows[i]]);
        Ok(Self { x, y })
    }

    pub fn is_empty(&self) -> bool {
        self.p() == 0
    }

    /// Keeps the given feature columns.
    pub fn select_features(&self, cols: &[usize]) -> Result<Self> {
        let x = DMatrix::from_fn(self.p(), cols.len(), |i, j| self.x[(i, cols[j])]);
        Self::new(x, self.y.clone())
    }

    /// Stacks the rows of two datasets with the same feature count.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        if self.n() != other.n() {
            return Err(VgError::Dimension(format!(
                "cannot stack {} features onto {}",
                other.n(),
                self.n()
            )));
        }
        let p = self.p() + other.p();
        let x = DMatrix::from_fn(p, self.n(), |i, j| {
            if i < self.p() {
                self.x[(i, j)]
            } else {
                other.x[(i - self.p(), j)]
            }
        });
        let y = DVector::from_fn(p, |i, _| {
            if i < self.p() {
                self.y[i]
            } else {
                other.y[i - self.p()]
            }
        });
        Self::new(x, y)
    }

    /// Reads the delimited text format: one sample per line, `y` first, then
    /// `x_1..x_n`. Comma or tab separated; lines starting with `#` are skipped.
    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let mut text = String::new();
        File::open(path.as_ref())?.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let first = text
            .lines()
            .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .ok_or_else(|| VgError::Parse("no data rows".into()))?;
        let delimiter = if first.contains('\t') { b'\t' } else { b',' };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .delimiter(delimiter)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());

        let mut ys = Vec::new();
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| VgError::Parse(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let mut values = record.iter().map(|f| {
                f.parse::<f64>()
                    .map_err(|_| VgError::Parse(format!("row {}: cannot parse {f:?}", line + 1)))
            });
            let y = values.next().transpose()?.ok_or_else(|| {
                VgError::Parse(format!("row {}: empty", line + 1))
            })?;
            let x = values.collect::<Result<Vec<_>>>()?;
            if x.is_empty() {
                return Err(VgError::Parse(format!("row {}: no input columns", line + 1)));
            }
            if let Some(prev) = rows.first().map(Vec::len) {
                if prev != x.len() {
                    return Err(VgError::Dimension(format!(
                        "row {} has {} inputs, expected {prev}",
                        line + 1,
                        x.len()
                    )));
                }
            }
            ys.push(y);
            rows.push(x);
        }
        if rows.is_empty() {
            return Err(VgError::Parse("no data rows".into()));
        }
        Self::from_rows(&rows, &ys)
    }

    /// Writes the dataset in the same format [`Dataset::read_path`] reads,
    /// with `header` lines emitted as `#` comments.
    pub fn write_to(&self, mut out: impl Write, header: &[String]) -> Result<()> {
        for h in header {
            writeln!(out, "# {h}")?;
        }
        for i in 0..self.p() {
            write!(out, "{}", self.y[i])?;
            for j in 0..self.n() {
                write!(out, ",{}", self.x[(i, j)])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_path(&self, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        self.write_to(&mut w, header)?;
        w.flush()?;
        Ok(())
    }
}

/// A dataset with column means removed, keeping the means for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_mean: DVector<f64>,
    pub y_mean: f64,
}

impl CenteredDataset {
    pub fn p(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }
}

/// Removes the mean from every input column and from the output.
pub fn center(data: &Dataset) -> CenteredDataset {
    let p = data.p() as f64;
    let x_mean = DVector::from_iterator(data.n(), data.x.column_iter().map(|c| c.sum() / p));
    let y_mean = data.y.sum() / p;
    let mut x = data.x.clone();
    for (j, mut col) in x.column_iter_mut().enumerate() {
        col.add_scalar_mut(-x_mean[j]);
    }
    let y = data.y.add_scalar(-y_mean);
    CenteredDataset { x, y, x_mean, y_mean }
}

/// Data moments used by the solvers.
///
/// `b_i = (1/p) Σ x_i y`, `chi_ij = (1/p) Σ x_i x_j`, `sigma_y2 = (1/p) Σ y²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub b: DVector<f64>,
    pub chi: Option<DMatrix<f64>>,
    pub chi_diag: DVector<f64>,
    pub sigma_y2: f64,
    pub p: usize,
    pub n: usize,
    /// Zero-variance features. Solvers hold these at `m = m_clip`, `w = 0`.
    pub excluded: Vec<usize>,
}

impl SufficientStats {
    pub fn is_excluded(&self, i: usize) -> bool {
        self.excluded.binary_search(&i).is_ok()
    }

    /// Indices of features that take part in fitting.
    pub fn included(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.is_excluded(i)).collect()
    }

    pub fn chi_or_err(&self) -> Result<&DMatrix<f64>> {
        self.chi.as_ref().ok_or_else(|| {
            VgError::InvalidArgument("full input covariance not computed for these statistics".into())
        })
    }
}

/// Computes `b`, the diagonal of `chi`, `sigma_y2` and optionally the full
/// `chi` from centered data.
pub fn sufficient_stats(data: &CenteredDataset, full_chi: bool) -> SufficientStats {
    let p = data.p();
    let pf = p as f64;
    let b = data.x.tr_mul(&data.y) / pf;
    let chi_diag = DVector::from_iterator(
        data.n(),
        data.x.column_iter().map(|c| c.norm_squared() / pf),
    );
    let scale = data
        .x
        .column_iter()
        .zip(data.x_mean.iter())
        .map(|(c, m)| c.amax().max(m.abs()))
        .collect::<Vec<_>>();
    let excluded: Vec<usize> = data
        .x
        .column_iter()
        .enumerate()
        .filter(|(j, c)| c.amax() <= 1e-12 * (1.0 + scale[*j]))
        .map(|(j, _)| j)
        .collect();
    let mut chi_diag = chi_diag;
    for &j in &excluded {
        chi_diag[j] = 0.0;
    }
    let chi = full_chi.then(|| {
        let mut chi = data.x.tr_mul(&data.x) / pf;
        for &j in &excluded {
            chi.row_mut(j).fill(0.0);
            chi.column_mut(j).fill(0.0);
        }
        chi
    });
    SufficientStats {
        b,
        chi,
        chi_diag,
        sigma_y2: data.y.norm_squared() / pf,
        p,
        n: data.n(),
        excluded,
    }
}

/// Splits rows into disjoint train, validation and test sets using a
/// seeded uniform permutation.
pub fn split(
    data: &Dataset,
    p_train: usize,
    p_val: usize,
    p_test: usize,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let total = p_train + p_val + p_test;
    if total > data.p() {
        return Err(VgError::InvalidArgument(format!(
            "split sizes {p_train}+{p_val}+{p_test} exceed {} samples",
            data.p()
        )));
    }
    let mut perm: Vec<usize> = (0..data.p()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = data.select_rows(&perm[..p_train])?;
    let val = data.select_rows(&perm[p_train..p_train + p_val])?;
    let test = data.select_rows(&perm[p_train + p_val..total])?;
    Ok((train, val, test))
}

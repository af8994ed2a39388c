//! Choosing the feature weight λ by node-splitting cross-validation, and
//! screening features by Kendall's τ against the adjacency dissimilarity.

use alloc::vec;
use alloc::vec::Vec;

use libm::{round, sqrt};
use rand::seq::SliceRandom;

use crate::dissimilarity::{combine, d0_hat, s_hat, TieBreakConfig};
use crate::error::{Error, Result};
use crate::estimator::{bandwidth, estimate_from_dissimilarity};
use crate::matrix::{AdjacencyMatrix, FeatureMatrix, SquaredDissimilarityMatrix};
use crate::rng::{derive_seed, stream, Purpose};

/// Grid used when no grid is configured.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [0.0, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0];

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub grid: Vec<f64>,
    /// Number of random validation splits `M`.
    pub repeats: usize,
    /// Share of nodes held out per split.
    pub fraction: f64,
    /// Neighborhood scale used for every fit.
    pub c0: f64,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_LAMBDA_GRID.to_vec(), repeats: 10, fraction: 0.10, c0: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub lambda_opt: f64,
    /// `losses[q][m]`: ℓ₁ loss of grid point `q` on split `m`.
    pub losses: Vec<Vec<f64>>,
    /// Loss per grid point averaged over splits.
    pub mean_losses: Vec<f64>,
}

/// Index of the training node whose features are closest to `x` (first on ties).
fn nearest_row(train: &FeatureMatrix, x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for t in 0..train.n() {
        let d: f64 = train.row(t).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (t, d);
        }
    }
    best.0
}

/// Node-splitting cross-validation for λ.
///
/// Each split holds out `round(fraction · n)` nodes `V`, fits every grid
/// point on the remaining nodes `T`, predicts row `v ∈ V` by the fitted row
/// of its feature-space nearest neighbor in `T`, and scores the mean absolute
/// error over `V × T`. Ties in the averaged loss go to the smallest λ.
pub fn cross_validate(a: &AdjacencyMatrix, x: &FeatureMatrix, cfg: &CvConfig) -> Result<CvResult> {
    let n = a.n();
    if x.n() != n {
        return Err(Error::argument(alloc::format!("feature matrix has {} rows, graph has {n} nodes", x.n())));
    }
    if cfg.grid.is_empty() {
        return Err(Error::argument("λ grid is empty"));
    }
    if let Some(l) = cfg.grid.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::argument(alloc::format!("grid value {l} is not a finite λ ≥ 0")));
    }
    let needs_features = cfg.grid.iter().any(|&l| l > 0.0);
    if needs_features && x.p() == 0 {
        return Err(Error::argument("λ > 0 in the grid but there are no features"));
    }
    if cfg.repeats == 0 {
        return Err(Error::argument("need at least one repeat"));
    }
    if !(cfg.fraction > 0.0 && cfg.fraction < 1.0) {
        return Err(Error::argument("validation fraction must lie in (0, 1)"));
    }
    if n < 10 {
        return Err(Error::argument(alloc::format!("cross-validation needs at least 10 nodes, got {n}")));
    }
    let n_val = round(cfg.fraction * n as f64) as usize;
    if n_val == 0 || n - n_val < 3 {
        return Err(Error::argument("validation split leaves an empty validation or too small training set"));
    }
    bandwidth(n - n_val, cfg.c0)?;

    let q = cfg.grid.len();
    let mut losses = vec![vec![0.0; cfg.repeats]; q];
    for m in 0..cfg.repeats {
        let mut rng = stream(cfg.seed, Purpose::CrossValidation, 2 * m as u64);
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.partial_shuffle(&mut rng, n_val);
        let mut val = nodes[..n_val].to_vec();
        let mut train = nodes[n_val..].to_vec();
        val.sort_unstable();
        train.sort_unstable();

        let a_t = a.induced(&train);
        let x_t = x.select_rows(&train);
        let tie = TieBreakConfig::on(derive_seed(cfg.seed, Purpose::CrossValidation, 2 * m as u64 + 1));
        let d0 = d0_hat(&a_t, tie)?;
        let s = if needs_features { s_hat(&x_t)? } else { SquaredDissimilarityMatrix::zeros(train.len()) };
        let proxies: Vec<usize> = val.iter().map(|&v| nearest_row(&x_t, x.row(v))).collect();

        for (qi, &lambda) in cfg.grid.iter().enumerate() {
            let p_t = estimate_from_dissimilarity(&a_t, &combine(&d0, &s, lambda)?, cfg.c0)?;
            let mut total = 0.0;
            for (&v, &proxy) in val.iter().zip(&proxies) {
                let row = p_t.row(proxy);
                total += train.iter().zip(row).map(|(&t, &p)| (a.get(v, t) as f64 - p).abs()).sum::<f64>();
            }
            losses[qi][m] = total / (val.len() * train.len()) as f64;
        }
    }
    let mean_losses: Vec<f64> = losses.iter().map(|l| l.iter().sum::<f64>() / cfg.repeats as f64).collect();
    let best = (0..q)
        .min_by(|&i, &j| mean_losses[i].total_cmp(&mean_losses[j]).then(cfg.grid[i].total_cmp(&cfg.grid[j])))
        .unwrap_or(0);
    Ok(CvResult { lambda_opt: cfg.grid[best], losses, mean_losses })
}

/// Merge sort on `v`, returning the number of inversions.
fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let len = v.len();
    if len < 2 {
        return 0;
    }
    let mid = len / 2;
    let mut swaps = count_inversions(&mut v[..mid], &mut buf[..mid]) + count_inversions(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < len {
        if v[j].total_cmp(&v[i]).is_lt() {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + len - j].copy_from_slice(&v[j..len]);
    v.copy_from_slice(&buf[..len]);
    swaps
}

/// Sum of `t(t−1)/2` over runs of equal consecutive values.
fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for x in sorted {
        if prev.as_ref() == Some(&x) {
            run += 1;
        } else {
            total += run * run.saturating_sub(1) / 2;
            run = 1;
        }
        prev = Some(x);
    }
    total + run * run.saturating_sub(1) / 2
}

/// Kendall's τ-b in `O(m log m)` (Knight's algorithm).
///
/// Returns `Ok(None)` when either sequence is constant, where the coefficient
/// is undefined.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    let m = x.len();
    if m != y.len() {
        return Err(Error::argument("kendall_tau: sequences differ in length"));
    }
    if m < 2 {
        return Err(Error::argument("kendall_tau: need at least two observations"));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let n0 = (m as u64) * (m as u64 - 1) / 2;
    let tied_x = tied_pairs(idx.iter().map(|&i| x[i].to_bits()));
    let tied_xy = tied_pairs(idx.iter().map(|&i| (x[i].to_bits(), y[i].to_bits())));
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; m];
    let swaps = count_inversions(&mut ys, &mut buf);
    let tied_y = tied_pairs(ys.iter().map(|v| v.to_bits()));
    if tied_x == n0 || tied_y == n0 {
        return Ok(None);
    }
    let numer = n0 as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let denom = sqrt((n0 - tied_x) as f64) * sqrt((n0 - tied_y) as f64);
    Ok(Some((numer / denom).clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenConfig {
    /// Features with τ at or above this value are kept.
    pub threshold: f64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self { threshold: 0.03 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenResult {
    pub kept: Vec<usize>,
    /// τ per feature column; `None` where it is undefined.
    pub taus: Vec<Option<f64>>,
}

fn upper_sqrt(d: &SquaredDissimilarityMatrix) -> Vec<f64> {
    let n = d.n();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| sqrt(d.get(i, j))).collect()
}

/// Kendall-τ screening of each feature column against the untied adjacency dissimilarity.
pub fn screen_features(a: &AdjacencyMatrix, x: &FeatureMatrix, cfg: &ScreenConfig) -> Result<ScreenResult> {
    if !(-1.0..=1.0).contains(&cfg.threshold) {
        return Err(Error::argument("screening threshold must lie in [-1, 1]"));
    }
    if x.n() != a.n() {
        return Err(Error::argument("feature matrix and graph differ in size"));
    }
    if x.p() == 0 {
        return Err(Error::argument("no feature columns to screen"));
    }
    let d = upper_sqrt(&d0_hat(a, TieBreakConfig::OFF)?);
    let mut taus = Vec::with_capacity(x.p());
    for j in 0..x.p() {
        let s = upper_sqrt(&s_hat(&x.select_columns(&[j]))?);
        taus.push(kendall_tau(&d, &s)?);
    }
    let kept = taus
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Some(t) if *t >= cfg.threshold))
        .map(|(j, _)| j)
        .collect();
    Ok(ScreenResult { kept, taus })
}

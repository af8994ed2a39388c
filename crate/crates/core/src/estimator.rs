//! Neighborhood smoothing.
//!
//! Each node `i` gets the neighborhood of nodes whose squared dissimilarity to
//! `i` is at most the `k`-th smallest value in row `i`, `k = ⌈h(n−1)⌉`,
//! `h = C₀ √(ln n / n)`. The estimate averages adjacency rows over the
//! neighborhoods of both endpoints:
//!
//! `P̂_ij = ½ (Σ_{i'∈N_i} A_i'j / |N_i| + Σ_{j'∈N_j} A_ij' / |N_j|)`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, log, sqrt};

use crate::dissimilarity::{combine, d0_hat, s_hat, TieBreakConfig};
use crate::error::{Error, Result};
use crate::matrix::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix, SquaredDissimilarityMatrix};

/// Settings for one FANS fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Weight of the feature dissimilarity.
    pub lambda: f64,
    /// Neighborhood scale; `h = C₀ √(ln n / n)`.
    pub c0: f64,
    pub tie_correction: bool,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { lambda: 0.0, c0: 1.0, tie_correction: true, seed: 0 }
    }
}

impl EstimatorConfig {
    pub fn tie(&self) -> TieBreakConfig {
        TieBreakConfig { enabled: self.tie_correction, seed: self.seed }
    }
}

/// Quantile bandwidth `h = C₀ √(ln n / n)`; errors when `h ∉ (0, 1]`.
pub fn bandwidth(n: usize, c0: f64) -> Result<f64> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::argument(alloc::format!("C₀ must be positive, got {c0}")));
    }
    if n < 3 {
        return Err(Error::argument(alloc::format!("need at least 3 nodes, got {n}")));
    }
    let h = c0 * sqrt(log(n as f64) / n as f64);
    if h > 1.0 {
        let min_n = (3..10_000_000usize).find(|&m| c0 * sqrt(log(m as f64) / m as f64) <= 1.0);
        return Err(Error::argument(match min_n {
            Some(m) => alloc::format!("h = {h:.4} > 1 at n = {n}; C₀ = {c0} needs n ≥ {m}"),
            None => alloc::format!("h = {h:.4} > 1 at n = {n}; C₀ = {c0} is too large"),
        }));
    }
    Ok(h)
}

/// Order-statistic rank `k = ⌈h(n−1)⌉` used for the neighborhood threshold.
pub fn neighborhood_rank(n: usize, h: f64) -> usize {
    (ceil(h * (n - 1) as f64) as usize).clamp(1, n - 1)
}

/// Per-node neighborhoods and their thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSet {
    members: Vec<Vec<usize>>,
    thresholds: Vec<f64>,
}

impl NeighborhoodSet {
    /// Builds a set from explicit member lists (sorted, `i ∉ N_i`).
    pub fn from_members(members: Vec<Vec<usize>>) -> Result<Self> {
        let n = members.len();
        for (i, m) in members.iter().enumerate() {
            if m.is_empty() {
                return Err(Error::argument(alloc::format!("neighborhood of node {i} is empty")));
            }
            if m.iter().any(|&j| j == i || j >= n) {
                return Err(Error::argument(alloc::format!("neighborhood of node {i} is invalid")));
            }
        }
        let members = members
            .into_iter()
            .map(|mut m| {
                m.sort_unstable();
                m.dedup();
                m
            })
            .collect();
        Ok(Self { members, thresholds: vec![f64::NAN; n] })
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, i: usize) -> &[usize] {
        &self.members[i]
    }

    pub fn threshold(&self, i: usize) -> f64 {
        self.thresholds[i]
    }
}

/// Neighborhood of one node from its dissimilarity row (entry `i` ignored).
pub(crate) fn neighborhood_of(row: &[f64], i: usize, k: usize, scratch: &mut Vec<f64>) -> (Vec<usize>, f64) {
    scratch.clear();
    scratch.extend(row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
    let (_, q, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    let q = *q;
    let members = row.iter().enumerate().filter(|&(j, &v)| j != i && v <= q).map(|(j, _)| j).collect();
    (members, q)
}

/// Quantile neighborhoods for every node.
pub fn neighborhoods(dsq: &SquaredDissimilarityMatrix, c0: f64) -> Result<NeighborhoodSet> {
    let n = dsq.n();
    let k = neighborhood_rank(n, bandwidth(n, c0)?);
    let mut scratch = Vec::with_capacity(n);
    let (members, thresholds) = (0..n).map(|i| neighborhood_of(dsq.row(i), i, k, &mut scratch)).unzip();
    Ok(NeighborhoodSet { members, thresholds })
}

/// Symmetric neighborhood average of the adjacency matrix.
pub fn smooth(a: &AdjacencyMatrix, nbhd: &NeighborhoodSet) -> Result<ProbabilityMatrix> {
    let n = a.n();
    if nbhd.n() != n {
        return Err(Error::argument("neighborhood set and graph differ in size"));
    }
    if let Some(i) = (0..n).find(|&i| nbhd.members(i).is_empty()) {
        return Err(Error::argument(alloc::format!("neighborhood of node {i} is empty")));
    }
    // counts[i][j] = Σ_{i'∈N_i} A_i'j
    let mut counts = vec![0u32; n * n];
    for i in 0..n {
        let acc = &mut counts[i * n..(i + 1) * n];
        for &m in nbhd.members(i) {
            for (c, &v) in acc.iter_mut().zip(a.row(m)) {
                *c += v as u32;
            }
        }
    }
    Ok(ProbabilityMatrix::from_upper(n, |i, j| {
        mean_of_rates(counts[i * n + j], nbhd.members(i).len(), counts[j * n + i], nbhd.members(j).len())
    }))
}

/// `½ (ci/ni + cj/nj)` as one correctly rounded division of exact integers,
/// so that equal rationals always produce the same `f64`.
pub(crate) fn mean_of_rates(ci: u32, ni: usize, cj: u32, nj: usize) -> f64 {
    let num = u64::from(ci) * nj as u64 + u64::from(cj) * ni as u64;
    let den = 2 * ni as u64 * nj as u64;
    num as f64 / den as f64
}

/// Smoothing for an already combined dissimilarity.
pub fn estimate_from_dissimilarity(
    a: &AdjacencyMatrix,
    dsq: &SquaredDissimilarityMatrix,
    c0: f64,
) -> Result<ProbabilityMatrix> {
    if dsq.n() != a.n() {
        return Err(Error::argument("dissimilarity matrix and graph differ in size"));
    }
    smooth(a, &neighborhoods(dsq, c0)?)
}

/// Feature-assisted neighborhood smoothing.
pub fn fans_estimate(a: &AdjacencyMatrix, x: Option<&FeatureMatrix>, cfg: &EstimatorConfig) -> Result<ProbabilityMatrix> {
    let n = a.n();
    if let Some(x) = x {
        if x.n() != n {
            return Err(Error::argument(alloc::format!("feature matrix has {} rows, graph has {n} nodes", x.n())));
        }
    }
    if cfg.lambda > 0.0 && x.is_none() {
        return Err(Error::argument("λ > 0 requires node features"));
    }
    bandwidth(n, cfg.c0)?;
    let d0 = d0_hat(a, cfg.tie())?;
    let d = match x {
        Some(x) if cfg.lambda > 0.0 => combine(&d0, &s_hat(x)?, cfg.lambda)?,
        _ => combine(&d0, &SquaredDissimilarityMatrix::zeros(n), cfg.lambda)?,
    };
    estimate_from_dissimilarity(a, &d, cfg.c0)
}

/// Neighborhood smoothing without features or tie correction.
pub fn nbs_estimate(a: &AdjacencyMatrix, c0: f64) -> Result<ProbabilityMatrix> {
    let cfg = EstimatorConfig { lambda: 0.0, c0, tie_correction: false, seed: 0 };
    fans_estimate(a, None, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_bounds() {
        assert!(bandwidth(100, 1.0).unwrap() < 1.0);
        let err = bandwidth(10, 5.0).unwrap_err();
        assert!(alloc::format!("{err}").contains("needs n ≥"));
        assert!(bandwidth(10, 0.0).is_err());
        assert!(bandwidth(2, 1.0).is_err());
    }

    #[test]
    fn single_nearest_neighbor() {
        // n = 4 with C₀ small enough that k = 1.
        let d = SquaredDissimilarityMatrix::new(
            4,
            vec![0.0, 0.1, 0.2, 0.3, 0.1, 0.0, 0.4, 0.5, 0.2, 0.4, 0.0, 0.6, 0.3, 0.5, 0.6, 0.0],
        )
        .unwrap();
        let c0 = 0.2;
        assert_eq!(neighborhood_rank(4, bandwidth(4, c0).unwrap()), 1);
        let nb = neighborhoods(&d, c0).unwrap();
        assert_eq!(nb.members(0), &[1]);
        assert_eq!(nb.members(3), &[0]);
        assert_eq!(nb.threshold(0), 0.1);
    }

    #[test]
    fn equal_dissimilarities_take_everyone() {
        let n = 6;
        let mut data = vec![0.25; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        let nb = neighborhoods(&SquaredDissimilarityMatrix::new(n, data).unwrap(), 1.0).unwrap();
        for i in 0..n {
            assert_eq!(nb.members(i).len(), n - 1);
        }
    }

    #[test]
    fn smooth_extremes() {
        let n = 20;
        let zero = AdjacencyMatrix::empty(n);
        let nb = neighborhoods(&d0_hat(&zero, TieBreakConfig::OFF).unwrap(), 1.0).unwrap();
        assert!(smooth(&zero, &nb).unwrap().as_slice().iter().all(|&v| v == 0.0));
        let full = AdjacencyMatrix::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap();
        let nb = neighborhoods(&d0_hat(&full, TieBreakConfig::on(1)).unwrap(), 1.0).unwrap();
        let min = (0..n).map(|i| nb.members(i).len()).min().unwrap() as f64;
        let p = smooth(&full, &nb).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = p.get(i, j);
                    assert!(v >= 1.0 - 2.0 / min && v <= 1.0);
                }
            }
        }
    }

    #[test]
    fn smooth_cycle_by_hand() {
        // 4-cycle 0-1-2-3-0; N_0 = {2}, N_1 = {3}, N_2 = {0, 1}, N_3 = {1}.
        let a = AdjacencyMatrix::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let nb = NeighborhoodSet::from_members(vec![vec![2], vec![3], vec![0, 1], vec![1]]).unwrap();
        let p = smooth(&a, &nb).unwrap();
        // P_01 = ½(A_21 / 1 + (A_03) / 1) = ½(1 + 1)
        assert_eq!(p.get(0, 1), 1.0);
        // P_02 = ½(A_22 + (A_00 + A_01)/2) = ½(0 + ½)
        assert_eq!(p.get(0, 2), 0.25);
        // P_23 = ½((A_03 + A_13)/2 + A_21) = ½(½ + 1)
        assert_eq!(p.get(2, 3), 0.75);
        // P_00 = ½(A_20 + A_02) = 0
        assert_eq!(p.get(0, 0), 0.0);
        assert!(NeighborhoodSet::from_members(vec![vec![], vec![0]]).is_err());
        assert!(NeighborhoodSet::from_members(vec![vec![0], vec![0]]).is_err());
    }

    #[test]
    fn lambda_needs_features() {
        let a = AdjacencyMatrix::empty(10);
        let cfg = EstimatorConfig { lambda: 0.5, ..Default::default() };
        assert!(fans_estimate(&a, None, &cfg).is_err());
    }

    #[test]
    fn nbs_matches_untied_fans() {
        let a = AdjacencyMatrix::from_edges(12, (0..11).map(|i| (i, i + 1)).chain([(0, 5), (3, 9)])).unwrap();
        let cfg = EstimatorConfig { lambda: 0.0, c0: 1.0, tie_correction: false, seed: 3 };
        assert_eq!(nbs_estimate(&a, 1.0).unwrap(), fans_estimate(&a, None, &cfg).unwrap());
    }
}

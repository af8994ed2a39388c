//! Error metrics, paired t-tests, leave-one-out link prediction and ROC/AUC.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use rand::seq::index::sample;

use crate::dissimilarity::{combine, d0_mod, max_abs_diff_i32, s_hat};
use crate::error::{Error, Result};
use crate::estimator::{
    bandwidth, estimate_from_dissimilarity, mean_of_rates, neighborhood_of, neighborhood_rank, EstimatorConfig,
};
use crate::matrix::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix, SquaredDissimilarityMatrix};
use crate::rng::{stream, Purpose};
use crate::special::student_t_cdf;

/// Mean squared and mean absolute error over all `n²` entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub mae: f64,
}

pub fn mse_mae(estimate: &ProbabilityMatrix, truth: &ProbabilityMatrix) -> Result<ErrorMetrics> {
    if estimate.n() != truth.n() {
        return Err(Error::argument("matrices differ in size"));
    }
    let nn = (truth.n() * truth.n()) as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (a, b) in estimate.as_slice().iter().zip(truth.as_slice()) {
        let d = a - b;
        se += d * d;
        ae += d.abs();
    }
    Ok(ErrorMetrics { mse: se / nn, mae: ae / nn })
}

/// One method's error on one simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub method: String,
    pub n: usize,
    pub seed: u64,
    pub mse: f64,
    pub mae: f64,
}

impl MetricReport {
    pub fn new(method: impl Into<String>, seed: u64, estimate: &ProbabilityMatrix, truth: &ProbabilityMatrix) -> Result<Self> {
        let m = mse_mae(estimate, truth)?;
        Ok(Self { method: method.into(), n: truth.n(), seed, mse: m.mse, mae: m.mae })
    }
}

/// One-sided paired t-test of `mean(a) < mean(b)`; returns the p-value.
///
/// With zero-variance differences the p-value is 0, 1 or ½ according to the
/// sign of the mean difference.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = a.len();
    if m != b.len() {
        return Err(Error::argument("paired samples differ in length"));
    }
    if m < 2 {
        return Err(Error::argument("paired t-test needs at least two pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / m as f64;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    if var == 0.0 {
        return Ok(if mean < 0.0 {
            0.0
        } else if mean > 0.0 {
            1.0
        } else {
            0.5
        });
    }
    let t = mean / sqrt(var / m as f64);
    Ok(student_t_cdf(t, (m - 1) as f64))
}

/// ROC curve with its area.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC curve over distinct score thresholds; AUC is the Mann–Whitney
/// statistic with ties counted as ½.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::argument("scores and labels differ in length"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::argument("ROC needs both positive and negative labels"));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    // Σ over tied groups of (negatives already passed + ½ negatives in group) × positives in group
    let mut wins = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let s = scores[idx[k]];
        let (mut gp, mut gn) = (0usize, 0usize);
        while k < idx.len() && scores[idx[k]].total_cmp(&s).is_eq() {
            if labels[idx[k]] {
                gp += 1;
            } else {
                gn += 1;
            }
            k += 1;
        }
        // Positives in this group beat every negative below it.
        wins += gp as f64 * (neg - fp - gn) as f64 + 0.5 * (gp * gn) as f64;
        tp += gp;
        fp += gn;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(RocCurve { points, auc: wins / (pos * neg) as f64 })
}

/// Which node pairs a leave-one-out run scores.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSelection {
    /// Every unordered off-diagonal pair.
    All,
    Explicit(Vec<(usize, usize)>),
    /// `count` pairs: all observed edges plus random non-edges when the edges
    /// fit, otherwise a uniform sample of all pairs.
    Sample { count: usize },
}

impl Default for PairSelection {
    fn default() -> Self {
        PairSelection::Sample { count: 2000 }
    }
}

/// How neighborhoods are formed for the masked pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LooMode {
    /// For each pair `(i, j)`, the dissimilarity rows of `i` and `j` are
    /// recomputed with coordinates `i, j` left out of every inner product, so
    /// the score does not depend on `A_ij` at all.
    #[default]
    Exact,
    /// One modified dissimilarity matrix is shared by all pairs. Only its
    /// `(i, j)` entry is free of `A_ij`; neighborhoods may still see it.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkScore {
    pub i: usize,
    pub j: usize,
    pub score: f64,
    pub edge: bool,
}

fn select_pairs(a: &AdjacencyMatrix, sel: &PairSelection, seed: u64) -> Result<Vec<(usize, usize)>> {
    let n = a.n();
    let total = n * (n - 1) / 2;
    let unrank = |r: usize| {
        // r-th pair in (j, i), i < j order.
        let j = ((1.0 + sqrt(1.0 + 8.0 * r as f64)) / 2.0) as usize;
        let j = if j * (j - 1) / 2 > r { j - 1 } else if (j + 1) * j / 2 <= r { j + 1 } else { j };
        (r - j * (j - 1) / 2, j)
    };
    Ok(match sel {
        PairSelection::All => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        PairSelection::Explicit(p) => {
            for &(i, j) in p {
                if i == j {
                    return Err(Error::argument(alloc::format!("pair ({i}, {j}) is on the diagonal")));
                }
                if i >= n || j >= n {
                    return Err(Error::argument(alloc::format!("pair ({i}, {j}) out of range")));
                }
            }
            p.clone()
        }
        PairSelection::Sample { count } if *count >= total => select_pairs(a, &PairSelection::All, seed)?,
        PairSelection::Sample { count } => {
            let mut rng = stream(seed, Purpose::PairSample, 0);
            let edges: Vec<(usize, usize)> = a.edges().collect();
            if edges.len() <= *count {
                let non_edges = total - edges.len();
                let want = (*count - edges.len()).min(non_edges);
                let picks = sample(&mut rng, non_edges, want).into_vec();
                let mut marks = vec![false; non_edges];
                for p in picks {
                    marks[p] = true;
                }
                let mut out = edges;
                let mut r = 0;
                for j in 1..n {
                    for i in 0..j {
                        if a.get(i, j) == 0 {
                            if marks[r] {
                                out.push((i, j));
                            }
                            r += 1;
                        }
                    }
                }
                out
            } else {
                sample(&mut rng, total, *count).into_iter().map(unrank).collect()
            }
        }
    })
}

/// Leave-one-out link prediction scores.
pub fn loo_link_predict(
    a: &AdjacencyMatrix,
    x: Option<&FeatureMatrix>,
    cfg: &EstimatorConfig,
    pairs: &PairSelection,
    mode: LooMode,
) -> Result<Vec<LinkScore>> {
    let n = a.n();
    if n < 4 {
        return Err(Error::argument("link prediction needs at least 4 nodes"));
    }
    if cfg.lambda > 0.0 && x.is_none() {
        return Err(Error::argument("λ > 0 requires node features"));
    }
    if let Some(x) = x {
        if x.n() != n {
            return Err(Error::argument("feature matrix and graph differ in size"));
        }
    }
    let pairs = select_pairs(a, pairs, cfg.seed)?;
    let k = neighborhood_rank(n, bandwidth(n, cfg.c0)?);
    let feat = match x {
        Some(x) if cfg.lambda > 0.0 => s_hat(x)?,
        _ => SquaredDissimilarityMatrix::zeros(n),
    };
    let score = |i: usize, j: usize, s: f64| LinkScore { i, j, score: s, edge: a.get(i, j) == 1 };

    if mode == LooMode::Shared {
        let d = combine(&d0_mod(a, cfg.tie())?, &feat, cfg.lambda)?;
        let p = estimate_from_dissimilarity(a, &d, cfg.c0)?;
        return Ok(pairs.into_iter().map(|(i, j)| score(i, j, p.get(i, j))).collect());
    }

    let g = a.gram();
    let rows: Vec<Vec<i32>> = (0..n).map(|i| a.row(i).iter().map(|&v| v as i32).collect()).collect();
    let tie = cfg.tie();
    let nf = n as f64;
    let ties: Vec<f64> = if tie.enabled {
        let mut t = vec![0.0; n * n];
        for p in 0..n {
            for q in p + 1..n {
                let v = tie.draw(p, q);
                t[p * n + q] = v;
                t[q * n + p] = v;
            }
        }
        t
    } else {
        Vec::new()
    };
    let mut left = vec![0i32; n];
    let mut right = vec![0i32; n];
    let mut row = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    // Neighborhood of `node` with columns `i` and `j` dropped from every inner product.
    let mut masked_neighborhood = |node: usize, i: usize, j: usize| -> Vec<usize> {
        for b in 0..n {
            if b == node {
                row[b] = 0.0;
                continue;
            }
            let (ci, cj) = (rows[node][i] - rows[b][i], rows[node][j] - rows[b][j]);
            for kk in 0..n {
                left[kk] = g[node * n + kk] - ci * rows[kk][i] - cj * rows[kk][j];
                right[kk] = g[b * n + kk];
            }
            let m = max_abs_diff_i32(&left, &right, node, b);
            let d0 = if tie.enabled { (m as f64 + ties[node * n + b] / nf) / nf } else { m as f64 / nf };
            row[b] = if cfg.lambda > 0.0 { d0 + cfg.lambda * feat.get(node, b) } else { d0 };
        }
        neighborhood_of(&row, node, k, &mut scratch).0
    };
    let mut out = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let ni = masked_neighborhood(i, i, j);
        let nj = masked_neighborhood(j, i, j);
        let ci = ni.iter().map(|&m| a.get(m, j) as u32).sum::<u32>();
        let cj = nj.iter().map(|&m| a.get(i, m) as u32).sum::<u32>();
        out.push(score(i, j, mean_of_rates(ci, ni.len(), cj, nj.len())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_by_hand() {
        let p = ProbabilityMatrix::new(2, vec![0.1, 0.2, 0.2, 0.3]).unwrap();
        assert_eq!(mse_mae(&p, &p).unwrap(), ErrorMetrics { mse: 0.0, mae: 0.0 });
        let q = ProbabilityMatrix::new(2, vec![0.1, 0.4, 0.4, 0.3]).unwrap();
        let m = mse_mae(&q, &p).unwrap();
        assert!((m.mse - 0.02).abs() < 1e-15 && (m.mae - 0.1).abs() < 1e-15);
        let r = ProbabilityMatrix::new(2, vec![0.2, 0.3, 0.3, 0.4]).unwrap();
        let m = mse_mae(&r, &p).unwrap();
        assert!((m.mse - 0.01).abs() < 1e-15 && (m.mae - 0.1).abs() < 1e-15);
        assert!(mse_mae(&p, &ProbabilityMatrix::constant(3, 0.1).unwrap()).is_err());
    }

    #[test]
    fn t_test_cases() {
        assert_eq!(paired_t_test(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(paired_t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(paired_t_test(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        // scipy.stats.ttest_rel(a, b, alternative='less')
        let a = [0.1, 0.25, 0.3, 0.2, 0.15];
        let b = [0.2, 0.2, 0.4, 0.35, 0.3];
        assert!((paired_t_test(&a, &b).unwrap() - 0.03524199845510997).abs() < 1e-12);
        let far_a: Vec<f64> = (0..30).map(|i| 0.001 * (i % 3) as f64).collect();
        let far_b: Vec<f64> = (0..30).map(|i| 1.0 + 0.001 * (i % 5) as f64).collect();
        assert!(paired_t_test(&far_a, &far_b).unwrap() < 1e-6);
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn auc_hand_value() {
        let r = roc_auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
        assert_eq!(r.auc, 0.75);
        assert_eq!(*r.points.first().unwrap(), (0.0, 0.0));
        assert_eq!(*r.points.last().unwrap(), (1.0, 1.0));
        let sep = roc_auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap();
        assert_eq!(sep.auc, 1.0);
        let tied = roc_auc(&[0.5, 0.5], &[false, true]).unwrap();
        assert_eq!(tied.auc, 0.5);
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn pair_selection() {
        let a = AdjacencyMatrix::from_edges(10, [(0, 1), (2, 3), (4, 9)]).unwrap();
        let all = select_pairs(&a, &PairSelection::All, 0).unwrap();
        assert_eq!(all.len(), 45);
        let s = select_pairs(&a, &PairSelection::Sample { count: 10 }, 1).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.contains(&(0, 1)) && s.contains(&(2, 3)) && s.contains(&(4, 9)));
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 10);
        let dense = AdjacencyMatrix::from_edges(10, (0..9).map(|i| (i, i + 1))).unwrap();
        let s = select_pairs(&dense, &PairSelection::Sample { count: 5 }, 1).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|&(i, j)| i < j && j < 10));
        assert!(select_pairs(&a, &PairSelection::Explicit(vec![(2, 2)]), 0).is_err());
    }
}

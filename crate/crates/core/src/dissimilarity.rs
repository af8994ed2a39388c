//! Squared node dissimilarities.
//!
//! * adjacency part: `max_{k≠i,j} |⟨A_i· − A_j·, A_k·⟩| / n`, optionally with a
//!   per-pair uniform perturbation that breaks ties between pairs;
//! * feature part: `max_{k≠i,j} |⟨X_i − X_j, X_k⟩| / p`;
//! * their combination `d0² + λ s²`.
//!
//! Inner products come from the Gram matrices `A Aᵀ` and `X Xᵀ`, so each
//! entry is a max over one difference of two Gram rows.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{AdjacencyMatrix, FeatureMatrix, SquaredDissimilarityMatrix};
use crate::rng::{pair_index, stream, Purpose};

/// Whether to perturb adjacency dissimilarities, and with which seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TieBreakConfig {
    pub enabled: bool,
    pub seed: u64,
}

impl TieBreakConfig {
    pub const OFF: TieBreakConfig = TieBreakConfig { enabled: false, seed: 0 };

    pub fn on(seed: u64) -> Self {
        Self { enabled: true, seed }
    }

    /// The perturbation `t ∈ (0, 1)` for the unordered pair `{i, j}`.
    pub fn draw(&self, i: usize, j: usize) -> f64 {
        stream(self.seed, Purpose::TieBreak, pair_index(i, j)).sample(Open01)
    }

    /// Scales an integer max `m` into a squared dissimilarity on `n` nodes.
    #[inline]
    pub(crate) fn finish(&self, m: i32, i: usize, j: usize, n: usize) -> f64 {
        let nf = n as f64;
        if self.enabled {
            (m as f64 + self.draw(i, j) / nf) / nf
        } else {
            m as f64 / nf
        }
    }
}

fn require_three(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::argument(alloc::format!("need at least 3 nodes, got {n}")))
    } else {
        Ok(())
    }
}

/// `max_{k ∉ {i, j}} |a_k − b_k|`.
#[inline]
pub(crate) fn max_abs_diff_i32(a: &[i32], b: &[i32], i: usize, j: usize) -> i32 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let span = |r: core::ops::Range<usize>| a[r.clone()].iter().zip(&b[r]).map(|(x, y)| (x - y).abs()).max().unwrap_or(0);
    span(0..lo).max(span(lo + 1..hi)).max(span(hi + 1..a.len()))
}

#[inline]
fn max_abs_diff_f64(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let span =
        |r: core::ops::Range<usize>| a[r.clone()].iter().zip(&b[r]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    span(0..lo).max(span(lo + 1..hi)).max(span(hi + 1..a.len()))
}

/// Adjacency-based squared dissimilarity, tie-corrected when `tie.enabled`.
pub fn d0_hat(a: &AdjacencyMatrix, tie: TieBreakConfig) -> Result<SquaredDissimilarityMatrix> {
    let n = a.n();
    require_three(n)?;
    let g = a.gram();
    Ok(SquaredDissimilarityMatrix::from_upper(n, |i, j| {
        let m = max_abs_diff_i32(&g[i * n..(i + 1) * n], &g[j * n..(j + 1) * n], i, j);
        tie.finish(m, i, j, n)
    }))
}

/// Like [`d0_hat`], but every inner product behind entry `(i, j)` skips
/// coordinates `i` and `j`, so that entry does not depend on `A_ij`.
pub fn d0_mod(a: &AdjacencyMatrix, tie: TieBreakConfig) -> Result<SquaredDissimilarityMatrix> {
    let n = a.n();
    require_three(n)?;
    let g = a.gram();
    let rows: Vec<Vec<i32>> = (0..n).map(|i| a.row(i).iter().map(|&v| v as i32).collect()).collect();
    let mut ri = alloc::vec![0i32; n];
    let mut rj = alloc::vec![0i32; n];
    Ok(SquaredDissimilarityMatrix::from_upper(n, |i, j| {
        let (gi, gj) = (&g[i * n..(i + 1) * n], &g[j * n..(j + 1) * n]);
        // Σ_{m∉{i,j}} (A_im − A_jm) A_km = G_ik − G_jk + A_ij (A_ik − A_jk)
        let m = if a.get(i, j) == 1 {
            for k in 0..n {
                ri[k] = gi[k] + rows[i][k];
                rj[k] = gj[k] + rows[j][k];
            }
            max_abs_diff_i32(&ri, &rj, i, j)
        } else {
            max_abs_diff_i32(gi, gj, i, j)
        };
        tie.finish(m, i, j, n)
    }))
}

/// Feature-based squared dissimilarity.
pub fn s_hat(x: &FeatureMatrix) -> Result<SquaredDissimilarityMatrix> {
    let (n, p) = (x.n(), x.p());
    require_three(n)?;
    if p == 0 {
        return Err(Error::argument("need at least one feature column"));
    }
    let mut h = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
            h[i * n + j] = s;
            h[j * n + i] = s;
        }
    }
    let pf = p as f64;
    Ok(SquaredDissimilarityMatrix::from_upper(n, |i, j| {
        max_abs_diff_f64(&h[i * n..(i + 1) * n], &h[j * n..(j + 1) * n], i, j) / pf
    }))
}

/// Entrywise `d0sq + λ · ssq`.
pub fn combine(
    d0sq: &SquaredDissimilarityMatrix,
    ssq: &SquaredDissimilarityMatrix,
    lambda: f64,
) -> Result<SquaredDissimilarityMatrix> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::argument(alloc::format!("λ must be finite and ≥ 0, got {lambda}")));
    }
    if d0sq.n() != ssq.n() {
        return Err(Error::argument("dissimilarity matrices differ in size"));
    }
    if lambda == 0.0 {
        return Ok(d0sq.clone());
    }
    let s = ssq.as_slice();
    let n = d0sq.n();
    Ok(SquaredDissimilarityMatrix::from_upper(n, |i, j| d0sq.get(i, j) + lambda * s[i * n + j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cycle4() -> AdjacencyMatrix {
        AdjacencyMatrix::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn identical_rows_have_zero_distance() {
        // Nodes 0 and 2 of the 4-cycle share the neighbor set {1, 3}.
        let a = cycle4();
        let d = d0_hat(&a, TieBreakConfig::OFF).unwrap();
        assert_eq!(d.get(0, 2), 0.0);
        let dt = d0_hat(&a, TieBreakConfig::on(5)).unwrap();
        let v = dt.get(0, 2);
        assert!(v > 0.0 && v <= 1.0 / 16.0);
        assert_eq!(v, dt.get(2, 0));
    }

    #[test]
    fn cycle_graph_entry() {
        // ⟨A_0 − A_1, A_k⟩ for k = 2: (A_0 = 0101, A_1 = 1010, A_2 = 0101) → 2; k = 3 → −2.
        let d = d0_hat(&cycle4(), TieBreakConfig::OFF).unwrap();
        assert_eq!(d.get(0, 1), 2.0 / 4.0);
    }

    #[test]
    fn too_small_graph_rejected() {
        let a = AdjacencyMatrix::from_edges(2, [(0, 1)]).unwrap();
        assert!(d0_hat(&a, TieBreakConfig::OFF).is_err());
        assert!(d0_mod(&a, TieBreakConfig::OFF).is_err());
    }

    #[test]
    fn s_hat_hand_values() {
        let x = FeatureMatrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let s = s_hat(&x).unwrap();
        assert_eq!(s.get(0, 1), 2.0);
        let same = FeatureMatrix::new(3, 2, vec![1.0, 2.0, 1.0, 2.0, 5.0, 3.0]).unwrap();
        assert_eq!(s_hat(&same).unwrap().get(0, 1), 0.0);
        let scaled = s_hat(&x.scaled(3.0)).unwrap();
        for (a, b) in scaled.as_slice().iter().zip(s.as_slice()) {
            assert!((a - 9.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn combine_arithmetic() {
        let d = SquaredDissimilarityMatrix::new(2, vec![0.0, 0.1, 0.1, 0.0]).unwrap();
        let s = SquaredDissimilarityMatrix::new(2, vec![0.0, 0.3, 0.3, 0.0]).unwrap();
        assert_eq!(combine(&d, &s, 0.0).unwrap(), d);
        assert_eq!(combine(&d, &SquaredDissimilarityMatrix::zeros(2), 1.0).unwrap(), d);
        assert!((combine(&d, &s, 2.0).unwrap().get(0, 1) - 0.7).abs() < 1e-15);
        assert!(combine(&d, &s, -1.0).is_err());
        assert!(combine(&d, &SquaredDissimilarityMatrix::zeros(3), 1.0).is_err());
    }

    #[test]
    fn d0_mod_zero_graph() {
        let a = AdjacencyMatrix::empty(5);
        assert!(d0_mod(&a, TieBreakConfig::OFF).unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tie_draws_are_open_unit() {
        let t = TieBreakConfig::on(1);
        for i in 0..50 {
            for j in i + 1..50 {
                let v = t.draw(i, j);
                assert!(v > 0.0 && v < 1.0);
                assert_eq!(v, t.draw(j, i));
            }
        }
    }
}

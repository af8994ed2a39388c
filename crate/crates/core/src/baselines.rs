//! Reference estimators: universal singular value thresholding (USVT) and
//! degree sorting with a block histogram (SAS).

use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, floor, log, sqrt};
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::{AdjacencyMatrix, ProbabilityMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsvtConfig {
    /// Threshold slack: singular values below `(2 + η)√n` are dropped.
    pub eta: f64,
}

impl Default for UsvtConfig {
    fn default() -> Self {
        Self { eta: 0.01 }
    }
}

/// USVT on a graph.
pub fn usvt_estimate(a: &AdjacencyMatrix, cfg: &UsvtConfig) -> Result<ProbabilityMatrix> {
    let n = a.n();
    let data: Vec<f64> = a.as_slice().iter().map(|&v| v as f64).collect();
    usvt_denoise(n, &data, cfg)
}

/// USVT on any symmetric `n × n` matrix (row-major).
///
/// For a symmetric matrix the singular values are the absolute eigenvalues,
/// so the truncated SVD is the eigen-expansion restricted to `|λ| ≥ (2+η)√n`.
pub fn usvt_denoise(n: usize, data: &[f64], cfg: &UsvtConfig) -> Result<ProbabilityMatrix> {
    if n < 2 {
        return Err(Error::argument("USVT needs at least 2 nodes"));
    }
    if data.len() != n * n {
        return Err(Error::argument("matrix data length is not n*n"));
    }
    if !(cfg.eta > 0.0) {
        return Err(Error::argument("USVT slack η must be positive"));
    }
    let m = DMatrix::from_row_slice(n, n, data);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 1000 * n)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    let threshold = (2.0 + cfg.eta) * sqrt(n as f64);
    let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k].abs() >= threshold).collect();
    let mut recon = vec![0.0; n * n];
    for &k in &kept {
        let lam = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        for i in 0..n {
            let li = lam * v[i];
            for j in 0..n {
                recon[i * n + j] += li * v[j];
            }
        }
    }
    Ok(ProbabilityMatrix::from_upper(n, |i, j| (0.5 * (recon[i * n + j] + recon[j * n + i])).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SasConfig {
    pub bins: usize,
}

impl SasConfig {
    /// `k = ⌈n / h⌉` bins with bandwidth `h = ⌊ln n⌋`.
    pub fn for_n(n: usize) -> Self {
        let h = (floor(log(n.max(1) as f64)) as usize).max(1);
        Self { bins: (ceil(n as f64 / h as f64) as usize).clamp(1, n.max(1)) }
    }
}

/// Degree-sorted block histogram.
///
/// Nodes are ordered by degree (ties by index) and cut into `k` contiguous
/// bins of near-equal size; `P̂_ij` is the off-diagonal edge density between
/// the bins of `i` and `j`. A block without any off-diagonal pair (a singleton
/// bin against itself) takes the overall edge density.
pub fn sas_estimate(a: &AdjacencyMatrix, cfg: &SasConfig) -> Result<ProbabilityMatrix> {
    let n = a.n();
    if n < 2 {
        return Err(Error::argument("SAS needs at least 2 nodes"));
    }
    let k = cfg.bins;
    if k == 0 || k > n {
        return Err(Error::argument(alloc::format!("bin count {k} must lie in [1, {n}]")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (a.degree(i), i));
    let mut bin = vec![0usize; n];
    for (pos, &node) in order.iter().enumerate() {
        bin[node] = pos * k / n;
    }
    let mut edges = vec![0usize; k * k];
    let mut pairs = vec![0usize; k * k];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let cell = bin[i] * k + bin[j];
                edges[cell] += a.get(i, j) as usize;
                pairs[cell] += 1;
            }
        }
    }
    let density = (2 * a.edge_count()) as f64 / (n * (n - 1)) as f64;
    let hist: Vec<f64> = edges
        .iter()
        .zip(&pairs)
        .map(|(&e, &c)| if c == 0 { density } else { e as f64 / c as f64 })
        .collect();
    Ok(ProbabilityMatrix::from_upper(n, |i, j| hist[bin[i] * k + bin[j]]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> AdjacencyMatrix {
        AdjacencyMatrix::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn usvt_complete_graph() {
        let p = usvt_estimate(&complete(100), &UsvtConfig::default()).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                if i != j {
                    assert!(p.get(i, j) >= 0.9);
                }
            }
        }
    }

    #[test]
    fn usvt_zero_graph() {
        let p = usvt_estimate(&AdjacencyMatrix::empty(30), &UsvtConfig::default()).unwrap();
        assert!(p.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn usvt_recovers_noiseless_low_rank() {
        // Three equal blocks: eigenvalues 80, 50, 50 against a threshold of about 34.8.
        let n = 300;
        let data: Vec<f64> = (0..n * n)
            .map(|k| if (k / n) / 100 == (k % n) / 100 { 0.6 } else { 0.1 })
            .collect();
        let p = usvt_denoise(n, &data, &UsvtConfig::default()).unwrap();
        let mse: f64 = p.as_slice().iter().zip(&data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (n * n) as f64;
        assert!(mse <= 1e-6, "mse = {mse}");
    }

    #[test]
    fn sas_single_bin_is_density() {
        let a = AdjacencyMatrix::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let p = sas_estimate(&a, &SasConfig { bins: 1 }).unwrap();
        assert!(p.as_slice().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn sas_two_cliques() {
        let a = AdjacencyMatrix::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap();
        let p = sas_estimate(&a, &SasConfig { bins: 2 }).unwrap();
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(4, 5), 1.0);
        assert_eq!(p.get(0, 4), 0.0);
        assert_eq!(p.get(2, 2), 1.0);
    }

    #[test]
    fn sas_bins_for_n() {
        assert_eq!(SasConfig::for_n(200).bins, 40);
        assert_eq!(SasConfig::for_n(2).bins, 2);
        assert!(sas_estimate(&complete(4), &SasConfig { bins: 5 }).is_err());
    }
}

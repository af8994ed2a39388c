//! Dense square and rectangular matrices used across the crate.
//!
//! All storage is row-major. Constructors validate the invariants of each
//! type, so holders of a value can rely on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Symmetric 0/1 matrix with zero diagonal: a simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    data: Vec<u8>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self { n, data: vec![0; n * n] }
    }

    /// Builds a graph from undirected edges. Self-loops and duplicates are ignored.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut a = Self::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::argument(alloc::format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i != j {
                a.set(i, j, true);
            }
        }
        Ok(a)
    }

    /// Validates a row-major dense 0/1 matrix.
    pub fn from_dense(n: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::argument("adjacency data length is not n*n"));
        }
        for i in 0..n {
            if data[i * n + i] != 0 {
                return Err(Error::argument(alloc::format!("nonzero diagonal at node {i}")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if v > 1 {
                    return Err(Error::argument("adjacency entries must be 0 or 1"));
                }
                if v != data[j * n + i] {
                    return Err(Error::argument(alloc::format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    /// Sets both `(i, j)` and `(j, i)`. Panics on the diagonal.
    pub fn set(&mut self, i: usize, j: usize, edge: bool) {
        assert!(i != j, "cannot set a diagonal entry of a simple graph");
        let v = edge as u8;
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&v| v as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum::<usize>() / 2
    }

    /// Upper-triangle edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter(move |&j| self.get(i, j) == 1).map(move |j| (i, j))
        })
    }

    /// Induced subgraph on `nodes`, in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let m = nodes.len();
        let mut data = vec![0u8; m * m];
        for (a, &i) in nodes.iter().enumerate() {
            let row = self.row(i);
            for (b, &j) in nodes.iter().enumerate() {
                data[a * m + b] = row[j];
            }
        }
        Self { n: m, data }
    }

    /// Relabels nodes: node `perm[i]` of the output is node `i` of the input.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[perm[i] * self.n + perm[j]] = self.get(i, j);
            }
        }
        out
    }

    /// Gram matrix `A Aᵀ` as exact integer counts.
    pub(crate) fn gram(&self) -> Vec<i32> {
        let n = self.n;
        let mut g = vec![0i32; n * n];
        let rows: Vec<Vec<i32>> = (0..n).map(|i| self.row(i).iter().map(|&v| v as i32).collect()).collect();
        for i in 0..n {
            for j in i..n {
                let s: i32 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        g
    }
}

/// Symmetric matrix with entries in `[0, 1]`, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ProbabilityMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::argument("probability data length is not n*n"));
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::argument(alloc::format!("entry ({i}, {j}) = {v} outside [0, 1]")));
                }
                if v != data[j * n + i] {
                    return Err(Error::argument(alloc::format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Fills the upper triangle from `f` and mirrors it.
    pub(crate) fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(n, vec![value; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        Self { n, data }
    }
}

/// `n × p` node-feature matrix; row `i` holds the features of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::argument("feature data length is not n*p"));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::argument(alloc::format!(
                "non-finite feature at row {}, column {}",
                k / p.max(1),
                k % p.max(1)
            )));
        }
        Ok(Self { n, p, data })
    }

    /// Builds a matrix from columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::argument("feature columns have different lengths"));
        }
        let mut data = vec![0.0; n * p];
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                data[i * p + j] = v;
            }
        }
        Self::new(n, p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let p = cols.len();
        let mut data = Vec::with_capacity(self.n * p);
        for i in 0..self.n {
            data.extend(cols.iter().map(|&j| self.get(i, j)));
        }
        Self { n: self.n, p, data }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.p);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Self { n: rows.len(), p: self.p, data }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, p: self.p, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Row `i` of the input becomes row `perm[i]` of the output.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut data = vec![0.0; self.n * self.p];
        for i in 0..self.n {
            data[perm[i] * self.p..(perm[i] + 1) * self.p].copy_from_slice(self.row(i));
        }
        Self { n: self.n, p: self.p, data }
    }
}

/// Symmetric, nonnegative matrix of squared dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDissimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquaredDissimilarityMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Validating constructor for externally computed dissimilarities.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::argument("dissimilarity data length is not n*n"));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::argument("dissimilarity diagonal must be zero"));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::argument("dissimilarities must be finite and nonnegative"));
                }
                if v != data[j * n + i] {
                    return Err(Error::argument(alloc::format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub(crate) fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

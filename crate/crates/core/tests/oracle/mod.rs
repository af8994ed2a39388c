//! Nested-loop reference implementations, written straight from the
//! defining sums. They share no code with the library.

#![allow(dead_code)]

use fans_core::AdjacencyMatrix;

pub fn d0_tilde(a: &AdjacencyMatrix) -> Vec<f64> {
    let n = a.n();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut best = 0i64;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let mut s = 0i64;
                for m in 0..n {
                    s += (a.get(i, m) as i64 - a.get(j, m) as i64) * a.get(k, m) as i64;
                }
                best = best.max(s.abs());
            }
            out[i * n + j] = best as f64 / n as f64;
        }
    }
    out
}

/// Entry `(i, j)` with coordinates `i` and `j` removed from the inner products.
pub fn d0_modified(a: &AdjacencyMatrix) -> Vec<f64> {
    let n = a.n();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut best = 0i64;
            for k in (0..n).filter(|&k| k != i && k != j) {
                let s: i64 = (0..n)
                    .filter(|&m| m != i && m != j)
                    .map(|m| (a.get(i, m) as i64 - a.get(j, m) as i64) * a.get(k, m) as i64)
                    .sum();
                best = best.max(s.abs());
            }
            out[i * n + j] = best as f64 / n as f64;
        }
    }
    out
}

/// `x` is row-major `n × p`.
pub fn s_hat(x: &[f64], n: usize, p: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut best: f64 = 0.0;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let s: f64 = (0..p).map(|m| (x[i * p + m] - x[j * p + m]) * x[k * p + m]).sum();
                best = best.max(s.abs());
            }
            out[i * n + j] = best / p as f64;
        }
    }
    out
}

/// Neighborhoods by full sort of each row.
pub fn neighborhoods(d: &[f64], n: usize, c0: f64) -> Vec<Vec<usize>> {
    let h = c0 * ((n as f64).ln() / n as f64).sqrt();
    let k = ((h * (n - 1) as f64).ceil() as usize).max(1);
    (0..n)
        .map(|i| {
            let mut vals: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[i * n + j]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = vals[k - 1];
            (0..n).filter(|&j| j != i && d[i * n + j] <= q).collect()
        })
        .collect()
}

pub fn smooth(a: &AdjacencyMatrix, nb: &[Vec<usize>]) -> Vec<f64> {
    let n = a.n();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let left: u32 = nb[i].iter().map(|&m| a.get(m, j) as u32).sum();
            let right: u32 = nb[j].iter().map(|&m| a.get(i, m) as u32).sum();
            // ½ (left/|N_i| + right/|N_j|), correctly rounded from the exact fraction.
            let (ni, nj) = (nb[i].len() as u64, nb[j].len() as u64);
            out[i * n + j] = (left as u64 * nj + right as u64 * ni) as f64 / (2 * ni * nj) as f64;
        }
    }
    out
}

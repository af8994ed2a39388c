//! Graphon and node-feature models, and the samplers built on them.
//!
//! A network of `n` nodes is drawn in two steps: latent labels
//! `u_i ~ Uniform(0, 1)`, then independent edges `A_ij ~ Bernoulli(w(u_i, u_j))`
//! for `i < j`. Node features are `X_ij = f_j(u_i) / sd_j + e_ij` with
//! `e_ij ~ N(0, σ²)`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use libm::{cos, exp, fabs, floor, log, pow, sin};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix};
use crate::rng::{stream, Purpose};
use crate::special::normal_quantile;

/// Number of midpoint nodes used by [`sd_estimate`].
pub const SD_QUADRATURE_POINTS: usize = 1 << 15;

/// A symmetric function `w: [0,1]² → [0,1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum GraphonSpec {
    /// `(u + v) / 2`.
    UniformSum,
    /// Block model: `k/(K+1)` inside diagonal block `k`, `0.3/(K+1)` elsewhere.
    /// `blocks = None` means `⌊ln n⌋`, fixed by [`GraphonSpec::resolve_for`].
    Sbm {
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        blocks: Option<usize>,
    },
    /// `½ sin(5π(u+v−1) + 1) + ½`.
    Sine,
    /// `1 − [1 + exp(15 (0.8|u−v|)^{4/5} − 0.1)]⁻¹`.
    LogisticDistance,
    /// `⅓ (u²+v²) cos(1/(u²+v²)) + 0.15`, with value 0.15 at the origin.
    Oscillating,
    Constant { level: f64 },
    /// Block-constant graphon on the intervals between `breakpoints`;
    /// `values` is the row-major `K × K` table.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    /// A function registered in a [`Registry`].
    Custom { id: String },
}

/// Block count used for the block-model graphon at size `n`: `⌊ln n⌋`, at least 1.
pub fn sbm_blocks(n: usize) -> usize {
    (floor(log(n as f64)) as usize).max(1)
}

/// Index of the left-closed interval `[b_k, b_{k+1})` containing `u`; `u = 1`
/// falls in the last interval.
fn interval_of(u: f64, breakpoints: &[f64]) -> usize {
    let k = breakpoints.len() - 1;
    let idx = breakpoints.partition_point(|&b| b <= u);
    idx.saturating_sub(1).min(k - 1)
}

impl GraphonSpec {
    /// Fills in parameters that depend on the network size.
    pub fn resolve_for(&self, n: usize) -> GraphonSpec {
        match self {
            GraphonSpec::Sbm { blocks: None } => GraphonSpec::Sbm { blocks: Some(sbm_blocks(n)) },
            other => other.clone(),
        }
    }

    /// Checks structural invariants (and custom ids against `registry`).
    pub fn validate(&self, registry: &Registry) -> Result<()> {
        match self {
            GraphonSpec::Sbm { blocks: Some(0) } => Err(Error::config("block model needs at least one block")),
            GraphonSpec::Sbm { blocks: None } => {
                Err(Error::config("block count unresolved; call resolve_for(n) first"))
            }
            GraphonSpec::Constant { level } if !(0.0..=1.0).contains(level) => {
                Err(Error::config(format!("constant level {level} outside [0, 1]")))
            }
            GraphonSpec::PiecewiseConstant { breakpoints, values } => {
                let k = breakpoints.len().saturating_sub(1);
                if k == 0 || breakpoints[0] != 0.0 || breakpoints[k] != 1.0 {
                    return Err(Error::config("breakpoints must start at 0 and end at 1"));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::config("breakpoints must be strictly increasing"));
                }
                if values.len() != k * k {
                    return Err(Error::config(format!("value table must have {k}×{k} entries")));
                }
                for a in 0..k {
                    for b in 0..k {
                        let v = values[a * k + b];
                        if !(0.0..=1.0).contains(&v) {
                            return Err(Error::config("table values must lie in [0, 1]"));
                        }
                        if v != values[b * k + a] {
                            return Err(Error::config("value table must be symmetric"));
                        }
                    }
                }
                Ok(())
            }
            GraphonSpec::Custom { id } => {
                if registry.graphons.contains_key(id) {
                    Ok(())
                } else {
                    Err(Error::config(format!("unknown custom graphon '{id}'")))
                }
            }
            _ => Ok(()),
        }
    }

    /// Evaluates a built-in graphon. Custom ids need [`GraphonSpec::eval_with`].
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        self.eval_with(&Registry::default(), u, v)
    }

    pub fn eval_with(&self, registry: &Registry, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::argument(format!("graphon arguments ({u}, {v}) outside [0, 1]")));
        }
        self.validate(registry)?;
        Ok(self.eval_unchecked(registry, u, v))
    }

    /// Evaluation for a spec that already passed [`GraphonSpec::validate`].
    fn eval_unchecked(&self, registry: &Registry, u: f64, v: f64) -> f64 {
        match self {
            GraphonSpec::UniformSum => (u + v) / 2.0,
            GraphonSpec::Sbm { blocks } => {
                let k = blocks.unwrap_or(1);
                let kf = k as f64;
                let bu = ((u * kf) as usize).min(k - 1);
                let bv = ((v * kf) as usize).min(k - 1);
                if bu == bv {
                    (bu + 1) as f64 / (kf + 1.0)
                } else {
                    0.3 / (kf + 1.0)
                }
            }
            GraphonSpec::Sine => 0.5 * sin(5.0 * PI * (u + v - 1.0) + 1.0) + 0.5,
            GraphonSpec::LogisticDistance => {
                let z = 15.0 * pow(0.8 * fabs(u - v), 0.8) - 0.1;
                1.0 - 1.0 / (1.0 + exp(z))
            }
            GraphonSpec::Oscillating => {
                let r = u * u + v * v;
                if r == 0.0 {
                    0.15
                } else {
                    r * cos(1.0 / r) / 3.0 + 0.15
                }
            }
            GraphonSpec::Constant { level } => *level,
            GraphonSpec::PiecewiseConstant { breakpoints, values } => {
                let k = breakpoints.len() - 1;
                values[interval_of(u, breakpoints) * k + interval_of(v, breakpoints)]
            }
            GraphonSpec::Custom { id } => (registry.graphons[id])(u, v),
        }
    }
}

/// One coordinate `f_j` of the feature map.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub enum FeatureComponent {
    /// `cos(2π(1−u)²)`
    F1,
    /// `10u² − 12u + 5`
    F2,
    /// `cos(πu)`
    F3,
    /// `Φ⁻¹(u)`
    F4,
    /// `cos(2^{i−1} π u)` for `i ≥ 1`.
    Cos(u32),
    /// An independent standard normal draw per node; carries no label information.
    GaussianNoise,
    /// A function registered in a [`Registry`].
    Custom(String),
}

impl FeatureComponent {
    fn eval(&self, registry: &Registry, u: f64) -> f64 {
        match self {
            FeatureComponent::F1 => {
                let w = 1.0 - u;
                cos(2.0 * PI * w * w)
            }
            FeatureComponent::F2 => 10.0 * u * u - 12.0 * u + 5.0,
            FeatureComponent::F3 => cos(PI * u),
            FeatureComponent::F4 => normal_quantile(u),
            FeatureComponent::Cos(i) => cos(pow(2.0, (*i as f64) - 1.0) * PI * u),
            FeatureComponent::GaussianNoise => 0.0,
            FeatureComponent::Custom(id) => (registry.features[id])(u),
        }
    }

    fn check(&self, registry: &Registry) -> Result<()> {
        match self {
            FeatureComponent::Cos(0) => Err(Error::config("cos feature index starts at 1")),
            FeatureComponent::Custom(id) if !registry.features.contains_key(id) => {
                Err(Error::config(format!("unknown custom feature '{id}'")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FeatureComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureComponent::F1 => f.write_str("f1"),
            FeatureComponent::F2 => f.write_str("f2"),
            FeatureComponent::F3 => f.write_str("f3"),
            FeatureComponent::F4 => f.write_str("f4"),
            FeatureComponent::Cos(i) => write!(f, "cos{i}"),
            FeatureComponent::GaussianNoise => f.write_str("gaussian-noise"),
            FeatureComponent::Custom(id) => write!(f, "custom:{id}"),
        }
    }
}

impl FromStr for FeatureComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "f1" => FeatureComponent::F1,
            "f2" => FeatureComponent::F2,
            "f3" => FeatureComponent::F3,
            "f4" => FeatureComponent::F4,
            "gaussian-noise" => FeatureComponent::GaussianNoise,
            _ => {
                if let Some(id) = s.strip_prefix("custom:") {
                    FeatureComponent::Custom(id.to_string())
                } else if let Some(i) = s.strip_prefix("cos").and_then(|k| k.parse::<u32>().ok()) {
                    if i == 0 {
                        return Err(Error::config("cos feature index starts at 1"));
                    }
                    FeatureComponent::Cos(i)
                } else {
                    return Err(Error::config(format!("unknown feature function '{s}'")));
                }
            }
        })
    }
}

impl TryFrom<String> for FeatureComponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureComponent> for String {
    fn from(c: FeatureComponent) -> String {
        c.to_string()
    }
}

/// The feature map `f = (f_1, …, f_p)`, noise level and standardization switch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureSpec {
    pub components: Vec<FeatureComponent>,
    pub sigma: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_standardized"))]
    pub standardized: bool,
}

#[cfg(feature = "serde")]
fn default_standardized() -> bool {
    true
}

impl FeatureSpec {
    pub fn new(components: Vec<FeatureComponent>, sigma: f64, standardized: bool) -> Self {
        Self { components, sigma, standardized }
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn validate(&self, registry: &Registry) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::config("a feature spec needs at least one component"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::config(format!("noise level {} must be finite and ≥ 0", self.sigma)));
        }
        self.components.iter().try_for_each(|c| c.check(registry))
    }
}

type GraphonFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type FeatureFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied graphons and feature functions, looked up by id.
#[derive(Default)]
pub struct Registry {
    graphons: BTreeMap<String, GraphonFn>,
    features: BTreeMap<String, FeatureFn>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("graphons", &self.graphons.keys().collect::<Vec<_>>())
            .field("features", &self.features.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    /// Registers a graphon after checking symmetry and range on a 33×33 grid.
    pub fn register_graphon(
        &mut self,
        id: impl Into<String>,
        w: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<()> {
        const GRID: usize = 33;
        for a in 0..GRID {
            for b in 0..GRID {
                let (u, v) = (a as f64 / (GRID - 1) as f64, b as f64 / (GRID - 1) as f64);
                let x = w(u, v);
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::config(format!("custom graphon value {x} at ({u}, {v}) outside [0, 1]")));
                }
                if x != w(v, u) {
                    return Err(Error::config(format!("custom graphon is not symmetric at ({u}, {v})")));
                }
            }
        }
        self.graphons.insert(id.into(), Box::new(w));
        Ok(())
    }

    pub fn register_feature(&mut self, id: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) {
        self.features.insert(id.into(), Box::new(f));
    }
}

/// Latent node labels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentLabels(Vec<f64>);

impl LatentLabels {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if let Some(x) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::argument(format!("label {x} outside [0, 1]")));
        }
        Ok(Self(u))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| self.0[i]).collect())
    }
}

/// Draws `n` iid Uniform(0, 1) labels.
pub fn sample_labels(n: usize, seed: u64) -> Result<LatentLabels> {
    if n == 0 {
        return Err(Error::argument("need at least one node"));
    }
    let mut rng = stream(seed, Purpose::Labels, 0);
    Ok(LatentLabels((0..n).map(|_| rng.random::<f64>()).collect()))
}

/// `P_ij = w(u_i, u_j)` for every pair, diagonal included.
pub fn compute_p(spec: &GraphonSpec, labels: &LatentLabels, registry: &Registry) -> Result<ProbabilityMatrix> {
    spec.validate(registry)?;
    let u = labels.as_slice();
    Ok(ProbabilityMatrix::from_upper(u.len(), |i, j| spec.eval_unchecked(registry, u[i], u[j])))
}

/// Independent Bernoulli edges on the upper triangle, mirrored, zero diagonal.
pub fn sample_adjacency(p: &ProbabilityMatrix, seed: u64) -> AdjacencyMatrix {
    let n = p.n();
    let mut a = AdjacencyMatrix::empty(n);
    for i in 0..n {
        let mut rng = stream(seed, Purpose::Adjacency, i as u64);
        for j in i + 1..n {
            if rng.random::<f64>() < p.get(i, j) {
                a.set(i, j, true);
            }
        }
    }
    a
}

/// Standard deviation of `f(U)`, `U ~ Uniform(0, 1)`, by midpoint quadrature.
pub fn sd_estimate(component: &FeatureComponent, registry: &Registry) -> Result<f64> {
    if *component == FeatureComponent::GaussianNoise {
        return Err(Error::argument("the gaussian-noise component has no deterministic part"));
    }
    component.check(registry)?;
    let m = SD_QUADRATURE_POINTS;
    let h = 1.0 / m as f64;
    let values: Vec<f64> = (0..m).map(|k| component.eval(registry, (k as f64 + 0.5) * h)).collect();
    let mean = values.iter().sum::<f64>() * h;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() * h;
    Ok(libm::sqrt(var))
}

/// Draws the `n × p` feature matrix for the given labels.
pub fn sample_features(
    spec: &FeatureSpec,
    labels: &LatentLabels,
    seed: u64,
    registry: &Registry,
) -> Result<FeatureMatrix> {
    spec.validate(registry)?;
    let u = labels.as_slice();
    let mut columns = Vec::with_capacity(spec.p());
    for (j, comp) in spec.components.iter().enumerate() {
        let mut rng = stream(seed, Purpose::Features, j as u64);
        let col: Vec<f64> = if *comp == FeatureComponent::GaussianNoise {
            u.iter()
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    let e: f64 = rng.sample(StandardNormal);
                    z + spec.sigma * e
                })
                .collect()
        } else {
            let sd = if spec.standardized {
                let sd = sd_estimate(comp, registry)?;
                if sd <= 1e-12 {
                    return Err(Error::argument(format!("cannot standardize constant feature '{comp}'")));
                }
                sd
            } else {
                1.0
            };
            u.iter()
                .map(|&ui| {
                    let e: f64 = rng.sample(StandardNormal);
                    comp.eval(registry, ui) / sd + spec.sigma * e
                })
                .collect()
        };
        columns.push(col);
    }
    if u.is_empty() {
        return FeatureMatrix::new(0, spec.p(), Vec::new());
    }
    FeatureMatrix::from_columns(&columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const BUILTIN: [GraphonSpec; 5] = [
        GraphonSpec::UniformSum,
        GraphonSpec::Sbm { blocks: Some(5) },
        GraphonSpec::Sine,
        GraphonSpec::LogisticDistance,
        GraphonSpec::Oscillating,
    ];

    #[test]
    fn closed_forms() {
        assert_eq!(GraphonSpec::UniformSum.eval(0.2, 0.6).unwrap(), 0.4);
        // 0.5 sin(1) + 0.5, high-precision reference.
        let g2 = GraphonSpec::Sine.eval(0.5, 0.5).unwrap();
        assert!((g2 - 0.920735492403948253).abs() < 1e-15);
        assert_eq!(GraphonSpec::Oscillating.eval(0.0, 0.0).unwrap(), 0.15);
        let g3 = GraphonSpec::LogisticDistance.eval(0.3, 0.3).unwrap();
        assert!((g3 - (1.0 - 1.0 / (1.0 + libm::exp(-0.1)))).abs() < 1e-15);
    }

    #[test]
    fn sbm_blocks_and_boundaries() {
        let g = GraphonSpec::Sbm { blocks: Some(3) };
        assert_eq!(g.eval(0.1, 0.2).unwrap(), 0.25);
        assert_eq!(g.eval(0.9, 0.95).unwrap(), 0.75);
        assert!((g.eval(0.2, 0.5).unwrap() - 0.075).abs() < 1e-15);
        // Left-closed intervals: 1/3 belongs to the second block, 1 to the last.
        assert_eq!(g.eval(1.0 / 3.0, 0.5).unwrap(), 0.5);
        assert_eq!(g.eval(1.0, 0.9).unwrap(), 0.75);
        assert_eq!(sbm_blocks(200), 5);
        assert_eq!(sbm_blocks(2), 1);
        assert!(GraphonSpec::Sbm { blocks: None }.eval(0.1, 0.1).is_err());
        assert_eq!(GraphonSpec::Sbm { blocks: None }.resolve_for(200), GraphonSpec::Sbm { blocks: Some(5) });
    }

    #[test]
    fn builtins_symmetric_and_bounded() {
        let mut rng = stream(1, Purpose::Labels, 99);
        for g in BUILTIN.iter() {
            for _ in 0..10_000 {
                let (u, v) = (rng.random::<f64>(), rng.random::<f64>());
                let a = g.eval(u, v).unwrap();
                assert_eq!(a, g.eval(v, u).unwrap());
                assert!((0.0..=1.0).contains(&a), "{g:?} at ({u}, {v}) = {a}");
            }
        }
    }

    #[test]
    fn out_of_range_arguments_rejected() {
        assert!(GraphonSpec::Sine.eval(-0.1, 0.5).is_err());
        assert!(GraphonSpec::Sine.eval(0.5, 1.1).is_err());
    }

    #[test]
    fn piecewise_constant_table() {
        let g = GraphonSpec::PiecewiseConstant { breakpoints: vec![0.0, 0.4, 1.0], values: vec![0.9, 0.1, 0.1, 0.6] };
        assert_eq!(g.eval(0.1, 0.2).unwrap(), 0.9);
        assert_eq!(g.eval(0.4, 0.2).unwrap(), 0.1);
        assert_eq!(g.eval(1.0, 0.5).unwrap(), 0.6);
        let bad = GraphonSpec::PiecewiseConstant { breakpoints: vec![0.0, 0.6, 0.4, 1.0], values: vec![0.1; 9] };
        assert!(bad.eval(0.1, 0.1).is_err());
        let asym = GraphonSpec::PiecewiseConstant { breakpoints: vec![0.0, 0.5, 1.0], values: vec![0.1, 0.2, 0.3, 0.1] };
        assert!(asym.eval(0.1, 0.1).is_err());
        let short = GraphonSpec::PiecewiseConstant { breakpoints: vec![0.1, 1.0], values: vec![0.1] };
        assert!(short.eval(0.5, 0.5).is_err());
    }

    #[test]
    fn custom_graphons_by_id() {
        let mut reg = Registry::default();
        reg.register_graphon("prod", |u, v| u * v).unwrap();
        let g = GraphonSpec::Custom { id: "prod".into() };
        assert_eq!(g.eval_with(&reg, 0.5, 0.5).unwrap(), 0.25);
        assert!(matches!(g.eval(0.5, 0.5), Err(Error::Config(_))));
        assert!(reg.register_graphon("skew", |u, _| u).is_err());
        assert!(reg.register_graphon("big", |u, v| 2.0 * (u + v)).is_err());
    }

    #[test]
    fn labels_are_deterministic_and_uniform() {
        assert_eq!(sample_labels(5, 3).unwrap(), sample_labels(5, 3).unwrap());
        assert!(sample_labels(0, 3).is_err());
        let one = sample_labels(1, 11).unwrap();
        assert!((0.0..=1.0).contains(&one.as_slice()[0]));
        let u = sample_labels(10_000, 5).unwrap();
        let mean = u.as_slice().iter().sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn probability_matrix_from_graphon() {
        let reg = Registry::default();
        let labels = sample_labels(6, 1).unwrap();
        let p = compute_p(&GraphonSpec::Constant { level: 0.3 }, &labels, &reg).unwrap();
        assert!(p.as_slice().iter().all(|&v| v == 0.3));
        let u = LatentLabels::new(vec![0.0, 1.0]).unwrap();
        let p = compute_p(&GraphonSpec::UniformSum, &u, &reg).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.5, 0.5, 1.0]);
        let u = LatentLabels::new(vec![0.1, 0.5, 0.2]).unwrap();
        let p = compute_p(&GraphonSpec::Sbm { blocks: Some(3) }, &u, &reg).unwrap();
        assert!((p.get(0, 1) - 0.075).abs() < 1e-15);
        assert_eq!(p.get(0, 2), 0.25);
        assert!(LatentLabels::new(vec![1.5]).is_err());
    }

    #[test]
    fn sbm_within_block_entries_exact() {
        let reg = Registry::default();
        let labels = sample_labels(300, 8).unwrap();
        let k = 4;
        let p = compute_p(&GraphonSpec::Sbm { blocks: Some(k) }, &labels, &reg).unwrap();
        let u = labels.as_slice();
        for i in 0..300 {
            for j in 0..300 {
                let (bi, bj) = ((u[i] * k as f64) as usize, (u[j] * k as f64) as usize);
                if bi == bj {
                    assert_eq!(p.get(i, j), (bi + 1) as f64 / (k + 1) as f64);
                }
            }
        }
    }

    #[test]
    fn adjacency_sampling() {
        let n = 30;
        let ones = sample_adjacency(&ProbabilityMatrix::constant(n, 1.0).unwrap(), 1);
        assert_eq!(ones.edge_count(), n * (n - 1) / 2);
        assert!((0..n).all(|i| ones.get(i, i) == 0));
        let zeros = sample_adjacency(&ProbabilityMatrix::constant(n, 0.0).unwrap(), 1);
        assert_eq!(zeros.edge_count(), 0);
        let half = sample_adjacency(&ProbabilityMatrix::constant(200, 0.5).unwrap(), 4);
        let density = half.edge_count() as f64 / (200.0 * 199.0 / 2.0);
        assert!((density - 0.5).abs() < 0.03);
        assert_eq!(half, sample_adjacency(&ProbabilityMatrix::constant(200, 0.5).unwrap(), 4));
    }

    #[test]
    fn sd_of_catalog() {
        let reg = Registry::default();
        let cases = [
            (FeatureComponent::F1, 0.726647208222275727),
            (FeatureComponent::F2, 0.942809041582063366),
            (FeatureComponent::F3, 0.707106781186547524),
            (FeatureComponent::F4, 1.0),
            (FeatureComponent::Cos(3), 0.707106781186547524),
        ];
        for (c, want) in cases {
            let got = sd_estimate(&c, &reg).unwrap();
            assert!(((got - want) / want).abs() <= 1e-4, "{c}: {got} vs {want}");
        }
        assert!(sd_estimate(&FeatureComponent::GaussianNoise, &reg).is_err());
    }

    #[test]
    fn sd_f2_matches_monte_carlo() {
        let reg = Registry::default();
        let mut rng = stream(17, Purpose::Method, 0);
        let m = 1_000_000;
        let xs: Vec<f64> = (0..m).map(|_| FeatureComponent::F2.eval(&reg, rng.random::<f64>())).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let sd = libm::sqrt(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m as f64);
        assert!((sd_estimate(&FeatureComponent::F2, &reg).unwrap() - sd).abs() < 1e-3);
    }

    #[test]
    fn constant_feature_cannot_be_standardized() {
        let mut reg = Registry::default();
        reg.register_feature("flat", |_| 2.0);
        let c = FeatureComponent::Custom("flat".into());
        assert_eq!(sd_estimate(&c, &reg).unwrap(), 0.0);
        let labels = sample_labels(10, 1).unwrap();
        let spec = FeatureSpec::new(vec![c.clone()], 0.0, true);
        assert!(sample_features(&spec, &labels, 1, &reg).is_err());
        let spec = FeatureSpec::new(vec![c], 0.0, false);
        assert!(sample_features(&spec, &labels, 1, &reg).unwrap().as_slice().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn features_noiseless_grid() {
        let reg = Registry::default();
        let labels = LatentLabels::new(vec![0.0, 0.5, 1.0]).unwrap();
        let spec = FeatureSpec::new(vec![FeatureComponent::F3], 0.0, false);
        let x = sample_features(&spec, &labels, 0, &reg).unwrap();
        let col = x.column(0);
        assert_eq!(col[0], 1.0);
        assert!(col[1].abs() < 1e-15);
        assert_eq!(col[2], -1.0);
    }

    #[test]
    fn standardized_column_has_unit_sd() {
        let reg = Registry::default();
        let labels = sample_labels(10_000, 2).unwrap();
        let spec = FeatureSpec::new(vec![FeatureComponent::F2], 0.0, true);
        let col = sample_features(&spec, &labels, 3, &reg).unwrap().column(0);
        let mean = col.iter().sum::<f64>() / 1e4;
        let sd = libm::sqrt(col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (1e4 - 1.0));
        assert!((sd - 1.0).abs() < 0.05, "sd = {sd}");
    }

    #[test]
    fn noise_feature_uncorrelated_with_labels() {
        let reg = Registry::default();
        let labels = sample_labels(10_000, 2).unwrap();
        let spec = FeatureSpec::new(vec![FeatureComponent::GaussianNoise], 1.0, true);
        let col = sample_features(&spec, &labels, 3, &reg).unwrap().column(0);
        let u = labels.as_slice();
        let (mx, mu) = (col.iter().sum::<f64>() / 1e4, u.iter().sum::<f64>() / 1e4);
        let cov: f64 = col.iter().zip(u).map(|(x, y)| (x - mx) * (y - mu)).sum();
        let vx: f64 = col.iter().map(|x| (x - mx) * (x - mx)).sum();
        let vu: f64 = u.iter().map(|y| (y - mu) * (y - mu)).sum();
        assert!((cov / libm::sqrt(vx * vu)).abs() < 0.05);
    }

    #[test]
    fn feature_ids_parse() {
        for s in ["f1", "f2", "f3", "f4", "cos2", "gaussian-noise", "custom:age"] {
            assert_eq!(s.parse::<FeatureComponent>().unwrap().to_string(), s);
        }
        assert!("cos0".parse::<FeatureComponent>().is_err());
        assert!("f9".parse::<FeatureComponent>().is_err());
    }

    #[test]
    fn feature_spec_validation() {
        let reg = Registry::default();
        assert!(FeatureSpec::new(vec![], 0.1, true).validate(&reg).is_err());
        assert!(FeatureSpec::new(vec![FeatureComponent::F1], -0.1, true).validate(&reg).is_err());
        assert!(FeatureSpec::new(vec![FeatureComponent::Custom("x".into())], 0.1, true).validate(&reg).is_err());
    }
}

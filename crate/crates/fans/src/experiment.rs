//! Simulation trials, method fitting and the benchmark and λ-sweep drivers.
//!
//! Every random quantity is keyed on the master seed and a trial or method
//! index, never on scheduling order, so results do not depend on the thread
//! count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fans_core::baselines::{sas_estimate, usvt_estimate, SasConfig, UsvtConfig};
use fans_core::estimator::{fans_estimate, nbs_estimate, EstimatorConfig};
use fans_core::evaluation::{
    loo_link_predict, mse_mae, paired_t_test, roc_auc, LinkScore, LooMode, PairSelection, RocCurve,
};
use fans_core::graphon::{compute_p, sample_adjacency, sample_features, sample_labels, FeatureSpec, GraphonSpec, LatentLabels, Registry};
use fans_core::rng::{derive_seed, Purpose};
use fans_core::selection::{cross_validate, screen_features, CvConfig, ScreenConfig};
use fans_core::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FansSettings, MethodConfig};
use crate::error::{FansError, Result};

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, Purpose::Trial, index as u64)
}

/// Stable per-method key, so a method's randomness does not depend on its
/// position in the method list.
fn method_key(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Seed handed to a method within a trial.
pub fn method_seed(trial_seed: u64, method: &str) -> u64 {
    derive_seed(trial_seed, Purpose::Method, method_key(method))
}

/// One simulated network with its ground truth.
#[derive(Debug, Clone)]
pub struct Trial {
    pub labels: LatentLabels,
    pub p: ProbabilityMatrix,
    pub a: AdjacencyMatrix,
    pub x: FeatureMatrix,
}

pub fn simulate(graphon: &GraphonSpec, features: &FeatureSpec, n: usize, seed: u64, registry: &Registry) -> Result<Trial> {
    let labels = sample_labels(n, seed)?;
    let p = compute_p(&graphon.resolve_for(n), &labels, registry)?;
    let a = sample_adjacency(&p, seed);
    let x = sample_features(features, &labels, seed, registry)?;
    Ok(Trial { labels, p, a, x })
}

/// An estimate together with the choices the pipeline made.
#[derive(Debug, Clone)]
pub struct Fit {
    pub estimate: ProbabilityMatrix,
    /// λ used by FANS.
    pub lambda: Option<f64>,
    /// Feature columns that survived screening.
    pub kept: Option<Vec<usize>>,
}

/// Feature columns and λ after screening and cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FansChoice {
    pub kept: Vec<usize>,
    pub lambda: f64,
}

/// Screens features and picks λ; no surviving features means λ = 0.
pub fn choose_fans(a: &AdjacencyMatrix, x: Option<&FeatureMatrix>, s: &FansSettings, seed: u64) -> Result<FansChoice> {
    let Some(x) = x.filter(|x| x.p() > 0) else {
        return Ok(FansChoice { kept: Vec::new(), lambda: 0.0 });
    };
    let kept = if s.screen {
        screen_features(a, x, &ScreenConfig { threshold: s.screen_threshold })?.kept
    } else {
        (0..x.p()).collect()
    };
    if kept.is_empty() {
        return Ok(FansChoice { kept, lambda: 0.0 });
    }
    let lambda = match s.lambda {
        Some(l) => l,
        None => {
            let cfg = CvConfig {
                grid: s.grid.clone(),
                repeats: s.cv_repeats,
                fraction: s.cv_fraction,
                c0: s.c0,
                seed: derive_seed(seed, Purpose::CrossValidation, 0),
            };
            cross_validate(a, &x.select_columns(&kept), &cfg)?.lambda_opt
        }
    };
    Ok(FansChoice { kept, lambda })
}

fn fans_config(s: &FansSettings, lambda: f64, seed: u64) -> EstimatorConfig {
    EstimatorConfig { lambda, c0: s.c0, tie_correction: s.tie_correction, seed: derive_seed(seed, Purpose::TieBreak, 0) }
}

/// Screening, λ selection and the final fit.
pub fn fans_pipeline(a: &AdjacencyMatrix, x: Option<&FeatureMatrix>, s: &FansSettings, seed: u64) -> Result<Fit> {
    let choice = choose_fans(a, x, s, seed)?;
    let selected = x.filter(|_| choice.lambda > 0.0).map(|x| x.select_columns(&choice.kept));
    let estimate = fans_estimate(a, selected.as_ref(), &fans_config(s, choice.lambda, seed))?;
    Ok(Fit { estimate, lambda: Some(choice.lambda), kept: Some(choice.kept) })
}

pub fn fit_method(method: &MethodConfig, a: &AdjacencyMatrix, x: Option<&FeatureMatrix>, seed: u64) -> Result<Fit> {
    let plain = |estimate| Fit { estimate, lambda: None, kept: None };
    match method {
        MethodConfig::Nbs { c0 } => Ok(plain(nbs_estimate(a, *c0)?)),
        MethodConfig::Fans(s) => fans_pipeline(a, x, s, seed),
        MethodConfig::Usvt { eta } => Ok(plain(usvt_estimate(a, &UsvtConfig { eta: *eta })?)),
        MethodConfig::Sas { bins } => {
            let cfg = bins.map_or_else(|| SasConfig::for_n(a.n()), |bins| SasConfig { bins });
            Ok(plain(sas_estimate(a, &cfg)?))
        }
    }
}

/// Leave-one-out link prediction with FANS, λ chosen as in [`fans_pipeline`].
pub fn link_prediction(
    a: &AdjacencyMatrix,
    x: Option<&FeatureMatrix>,
    s: &FansSettings,
    pairs: &PairSelection,
    mode: LooMode,
    seed: u64,
) -> Result<(Vec<LinkScore>, RocCurve, f64)> {
    let choice = choose_fans(a, x, s, seed)?;
    let selected = x.filter(|_| choice.lambda > 0.0).map(|x| x.select_columns(&choice.kept));
    let mut cfg = fans_config(s, choice.lambda, seed);
    cfg.seed = derive_seed(seed, Purpose::PairSample, 0);
    let scores = loo_link_predict(a, selected.as_ref(), &cfg, pairs, mode)?;
    let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
    let labels: Vec<bool> = scores.iter().map(|s| s.edge).collect();
    let roc = roc_auc(&values, &labels)?;
    Ok((scores, roc, choice.lambda))
}

/// Runs `f` on a pool with `threads` workers (machine parallelism when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| FansError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Result of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: String,
    pub trial: usize,
    pub seed: u64,
    pub outcome: std::result::Result<TrialMetrics, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub mse: f64,
    pub mae: f64,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub trials: usize,
    pub failures: usize,
    pub mean_mse: f64,
    pub se_mse: f64,
    pub mean_mae: f64,
    pub se_mae: f64,
    /// One-sided paired p-value for this method's MSE below NBS's; set for FANS.
    pub p_vs_nbs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub graphon: String,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<MethodSummary>,
}

impl BenchmarkOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn summary_for(&self, method: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    /// MSE per trial for `method`, `None` where the trial failed.
    pub fn mse_by_trial(&self, method: &str) -> Vec<Option<f64>> {
        self.records.iter().filter(|r| r.method == method).map(|r| r.outcome.as_ref().ok().map(|m| m.mse)).collect()
    }
}

/// Short name of a graphon for result tables.
pub fn graphon_label(g: &GraphonSpec) -> String {
    match g {
        GraphonSpec::UniformSum => "uniform-sum".into(),
        GraphonSpec::Sbm { .. } => "sbm".into(),
        GraphonSpec::Sine => "sine".into(),
        GraphonSpec::LogisticDistance => "logistic-distance".into(),
        GraphonSpec::Oscillating => "oscillating".into(),
        GraphonSpec::Constant { level } => format!("constant-{level}"),
        GraphonSpec::PiecewiseConstant { .. } => "piecewise-constant".into(),
        GraphonSpec::Custom { id } => id.clone(),
    }
}

/// Mean and standard error (sample sd over √k).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

fn run_trial(cfg: &ExperimentConfig, registry: &Registry, trial: usize) -> Vec<TrialRecord> {
    let seed = trial_seed(cfg.seed, trial);
    let data = simulate(&cfg.graphon, &cfg.features, cfg.n, seed, registry);
    cfg.methods
        .iter()
        .map(|m| {
            let outcome = data.as_ref().map_err(ToString::to_string).and_then(|t| {
                let fit = fit_method(m, &t.a, Some(&t.x), method_seed(seed, m.name())).map_err(|e| e.to_string())?;
                let err = mse_mae(&fit.estimate, &t.p).map_err(|e| e.to_string())?;
                Ok(TrialMetrics { mse: err.mse, mae: err.mae, lambda: fit.lambda })
            });
            TrialRecord { method: m.name().to_string(), trial, seed, outcome }
        })
        .collect()
}

/// Runs every configured method on `cfg.trials` simulated networks.
///
/// Failed trials are recorded rather than aborting the run.
pub fn run_benchmark(cfg: &ExperimentConfig, registry: &Registry, threads: Option<usize>) -> Result<BenchmarkOutcome> {
    let per_trial: Vec<Vec<TrialRecord>> =
        with_threads(threads, || (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, registry, t)).collect())?;
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let ok = |name: &str| -> Vec<Option<TrialMetrics>> {
        records.iter().filter(|r| r.method == name).map(|r| r.outcome.as_ref().ok().copied()).collect()
    };
    let nbs = ok("nbs");
    let summary = cfg
        .methods
        .iter()
        .map(|m| {
            let mine = ok(m.name());
            let good: Vec<TrialMetrics> = mine.iter().flatten().copied().collect();
            let (mean_mse, se_mse) = mean_se(&good.iter().map(|g| g.mse).collect::<Vec<_>>());
            let (mean_mae, se_mae) = mean_se(&good.iter().map(|g| g.mae).collect::<Vec<_>>());
            let p_vs_nbs = (m.name() == "fans" && !nbs.is_empty())
                .then(|| {
                    let (a, b): (Vec<f64>, Vec<f64>) =
                        mine.iter().zip(&nbs).filter_map(|(f, n)| Some((f.as_ref()?.mse, n.as_ref()?.mse))).unzip();
                    paired_t_test(&a, &b).ok()
                })
                .flatten();
            MethodSummary {
                method: m.name().to_string(),
                trials: good.len(),
                failures: mine.len() - good.len(),
                mean_mse,
                se_mse,
                mean_mae,
                se_mae,
                p_vs_nbs,
            }
        })
        .collect();
    Ok(BenchmarkOutcome { graphon: graphon_label(&cfg.graphon), records, summary })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_file(path: &Path, header: &[String]) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FansError::io(dir, e))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| FansError::io(path, e))?);
    for line in header {
        writeln!(w, "# {line}").map_err(|e| FansError::io(path, e))?;
    }
    Ok(csv::Writer::from_writer(w))
}

fn finish(w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| FansError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| FansError::io(path, e))
}

/// Writes `metrics.csv` (one row per method and trial) and `summary.csv`.
pub fn write_benchmark(outcome: &BenchmarkOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let header = cfg.header();
    let metrics = dir.join("metrics.csv");
    let mut w = csv_file(&metrics, &header)?;
    w.write_record(["graphon", "method", "trial", "seed", "n", "mse", "mae", "lambda", "error"])?;
    for r in &outcome.records {
        let (mse, mae, lambda, error) = match &r.outcome {
            Ok(m) => (m.mse.to_string(), m.mae.to_string(), fmt_opt(m.lambda), String::new()),
            Err(e) => (String::new(), String::new(), String::new(), e.clone()),
        };
        w.write_record([
            outcome.graphon.clone(),
            r.method.clone(),
            r.trial.to_string(),
            r.seed.to_string(),
            cfg.n.to_string(),
            mse,
            mae,
            lambda,
            error,
        ])?;
    }
    finish(w, &metrics)?;

    let summary = dir.join("summary.csv");
    let mut w = csv_file(&summary, &header)?;
    w.write_record(["graphon", "method", "n", "trials", "failures", "mean_mse", "se_mse", "mean_mae", "se_mae", "p_vs_nbs"])?;
    for s in &outcome.summary {
        w.write_record([
            outcome.graphon.clone(),
            s.method.clone(),
            cfg.n.to_string(),
            s.trials.to_string(),
            s.failures.to_string(),
            s.mean_mse.to_string(),
            s.se_mse.to_string(),
            s.mean_mae.to_string(),
            s.se_mae.to_string(),
            fmt_opt(s.p_vs_nbs),
        ])?;
    }
    finish(w, &summary)?;
    Ok(vec![metrics, summary])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub graphon: String,
    pub sigma: f64,
    pub lambda: f64,
    pub trials: usize,
    pub mean_mse: f64,
    pub se_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `(σ, trial, message)` for every failed trial.
    pub failures: Vec<(f64, usize, String)>,
}

/// Mean FANS MSE over trials for every (σ, λ) of the sweep grid.
///
/// Each trial reuses the same labels and graph across σ, so the curves
/// differ only through the feature noise.
pub fn run_lambda_sweep(cfg: &ExperimentConfig, registry: &Registry, threads: Option<usize>) -> Result<SweepOutcome> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| FansError::Config("no [sweep] section in the configuration".into()))?;
    let jobs: Vec<(usize, usize)> = (0..sweep.sigmas.len()).flat_map(|s| (0..cfg.trials).map(move |t| (s, t))).collect();
    let results: Vec<std::result::Result<Vec<f64>, String>> = with_threads(threads, || {
        jobs.par_iter()
            .map(|&(s, t)| {
                let seed = trial_seed(cfg.seed, t);
                let features = FeatureSpec { sigma: sweep.sigmas[s], ..cfg.features.clone() };
                let trial = simulate(&cfg.graphon, &features, cfg.n, seed, registry).map_err(|e| e.to_string())?;
                let tie_seed = derive_seed(method_seed(seed, "sweep"), Purpose::TieBreak, 0);
                sweep
                    .lambdas
                    .iter()
                    .map(|&lambda| {
                        let est = EstimatorConfig { lambda, c0: sweep.c0, tie_correction: true, seed: tie_seed };
                        let x = (lambda > 0.0).then_some(&trial.x);
                        let fit = fans_estimate(&trial.a, x, &est).map_err(|e| e.to_string())?;
                        Ok(mse_mae(&fit, &trial.p).map_err(|e| e.to_string())?.mse)
                    })
                    .collect()
            })
            .collect()
    })?;
    let graphon = graphon_label(&cfg.graphon);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (s, &sigma) in sweep.sigmas.iter().enumerate() {
        let mut per_lambda = vec![Vec::new(); sweep.lambdas.len()];
        for t in 0..cfg.trials {
            match &results[s * cfg.trials + t] {
                Ok(mses) => mses.iter().zip(&mut per_lambda).for_each(|(m, acc)| acc.push(*m)),
                Err(e) => failures.push((sigma, t, e.clone())),
            }
        }
        for (&lambda, mses) in sweep.lambdas.iter().zip(&per_lambda) {
            let (mean_mse, se_mse) = mean_se(mses);
            rows.push(SweepRow { graphon: graphon.clone(), sigma, lambda, trials: mses.len(), mean_mse, se_mse });
        }
    }
    Ok(SweepOutcome { rows, failures })
}

/// Writes `sweep.csv` with one row per (σ, λ).
pub fn write_sweep(outcome: &SweepOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("sweep.csv");
    let mut w = csv_file(&path, &cfg.header())?;
    w.write_record(["graphon", "sigma", "lambda", "trials", "mean_mse", "se_mse"])?;
    for r in &outcome.rows {
        w.write_record([
            r.graphon.clone(),
            r.sigma.to_string(),
            r.lambda.to_string(),
            r.trials.to_string(),
            r.mean_mse.to_string(),
            r.se_mse.to_string(),
        ])?;
    }
    finish(w, &path)?;
    Ok(path)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fans::config::{ExperimentConfig, FansSettings, MethodConfig};
use fans::experiment::{
    fit_method, link_prediction, method_seed, run_benchmark, run_lambda_sweep, simulate, trial_seed,
    with_threads, write_benchmark, write_sweep,
};
use fans::io::{self, CovariateSchema, IndexBase};
use fans::{FansError, Result};
use fans_core::evaluation::{mse_mae, LooMode, PairSelection};
use fans_core::graphon::Registry;
use fans_core::rng::{derive_seed, Purpose};
use fans_core::selection::{cross_validate, screen_features, CvConfig, ScreenConfig};
use fans_core::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix};

#[derive(Parser)]
#[command(name = "fans", version, about = "Graphon estimation with node features")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides FANS_OUT_DIR and the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Estimation method(s): nbs, fans, usvt, sas. Comma-separated for benchmark.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Fixed FANS λ instead of cross-validation.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Neighborhood scale C₀.
    #[arg(long, global = true)]
    c0: Option<f64>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one network, its features and the true probability matrix.
    Simulate(InputArgs),
    /// Estimate the probability matrix of a network.
    Estimate(InputArgs),
    /// Cross-validate λ over the configured grid.
    Cv(InputArgs),
    /// Kendall-τ screening of each feature column.
    Screen(InputArgs),
    /// Run all configured methods over repeated simulations.
    Benchmark,
    /// Mean MSE over a grid of λ and feature noise levels.
    Sweep,
    /// Leave-one-out link prediction and its ROC curve.
    Linkpred {
        #[command(flatten)]
        input: InputArgs,
        /// Pairs to score: `all`, or a sample size.
        #[arg(long, default_value = "2000")]
        pairs: String,
        /// Share one modified dissimilarity across all pairs instead of recomputing per pair.
        #[arg(long)]
        shared: bool,
    },
}

#[derive(Args, Clone, Default)]
struct InputArgs {
    /// Edge list; without it a network is simulated from the configuration.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Node count for the edge list.
    #[arg(long)]
    nodes: Option<usize>,
    /// Edge list indices start at 1.
    #[arg(long)]
    one_based: bool,
    /// Dense feature matrix (CSV, one row per node).
    #[arg(long, conflicts_with = "covariates")]
    features: Option<PathBuf>,
    /// Covariate table with a header row.
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// Covariate column to use, as name:kind (ordinal, categorical or numeric).
    #[arg(long = "column")]
    columns: Vec<String>,
    /// Replace missing covariates by the column mean.
    #[arg(long)]
    impute: bool,
    /// Which simulated trial to draw.
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

struct Data {
    a: AdjacencyMatrix,
    x: Option<FeatureMatrix>,
    truth: Option<ProbabilityMatrix>,
    seed: u64,
    header: Vec<String>,
}

struct Context {
    cli: Cli,
    config: Option<ExperimentConfig>,
}

impl Context {
    fn new(cli: Cli) -> Result<Self> {
        let mut config = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
        if let Some(cfg) = &mut config {
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(names) = &cli.method {
                cfg.methods = names.split(',').map(|m| self_method(cfg, m)).collect::<Result<_>>()?;
            }
            for m in &mut cfg.methods {
                apply_overrides(m, cli.lambda, cli.c0);
            }
            cfg.validate()?;
        }
        Ok(Self { cli, config })
    }

    fn require_config(&self) -> Result<&ExperimentConfig> {
        self.config.as_ref().ok_or_else(|| FansError::Config("this command needs --config".into()))
    }

    fn out_dir(&self) -> PathBuf {
        if let Some(out) = &self.cli.out {
            return out.clone();
        }
        match &self.config {
            Some(cfg) => cfg.effective_out_dir(),
            None => match std::env::var_os(fans::config::OUT_DIR_ENV) {
                Some(dir) if !dir.is_empty() => PathBuf::from(dir),
                _ => PathBuf::from("results"),
            },
        }
    }

    /// The single method a per-network command uses, with flag overrides applied.
    fn method(&self) -> Result<MethodConfig> {
        let name = self.cli.method.as_deref().unwrap_or("fans");
        if name.contains(',') {
            return Err(FansError::Config("this command takes a single --method".into()));
        }
        let mut m = match &self.config {
            Some(cfg) => self_method(cfg, name)?,
            None => MethodConfig::from_name(name)?,
        };
        apply_overrides(&mut m, self.cli.lambda, self.cli.c0);
        Ok(m)
    }

    fn fans_settings(&self) -> Result<FansSettings> {
        let mut m = match &self.config {
            Some(cfg) => self_method(cfg, "fans")?,
            None => MethodConfig::from_name("fans")?,
        };
        apply_overrides(&mut m, self.cli.lambda, self.cli.c0);
        match m {
            MethodConfig::Fans(s) => Ok(s),
            _ => unreachable!("looked up by name"),
        }
    }

    fn load(&self, input: &InputArgs, command: &str) -> Result<Data> {
        let mut header = vec![format!("command = {command}")];
        if let Some(path) = &input.edges {
            let base = if input.one_based { IndexBase::One } else { IndexBase::Zero };
            let a = io::load_edge_list(path, input.nodes, base)?;
            header.push(format!("edges = {}", path.display()));
            let x = if let Some(path) = &input.features {
                header.push(format!("features = {}", path.display()));
                Some(io::read_feature_matrix(path)?)
            } else if let Some(path) = &input.covariates {
                let schema = CovariateSchema::parse(&input.columns, input.impute)?;
                let cov = io::load_covariates(path, &schema)?;
                header.push(format!("covariates = {} [{}]", path.display(), cov.names.join(", ")));
                for &j in &cov.constant {
                    eprintln!("note: covariate column '{}' is constant", cov.names[j]);
                }
                Some(cov.features)
            } else {
                None
            };
            let seed = self.cli.seed.or(self.config.as_ref().map(|c| c.seed)).unwrap_or(0);
            header.insert(0, format!("master_seed = {seed}"));
            return Ok(Data { a, x, truth: None, seed, header });
        }
        let cfg = self.require_config()?;
        let seed = trial_seed(cfg.seed, input.trial);
        let t = simulate(&cfg.graphon, &cfg.features, cfg.n, seed, &Registry::default())?;
        let mut full = cfg.header();
        full.extend(header);
        full.push(format!("trial = {} (seed {seed})", input.trial));
        Ok(Data { a: t.a, x: Some(t.x), truth: Some(t.p), seed, header: full })
    }
}

fn self_method(cfg: &ExperimentConfig, name: &str) -> Result<MethodConfig> {
    let fresh = MethodConfig::from_name(name)?;
    Ok(cfg.methods.iter().find(|m| m.name() == fresh.name()).cloned().unwrap_or(fresh))
}

fn apply_overrides(m: &mut MethodConfig, lambda: Option<f64>, c0: Option<f64>) {
    match m {
        MethodConfig::Nbs { c0: c } => *c = c0.unwrap_or(*c),
        MethodConfig::Fans(s) => {
            s.c0 = c0.unwrap_or(s.c0);
            s.lambda = lambda.or(s.lambda);
        }
        _ => {}
    }
}

fn method_header(header: &mut Vec<String>, m: &MethodConfig) {
    let table = toml::Table::try_from(m).expect("method settings serialize");
    header.push(format!("settings = {{ {} }}", table.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")));
}

fn run(ctx: &Context) -> Result<u8> {
    let out = ctx.out_dir();
    match &ctx.cli.command {
        Command::Simulate(input) => {
            let cfg = ctx.require_config()?;
            let seed = trial_seed(cfg.seed, input.trial);
            let t = simulate(&cfg.graphon, &cfg.features, cfg.n, seed, &Registry::default())?;
            let mut header = cfg.header();
            header.push(format!("trial = {} (seed {seed})", input.trial));
            io::write_probability_matrix(out.join("p.csv"), &t.p, &header)?;
            io::write_edge_list(out.join("edges.txt"), &t.a, &header)?;
            io::write_feature_matrix(out.join("features.csv"), &t.x, &header)?;
            io::write_dense(out.join("labels.csv"), 1, t.labels.as_slice(), &header)?;
            println!("wrote {} nodes, {} edges to {}", t.a.n(), t.a.edge_count(), out.display());
        }
        Command::Estimate(input) => {
            let mut data = ctx.load(input, "estimate")?;
            let m = ctx.method()?;
            method_header(&mut data.header, &m);
            let fit = with_threads(ctx.cli.threads, || {
                fit_method(&m, &data.a, data.x.as_ref(), method_seed(data.seed, m.name()))
            })??;
            if let Some(l) = fit.lambda {
                data.header.push(format!("lambda = {l}"));
                println!("lambda = {l}");
            }
            io::write_probability_matrix(out.join("p_hat.csv"), &fit.estimate, &data.header)?;
            if let Some(truth) = &data.truth {
                let e = mse_mae(&fit.estimate, truth)?;
                println!("mse = {}\nmae = {}", e.mse, e.mae);
            }
        }
        Command::Cv(input) => {
            let mut data = ctx.load(input, "cv")?;
            let s = ctx.fans_settings()?;
            let x = data.x.as_ref().ok_or_else(|| FansError::Config("cross-validation needs node features".into()))?;
            let cfg = CvConfig {
                grid: s.grid.clone(),
                repeats: s.cv_repeats,
                fraction: s.cv_fraction,
                c0: s.c0,
                seed: derive_seed(method_seed(data.seed, "fans"), Purpose::CrossValidation, 0),
            };
            let res = with_threads(ctx.cli.threads, || cross_validate(&data.a, x, &cfg))??;
            data.header.push(format!("lambda_opt = {}", res.lambda_opt));
            let rows: Vec<f64> = cfg.grid.iter().zip(&res.mean_losses).flat_map(|(l, loss)| [*l, *loss]).collect();
            io::write_dense(out.join("cv.csv"), 2, &rows, &with_columns(&data.header, "lambda,mean_loss"))?;
            println!("lambda = {}", res.lambda_opt);
        }
        Command::Screen(input) => {
            let mut data = ctx.load(input, "screen")?;
            let s = ctx.fans_settings()?;
            let x = data.x.as_ref().ok_or_else(|| FansError::Config("screening needs node features".into()))?;
            let res = screen_features(&data.a, x, &ScreenConfig { threshold: s.screen_threshold })?;
            data.header.push(format!("threshold = {}", s.screen_threshold));
            let rows: Vec<f64> = res
                .taus
                .iter()
                .enumerate()
                .flat_map(|(j, t)| [j as f64, t.unwrap_or(f64::NAN), f64::from(u8::from(res.kept.contains(&j)))])
                .collect();
            io::write_dense(out.join("screen.csv"), 3, &rows, &with_columns(&data.header, "feature,tau,kept"))?;
            for (j, t) in res.taus.iter().enumerate() {
                let tau = t.map_or("undefined".to_string(), |t| format!("{t:.4}"));
                println!("feature {j}: tau = {tau}{}", if res.kept.contains(&j) { "" } else { " (dropped)" });
            }
        }
        Command::Benchmark => {
            let cfg = ctx.require_config()?;
            let outcome = run_benchmark(cfg, &Registry::default(), ctx.cli.threads)?;
            write_benchmark(&outcome, cfg, &out)?;
            for s in &outcome.summary {
                let p = s.p_vs_nbs.map(|p| format!("  p(vs nbs) = {p:.3e}")).unwrap_or_default();
                println!("{:<5} mse {:.5} ({:.1e})  mae {:.5} ({:.1e}){p}", s.method, s.mean_mse, s.se_mse, s.mean_mae, s.se_mae);
            }
            if outcome.failures() > 0 {
                for r in outcome.records.iter().filter(|r| r.outcome.is_err()) {
                    eprintln!("trial {} ({}, seed {}) failed: {}", r.trial, r.method, r.seed, r.outcome.as_ref().unwrap_err());
                }
                return Ok(1);
            }
        }
        Command::Sweep => {
            let cfg = ctx.require_config()?;
            let outcome = run_lambda_sweep(cfg, &Registry::default(), ctx.cli.threads)?;
            let path = write_sweep(&outcome, cfg, &out)?;
            println!("wrote {} rows to {}", outcome.rows.len(), path.display());
            if !outcome.failures.is_empty() {
                for (sigma, t, e) in &outcome.failures {
                    eprintln!("trial {t} (sigma {sigma}) failed: {e}");
                }
                return Ok(1);
            }
        }
        Command::Linkpred { input, pairs, shared } => {
            let mut data = ctx.load(input, "linkpred")?;
            let s = ctx.fans_settings()?;
            let selection = match pairs.trim() {
                "all" => PairSelection::All,
                count => PairSelection::Sample {
                    count: count.parse().map_err(|_| FansError::Config(format!("--pairs '{count}' is neither 'all' nor a count")))?,
                },
            };
            let mode = if *shared { LooMode::Shared } else { LooMode::Exact };
            let seed = method_seed(data.seed, "fans");
            let (scores, roc, lambda) =
                with_threads(ctx.cli.threads, || link_prediction(&data.a, data.x.as_ref(), &s, &selection, mode, seed))??;
            data.header.push(format!("lambda = {lambda}"));
            data.header.push(format!("mode = {mode:?}"));
            io::write_roc(out.join("roc.csv"), &roc, &data.header)?;
            let rows: Vec<f64> =
                scores.iter().flat_map(|l| [l.i as f64, l.j as f64, l.score, f64::from(u8::from(l.edge))]).collect();
            io::write_dense(out.join("scores.csv"), 4, &rows, &with_columns(&data.header, "i,j,score,edge"))?;
            println!("lambda = {lambda}\nauc = {}", roc.auc);
        }
    }
    Ok(0)
}

fn with_columns(header: &[String], columns: &str) -> Vec<String> {
    let mut h = header.to_vec();
    h.push(format!("columns = {columns}"));
    h
}

fn main() -> ExitCode {
    let ctx = match Context::new(Cli::parse()) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&ctx) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

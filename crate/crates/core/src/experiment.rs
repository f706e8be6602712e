//! Batch drivers shared by the command-line tool and the examples:
//! convergence studies over design sizes and trials, fits of a single
//! design, and coherence/RIP sweeps over the polynomial degree.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::basis_selection::{
    basis_selection, dense_reference, nonadaptive_baseline, oracle_baseline, AdaptOptions, AdaptState, BaselineOptions,
    ReferenceOptions,
};
use crate::benchmarks::{BenchmarkModel, TestSet};
use crate::crossval::{CvReport, FitData, DEFAULT_FOLDS};
use crate::diagnostics::{mutual_coherence, rip_lower_bound};
use crate::error::{invalid, PceError, Result};
use crate::multiindex::total_degree_set;
use crate::orthopoly::{build_vandermonde, PceModel, PolyKind};
use crate::sampling::{random_design, Design, Domain};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PCE_WORKERS";
pub const DEFAULT_CAP: usize = 10_000;
pub const DEFAULT_TEST_POINTS: usize = 20_000;
const TEST_SEED_OFFSET: u64 = 0x7e57_0000;
const REFERENCE_SEED_OFFSET: u64 = 0x0ac1_e000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Nonadaptive,
    BasisSelection,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nonadaptive => "nonadaptive",
            Method::BasisSelection => "basis_selection",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nonadaptive" | "non_adaptive" | "fixed" => Ok(Method::Nonadaptive),
            "basis_selection" | "adaptive" | "adapt" => Ok(Method::BasisSelection),
            "oracle" => Ok(Method::Oracle),
            _ => Err(PceError::Unknown {
                kind: "method",
                name: s.into(),
            }),
        }
    }
}

/// Settings of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: String,
    pub dim: Option<usize>,
    pub stages: Option<usize>,
    pub methods: Vec<Method>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub gradients: bool,
    /// Optional check that the model's inputs use this family.
    pub family: Option<PolyKind>,
    pub expansions: usize,
    pub folds: usize,
    pub cap: usize,
    pub test_points: usize,
    pub reference_samples: usize,
    pub reference_terms: usize,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "corner_peak_c1".into(),
            dim: None,
            stages: None,
            methods: vec![Method::Nonadaptive, Method::BasisSelection],
            sizes: vec![50, 100, 150],
            trials: 20,
            seed: 0,
            gradients: false,
            family: None,
            expansions: 3,
            folds: DEFAULT_FOLDS,
            cap: DEFAULT_CAP,
            test_points: DEFAULT_TEST_POINTS,
            reference_samples: 20_000,
            reference_terms: 1500,
            output: None,
            workers: None,
        }
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| invalid(format!("cannot parse `{s}`"))))
        .collect()
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(invalid(format!("bad value `{value}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Sets one field from its key-value form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "model" => self.model = v.to_string(),
            "dim" | "d" => self.dim = Some(parse_num(key, v)?),
            "stages" | "P" => self.stages = Some(parse_num(key, v)?),
            "methods" | "method" => {
                self.methods = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "sizes" | "M" => self.sizes = parse_list(v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "gradients" => self.gradients = parse_bool(key, v)?,
            "family" => self.family = Some(v.parse()?),
            "expansions" | "T" => self.expansions = parse_num(key, v)?,
            "folds" | "K" => self.folds = parse_num(key, v)?,
            "cap" => self.cap = parse_num(key, v)?,
            "test_points" | "Q" => self.test_points = parse_num(key, v)?,
            "reference_samples" => self.reference_samples = parse_num(key, v)?,
            "reference_terms" => self.reference_terms = parse_num(key, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "workers" => self.workers = Some(parse_num(key, v)?),
            other => {
                return Err(PceError::Unknown {
                    kind: "config key",
                    name: other.into(),
                })
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| PceError::Parse {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k, v).map_err(|e| PceError::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "design sizes must be positive and ascending, got {:?}",
                self.sizes
            )));
        }
        if self.methods.is_empty() {
            return Err(invalid("at least one method is required"));
        }
        if self.expansions == 0 || self.folds < 2 || self.test_points == 0 {
            return Err(invalid("expansions >= 1, folds >= 2 and test_points >= 1 are required"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        let truth = self.benchmark()?;
        if self.gradients && !truth.has_gradient() {
            return Err(invalid(format!("model `{}` has no gradient", truth.name)));
        }
        if let Some(kind) = self.family {
            if truth.domains.iter().any(|d| d.kind() != kind) {
                return Err(invalid(format!(
                    "model `{}` does not use the {kind} family",
                    truth.name
                )));
            }
        }
        Ok(())
    }

    pub fn benchmark(&self) -> Result<BenchmarkModel> {
        BenchmarkModel::by_name(&self.model, self.dim, self.stages)
    }

    /// Flag value, then the environment variable, then one worker.
    pub fn worker_count(&self) -> Result<usize> {
        if let Some(w) = self.workers {
            return Ok(w);
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => parse_num(WORKERS_ENV, &v),
            Err(_) => Ok(1),
        }
    }

    /// Cost of `m` samples: one unit per value, one more per gradient.
    pub fn cost(&self, m: usize) -> usize {
        if self.gradients {
            2 * m
        } else {
            m
        }
    }

    fn adapt_options(&self, seed: u64) -> AdaptOptions {
        AdaptOptions {
            expansions: self.expansions,
            folds: self.folds,
            seed,
            ..Default::default()
        }
    }

    fn baseline_options(&self, seed: u64) -> BaselineOptions {
        BaselineOptions {
            cap: self.cap,
            folds: self.folds,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub method: Method,
    pub m: usize,
    pub cost: usize,
    pub trial: usize,
    pub rmse: f64,
    pub basis_size: usize,
    pub nnz: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub m: usize,
    pub cost: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-trial errors and their aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<TrialRow>,
}

impl ConvergenceTable {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(Method, usize), Vec<&TrialRow>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((r.method, r.m)).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|((method, m), rows)| {
                let n = rows.len() as f64;
                SummaryRow {
                    method,
                    m,
                    cost: rows[0].cost,
                    mean: rows.iter().map(|r| r.rmse).sum::<f64>() / n,
                    min: rows.iter().map(|r| r.rmse).fold(f64::INFINITY, f64::min),
                    max: rows.iter().map(|r| r.rmse).fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect()
    }

    /// Mean RMSE of `method` at design size `m`.
    pub fn mean(&self, method: Method, m: usize) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.method == method && s.m == m)
            .map(|s| s.mean)
    }

    pub fn rmses(&self, method: Method, m: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.m == m)
            .map(|r| r.rmse)
            .collect()
    }

    /// `method,M,cost,trial,rmse,basis_size,nnz`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["method", "M", "cost", "trial", "rmse", "basis_size", "nnz"])?;
        for r in &self.rows {
            wr.write_record([
                r.method.name().to_string(),
                r.m.to_string(),
                r.cost.to_string(),
                r.trial.to_string(),
                format!("{:e}", r.rmse),
                r.basis_size.to_string(),
                r.nnz.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// `method,M,cost,mean,min,max`
    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["method", "M", "cost", "mean", "min", "max"])?;
        for s in self.summary() {
            wr.write_record([
                s.method.name().to_string(),
                s.m.to_string(),
                s.cost.to_string(),
                format!("{:e}", s.mean),
                format!("{:e}", s.min),
                format!("{:e}", s.max),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Reference expansion used by the oracle method.
pub fn reference_model(config: &ExperimentConfig, truth: &BenchmarkModel) -> Result<PceModel> {
    let f = |x: &[f64]| truth.eval(x).unwrap_or(f64::NAN);
    let opts = ReferenceOptions {
        samples: config.reference_samples,
        max_terms: config.reference_terms,
        seed: config.seed.wrapping_add(REFERENCE_SEED_OFFSET),
        ..Default::default()
    };
    dense_reference(&f, &truth.domains, &opts)
}

/// Fits every method on one design and scores it on `test`.
fn run_trial(
    config: &ExperimentConfig,
    truth: &BenchmarkModel,
    test: &TestSet,
    reference: Option<&PceModel>,
    m: usize,
    trial: usize,
) -> Result<Vec<TrialRow>> {
    let seed = config.seed.wrapping_add(trial as u64);
    let design = truth.sample(m, seed, config.gradients)?;
    let data = FitData::from_design(&design, config.gradients)?;
    let mut out = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let model = match method {
            Method::Nonadaptive => nonadaptive_baseline(&data, &config.baseline_options(seed))?.0,
            Method::BasisSelection => basis_selection(&data, &config.adapt_options(seed))?.0,
            Method::Oracle => {
                let r = reference.ok_or_else(|| invalid("oracle method needs a reference expansion"))?;
                oracle_baseline(&data, r, config.folds, seed)?.0
            }
        };
        let rmse = test.rmse(&model)?;
        log::info!("{method} M={m} trial={trial} rmse={rmse:e}");
        out.push(TrialRow {
            method,
            m,
            cost: config.cost(m),
            trial,
            rmse,
            basis_size: model.basis().len(),
            nnz: model.nnz(),
        });
    }
    Ok(out)
}

/// For each design size and trial, draws a fresh random design with seed
/// `seed + trial`, fits every method and records the test RMSE. Rows come
/// back in `(M, trial, method)` order regardless of scheduling.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let truth = config.benchmark()?;
    let test = TestSet::lhs(&truth, config.test_points, config.seed.wrapping_add(TEST_SEED_OFFSET))?;
    let reference = if config.methods.contains(&Method::Oracle) {
        Some(reference_model(config, &truth)?)
    } else {
        None
    };
    run_convergence_with(config, &truth, &test, reference.as_ref())
}

/// [`run_convergence`] with a caller-supplied test set and reference.
pub fn run_convergence_with(
    config: &ExperimentConfig,
    truth: &BenchmarkModel,
    test: &TestSet,
    reference: Option<&PceModel>,
) -> Result<ConvergenceTable> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .sizes
        .iter()
        .flat_map(|&m| (0..config.trials).map(move |t| (m, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count()?)
        .build()
        .map_err(|e| invalid(e.to_string()))?;
    let results: Vec<Result<Vec<TrialRow>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, t)| run_trial(config, truth, test, reference, m, t))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(ConvergenceTable { rows })
}

/// Settings of a single-design fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub method: Method,
    pub gradients: bool,
    pub cap: usize,
    pub folds: usize,
    pub expansions: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: Method::Nonadaptive,
            gradients: false,
            cap: DEFAULT_CAP,
            folds: DEFAULT_FOLDS,
            expansions: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum FitReport {
    Cv(CvReport),
    Adapt(AdaptState),
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub model: PceModel,
    pub report: FitReport,
    /// Rows in the fitted system.
    pub rows: usize,
}

impl FitOutcome {
    /// The CV report or the adaptation trace as CSV.
    pub fn write_report_csv<W: Write>(&self, w: W) -> Result<()> {
        match &self.report {
            FitReport::Cv(r) => r.write_csv(w),
            FitReport::Adapt(s) => s.write_trace_csv(w),
        }
    }
}

/// Fits a design that already carries responses.
pub fn fit_design(design: &Design, config: &FitConfig) -> Result<FitOutcome> {
    let data = FitData::from_design(design, config.gradients)?;
    match config.method {
        Method::Nonadaptive => {
            let opts = BaselineOptions {
                cap: config.cap,
                folds: config.folds,
                seed: config.seed,
            };
            let (model, report, _) = nonadaptive_baseline(&data, &opts)?;
            let rows = report.rows;
            Ok(FitOutcome {
                model,
                report: FitReport::Cv(report),
                rows,
            })
        }
        Method::BasisSelection => {
            let opts = AdaptOptions {
                expansions: config.expansions,
                folds: config.folds,
                seed: config.seed,
                ..Default::default()
            };
            let (model, state) = basis_selection(&data, &opts)?;
            let rows = state.rows;
            Ok(FitOutcome {
                model,
                report: FitReport::Adapt(state),
                rows,
            })
        }
        Method::Oracle => Err(invalid("the oracle method needs a benchmark model, not a design")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub p: u32,
    pub n: usize,
    pub coherence: f64,
    pub rip_bound: f64,
}

/// Settings of a coherence/RIP sweep over total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnoseConfig {
    pub dim: usize,
    pub samples: usize,
    pub degrees: Vec<u32>,
    pub s: usize,
    pub rip_trials: usize,
    pub seed: u64,
    /// Designs per degree; reported values are medians.
    pub repeats: usize,
    pub kind: PolyKind,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            dim: 6,
            samples: 100,
            degrees: vec![2, 4, 6, 8],
            s: 10,
            rip_trials: crate::diagnostics::DEFAULT_RIP_TRIALS,
            seed: 0,
            repeats: 1,
            kind: PolyKind::Legendre,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median coherence and RIP bound of random-design matrices for each
/// degree. Repeat `r` uses design seed `seed + r` at every degree.
pub fn diagnose_sweep(config: &DiagnoseConfig) -> Result<Vec<DiagnosticRow>> {
    if config.repeats == 0 {
        return Err(invalid("repeats must be at least 1"));
    }
    let domain = match config.kind {
        PolyKind::Legendre => Domain::Uniform { lo: -1.0, hi: 1.0 },
        PolyKind::Hermite => Domain::Gaussian { mean: 0.0, std: 1.0 },
    };
    let domains = vec![domain; config.dim];
    let designs = (0..config.repeats)
        .map(|r| random_design(config.samples, &domains, config.seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &p in &config.degrees {
        let set = total_degree_set(config.dim, p)?;
        let mut mus = Vec::new();
        let mut deltas = Vec::new();
        for (r, d) in designs.iter().enumerate() {
            let phi = build_vandermonde(&set, &d.canonical(), &d.family())?;
            mus.push(mutual_coherence(&phi)?);
            let s = config.s.min(phi.nrows()).min(phi.ncols());
            deltas.push(rip_lower_bound(
                &phi,
                s,
                config.rip_trials,
                config.seed.wrapping_add(r as u64),
            )?);
        }
        rows.push(DiagnosticRow {
            p,
            n: set.len(),
            coherence: median(&mus),
            rip_bound: median(&deltas),
        });
    }
    Ok(rows)
}

/// `p,N,coherence,rip_bound`
pub fn write_diagnostics_csv<W: Write>(rows: &[DiagnosticRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["p", "N", "coherence", "rip_bound"])?;
    for r in rows {
        wr.write_record([
            r.p.to_string(),
            r.n.to_string(),
            format!("{:e}", r.coherence),
            format!("{:e}", r.rip_bound),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

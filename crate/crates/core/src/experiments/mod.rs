//! Simulation scenarios, replications and benchmark statistics.

mod functions;
mod rng;
mod scenario;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{build_collection, DataSet, ModelCollection, ScenarioOracle};
use crate::selectors::{run_prepared, FoldCache, Prepared, SelectorSpec};

pub use functions::{NoiseFn, RegressionFn, HIS6_VALUES};
pub use rng::{Purpose, StreamKey};
pub use scenario::{RegressionScenario, PRESET_NAMES};

/// Draws `n` i.i.d. pairs with `X ~ U[0, 1)`, `Y = s(X) + sigma(X) eps`.
pub fn generate<R: Rng + ?Sized>(scenario: &RegressionScenario, rng: &mut R) -> DataSet {
    let mut xs = Vec::with_capacity(scenario.n);
    let mut ys = Vec::with_capacity(scenario.n);
    for _ in 0..scenario.n {
        let x: f64 = rng.gen();
        let eps: f64 = rng.sample(StandardNormal);
        xs.push(x);
        ys.push(scenario.s.eval(x) + scenario.sigma.eval(x) * eps);
    }
    DataSet::new(xs, ys).expect("generated data is valid")
}

/// A scenario with its model collection and exact cell truths.
#[derive(Debug)]
pub struct Bench {
    pub scenario: RegressionScenario,
    pub collection: ModelCollection,
    pub oracle: ScenarioOracle,
}

impl Bench {
    pub fn new(scenario: RegressionScenario) -> Result<Self> {
        let collection = build_collection(scenario.collection, scenario.n)?;
        Self::with_collection(scenario, collection)
    }

    pub fn with_collection(scenario: RegressionScenario, collection: ModelCollection) -> Result<Self> {
        let oracle = ScenarioOracle::new(&scenario, &collection)?;
        Ok(Bench { scenario, collection, oracle })
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::new(RegressionScenario::preset(name)?)
    }
}

/// What one selector did in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorRun {
    pub chosen: usize,
    pub loss: f64,
    pub drops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub selectors: Vec<SelectorRun>,
    /// `min_m ℓ(s, ŝ_m)` over the admissible models.
    pub oracle_loss: f64,
    /// Excess loss of every collection model; `None` when inadmissible.
    pub model_losses: Vec<Option<f64>>,
}

/// Draws one dataset and runs every selector on it.
pub fn run_replication(bench: &Bench, selectors: &[SelectorSpec], seed: u64, rep: u64) -> Result<ReplicationResult> {
    let key = StreamKey::new(seed, rep);
    let data = generate(&bench.scenario, &mut key.rng(Purpose::Data, 0));
    let prep = Prepared::new(&data, &bench.collection)?;
    let mut model_losses = vec![None; bench.collection.len()];
    for (&k, f) in prep.admissible.iter().zip(&prep.fits) {
        model_losses[k] = Some(bench.oracle.model(k)?.excess_loss(f)?);
    }
    let oracle_loss = model_losses.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut folds = FoldCache::new(key);
    let mut runs = Vec::with_capacity(selectors.len());
    for spec in selectors {
        let out = run_prepared(spec, &prep, Some(&bench.oracle), &mut folds)?;
        let loss = model_losses[out.chosen].ok_or(Error::NoAdmissibleModel)?;
        runs.push(SelectorRun { chosen: out.chosen, loss, drops: out.dropped.len() });
    }
    Ok(ReplicationResult { selectors: runs, oracle_loss, model_losses })
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config { key: "threads".into(), reason: e.to_string() })?;
            Ok(pool.install(f))
        }
    }
}

/// Runs replications `0..n_reps` in parallel; results come back in order.
pub fn run_replications(
    bench: &Bench,
    selectors: &[SelectorSpec],
    n_reps: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<ReplicationResult>> {
    with_pool(threads, || {
        (0..n_reps as u64)
            .into_par_iter()
            .map(|rep| run_replication(bench, selectors, seed, rep))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Accuracy indexes of one selector over `N` replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub scenario: String,
    pub selector: String,
    pub v: Option<usize>,
    pub c: Option<f64>,
    pub overpen: f64,
    /// `mean(loss chosen) / mean(oracle loss)`
    pub c_or: f64,
    pub se_or: f64,
    /// `mean(loss chosen / oracle loss)`
    pub c_path_or: f64,
    pub se_path_or: f64,
    /// `mean(loss chosen) / min_m mean(loss of m)`
    pub c_prime_or: f64,
    pub n_reps: usize,
    /// Model drops summed over replications.
    pub drops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub scenario: String,
    pub seed: u64,
    pub n_reps: usize,
    pub rows: Vec<BenchmarkRow>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation over `√N`.
fn std_err(v: &[f64]) -> f64 {
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (v.len() - 1) as f64).sqrt() / (v.len() as f64).sqrt()
}

/// Aggregates replications into a table.
///
/// `C'_or` compares against the best mean loss among the models that were
/// admissible in every replication.
pub fn summarize(bench: &Bench, selectors: &[SelectorSpec], reps: &[ReplicationResult], seed: u64) -> Result<BenchmarkTable> {
    let n_reps = reps.len();
    if n_reps < 2 {
        return Err(Error::InvalidSize { n: n_reps, what: "benchmark replications (need N >= 2)".into() });
    }
    let oracle: Vec<f64> = reps.iter().map(|r| r.oracle_loss).collect();
    let mean_oracle = mean(&oracle);
    let mut best_model_mean = f64::INFINITY;
    for k in 0..bench.collection.len() {
        let losses: Option<Vec<f64>> = reps.iter().map(|r| r.model_losses[k]).collect();
        if let Some(l) = losses {
            best_model_mean = best_model_mean.min(mean(&l));
        }
    }
    let mut rows = Vec::with_capacity(selectors.len());
    for (s, spec) in selectors.iter().enumerate() {
        let (v, c) = spec.resolve(bench.scenario.n)?;
        let chosen: Vec<f64> = reps.iter().map(|r| r.selectors[s].loss).collect();
        let scaled: Vec<f64> = chosen.iter().map(|l| l / mean_oracle).collect();
        let path: Vec<f64> = reps.iter().map(|r| r.selectors[s].loss / r.oracle_loss).collect();
        rows.push(BenchmarkRow {
            scenario: bench.scenario.name.clone(),
            selector: spec.to_string(),
            v,
            c,
            overpen: spec.overpen,
            c_or: mean(&chosen) / mean_oracle,
            se_or: std_err(&scaled),
            c_path_or: mean(&path),
            se_path_or: std_err(&path),
            c_prime_or: mean(&chosen) / best_model_mean,
            n_reps,
            drops: reps.iter().map(|r| r.selectors[s].drops).sum(),
        });
    }
    Ok(BenchmarkTable { scenario: bench.scenario.name.clone(), seed, n_reps, rows })
}

/// Runs `n_reps` replications and aggregates them.
pub fn benchmark(
    bench: &Bench,
    selectors: &[SelectorSpec],
    n_reps: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<BenchmarkTable> {
    if n_reps < 2 {
        return Err(Error::InvalidSize { n: n_reps, what: "benchmark replications (need N >= 2)".into() });
    }
    let reps = run_replications(bench, selectors, n_reps, seed, threads)?;
    summarize(bench, selectors, &reps, seed)
}

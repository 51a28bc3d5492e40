//! Exact losses against a known scenario, by quadrature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{FittedHistogram, HistogramModel, ModelCollection};
use crate::error::{Error, Result};
use crate::experiments::RegressionScenario;
use crate::quadrature::{integrate, integrate_with_floor, REL_TOL};
use crate::selectors::{ideal_expected_pen_truth, DeltaCache};

/// `(1/|I|) ∫_I s`.
pub fn true_cell_mean(scenario: &RegressionScenario, a: f64, b: f64) -> Result<f64> {
    let s = &scenario.s;
    Ok(integrate(|x| s.eval(x), a, b, &scenario.breakpoints())? / (b - a))
}

/// `(1/|I|) ∫_I sigma^2`, the noise variance on the cell.
pub fn sigma_lambda_sq(scenario: &RegressionScenario, a: f64, b: f64) -> Result<f64> {
    let sigma = &scenario.sigma;
    Ok(integrate(|x| sigma.eval(x).powi(2), a, b, &scenario.breakpoints())? / (b - a))
}

/// Exact quantities of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTruth {
    pub length: f64,
    /// `β_λ`
    pub beta: f64,
    /// `∫_I (s - β_λ)^2`
    pub bias: f64,
    /// `σ_λ^2`
    pub sigma_sq: f64,
}

impl CellTruth {
    pub fn new(scenario: &RegressionScenario, a: f64, b: f64) -> Result<Self> {
        let beta = true_cell_mean(scenario, a, b)?;
        let s = &scenario.s;
        // near a flat extremum `s - beta` cancels, so accept an absolute error
        // of REL_TOL on the cell's scale of `s^2`
        let floor = REL_TOL * (b - a) * beta.powi(2).max(1.0);
        let bias = integrate_with_floor(|x| (s.eval(x) - beta).powi(2), a, b, &scenario.breakpoints(), floor)?;
        let sigma_sq = sigma_lambda_sq(scenario, a, b)?;
        Ok(CellTruth { length: b - a, beta, bias, sigma_sq })
    }

    /// `Var(Y | X ∈ I)`: noise plus the spread of `s` over the cell.
    pub fn conditional_variance(&self) -> f64 {
        self.sigma_sq + self.bias / self.length
    }
}

/// Cell truths of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTruth {
    pub cells: Vec<CellTruth>,
    /// `ℓ(s, s_m)`
    pub bias: f64,
}

impl ModelTruth {
    pub fn new(scenario: &RegressionScenario, model: &HistogramModel) -> Result<Self> {
        let cells = model
            .partition()
            .cells()
            .map(|(a, b)| CellTruth::new(scenario, a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_cells(cells))
    }

    fn from_cells(cells: Vec<CellTruth>) -> Self {
        let bias = cells.iter().map(|c| c.bias).sum();
        ModelTruth { cells, bias }
    }

    /// `Σ_λ p_λ (β̂_λ - β_λ)^2 + ℓ(s, s_m)`.
    pub fn excess_loss(&self, fit: &FittedHistogram) -> Result<f64> {
        let means = fit.defined_means()?;
        let var: f64 = self
            .cells
            .iter()
            .zip(&means)
            .map(|(c, m)| c.length * (m - c.beta).powi(2))
            .sum();
        Ok(var + self.bias)
    }

    /// `Σ_λ φ̂_λ (β̂_λ - β_λ)^2`.
    pub fn p2(&self, fit: &FittedHistogram) -> Result<f64> {
        let means = fit.defined_means()?;
        let n = fit.n as f64;
        Ok(self
            .cells
            .iter()
            .zip(&means)
            .zip(&fit.counts)
            .map(|((c, m), &k)| k as f64 / n * (m - c.beta).powi(2))
            .sum())
    }
}

pub fn bias(scenario: &RegressionScenario, model: &HistogramModel) -> Result<f64> {
    Ok(ModelTruth::new(scenario, model)?.bias)
}

pub fn excess_loss(fit: &FittedHistogram, scenario: &RegressionScenario) -> Result<f64> {
    fit.defined_means()?;
    ModelTruth::new(scenario, &fit.model)?.excess_loss(fit)
}

pub fn p2_diagnostic(fit: &FittedHistogram, scenario: &RegressionScenario) -> Result<f64> {
    fit.defined_means()?;
    ModelTruth::new(scenario, &fit.model)?.p2(fit)
}

/// Cell truths for every model of a collection, computed once.
///
/// Cells shared between models (the halves of two-bin partitions, for
/// instance) are integrated only once.
#[derive(Debug)]
pub struct ScenarioOracle {
    pub scenario: RegressionScenario,
    truths: Vec<ModelTruth>,
    ideal_pens: Mutex<HashMap<usize, Arc<Vec<f64>>>>,
}

impl ScenarioOracle {
    pub fn new(scenario: &RegressionScenario, collection: &ModelCollection) -> Result<Self> {
        let mut cache: HashMap<(u64, u64), CellTruth> = HashMap::new();
        let mut truths = Vec::with_capacity(collection.len());
        for model in &collection.models {
            let mut cells = Vec::with_capacity(model.dims());
            for (a, b) in model.partition().cells() {
                let key = (a.to_bits(), b.to_bits());
                let truth = match cache.get(&key) {
                    Some(t) => *t,
                    None => {
                        let t = CellTruth::new(scenario, a, b)?;
                        cache.insert(key, t);
                        t
                    }
                };
                cells.push(truth);
            }
            truths.push(ModelTruth::from_cells(cells));
        }
        Ok(ScenarioOracle { scenario: scenario.clone(), truths, ideal_pens: Mutex::new(HashMap::new()) })
    }

    /// Expected ideal penalty of every model for sample size `n`, computed
    /// on first use.
    pub fn ideal_expected_pens(&self, n: usize) -> Result<Arc<Vec<f64>>> {
        let mut memo = self.ideal_pens.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(p) = memo.get(&n) {
            return Ok(Arc::clone(p));
        }
        let mut cache = DeltaCache::default();
        let pens = self
            .truths
            .iter()
            .map(|t| ideal_expected_pen_truth(t, n, &mut cache))
            .collect::<Result<Vec<f64>>>()?;
        let pens = Arc::new(pens);
        memo.insert(n, Arc::clone(&pens));
        Ok(pens)
    }

    pub fn len(&self) -> usize {
        self.truths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truths.is_empty()
    }

    pub fn model(&self, id: usize) -> Result<&ModelTruth> {
        self.truths
            .get(id)
            .ok_or_else(|| Error::InvalidPartition(format!("model id {id} not in the collection")))
    }
}

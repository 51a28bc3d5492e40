//! Model-selection criteria and penalties.

use std::collections::HashMap;

use crate::binom::{ideal_delta, r1_r2_vfold, BinomialSpec, VFoldCellSpec};
use crate::error::{Error, Result};
use crate::experiments::RegressionScenario;
use crate::histogram::{fit, DataSet, FittedHistogram, HistogramModel, ModelTruth};
use crate::resampling::{train_fit_cells, FoldAssignment};

/// Risks of the training fit `ŝ^{(-j)}` for every block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRisks {
    /// `P_n^{(j)} γ(ŝ^{(-j)})`, on the held-out block; `None` for an empty block.
    pub validation: Vec<Option<f64>>,
    /// `P_n γ(ŝ^{(-j)})`, on the whole sample.
    pub full: Vec<f64>,
    /// `P_n^{(-j)} γ(ŝ^{(-j)})`, on the training sample.
    pub training: Vec<f64>,
}

impl FoldRisks {
    pub fn compute(model: &HistogramModel, cells: &[usize], ys: &[f64], folds: &FoldAssignment) -> Result<Self> {
        if folds.n() != ys.len() {
            return Err(Error::InvalidData("fold assignment does not match the data".into()));
        }
        let n = ys.len();
        let mut out = FoldRisks {
            validation: Vec::with_capacity(folds.v),
            full: Vec::with_capacity(folds.v),
            training: Vec::with_capacity(folds.v),
        };
        for j in 0..folds.v {
            let f = train_fit_cells(model, cells, ys, folds, j)?;
            let mut held = (0.0, 0usize);
            let mut kept = 0.0;
            for (i, (&c, &y)) in cells.iter().zip(ys).enumerate() {
                let r = y - f.means[c].unwrap();
                if folds.block_of[i] == j {
                    held.0 += r * r;
                    held.1 += 1;
                } else {
                    kept += r * r;
                }
            }
            out.validation.push((held.1 > 0).then(|| held.0 / held.1 as f64));
            out.full.push((held.0 + kept) / n as f64);
            out.training.push(kept / (n - held.1) as f64);
        }
        Ok(out)
    }

    pub fn crit_vfcv(&self) -> Result<f64> {
        let mut acc = 0.0;
        for v in &self.validation {
            acc += v.ok_or_else(|| Error::InvalidData("empty validation block".into()))?;
        }
        Ok(acc / self.validation.len() as f64)
    }

    pub fn mean_full(&self) -> f64 {
        self.full.iter().sum::<f64>() / self.full.len() as f64
    }

    pub fn pen_vf(&self, c: f64) -> f64 {
        let v = self.full.len() as f64;
        let gap: f64 = self.full.iter().zip(&self.training).map(|(f, t)| f - t).sum();
        c / v * gap
    }
}

fn fold_risks(data: &DataSet, model: &HistogramModel, folds: &FoldAssignment) -> Result<FoldRisks> {
    FoldRisks::compute(model, &model.assign(data.xs()), data.ys(), folds)
}

/// V-fold cross-validation: mean held-out risk of the training fits.
pub fn crit_vfcv(data: &DataSet, model: &HistogramModel, folds: &FoldAssignment) -> Result<f64> {
    fold_risks(data, model, folds)?.crit_vfcv()
}

/// Cross-validation with the bias correction `P_nγ(ŝ) - mean_j P_nγ(ŝ^{(-j)})`.
pub fn crit_corrected_vfcv(data: &DataSet, model: &HistogramModel, folds: &FoldAssignment) -> Result<f64> {
    let fr = fold_risks(data, model, folds)?;
    let risk = fit(data, model).training_risk()?;
    Ok(fr.crit_vfcv()? + risk - fr.mean_full())
}

/// `(C/V) Σ_j [P_nγ(ŝ^{(-j)}) - P_n^{(-j)}γ(ŝ^{(-j)})]`.
pub fn pen_vf_general(data: &DataSet, model: &HistogramModel, folds: &FoldAssignment, c: f64) -> Result<f64> {
    Ok(fold_risks(data, model, folds)?.pen_vf(c))
}

/// V-fold penalty of one fixed partition, computed cell by cell with the
/// weights `W_i = V/(V-1) 1{i ∉ B_j}`:
/// `C Σ_λ (E_W[φ̂_λ (β̂^W_λ - β̂_λ)^2 | W_λ > 0] + E_W[φ̂^W_λ (β̂^W_λ - β̂_λ)^2])`.
///
/// Equals [`pen_vf_general`] whenever the blocks have equal sizes and no
/// training sample empties a cell; unlike it, stays defined otherwise.
pub fn pen_vf_conditional(data: &DataSet, model: &HistogramModel, folds: &FoldAssignment, c: f64) -> Result<f64> {
    if folds.n() != data.len() {
        return Err(Error::InvalidData("fold assignment does not match the data".into()));
    }
    let cells = model.assign(data.xs());
    let f = FittedHistogram::from_cells(model, &cells, data.ys(), |_| true);
    Ok(conditional_cells(&f, &cells, data.ys(), &folds.members(), c)?.0)
}

/// Number of `(cell, block)` pairs whose training sample misses the cell.
pub fn emptied_training_cells(data: &DataSet, model: &HistogramModel, folds: &FoldAssignment) -> Result<usize> {
    let cells = model.assign(data.xs());
    let f = FittedHistogram::from_cells(model, &cells, data.ys(), |_| true);
    Ok(conditional_cells(&f, &cells, data.ys(), &folds.members(), 1.0)?.1)
}

/// Conditional V-fold penalty from a full-sample fit and the block members;
/// also returns how many `(cell, block)` pairs were skipped.
pub(crate) fn conditional_cells(
    f: &FittedHistogram,
    cells: &[usize],
    ys: &[f64],
    blocks: &[Vec<usize>],
    c: f64,
) -> Result<(f64, usize)> {
    let v = blocks.len();
    let means = f.defined_means()?;
    let d = f.dims();
    let mut dev = vec![0.0; d];
    let mut wdev = vec![0.0; d];
    let mut skipped = vec![0usize; d];
    let mut held = vec![(0usize, 0.0); d];
    let mut touched = Vec::new();
    for block in blocks {
        for &i in block {
            let cell = cells[i];
            if held[cell].0 == 0 {
                touched.push(cell);
            }
            held[cell].0 += 1;
            held[cell].1 += ys[i];
        }
        for &cell in &touched {
            let (h, hs) = held[cell];
            let t = f.counts[cell] - h;
            if t == 0 {
                skipped[cell] += 1;
            } else {
                let diff = (f.sums[cell] - hs) / t as f64 - means[cell];
                dev[cell] += diff * diff;
                wdev[cell] += t as f64 * diff * diff;
            }
            held[cell] = (0, 0.0);
        }
        touched.clear();
    }
    let n = f.n as f64;
    let mut acc = 0.0;
    for cell in 0..d {
        acc += f.counts[cell] as f64 / n * dev[cell] / (v - skipped[cell]) as f64;
        acc += wdev[cell] / ((v - 1) as f64 * n);
    }
    Ok((c * acc, skipped.iter().sum()))
}

/// Expectation of the V-fold penalty over stratified fold assignments:
/// `(C/n) Σ_λ (R_1 + R_2) Σ_{i∈λ} (y_i - ȳ_λ)^2 / (n_λ - 1)`.
pub fn pen_vf_closed(fit: &FittedHistogram, v: usize, c: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (cell, (&k, &m2)) in fit.counts.iter().zip(&fit.centered_sq).enumerate() {
        if k < 2 {
            return Err(Error::CellTooSmall { model: fit.model.id, cell, count: k });
        }
        let (r1, r2) = r1_r2_vfold(VFoldCellSpec::new(k as u64, v as u64)?)?;
        acc += (r1 + r2) * m2 / (k - 1) as f64;
    }
    Ok(c * acc / fit.n as f64)
}

/// `2 σ̂^2 D / n`.
pub fn mallows_pen(model: &HistogramModel, n: usize, sigma_hat_sq: f64) -> f64 {
    2.0 * sigma_hat_sq * model.dims() as f64 / n as f64
}

/// Difference-based noise estimate: sort by `x`, pair consecutive points,
/// `σ̂^2 = (1/n) Σ_pairs (y_a - y_b)^2`.
pub fn variance_estimator(data: &DataSet) -> Result<f64> {
    let n = data.len();
    if n % 2 == 1 {
        return Err(Error::OddSampleSize(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| data.xs()[a].total_cmp(&data.xs()[b]));
    let ys = data.ys();
    let total: f64 = order.chunks_exact(2).map(|p| (ys[p[0]] - ys[p[1]]).powi(2)).sum();
    Ok(total / n as f64)
}

/// Mallows' penalty with the true mean noise variance.
pub fn mallows_star_pen(scenario: &RegressionScenario, model: &HistogramModel, n: usize) -> f64 {
    2.0 * scenario.sigma.mean_variance() * model.dims() as f64 / n as f64
}

/// Memo of `ideal_delta(B(n, p))` keyed by `p`.
#[derive(Debug, Default)]
pub struct DeltaCache {
    map: HashMap<(usize, u64), f64>,
}

impl DeltaCache {
    pub fn get(&mut self, n: usize, p: f64) -> Result<f64> {
        if let Some(d) = self.map.get(&(n, p.to_bits())) {
            return Ok(*d);
        }
        let d = ideal_delta(BinomialSpec::new(n as u64, p)?);
        self.map.insert((n, p.to_bits()), d);
        Ok(d)
    }
}

/// `(1/n) Σ_λ (2 + δ_{n,p_λ}) Var(Y | X ∈ I_λ)` from precomputed cell truths.
pub fn ideal_expected_pen_truth(truth: &ModelTruth, n: usize, cache: &mut DeltaCache) -> Result<f64> {
    let mut acc = 0.0;
    for cell in &truth.cells {
        acc += (2.0 + cache.get(n, cell.length)?) * cell.conditional_variance();
    }
    Ok(acc / n as f64)
}

/// Expectation of the ideal penalty of `model` for samples of size `n`.
pub fn ideal_expected_pen(scenario: &RegressionScenario, model: &HistogramModel, n: usize) -> Result<f64> {
    ideal_expected_pen_truth(&ModelTruth::new(scenario, model)?, n, &mut DeltaCache::default())
}

use super::{DataSet, HistogramModel, ModelCollection};
use crate::error::{Error, Result};

/// Per-cell sufficient statistics of a least-squares histogram fit.
///
/// Cells without observations keep `means[k] == None`; whether that is an
/// error is up to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedHistogram {
    pub model: HistogramModel,
    /// Number of observations the fit was computed from.
    pub n: usize,
    pub counts: Vec<usize>,
    pub sums: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub means: Vec<Option<f64>>,
    /// Within-cell centered sum of squares `Σ (y_i - mean)^2`.
    pub centered_sq: Vec<f64>,
}

impl FittedHistogram {
    /// Fits from precomputed cell indices, using only observations with `keep(i)`.
    pub fn from_cells<F: Fn(usize) -> bool>(
        model: &HistogramModel,
        cells: &[usize],
        ys: &[f64],
        keep: F,
    ) -> Self {
        let d = model.dims();
        let mut counts = vec![0usize; d];
        let mut sums = vec![0.0; d];
        let mut sum_sq = vec![0.0; d];
        let mut n = 0;
        for (i, (&c, &y)) in cells.iter().zip(ys).enumerate() {
            if keep(i) {
                counts[c] += 1;
                sums[c] += y;
                sum_sq[c] += y * y;
                n += 1;
            }
        }
        let means: Vec<Option<f64>> = counts
            .iter()
            .zip(&sums)
            .map(|(&k, &s)| (k > 0).then(|| s / k as f64))
            .collect();
        let mut centered_sq = vec![0.0; d];
        for (i, (&c, &y)) in cells.iter().zip(ys).enumerate() {
            if keep(i) {
                let r = y - means[c].unwrap();
                centered_sq[c] += r * r;
            }
        }
        FittedHistogram { model: model.clone(), n, counts, sums, sum_sq, means, centered_sq }
    }

    pub fn dims(&self) -> usize {
        self.counts.len()
    }

    pub fn has_empty_cell(&self) -> bool {
        self.counts.iter().any(|&k| k == 0)
    }

    pub fn min_count(&self) -> usize {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    /// Cell means, or an error naming the model if some cell is empty.
    pub fn defined_means(&self) -> Result<Vec<f64>> {
        self.means
            .iter()
            .map(|m| m.ok_or(Error::UndefinedEstimator { model: self.model.id }))
            .collect()
    }

    pub fn predict(&self, x: f64) -> Option<f64> {
        self.means[self.model.partition().cell_of(x)]
    }

    /// Risk on the observations the fit was computed from.
    pub fn training_risk(&self) -> Result<f64> {
        if self.has_empty_cell() {
            return Err(Error::UndefinedEstimator { model: self.model.id });
        }
        Ok(self.centered_sq.iter().sum::<f64>() / self.n as f64)
    }
}

pub fn fit(data: &DataSet, model: &HistogramModel) -> FittedHistogram {
    let cells = model.assign(data.xs());
    FittedHistogram::from_cells(model, &cells, data.ys(), |_| true)
}

/// `(1/n) Σ_i (ŝ(x_i) - y_i)^2` over `data`.
pub fn empirical_risk(fit: &FittedHistogram, data: &DataSet) -> Result<f64> {
    let means = fit.defined_means()?;
    let p = fit.model.partition();
    let total: f64 = data
        .xs()
        .iter()
        .zip(data.ys())
        .map(|(&x, &y)| {
            let r = means[p.cell_of(x)] - y;
            r * r
        })
        .sum();
    Ok(total / data.len() as f64)
}

/// Models whose every cell holds at least `threshold` observations, in order.
pub fn filter_admissible<'a>(
    data: &DataSet,
    collection: &'a ModelCollection,
    threshold: usize,
) -> Result<Vec<&'a HistogramModel>> {
    let kept: Vec<&HistogramModel> = collection
        .models
        .iter()
        .filter(|m| {
            let mut counts = vec![0usize; m.dims()];
            for &x in data.xs() {
                counts[m.partition().cell_of(x)] += 1;
            }
            counts.iter().all(|&k| k >= threshold)
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyAdmissibleSet { threshold });
    }
    Ok(kept)
}

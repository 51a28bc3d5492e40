//! Histogram models on `[0, 1)` and their least-squares fits.

mod data;
mod fit;
mod oracle;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use data::DataSet;
pub use fit::{empirical_risk, filter_admissible, fit, FittedHistogram};
pub use oracle::{
    bias, excess_loss, p2_diagnostic, sigma_lambda_sq, true_cell_mean, CellTruth, ModelTruth,
    ScenarioOracle,
};

/// Default minimum cell count for a model to be considered.
pub const ADMISSIBLE_THRESHOLD: usize = 3;

/// A partition of `[0, 1)` into half-open cells `[b_k, b_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition1D {
    breakpoints: Vec<f64>,
}

impl Partition1D {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidPartition("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidPartition("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPartition("breakpoints must be strictly increasing".into()));
        }
        Ok(Partition1D { breakpoints })
    }

    /// `d` cells of equal length.
    pub fn regular(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPartition("zero cells".into()));
        }
        let mut bp: Vec<f64> = (0..d).map(|j| j as f64 / d as f64).collect();
        bp.push(1.0);
        Partition1D::new(bp)
    }

    /// `d1` equal cells on `[0, 1/2)` followed by `d2` equal cells on `[1/2, 1)`.
    pub fn two_bin(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidPartition("zero cells".into()));
        }
        let mut bp: Vec<f64> = (0..d1).map(|j| 0.5 * j as f64 / d1 as f64).collect();
        bp.extend((0..d2).map(|j| 0.5 + 0.5 * j as f64 / d2 as f64));
        bp.push(1.0);
        Partition1D::new(bp)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn dims(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k], self.breakpoints[k + 1])
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Index of the cell containing `x`; values outside `[0, 1)` are clamped.
    pub fn cell_of(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.dims() - 1)
    }
}

/// How a model's partition was built, for labels and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelShape {
    Regular(usize),
    TwoBin(usize, usize),
    Custom,
}

impl fmt::Display for ModelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelShape::Regular(d) => write!(f, "reg{d}"),
            ModelShape::TwoBin(a, b) => write!(f, "two{a}x{b}"),
            ModelShape::Custom => f.write_str("custom"),
        }
    }
}

/// The model `S_m`: functions constant on each cell of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramModel {
    pub id: usize,
    pub shape: ModelShape,
    partition: Arc<Partition1D>,
}

impl HistogramModel {
    pub fn new(id: usize, shape: ModelShape, partition: Partition1D) -> Self {
        HistogramModel { id, shape, partition: Arc::new(partition) }
    }

    pub fn regular(id: usize, d: usize) -> Result<Self> {
        Ok(Self::new(id, ModelShape::Regular(d), Partition1D::regular(d)?))
    }

    pub fn two_bin(id: usize, d1: usize, d2: usize) -> Result<Self> {
        Ok(Self::new(id, ModelShape::TwoBin(d1, d2), Partition1D::two_bin(d1, d2)?))
    }

    pub fn partition(&self) -> &Partition1D {
        &self.partition
    }

    pub fn dims(&self) -> usize {
        self.partition.dims()
    }

    /// Cell index of every observation.
    pub fn assign(&self, xs: &[f64]) -> Vec<usize> {
        xs.iter().map(|&x| self.partition.cell_of(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollectionKind {
    Regular,
    TwoBinSizes,
    Dyadic,
    DyadicTwoBinSizes,
}

impl fmt::Display for CollectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CollectionKind::Regular => "regular",
            CollectionKind::TwoBinSizes => "two-bin",
            CollectionKind::Dyadic => "dyadic",
            CollectionKind::DyadicTwoBinSizes => "dyadic-two-bin",
        })
    }
}

impl FromStr for CollectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Ok(CollectionKind::Regular),
            "two-bin" | "twobinsizes" => Ok(CollectionKind::TwoBinSizes),
            "dyadic" => Ok(CollectionKind::Dyadic),
            "dyadic-two-bin" | "dyadictwobinsizes" => Ok(CollectionKind::DyadicTwoBinSizes),
            _ => Err(Error::InvalidPartition(format!("unknown collection kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelCollection {
    pub kind: CollectionKind,
    pub n: usize,
    pub models: Vec<HistogramModel>,
}

impl ModelCollection {
    /// A collection holding arbitrary models; ids are reassigned by position.
    pub fn custom(kind: CollectionKind, n: usize, models: Vec<HistogramModel>) -> Self {
        let models = models
            .into_iter()
            .enumerate()
            .map(|(id, m)| HistogramModel { id, ..m })
            .collect();
        ModelCollection { kind, n, models }
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

fn floor_ratio_ln(n: usize, factor: f64) -> usize {
    (n as f64 / (factor * (n as f64).ln())).floor() as usize
}

fn log2_exact(n: usize) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

/// Builds the candidate models for sample size `n`.
pub fn build_collection(kind: CollectionKind, n: usize) -> Result<ModelCollection> {
    let invalid = |what: &str| Error::InvalidSize { n, what: what.to_string() };
    if n < 8 {
        return Err(invalid("collections (need n >= 8)"));
    }
    let mut models = Vec::new();
    match kind {
        CollectionKind::Regular => {
            for d in 1..=floor_ratio_ln(n, 1.0) {
                models.push(HistogramModel::regular(models.len(), d)?);
            }
        }
        CollectionKind::TwoBinSizes => {
            models.push(HistogramModel::regular(0, 1)?);
            let dmax = floor_ratio_ln(n, 2.0);
            for d1 in 1..=dmax {
                for d2 in 1..=dmax {
                    models.push(HistogramModel::two_bin(models.len(), d1, d2)?);
                }
            }
        }
        CollectionKind::Dyadic => {
            let k = log2_exact(n).ok_or_else(|| invalid("dyadic collections (need a power of 2)"))?;
            for j in 0..k {
                models.push(HistogramModel::regular(models.len(), 1 << j)?);
            }
        }
        CollectionKind::DyadicTwoBinSizes => {
            let k = log2_exact(n).ok_or_else(|| invalid("dyadic collections (need a power of 2)"))?;
            models.push(HistogramModel::regular(0, 1)?);
            for k1 in 0..k - 1 {
                for k2 in 0..k - 1 {
                    models.push(HistogramModel::two_bin(models.len(), 1 << k1, 1 << k2)?);
                }
            }
        }
    }
    Ok(ModelCollection { kind, n, models })
}

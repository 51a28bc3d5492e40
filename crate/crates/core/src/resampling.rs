//! Fold partitions and training-fold refits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{DataSet, FittedHistogram, HistogramModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldKind {
    Regular,
    Stratified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub block_of: Vec<usize>,
    pub v: usize,
    pub kind: FoldKind,
}

impl FoldAssignment {
    /// Builds an assignment from explicit block labels.
    pub fn from_blocks(block_of: Vec<usize>, v: usize, kind: FoldKind) -> Result<Self> {
        let n = block_of.len();
        if v < 2 || v > n {
            return Err(Error::InvalidV { v, n });
        }
        if block_of.iter().any(|&b| b >= v) {
            return Err(Error::InvalidData(format!("block label outside 0..{v}")));
        }
        Ok(FoldAssignment { block_of, v, kind })
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.v];
        for &b in &self.block_of {
            sizes[b] += 1;
        }
        sizes
    }

    pub fn block(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.block_of.iter().enumerate().filter(move |(_, &b)| b == j).map(|(i, _)| i)
    }

    /// Indices of every block, in increasing order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.v];
        for (i, &b) in self.block_of.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    /// True when every block holds exactly `n / V` points.
    pub fn equal_blocks(&self) -> bool {
        self.n() % self.v == 0 && self.block_sizes().iter().all(|&s| s == self.n() / self.v)
    }
}

fn check_v(n: usize, v: usize) -> Result<()> {
    if v < 2 || v > n {
        return Err(Error::InvalidV { v, n });
    }
    Ok(())
}

/// Deals `indices` round-robin into `v` blocks after a shuffle and a random
/// starting block.
fn deal<R: Rng + ?Sized>(indices: &mut [usize], v: usize, block_of: &mut [usize], rng: &mut R) {
    indices.shuffle(rng);
    let start = rng.gen_range(0..v);
    for (pos, &i) in indices.iter().enumerate() {
        block_of[i] = (start + pos) % v;
    }
}

/// Random partition of `0..n` into `v` blocks whose sizes differ by at most one.
pub fn regular_folds<R: Rng + ?Sized>(n: usize, v: usize, rng: &mut R) -> Result<FoldAssignment> {
    check_v(n, v)?;
    let mut block_of = vec![0; n];
    let mut idx: Vec<usize> = (0..n).collect();
    deal(&mut idx, v, &mut block_of, rng);
    Ok(FoldAssignment { block_of, v, kind: FoldKind::Regular })
}

/// Random partition balanced within every cell of `model`.
pub fn stratified_folds<R: Rng + ?Sized>(
    data: &DataSet,
    model: &HistogramModel,
    v: usize,
    rng: &mut R,
) -> Result<FoldAssignment> {
    let n = data.len();
    check_v(n, v)?;
    let cells = model.assign(data.xs());
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); model.dims()];
    for (i, &c) in cells.iter().enumerate() {
        members[c].push(i);
    }
    if let Some(cell) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCell { model: model.id, cell });
    }
    let mut block_of = vec![0; n];
    for m in members.iter_mut() {
        deal(m, v, &mut block_of, rng);
    }
    Ok(FoldAssignment { block_of, v, kind: FoldKind::Stratified })
}

/// Fit on the observations outside block `j`, from precomputed cell indices.
pub fn train_fit_cells(
    model: &HistogramModel,
    cells: &[usize],
    ys: &[f64],
    folds: &FoldAssignment,
    j: usize,
) -> Result<FittedHistogram> {
    if j >= folds.v {
        return Err(Error::InvalidData(format!("block {j} out of range for V={}", folds.v)));
    }
    let f = FittedHistogram::from_cells(model, cells, ys, |i| folds.block_of[i] != j);
    if f.has_empty_cell() {
        return Err(Error::UndefinedTrainingFit { model: model.id, block: j });
    }
    Ok(f)
}

pub fn train_fit(
    data: &DataSet,
    model: &HistogramModel,
    folds: &FoldAssignment,
    j: usize,
) -> Result<FittedHistogram> {
    if folds.n() != data.len() {
        return Err(Error::InvalidData("fold assignment does not match the data".into()));
    }
    let cells = model.assign(data.xs());
    train_fit_cells(model, &cells, data.ys(), folds, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::fit;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn regular_sizes() {
        let f = regular_folds(10, 5, &mut rng(1)).unwrap();
        assert_eq!(f.block_sizes(), vec![2; 5]);
        let mut sizes = regular_folds(10, 4, &mut rng(2)).unwrap().block_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 3, 3]);
        let loo = regular_folds(7, 7, &mut rng(3)).unwrap();
        assert_eq!(loo.block_sizes(), vec![1; 7]);
    }

    #[test]
    fn invalid_v() {
        assert_eq!(regular_folds(5, 1, &mut rng(0)), Err(Error::InvalidV { v: 1, n: 5 }));
        assert_eq!(regular_folds(5, 6, &mut rng(0)), Err(Error::InvalidV { v: 6, n: 5 }));
    }

    #[test]
    fn stratified_cell_of_seven() {
        let xs: Vec<f64> = (0..7).map(|i| i as f64 / 14.0).chain((0..9).map(|i| 0.5 + i as f64 / 18.0)).collect();
        let d = DataSet::new(xs, vec![0.0; 16]).unwrap();
        let m = HistogramModel::regular(0, 2).unwrap();
        let f = stratified_folds(&d, &m, 3, &mut rng(4)).unwrap();
        let mut loads = vec![0; 3];
        for i in 0..7 {
            loads[f.block_of[i]] += 1;
        }
        loads.sort();
        assert_eq!(loads, vec![2, 2, 3]);
    }

    #[test]
    fn stratified_rejects_empty_cell() {
        let d = DataSet::new(vec![0.1, 0.2], vec![0.0; 2]).unwrap();
        let m = HistogramModel::regular(5, 2).unwrap();
        assert_eq!(stratified_folds(&d, &m, 2, &mut rng(0)), Err(Error::EmptyCell { model: 5, cell: 1 }));
    }

    #[test]
    fn train_fit_symmetric_halves() {
        let d = DataSet::new(vec![0.1, 0.2, 0.6, 0.7], vec![1.0, 1.0, 3.0, 3.0]).unwrap();
        let m = HistogramModel::regular(0, 2).unwrap();
        let folds = FoldAssignment::from_blocks(vec![0, 1, 0, 1], 2, FoldKind::Stratified).unwrap();
        let full = fit(&d, &m);
        for j in 0..2 {
            assert_eq!(train_fit(&d, &m, &folds, j).unwrap().means, full.means);
        }
    }

    #[test]
    fn train_fit_emptied_cell() {
        let d = DataSet::new(vec![0.1, 0.2, 0.6, 0.7], vec![1.0, 1.0, 3.0, 3.0]).unwrap();
        let m = HistogramModel::regular(2, 2).unwrap();
        let folds = FoldAssignment::from_blocks(vec![0, 0, 1, 1], 2, FoldKind::Regular).unwrap();
        assert_eq!(train_fit(&d, &m, &folds, 1), Err(Error::UndefinedTrainingFit { model: 2, block: 1 }));
    }

    #[test]
    fn same_seed_same_folds() {
        assert_eq!(regular_folds(50, 7, &mut rng(9)).unwrap(), regular_folds(50, 7, &mut rng(9)).unwrap());
    }

    fn design() -> impl Strategy<Value = (DataSet, usize, usize, u64)> {
        (prop::collection::vec(0.0..1.0f64, 4..50), 1usize..5, 2usize..6, any::<u64>()).prop_map(|(xs, d, v, s)| {
            let n = xs.len();
            (DataSet::new(xs, vec![0.0; n]).unwrap(), d, v, s)
        })
    }

    proptest! {
        #[test]
        fn regular_balance(n in 2usize..200, v in 2usize..20, seed in any::<u64>()) {
            prop_assume!(v <= n);
            let f = regular_folds(n, v, &mut rng(seed)).unwrap();
            let target = n as f64 / v as f64;
            prop_assert_eq!(f.block_of.len(), n);
            for s in f.block_sizes() {
                prop_assert!((s as f64 - target).abs() < 1.0);
            }
        }

        #[test]
        fn stratified_balance((d, dims, v, seed) in design()) {
            let m = HistogramModel::regular(0, dims).unwrap();
            let fitted = fit(&d, &m);
            prop_assume!(!fitted.has_empty_cell() && v <= d.len());
            let f = stratified_folds(&d, &m, v, &mut rng(seed)).unwrap();
            let cells = m.assign(d.xs());
            for (lambda, &count) in fitted.counts.iter().enumerate() {
                for j in 0..v {
                    let load = (0..d.len()).filter(|&i| cells[i] == lambda && f.block_of[i] == j).count();
                    prop_assert!((load as f64 - count as f64 / v as f64).abs() < 1.0);
                }
            }
        }

        #[test]
        fn stratified_training_keeps_cells((d, dims, v, seed) in design()) {
            let m = HistogramModel::regular(0, dims).unwrap();
            let fitted = fit(&d, &m);
            prop_assume!(fitted.min_count() >= 3 && v <= d.len());
            let f = stratified_folds(&d, &m, v, &mut rng(seed)).unwrap();
            for j in 0..v {
                prop_assert!(train_fit(&d, &m, &f, j).is_ok());
            }
        }
    }
}

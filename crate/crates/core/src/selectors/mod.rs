//! Model-selection criteria and the final argmin.

mod criteria;
mod spec;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Purpose, StreamKey};
use crate::histogram::{
    filter_admissible, DataSet, FittedHistogram, HistogramModel, ModelCollection, ScenarioOracle,
    ADMISSIBLE_THRESHOLD,
};
use crate::resampling::{regular_folds, FoldAssignment};

pub use criteria::{
    crit_corrected_vfcv, crit_vfcv, ideal_expected_pen, ideal_expected_pen_truth, mallows_pen,
    mallows_star_pen, pen_vf_closed, pen_vf_conditional, pen_vf_general, emptied_training_cells, variance_estimator, DeltaCache, FoldRisks,
};
pub use spec::{parse_selector_list, FoldCount, Method, SelectorSpec, PLUS_OVERPEN};

/// A model removed from one selector's run, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drop {
    pub model: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    /// Id of the selected model.
    pub chosen: usize,
    /// Criterion per collection model; `None` if inadmissible or undefined.
    pub crit: Vec<Option<f64>>,
    pub dropped: Vec<Drop>,
}

/// Index of the smallest defined criterion; ties go to the smaller
/// dimension, then to the smaller index.
pub fn select(crits: &[Option<f64>], dims: &[usize]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in crits.iter().enumerate() {
        let Some(c) = c.filter(|c| !c.is_nan()) else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let cb = crits[b].unwrap();
                if c < cb || (c == cb && dims[i] < dims[b]) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or(Error::NoAdmissibleModel)
}

/// Per-dataset work shared by every selector: admissible set, cell
/// indices and full-sample fits.
#[derive(Debug)]
pub struct Prepared<'a> {
    pub data: &'a DataSet,
    pub collection: &'a ModelCollection,
    /// Positions of the admissible models in the collection.
    pub admissible: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
    pub fits: Vec<FittedHistogram>,
    pub risks: Vec<f64>,
}

impl<'a> Prepared<'a> {
    pub fn new(data: &'a DataSet, collection: &'a ModelCollection) -> Result<Self> {
        Self::with_threshold(data, collection, ADMISSIBLE_THRESHOLD)
    }

    pub fn with_threshold(data: &'a DataSet, collection: &'a ModelCollection, threshold: usize) -> Result<Self> {
        let admissible: Vec<usize> = filter_admissible(data, collection, threshold)?
            .iter()
            .map(|m| collection.models.iter().position(|x| std::ptr::eq(x, *m)).unwrap())
            .collect();
        let mut cells = Vec::with_capacity(admissible.len());
        let mut fits = Vec::with_capacity(admissible.len());
        let mut risks = Vec::with_capacity(admissible.len());
        for &k in &admissible {
            let model = &collection.models[k];
            let c = model.assign(data.xs());
            let f = FittedHistogram::from_cells(model, &c, data.ys(), |_| true);
            risks.push(f.training_risk()?);
            cells.push(c);
            fits.push(f);
        }
        Ok(Prepared { data, collection, admissible, cells, fits, risks })
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    fn model(&self, slot: usize) -> &HistogramModel {
        &self.collection.models[self.admissible[slot]]
    }
}

/// Regular fold assignments keyed by `V`, drawn lazily so selectors with the
/// same `V` share one partition.
#[derive(Debug)]
pub struct FoldCache {
    key: StreamKey,
    folds: HashMap<usize, FoldAssignment>,
}

impl FoldCache {
    pub fn new(key: StreamKey) -> Self {
        FoldCache { key, folds: HashMap::new() }
    }

    pub fn regular(&mut self, n: usize, v: usize) -> Result<&FoldAssignment> {
        if !self.folds.contains_key(&v) {
            let f = regular_folds(n, v, &mut self.key.rng(Purpose::Folds, v as u64))?;
            self.folds.insert(v, f);
        }
        Ok(&self.folds[&v])
    }
}

/// Runs one selector on prepared data.
pub fn run_prepared(
    spec: &SelectorSpec,
    prep: &Prepared<'_>,
    oracle: Option<&ScenarioOracle>,
    folds: &mut FoldCache,
) -> Result<SelectionOutcome> {
    let n = prep.n();
    let (v, c) = spec.resolve(n)?;
    let oracle = match (spec.method.needs_oracle(), oracle) {
        (true, None) => {
            return Err(Error::InvalidSelector {
                spec: spec.to_string(),
                reason: "needs the true scenario".into(),
            })
        }
        (_, o) => o,
    };
    let sigma_hat_sq = match spec.method {
        Method::Mallows => Some(variance_estimator(prep.data)?),
        _ => None,
    };
    let ideal = match spec.method {
        Method::IdealExpectedPenalty => Some(oracle.unwrap().ideal_expected_pens(n)?),
        _ => None,
    };
    let fold = match spec.method {
        Method::Vfcv | Method::CorrectedVfcv | Method::PenVfGeneral => Some(folds.regular(n, v.unwrap())?),
        _ => None,
    };
    let members = match spec.method {
        Method::PenVfGeneral => fold.map(FoldAssignment::members),
        _ => None,
    };

    let mut crit = vec![None; prep.collection.len()];
    let mut dropped = Vec::new();
    let over = spec.overpen;
    for slot in 0..prep.admissible.len() {
        let model = prep.model(slot);
        let risk = prep.risks[slot];
        let value = match spec.method {
            Method::PenVfGeneral => {
                let blocks = members.as_deref().unwrap();
                criteria::conditional_cells(&prep.fits[slot], &prep.cells[slot], prep.data.ys(), blocks, c.unwrap())
                    .map(|(p, _)| risk + over * p)
            }
            Method::Vfcv | Method::CorrectedVfcv => {
                match FoldRisks::compute(model, &prep.cells[slot], prep.data.ys(), fold.unwrap()) {
                    Ok(fr) => match spec.method {
                        Method::Vfcv => fr.crit_vfcv().map(|cv| if over == 1.0 { cv } else { risk + over * (cv - risk) }),
                        Method::CorrectedVfcv => fr.crit_vfcv().map(|cv| {
                            let cor = cv + risk - fr.mean_full();
                            if over == 1.0 {
                                cor
                            } else {
                                risk + over * (cor - risk)
                            }
                        }),
                        _ => unreachable!(),
                    },
                    Err(e) => Err(e),
                }
            }
            Method::PenVfClosed => pen_vf_closed(&prep.fits[slot], v.unwrap(), c.unwrap()).map(|p| risk + over * p),
            Method::Mallows => Ok(risk + over * mallows_pen(model, n, sigma_hat_sq.unwrap())),
            Method::MallowsStar => Ok(risk + over * mallows_star_pen(&oracle.unwrap().scenario, model, n)),
            Method::IdealExpectedPenalty => Ok(risk + over * ideal.as_ref().unwrap()[model.id]),
            Method::PathOracle => oracle.unwrap().model(model.id)?.excess_loss(&prep.fits[slot]),
        };
        match value {
            Ok(x) => crit[model.id] = Some(x),
            Err(e @ (Error::UndefinedTrainingFit { .. } | Error::CellTooSmall { .. } | Error::InvalidData(_))) => {
                dropped.push(Drop { model: model.id, reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    let dims: Vec<usize> = prep.collection.models.iter().map(|m| m.dims()).collect();
    let chosen = select(&crit, &dims)?;
    Ok(SelectionOutcome { chosen: prep.collection.models[chosen].id, crit, dropped })
}

/// Filters the collection, builds whatever folds the method needs from the
/// streams of `key`, and selects a model.
pub fn run_selector(
    spec: &SelectorSpec,
    data: &DataSet,
    collection: &ModelCollection,
    oracle: Option<&ScenarioOracle>,
    key: StreamKey,
) -> Result<SelectionOutcome> {
    let prep = Prepared::new(data, collection)?;
    run_prepared(spec, &prep, oracle, &mut FoldCache::new(key))
}

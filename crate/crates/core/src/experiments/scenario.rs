use serde::{Deserialize, Serialize};

use super::functions::{NoiseFn, RegressionFn};
use crate::error::{Error, Result};
use crate::histogram::CollectionKind;

/// `Y = s(X) + sigma(X) * eps` with `X ~ U[0, 1)` and `eps ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionScenario {
    pub name: String,
    pub s: RegressionFn,
    pub sigma: NoiseFn,
    pub n: usize,
    pub collection: CollectionKind,
}

/// Names of the built-in scenarios, in table order.
pub const PRESET_NAMES: [&str; 12] = [
    "S1", "S2", "HSd1", "HSd2", "S1000", "Ssqrt0.1", "S0.1", "Svar2", "Sqrt", "His6", "DopReg",
    "Dop2bin",
];

impl RegressionScenario {
    pub fn new(
        name: impl Into<String>,
        s: RegressionFn,
        sigma: NoiseFn,
        n: usize,
        collection: CollectionKind,
    ) -> Self {
        RegressionScenario { name: name.into(), s, sigma, n, collection }
    }

    pub fn preset(name: &str) -> Result<Self> {
        use CollectionKind::*;
        use NoiseFn as N;
        use RegressionFn as F;
        let (s, sigma, n, kind) = match name {
            "S1" => (F::Sin, N::Constant(1.0), 200, Regular),
            "S2" => (F::Sin, N::Linear, 200, TwoBinSizes),
            "HSd1" => (F::HeaviSine, N::Constant(1.0), 2048, Dyadic),
            "HSd2" => (F::HeaviSine, N::Linear, 2048, DyadicTwoBinSizes),
            "S1000" => (F::Sin, N::Constant(1.0), 1000, Regular),
            "Ssqrt0.1" => (F::Sin, N::Constant(0.1f64.sqrt()), 200, Regular),
            "S0.1" => (F::Sin, N::Constant(0.1), 200, Regular),
            "Svar2" => (F::Sin, N::UpperHalf, 200, TwoBinSizes),
            "Sqrt" => (F::Sqrt, N::Constant(1.0), 200, Regular),
            "His6" => (F::His6, N::Constant(1.0), 200, Regular),
            "DopReg" => (F::Doppler, N::Constant(1.0), 2048, Dyadic),
            "Dop2bin" => (F::Doppler, N::Constant(1.0), 2048, DyadicTwoBinSizes),
            _ => return Err(Error::UnknownScenario(name.to_string())),
        };
        Ok(RegressionScenario::new(name, s, sigma, n, kind))
    }

    /// Jumps of `s` and `sigma`, where quadrature must split.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.s.discontinuities();
        b.extend(self.sigma.discontinuities());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

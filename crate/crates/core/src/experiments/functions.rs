//! Regression functions and noise levels used by the simulation scenarios.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Step heights of the six-piece test histogram, one per cell of the
/// regular 6-cell partition. Every jump is nonzero and the values sum to 0.
pub const HIS6_VALUES: [f64; 6] = [1.5, -0.5, 1.0, -1.0, 0.5, -1.5];

const DOPPLER_EPS: f64 = 0.05;

/// The regression function `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegressionFn {
    /// `sin(pi x)`
    Sin,
    /// `x`
    Linear,
    /// `sqrt(x)`
    Sqrt,
    /// Donoho-Johnstone HeaviSine.
    HeaviSine,
    /// Donoho-Johnstone Doppler with epsilon = 0.05.
    Doppler,
    /// The fixed six-piece step function [`HIS6_VALUES`].
    His6,
    /// Constant function.
    Constant(f64),
    /// Regular step function with the given values.
    Steps(Vec<f64>),
}

impl RegressionFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RegressionFn::Sin => (PI * x).sin(),
            RegressionFn::Linear => x,
            RegressionFn::Sqrt => x.sqrt(),
            RegressionFn::HeaviSine => 4.0 * (4.0 * PI * x).sin() - sgn(x - 0.3) - sgn(0.72 - x),
            RegressionFn::Doppler => {
                (x * (1.0 - x)).sqrt() * (2.0 * PI * (1.0 + DOPPLER_EPS) / (x + DOPPLER_EPS)).sin()
            }
            RegressionFn::His6 => steps(&HIS6_VALUES, x),
            RegressionFn::Constant(c) => *c,
            RegressionFn::Steps(v) => steps(v, x),
        }
    }

    /// Jump locations inside (0, 1).
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            RegressionFn::HeaviSine => vec![0.3, 0.72],
            RegressionFn::His6 => step_breaks(HIS6_VALUES.len()),
            RegressionFn::Steps(v) => step_breaks(v.len()),
            _ => Vec::new(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            RegressionFn::Sin => "sin".into(),
            RegressionFn::Linear => "linear".into(),
            RegressionFn::Sqrt => "sqrt".into(),
            RegressionFn::HeaviSine => "heavisine".into(),
            RegressionFn::Doppler => "doppler".into(),
            RegressionFn::His6 => "his6".into(),
            RegressionFn::Constant(c) => format!("const:{c}"),
            RegressionFn::Steps(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("steps:{}", parts.join(";"))
            }
        }
    }
}

impl fmt::Display for RegressionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for RegressionFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let unknown = || Error::UnknownFunction(s.to_string());
        match s.to_ascii_lowercase().as_str() {
            "sin" => Ok(RegressionFn::Sin),
            "linear" | "x" => Ok(RegressionFn::Linear),
            "sqrt" => Ok(RegressionFn::Sqrt),
            "heavisine" => Ok(RegressionFn::HeaviSine),
            "doppler" => Ok(RegressionFn::Doppler),
            "his6" => Ok(RegressionFn::His6),
            other => {
                if let Some(c) = other.strip_prefix("const:") {
                    c.parse().map(RegressionFn::Constant).map_err(|_| unknown())
                } else if let Some(v) = other.strip_prefix("steps:") {
                    let vals: Result<Vec<f64>, _> = v.split(';').map(str::parse).collect();
                    match vals {
                        Ok(vals) if !vals.is_empty() => Ok(RegressionFn::Steps(vals)),
                        _ => Err(unknown()),
                    }
                } else {
                    Err(unknown())
                }
            }
        }
    }
}

/// The noise level `sigma(x)`; the noise is `sigma(x) * N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseFn {
    Constant(f64),
    /// `sigma(x) = x`
    Linear,
    /// `sigma(x) = 1{x >= 1/2}`
    UpperHalf,
    /// Regular step function of standard deviations.
    Steps(Vec<f64>),
}

impl NoiseFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NoiseFn::Constant(c) => *c,
            NoiseFn::Linear => x,
            NoiseFn::UpperHalf => {
                if x >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseFn::Steps(v) => steps(v, x),
        }
    }

    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            NoiseFn::UpperHalf => vec![0.5],
            NoiseFn::Steps(v) => step_breaks(v.len()),
            _ => Vec::new(),
        }
    }

    /// `∫_0^1 sigma(x)^2 dx`, in closed form.
    pub fn mean_variance(&self) -> f64 {
        match self {
            NoiseFn::Constant(c) => c * c,
            NoiseFn::Linear => 1.0 / 3.0,
            NoiseFn::UpperHalf => 0.5,
            NoiseFn::Steps(v) => v.iter().map(|s| s * s).sum::<f64>() / v.len() as f64,
        }
    }

    pub fn id(&self) -> String {
        match self {
            NoiseFn::Constant(c) => format!("const:{c}"),
            NoiseFn::Linear => "linear".into(),
            NoiseFn::UpperHalf => "upperhalf".into(),
            NoiseFn::Steps(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("steps:{}", parts.join(";"))
            }
        }
    }
}

impl fmt::Display for NoiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for NoiseFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let unknown = || Error::UnknownFunction(s.to_string());
        match s.to_ascii_lowercase().as_str() {
            "linear" | "x" => Ok(NoiseFn::Linear),
            "upperhalf" => Ok(NoiseFn::UpperHalf),
            other => {
                if let Some(c) = other.strip_prefix("const:") {
                    c.parse().map(NoiseFn::Constant).map_err(|_| unknown())
                } else if let Some(v) = other.strip_prefix("steps:") {
                    let vals: Result<Vec<f64>, _> = v.split(';').map(str::parse).collect();
                    match vals {
                        Ok(vals) if !vals.is_empty() => Ok(NoiseFn::Steps(vals)),
                        _ => Err(unknown()),
                    }
                } else {
                    Err(unknown())
                }
            }
        }
    }
}

fn sgn(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn steps(values: &[f64], x: f64) -> f64 {
    let k = values.len();
    let idx = ((x * k as f64).floor() as usize).min(k - 1);
    values[idx]
}

fn step_breaks(k: usize) -> Vec<f64> {
    (1..k).map(|j| j as f64 / k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sin_at_half() {
        assert_relative_eq!(RegressionFn::Sin.eval(0.5), 1.0);
    }

    #[test]
    fn heavisine_at_half() {
        // 4 sin(2 pi) - sgn(0.2) - sgn(0.22)
        assert_relative_eq!(RegressionFn::HeaviSine.eval(0.5), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn doppler_at_095() {
        let expected = (0.95f64 * 0.05).sqrt() * (2.1 * PI).sin();
        assert_relative_eq!(RegressionFn::Doppler.eval(0.95), expected, max_relative = 1e-14);
        assert_relative_eq!(RegressionFn::Doppler.eval(0.95), 0.06734869251585363, max_relative = 1e-12);
    }

    #[test]
    fn his6_has_zero_mean_and_five_jumps() {
        assert_relative_eq!(HIS6_VALUES.iter().sum::<f64>(), 0.0);
        assert!(HIS6_VALUES.windows(2).all(|w| w[0] != w[1]));
        assert_eq!(RegressionFn::His6.eval(0.0), 1.5);
        assert_eq!(RegressionFn::His6.eval(0.999), -1.5);
        assert_eq!(RegressionFn::His6.discontinuities().len(), 5);
    }

    #[test]
    fn noise_levels() {
        assert_eq!(NoiseFn::UpperHalf.eval(0.49), 0.0);
        assert_eq!(NoiseFn::UpperHalf.eval(0.5), 1.0);
        assert_eq!(NoiseFn::Linear.eval(0.3), 0.3);
    }

    #[test]
    fn parse_ids() {
        assert_eq!("heavisine".parse::<RegressionFn>().unwrap(), RegressionFn::HeaviSine);
        assert_eq!("const:0.3".parse::<NoiseFn>().unwrap(), NoiseFn::Constant(0.3));
        assert!(matches!("blah".parse::<RegressionFn>(), Err(Error::UnknownFunction(_))));
        let f: RegressionFn = RegressionFn::Steps(vec![1.0, 2.5]).id().parse().unwrap();
        assert_eq!(f, RegressionFn::Steps(vec![1.0, 2.5]));
    }
}

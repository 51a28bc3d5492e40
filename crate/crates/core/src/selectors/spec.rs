use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Overpenalization factor of the `+` variants.
pub const PLUS_OVERPEN: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Vfcv,
    CorrectedVfcv,
    PenVfGeneral,
    PenVfClosed,
    Mallows,
    MallowsStar,
    IdealExpectedPenalty,
    /// Picks the model with the smallest true loss.
    PathOracle,
}

impl Method {
    pub fn uses_folds(&self) -> bool {
        matches!(self, Method::Vfcv | Method::CorrectedVfcv | Method::PenVfGeneral | Method::PenVfClosed)
    }

    pub fn is_pen_vf(&self) -> bool {
        matches!(self, Method::PenVfGeneral | Method::PenVfClosed)
    }

    pub fn needs_oracle(&self) -> bool {
        matches!(self, Method::MallowsStar | Method::IdealExpectedPenalty | Method::PathOracle)
    }
}

/// Number of folds: fixed, or the sample size (leave-one-out).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldCount {
    Fixed(usize),
    N,
}

impl FoldCount {
    pub fn resolve(&self, n: usize) -> usize {
        match self {
            FoldCount::Fixed(v) => *v,
            FoldCount::N => n,
        }
    }
}

/// One model-selection criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorSpec {
    pub method: Method,
    /// Folds, for the resampling methods.
    pub v: Option<FoldCount>,
    /// Penalty constant of the V-fold penalties; `None` means `V - 1`.
    pub c: Option<f64>,
    pub overpen: f64,
}

impl SelectorSpec {
    pub fn new(method: Method, v: Option<FoldCount>, c: Option<f64>, overpen: f64) -> Result<Self> {
        let spec = SelectorSpec { method, v, c, overpen };
        spec.validate()?;
        Ok(spec)
    }

    pub fn simple(method: Method) -> Self {
        SelectorSpec { method, v: None, c: None, overpen: 1.0 }
    }

    pub fn with_folds(method: Method, v: FoldCount) -> Self {
        SelectorSpec { method, v: Some(v), c: None, overpen: 1.0 }
    }

    pub fn plus(mut self) -> Self {
        self.overpen = PLUS_OVERPEN;
        self
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidSelector { spec: self.to_string(), reason: reason.into() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.overpen >= 1.0) || !self.overpen.is_finite() {
            return Err(self.invalid("overpenalization factor must be >= 1"));
        }
        match (self.method.uses_folds(), self.v) {
            (true, None) => return Err(self.invalid("number of folds required")),
            (false, Some(_)) => return Err(self.invalid("this method takes no folds")),
            (true, Some(FoldCount::Fixed(v))) if v < 2 => return Err(self.invalid("V must be >= 2")),
            _ => {}
        }
        if let Some(c) = self.c {
            if !self.method.is_pen_vf() {
                return Err(self.invalid("only V-fold penalties take a constant C"));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(self.invalid("C must be positive"));
            }
            if let Some(FoldCount::Fixed(v)) = self.v {
                if c < (v - 1) as f64 {
                    return Err(self.invalid(format!("C = {c} is below V - 1 = {}", v - 1)));
                }
            }
        }
        Ok(())
    }

    /// `(V, C)` for sample size `n`.
    pub fn resolve(&self, n: usize) -> Result<(Option<usize>, Option<f64>)> {
        let v = self.v.map(|v| v.resolve(n));
        if let Some(v) = v {
            if v < 2 || v > n {
                return Err(Error::InvalidV { v, n });
            }
        }
        let c = match (self.method.is_pen_vf(), v) {
            (true, Some(v)) => {
                let c = self.c.unwrap_or((v - 1) as f64);
                if c < (v - 1) as f64 {
                    return Err(self.invalid(format!("C = {c} is below V - 1 = {}", v - 1)));
                }
                Some(c)
            }
            _ => None,
        };
        Ok((v, c))
    }

    fn base_label(&self) -> String {
        let v = |loo: &str, pre: &str, post: &str| match self.v {
            Some(FoldCount::N) => loo.to_string(),
            Some(FoldCount::Fixed(v)) => format!("{pre}{v}{post}"),
            None => format!("{pre}?{post}"),
        };
        match self.method {
            Method::Vfcv => v("loo", "", "fcv"),
            Method::CorrectedVfcv => v("corloo", "cor", "f"),
            Method::PenVfGeneral => v("penloo-gen", "pen", "f"),
            Method::PenVfClosed => v("penloo", "cpen", "f"),
            Method::Mallows => "mal".into(),
            Method::MallowsStar => "mal*".into(),
            Method::IdealExpectedPenalty => "epenid".into(),
            Method::PathOracle => "oracle".into(),
        }
    }
}

impl fmt::Display for SelectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base_label())?;
        if self.overpen == PLUS_OVERPEN {
            f.write_str("+")?;
        } else if self.overpen != 1.0 {
            write!(f, "@o={}", self.overpen)?;
        }
        if let Some(c) = self.c {
            write!(f, "@c={c}")?;
        }
        Ok(())
    }
}

fn parse_folds(s: &str, prefix: &str, suffix: &str) -> Option<usize> {
    s.strip_prefix(prefix)?.strip_suffix(suffix)?.parse().ok()
}

impl FromStr for SelectorSpec {
    type Err = Error;

    /// Shorthand: `mal`, `mal*`, `{V}fcv`, `loo`, `pen{V}f`, `penloo`,
    /// `cpen{V}f`, `cor{V}f`, `corloo`, `epenid`, `oracle`, optionally followed
    /// by `+` (overpenalize by 5/4), `@c=<x>` (penalty constant) and
    /// `@o=<x>` (explicit overpenalization factor).
    fn from_str(raw: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidSelector { spec: raw.to_string(), reason: reason.to_string() };
        let lower = raw.trim().to_ascii_lowercase();
        let mut parts = lower.split('@');
        let head = parts.next().unwrap_or_default();
        let mut plus = false;
        let mut c = None;
        let mut overpen = None;
        let strip_plus = |s: &'_ str, plus: &mut bool| -> Result<String> {
            match s.strip_suffix('+') {
                Some(_) if *plus => Err(invalid("`+` given twice")),
                Some(rest) => {
                    *plus = true;
                    Ok(rest.to_string())
                }
                None => Ok(s.to_string()),
            }
        };
        let base = strip_plus(head, &mut plus)?;
        if base.ends_with('+') {
            return Err(invalid("`+` given twice"));
        }
        for part in parts {
            let part = strip_plus(part, &mut plus)?;
            let (key, value) = part.split_once('=').ok_or_else(|| invalid("expected `@key=value`"))?;
            let value: f64 = value.parse().map_err(|_| invalid("option value is not a number"))?;
            match key {
                "c" if c.is_none() => c = Some(value),
                "o" if overpen.is_none() => overpen = Some(value),
                "c" | "o" => return Err(invalid("option given twice")),
                _ => return Err(invalid("unknown option")),
            }
        }
        let (method, v) = match base.as_str() {
            "mal" => (Method::Mallows, None),
            "mal*" => (Method::MallowsStar, None),
            "epenid" => (Method::IdealExpectedPenalty, None),
            "oracle" => (Method::PathOracle, None),
            "loo" => (Method::Vfcv, Some(FoldCount::N)),
            "penloo" => (Method::PenVfClosed, Some(FoldCount::N)),
            "corloo" => (Method::CorrectedVfcv, Some(FoldCount::N)),
            "penloo-gen" => (Method::PenVfGeneral, Some(FoldCount::N)),
            b => {
                if let Some(v) = parse_folds(b, "", "fcv") {
                    (Method::Vfcv, Some(FoldCount::Fixed(v)))
                } else if let Some(v) = parse_folds(b, "cpen", "f") {
                    (Method::PenVfClosed, Some(FoldCount::Fixed(v)))
                } else if let Some(v) = parse_folds(b, "pen", "f") {
                    (Method::PenVfGeneral, Some(FoldCount::Fixed(v)))
                } else if let Some(v) = parse_folds(b, "cor", "f") {
                    (Method::CorrectedVfcv, Some(FoldCount::Fixed(v)))
                } else {
                    return Err(invalid("unknown selector"));
                }
            }
        };
        if plus && overpen.is_some() {
            return Err(invalid("`+` and `@o=` are exclusive"));
        }
        let overpen = if plus { PLUS_OVERPEN } else { overpen.unwrap_or(1.0) };
        SelectorSpec::new(method, v, c, overpen).map_err(|e| match e {
            Error::InvalidSelector { reason, .. } => Error::InvalidSelector { spec: raw.to_string(), reason },
            other => other,
        })
    }
}

/// Parses a comma-separated selector list.
pub fn parse_selector_list(s: &str) -> Result<Vec<SelectorSpec>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SelectorSpec {
        s.parse().unwrap()
    }

    #[test]
    fn shorthand() {
        assert_eq!(p("mal"), SelectorSpec::simple(Method::Mallows));
        assert_eq!(p("mal*"), SelectorSpec::simple(Method::MallowsStar));
        assert_eq!(p("2fcv"), SelectorSpec::with_folds(Method::Vfcv, FoldCount::Fixed(2)));
        assert_eq!(p("loo"), SelectorSpec::with_folds(Method::Vfcv, FoldCount::N));
        assert_eq!(p("pen10f"), SelectorSpec::with_folds(Method::PenVfGeneral, FoldCount::Fixed(10)));
        assert_eq!(p("penloo+"), SelectorSpec::with_folds(Method::PenVfClosed, FoldCount::N).plus());
        assert_eq!(p("cpen5f"), SelectorSpec::with_folds(Method::PenVfClosed, FoldCount::Fixed(5)));
        assert_eq!(p("cor5f"), SelectorSpec::with_folds(Method::CorrectedVfcv, FoldCount::Fixed(5)));
        assert_eq!(p("epenid").method, Method::IdealExpectedPenalty);
        assert_eq!(p("EPENID+").overpen, 1.25);
    }

    #[test]
    fn options() {
        let s = p("pen5f+@c=6");
        assert_eq!((s.c, s.overpen), (Some(6.0), 1.25));
        assert_eq!(p("pen5f@c=6+"), s);
        assert_eq!(p("mal@o=2").overpen, 2.0);
        assert_eq!(s.resolve(200).unwrap(), (Some(5), Some(6.0)));
        assert_eq!(p("penloo").resolve(200).unwrap(), (Some(200), Some(199.0)));
        assert_eq!(p("5fcv").resolve(200).unwrap(), (Some(5), None));
    }

    #[test]
    fn rejects() {
        for bad in ["", "foo", "0fcv", "1fcv", "pen5f@c=2", "mal@c=3", "mal++", "mal@o=0.5", "mal+@o=2", "pen5f@x=1", "pen5f@c=6@c=7"] {
            assert!(matches!(bad.parse::<SelectorSpec>(), Err(Error::InvalidSelector { .. })), "{bad}");
        }
        assert_eq!(p("20fcv").resolve(10), Err(Error::InvalidV { v: 20, n: 10 }));
        assert!(p("penloo@c=5").resolve(200).is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["mal", "mal*", "2fcv", "loo", "pen10f+", "penloo+", "cpen5f@c=7", "cor2f", "corloo", "epenid+", "oracle", "mal@o=2", "penloo-gen"] {
            assert_eq!(p(s).to_string(), s);
            assert_eq!(p(&p(s).to_string()), p(s));
        }
    }

    #[test]
    fn lists() {
        let l = parse_selector_list("mal, 2fcv,penloo+").unwrap();
        assert_eq!(l.len(), 3);
        assert!(parse_selector_list("").unwrap().is_empty());
        assert!(parse_selector_list("mal,bogus").is_err());
    }
}

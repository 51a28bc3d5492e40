//! Inverse binomial moments, V-fold weight moments and the constants that
//! govern how much VFCV and overpenalization lose against the oracle.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Z ~ B(n, p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSpec {
    pub n: u64,
    pub p: f64,
}

impl BinomialSpec {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { n: 0, what: "binomial".into() });
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::DomainError(p));
        }
        Ok(BinomialSpec { n, p })
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }

    /// `P(Z = 0)`.
    pub fn prob_zero(&self) -> f64 {
        if self.p == 1.0 {
            0.0
        } else {
            (self.n as f64 * (-self.p).ln_1p()).exp()
        }
    }
}

/// `E[Z] E[Z^{-1} 1_{Z>0}]`, summed exactly with log-space pmf terms.
pub fn einvz(spec: BinomialSpec) -> f64 {
    let BinomialSpec { n, p } = spec;
    if p == 1.0 {
        return 1.0;
    }
    let lp = p.ln();
    let lq = (-p).ln_1p();
    let mut acc = 0.0;
    for k in 1..=n {
        let lpmf = ln_binomial(n, k) + k as f64 * lp + (n - k) as f64 * lq;
        acc += lpmf.exp() / k as f64;
    }
    spec.mean() * acc
}

/// `E[Z] E[Z^{-1} | Z > 0]`.
pub fn einv(spec: BinomialSpec) -> f64 {
    let positive = if spec.p == 1.0 {
        1.0
    } else {
        -(spec.n as f64 * (-spec.p).ln_1p()).exp_m1()
    };
    einvz(spec) / positive
}

/// Bounds on [`einv`], valid when `np >= 1`: `(lower, upper)`.
pub fn einv_bounds(spec: BinomialSpec) -> (f64, f64) {
    let np = spec.mean();
    (-(-np).exp_m1(), (1.0 + 5.1 * np.powf(-0.25)).min(3.2))
}

/// `einvz - 1 + np (1-p)^n`: the correction to `2 σ_λ^2 / n` in the
/// expected ideal penalty of a cell of probability `p`.
pub fn ideal_delta(spec: BinomialSpec) -> f64 {
    einvz(spec) - 1.0 + spec.mean() * spec.prob_zero()
}

/// A cell holding `count` observations split into `v` folds, with
/// `count = a v + b`, `0 <= b < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VFoldCellSpec {
    pub count: u64,
    pub v: u64,
}

impl VFoldCellSpec {
    pub fn new(count: u64, v: u64) -> Result<Self> {
        if v < 2 {
            return Err(Error::InvalidV { v: v as usize, n: count as usize });
        }
        if count < 2 {
            return Err(Error::DegenerateCell { count: count as usize, v: v as usize });
        }
        Ok(VFoldCellSpec { count, v })
    }

    pub fn a(&self) -> u64 {
        self.count / self.v
    }

    pub fn b(&self) -> u64 {
        self.count % self.v
    }
}

/// `(R_1, R_2)`: second-moment ratios of the stratified V-fold weights of a cell.
///
/// `R_2 = 1/(V-1)` always; `R_1` picks up a correction when `V` does not
/// divide the count.
pub fn r1_r2_vfold(spec: VFoldCellSpec) -> Result<(f64, f64)> {
    let (a, b) = (spec.a() as f64, spec.b() as f64);
    let v = spec.v as f64;
    let vm1 = v - 1.0;
    let r2 = 1.0 / vm1;
    if spec.b() == 0 {
        return Ok((r2, r2));
    }
    let low = a * vm1 + b;
    if low - 1.0 < 1.0 {
        return Err(Error::DegenerateCell { count: spec.count as usize, v: spec.v as usize });
    }
    let k = spec.count as f64;
    let r1 = r2 - b / (vm1 * low) + k * b / (v * (low - 1.0) * low);
    Ok((r1, r2))
}

/// Excess of `(V-1)(R_1 + R_2)` over 2; lies in `[0, 2/(count-2)]`.
pub fn delta_penv(spec: VFoldCellSpec) -> Result<f64> {
    if spec.count < 3 {
        return Err(Error::DegenerateCell { count: spec.count as usize, v: spec.v as usize });
    }
    if spec.b() == 0 {
        return Ok(0.0);
    }
    let (a, b, k) = (spec.a() as f64, spec.b() as f64, spec.count as f64);
    let v = spec.v as f64;
    Ok(b / (k - a) * ((v - 1.0) / v * k / (k - a - 1.0) - 1.0))
}

const TWO_POW_TWO_THIRDS: f64 = 1.587_401_051_968_199_4;

/// `K(C) = (2^{2/3}/3)(C^{-1/3} - 1)^2`.
pub fn k_c(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::DomainError(c));
    }
    Ok(TWO_POW_TWO_THIRDS / 3.0 * (c.powf(-1.0 / 3.0) - 1.0).powi(2))
}

/// `κ(V) = (2^{2/3}/3)(1 - ((V-1)/V)^{1/3})^2`, equal to `K(V/(V-1))`.
pub fn kappa_v(v: u64) -> Result<f64> {
    if v < 2 {
        return Err(Error::DomainError(v as f64));
    }
    let r = ((v - 1) as f64 / v as f64).cbrt();
    Ok(TWO_POW_TWO_THIRDS / 3.0 * (1.0 - r).powi(2))
}

/// Exact large-`n` limit of the loss ratio incurred by penalizing `C` times
/// too much when the risk is `a/D^2 + bD/n`: `(C^{2/3} + 2 C^{-1/3}) / 3`.
pub fn overpenalization_limit(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::DomainError(c));
    }
    Ok((c.powf(2.0 / 3.0) + 2.0 * c.powf(-1.0 / 3.0)) / 3.0)
}

/// `f(x) = 2^{-2/3}(1+x)^{-2} + 2^{1/3}(1+x)`.
pub fn f_lemma(x: f64) -> Result<f64> {
    if !(x > -1.0) {
        return Err(Error::DomainError(x));
    }
    let y = 1.0 + x;
    Ok(1.0 / (TWO_POW_TWO_THIRDS * y * y) + 2.0 / TWO_POW_TWO_THIRDS * y)
}

/// Lower bound `3·2^{-2/3} + 3·2^{-14/3} min(x^2, 1)` on [`f_lemma`].
pub fn f_lemma_lower_bound(x: f64) -> f64 {
    3.0 / TWO_POW_TWO_THIRDS + 3.0 / (16.0 * TWO_POW_TWO_THIRDS) * (x * x).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CritAnalysis {
    /// `crit_1(dim2) / crit_1(dim1)`
    pub ratio: f64,
    /// Minimizer of `a/D^2 + bD/n`.
    pub dim1: usize,
    /// Minimizer of `a/D^2 + CbD/n`.
    pub dim2: usize,
}

/// Compares the minimizer of `a/D^2 + bD/n` with the one obtained when the
/// variance term is inflated by `C`. Ties go to the smaller dimension.
pub fn deterministic_crit_analysis(a: f64, b: f64, c: f64, n: u64, dims: &[usize]) -> Result<CritAnalysis> {
    for v in [a, b] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::DomainError(v));
        }
    }
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::DomainError(c));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidData("dimension list must be nonempty and positive".into()));
    }
    let nf = n as f64;
    let crit = |d: usize, mult: f64| {
        let d = d as f64;
        a / (d * d) + mult * b * d / nf
    };
    let argmin = |mult: f64| {
        let mut best = dims[0];
        for &d in &dims[1..] {
            let (cd, cb) = (crit(d, mult), crit(best, mult));
            if cd < cb || (cd == cb && d < best) {
                best = d;
            }
        }
        best
    };
    let dim1 = argmin(1.0);
    let dim2 = argmin(c);
    Ok(CritAnalysis { ratio: crit(dim2, 1.0) / crit(dim1, 1.0), dim1, dim2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn bin(n: u64, p: f64) -> BinomialSpec {
        BinomialSpec::new(n, p).unwrap()
    }

    /// Binomial pmf by repeated multiplication, no log-gamma.
    fn pmf_product(n: u64, p: f64) -> Vec<f64> {
        let q = 1.0 - p;
        let mut out = vec![q.powi(n as i32)];
        for k in 1..=n {
            let prev = out[(k - 1) as usize];
            out.push(prev * (n - k + 1) as f64 / k as f64 * p / q);
        }
        out
    }

    #[test]
    fn einvz_degenerate_and_small() {
        assert_eq!(einvz(bin(1, 1.0)), 1.0);
        assert_eq!(einv(bin(1, 1.0)), 1.0);
        assert_eq!(einvz(bin(50, 1.0)), 1.0);
        assert_relative_eq!(einvz(bin(10, 0.5)), 1.144428555927579365, max_relative = 1e-13);
        assert_relative_eq!(einv(bin(10, 0.5)), 1.145547254418222160, max_relative = 1e-13);
        assert_relative_eq!(einvz(bin(100, 0.03)), 1.2326000211005689, max_relative = 1e-12);
        assert_relative_eq!(einvz(bin(500, 0.01)), 1.2777814403847743, max_relative = 1e-12);
    }

    #[test]
    fn einv_two_routes() {
        for (n, p) in [(10u64, 0.5), (30, 0.1), (7, 0.9), (60, 0.05)] {
            let pmf = pmf_product(n, p);
            let cond: f64 = (1..=n).map(|k| pmf[k as usize] / k as f64).sum::<f64>() / (1.0 - pmf[0]);
            assert_relative_eq!(einv(bin(n, p)), n as f64 * p * cond, max_relative = 1e-12);
        }
    }

    #[test]
    fn ideal_delta_for_full_cell() {
        assert_eq!(ideal_delta(bin(200, 1.0)), 0.0);
    }

    #[test]
    fn r_values() {
        assert_eq!(r1_r2_vfold(VFoldCellSpec::new(12, 4).unwrap()).unwrap(), (1.0 / 3.0, 1.0 / 3.0));
        let (r1, r2) = r1_r2_vfold(VFoldCellSpec::new(7, 3).unwrap()).unwrap();
        assert_relative_eq!(r1, 31.0 / 60.0, max_relative = 1e-15);
        assert_eq!(r2, 0.5);
        assert_relative_eq!(delta_penv(VFoldCellSpec::new(7, 3).unwrap()).unwrap(), 1.0 / 30.0, max_relative = 1e-14);
        assert_eq!(delta_penv(VFoldCellSpec::new(12, 3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_cells() {
        // a = 0, b = 1 cannot happen for count >= 2; V = count + 1 leaves a = 0, b = count
        assert!(r1_r2_vfold(VFoldCellSpec::new(2, 3).unwrap()).is_ok());
        assert!(VFoldCellSpec::new(1, 2).is_err());
        assert!(VFoldCellSpec::new(5, 1).is_err());
        assert!(delta_penv(VFoldCellSpec::new(2, 2).unwrap()).is_err());
    }

    /// `(R_1, R_2)` straight from the weight distribution: the held-out count
    /// `h` of the cell is `a` with probability `(V-b)/V` and `a+1` otherwise.
    fn r_oracle(count: i128, v: i128) -> (Ratio<i128>, Ratio<i128>) {
        let (a, b) = (count / v, count % v);
        let mut r1 = Ratio::from_integer(0);
        let mut r2 = Ratio::from_integer(0);
        let scale = Ratio::new(v, v - 1);
        for (h, prob) in [(a, Ratio::new(v - b, v)), (a + 1, Ratio::new(b, v))] {
            if *prob.numer() == 0 {
                continue;
            }
            let w = Ratio::new(count - h, count) * scale;
            let dev_in = w;
            let dev_out = scale - w;
            let avg = (Ratio::from_integer(h) * dev_in * dev_in
                + Ratio::from_integer(count - h) * dev_out * dev_out)
                / Ratio::from_integer(count);
            r1 += prob * avg / (w * w);
            r2 += prob * avg / w;
        }
        (r1, r2)
    }

    fn to_f64(r: Ratio<i128>) -> f64 {
        *r.numer() as f64 / *r.denom() as f64
    }

    #[test]
    fn r_matches_weight_distribution() {
        for count in 3..=60i128 {
            for v in 2..=count {
                let (o1, o2) = r_oracle(count, v);
                let (r1, r2) = r1_r2_vfold(VFoldCellSpec::new(count as u64, v as u64).unwrap()).unwrap();
                assert_relative_eq!(r1, to_f64(o1), max_relative = 1e-13);
                assert_relative_eq!(r2, to_f64(o2), max_relative = 1e-13);
            }
        }
        assert_eq!(r_oracle(7, 3).0, Ratio::new(31, 60));
    }

    #[test]
    fn constants() {
        assert_relative_eq!(kappa_v(2).unwrap(), 0.022519650726151048, max_relative = 1e-13);
        assert_relative_eq!(kappa_v(5).unwrap(), 0.0027188701324159272, max_relative = 1e-12);
        assert_relative_eq!(kappa_v(10).unwrap(), 0.00063018899742303642, max_relative = 1e-12);
        assert_relative_eq!(k_c(2.0).unwrap(), 0.022519650726151048, max_relative = 1e-13);
        assert_eq!(k_c(1.0).unwrap(), 0.0);
        assert!(kappa_v(2).unwrap() > kappa_v(5).unwrap());
        assert!(kappa_v(10_000).unwrap() < 1e-8);
        for v in 2..=50u64 {
            let k = k_c(v as f64 / (v - 1) as f64).unwrap();
            assert_relative_eq!(kappa_v(v).unwrap(), k, max_relative = 1e-12);
        }
        assert!(k_c(0.0).is_err());
        assert!(kappa_v(1).is_err());
    }

    #[test]
    fn f_values() {
        assert_relative_eq!(f_lemma(0.0).unwrap(), 1.8898815748423097, max_relative = 1e-15);
        assert_relative_eq!(f_lemma(0.0).unwrap(), f_lemma_lower_bound(0.0), max_relative = 1e-15);
        assert_relative_eq!(f_lemma(1.0).unwrap(), 2.6773322310266055, max_relative = 1e-15);
        assert!(f_lemma(-1.0).is_err());
    }

    #[test]
    fn f_bound_on_grid() {
        let steps = 100_000;
        for i in 0..=steps {
            let x = -0.999 + (10.999) * i as f64 / steps as f64;
            assert!(f_lemma(x).unwrap() >= f_lemma_lower_bound(x) * (1.0 - 1e-15), "x={x}");
        }
    }

    #[test]
    fn crit_analysis_trivial_and_trend() {
        let dims: Vec<usize> = (1..=1000).collect();
        let r = deterministic_crit_analysis(1.0 / 12.0, 1.0, 1.0, 100_000, &dims).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.dim1, r.dim2);
        let dims: Vec<usize> = (1..=1_000_000).collect();
        let r = deterministic_crit_analysis(1.0 / 12.0, 1.0, 2.0, 1_000_000_000_000, &dims).unwrap();
        assert_relative_eq!(r.ratio, overpenalization_limit(2.0).unwrap(), max_relative = 1e-4);
        assert_relative_eq!(r.dim2 as f64 / r.dim1 as f64, 2f64.powf(-1.0 / 3.0), max_relative = 1e-3);
        assert!(r.ratio >= 1.0 + k_c(2.0).unwrap());
    }

    #[test]
    fn overpenalization_limit_values() {
        assert_eq!(overpenalization_limit(1.0).unwrap(), 1.0);
        assert_relative_eq!(overpenalization_limit(2.0).unwrap(), 1.0582673679787996, max_relative = 1e-14);
        assert_relative_eq!(overpenalization_limit(1.25).unwrap(), 1.0056775806161021, max_relative = 1e-14);
        assert_relative_eq!(overpenalization_limit(10.0 / 9.0).unwrap(), 1.0012482507021346, max_relative = 1e-14);
    }

    #[test]
    fn crit_analysis_errors() {
        assert!(deterministic_crit_analysis(0.0, 1.0, 2.0, 10, &[1]).is_err());
        assert!(deterministic_crit_analysis(1.0, 1.0, 0.5, 10, &[1]).is_err());
        assert!(deterministic_crit_analysis(1.0, 1.0, 2.0, 10, &[]).is_err());
    }

    proptest! {
        #[test]
        fn einv_orderings(n in 1u64..400, p in 0.001f64..=1.0) {
            let s = bin(n, p);
            let (z, c) = (einvz(s), einv(s));
            prop_assert!(z <= c * (1.0 + 1e-14));
            prop_assert!(z <= 2.0 * n as f64 / (n + 1) as f64 * (1.0 + 1e-13));
            let lower = -(-s.mean()).exp_m1();
            prop_assert!(c >= lower * (1.0 - 1e-13));
            prop_assert!(ideal_delta(s) > -1.0);
            if s.mean() >= 2.0 {
                prop_assert!(ideal_delta(s) >= -1e-13);
            }
        }

        #[test]
        fn r_identity_and_delta_bounds(count in 3u64..300, v in 2u64..300) {
            prop_assume!(v <= count);
            let spec = VFoldCellSpec::new(count, v).unwrap();
            let (r1, r2) = r1_r2_vfold(spec).unwrap();
            let d = delta_penv(spec).unwrap();
            prop_assert!(r1 >= r2 * (1.0 - 1e-15));
            prop_assert!(d >= 0.0 && d <= 2.0 / (count - 2) as f64 * (1.0 + 1e-14));
            let lhs = r1 + r2;
            let rhs = (2.0 + d) / (v - 1) as f64;
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }

        #[test]
        fn limit_dominates_k_c(c in 1.0f64..20.0) {
            prop_assert!(overpenalization_limit(c).unwrap() >= 1.0 + k_c(c).unwrap() - 1e-15);
        }
    }
}

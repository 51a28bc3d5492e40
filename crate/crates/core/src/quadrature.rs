//! Composite Gauss-Legendre quadrature with adaptive bisection.
//!
//! Integrands in this crate are piecewise smooth on `[0, 1)`: the caller
//! passes the known jump locations and every piece is integrated separately,
//! so the 16-point rule only ever sees smooth (possibly steep or oscillating)
//! functions. Steep spots such as `sqrt` at 0 or the Doppler chirp are handled
//! by bisecting until two consecutive levels agree.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 16;
const MAX_DEPTH: u32 = 64;
const ROUNDOFF: f64 = 256.0 * f64::EPSILON;
const MAX_PIECES: usize = 1 << 20;

/// Target relative accuracy of [`integrate`].
pub const REL_TOL: f64 = 1e-13;

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(ORDER))
}

/// Nodes and weights on [-1, 1] by Newton iteration on P_n.
fn legendre_rule(n: usize) -> Rule {
    let mut nodes = [0.0; ORDER];
    let mut weights = [0.0; ORDER];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in r.nodes.iter().zip(r.weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32, budget: &mut usize) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = gauss(f, a, m);
    let right = gauss(f, m, b);
    let refined = left + right;
    let diff = (refined - whole).abs();
    // below this the two levels differ only by rounding in `f`
    let floor = ROUNDOFF * (left.abs() + right.abs());
    if diff <= tol || diff <= floor {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH || m <= a || m >= b || *budget == 0 {
        return Err(Error::QuadratureFailure { a, b });
    }
    *budget -= 1;
    Ok(adaptive(f, a, m, left, 0.5 * tol, depth + 1, budget)? + adaptive(f, m, b, right, 0.5 * tol, depth + 1, budget)?)
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint strictly inside.
///
/// The tolerance is relative to a first estimate of the integral of `|f|`
/// so that integrands which cancel to zero still terminate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64]) -> Result<f64> {
    integrate_with_floor(f, a, b, breakpoints, 0.0)
}

/// [`integrate`] with an absolute tolerance `abs_tol` below which the result
/// is accepted, for integrands whose rounding noise exceeds [`REL_TOL`].
pub fn integrate_with_floor<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], abs_tol: f64) -> Result<f64> {
    if !(b > a) {
        return Err(Error::QuadratureFailure { a, b });
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();

    let abs_f = |x: f64| f(x).abs();
    let scale: f64 = cuts.windows(2).map(|w| gauss(&abs_f, w[0], w[1])).sum();
    let tol = (REL_TOL * scale).max(abs_tol).max(f64::MIN_POSITIVE);

    let mut budget = MAX_PIECES;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let whole = gauss(&f, w[0], w[1]);
        let share = tol * (w[1] - w[0]) / (b - a);
        total += adaptive(&f, w[0], w[1], whole, share, 0, &mut budget)?;
    }
    Ok(total)
}

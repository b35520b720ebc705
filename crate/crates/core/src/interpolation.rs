//! Pairwise interpolation inequalities for the class `F(mu, L)`.
//!
//! A finite set of triplets `(x_i, g_i, f_i)` extends to a function of the
//! class iff for every ordered pair
//!
//! ```text
//! f_i - f_j - <g_j, x_i - x_j> >= |g_i - g_j|^2 / (2L)
//!     + mu / (2 L (L - mu)) |g_i - g_j - L (x_i - x_j)|^2
//! ```
//!
//! which for `L = inf` reduces to `f_i - f_j - <g_j, x_i - x_j> >= mu/2 |x_i - x_j|^2`.

use serde::{Deserialize, Serialize};

use crate::curvature::ExtReal;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub f: f64,
}

impl Triplet {
    pub fn new(x: Vec<f64>, g: Vec<f64>, f: f64) -> Self {
        Triplet { x, g, f }
    }

    pub fn scalar(x: f64, g: f64, f: f64) -> Self {
        Triplet::new(vec![x], vec![g], f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub ok: bool,
    /// `(i, j)` of the smallest slack, `None` for fewer than two triplets.
    pub worst_pair: Option<(usize, usize)>,
    /// Smallest slack over all ordered pairs (negative means violated).
    pub worst_violation: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Slack of the inequality for the ordered pair `(i, j)`.
pub fn pair_slack(ti: &Triplet, tj: &Triplet, mu: f64, l: ExtReal) -> f64 {
    let dx: Vec<f64> = ti.x.iter().zip(&tj.x).map(|(a, b)| a - b).collect();
    let dg: Vec<f64> = ti.g.iter().zip(&tj.g).map(|(a, b)| a - b).collect();
    let lhs = ti.f - tj.f - dot(&tj.g, &dx);
    match l.finite_value() {
        None => lhs - 0.5 * mu * dot(&dx, &dx),
        Some(l) if mu == l => {
            // single quadratic: equality of values and of gradients
            let gap: f64 = dg.iter().zip(&dx).map(|(g, x)| (g - l * x).powi(2)).sum();
            -(lhs - 0.5 * l * dot(&dx, &dx)).abs().max(gap.sqrt())
        }
        Some(l) => {
            let r: f64 = dg.iter().zip(&dx).map(|(g, x)| (g - l * x).powi(2)).sum();
            lhs - dot(&dg, &dg) / (2.0 * l) - mu / (2.0 * l * (l - mu)) * r
        }
    }
}

/// Evaluates the inequality on all ordered pairs.
pub fn interpolation_check(
    triplets: &[Triplet],
    mu: f64,
    l: ExtReal,
    tol: f64,
) -> Result<InterpolationReport> {
    if !l.gt(0.0) || l.value() < mu || !mu.is_finite() {
        return Err(Error::InvalidClass(format!("mu = {mu}, L = {l}")));
    }
    if let Some(t0) = triplets.first() {
        let d = t0.x.len();
        if triplets.iter().any(|t| t.x.len() != d || t.g.len() != d || !t.f.is_finite()) {
            return Err(Error::InvalidProblem("triplets have inconsistent dimensions".into()));
        }
    }
    let mut worst = f64::INFINITY;
    let mut worst_pair = None;
    for (i, ti) in triplets.iter().enumerate() {
        for (j, tj) in triplets.iter().enumerate() {
            if i == j {
                continue;
            }
            let s = pair_slack(ti, tj, mu, l);
            if s < worst {
                worst = s;
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(InterpolationReport {
        ok: worst >= -tol,
        worst_pair,
        worst_violation: worst,
    })
}

/// Quadratic lower and upper models of a member of `F(mu, L)` around `t`,
/// evaluated at `y`: `f(t.x) + <t.g, y - t.x> + c/2 |y - t.x|^2` for
/// `c = mu` and `c = L`. The upper model is `None` when `L = inf`.
pub fn quadratic_bounds(t: &Triplet, y: &[f64], mu: f64, l: ExtReal) -> (f64, Option<f64>) {
    let d: Vec<f64> = y.iter().zip(&t.x).map(|(a, b)| a - b).collect();
    let lin = t.f + dot(&t.g, &d);
    let n2 = dot(&d, &d);
    (lin + 0.5 * mu * n2, l.finite_value().map(|l| lin + 0.5 * l * n2))
}

//! Optimal curvature shift.
//!
//! Moving `lambda/2 |x|^2` from both terms leaves `F` and the DCA iterates
//! unchanged in structure but changes the curvature classes, hence the
//! rate denominator `p`. This module maximizes `p(lambda)` over the shifts
//! that keep the splitting valid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::curvature::Splitting;
use crate::error::{Error, Result};
use crate::regimes::{classify, Regime};

/// Applies a shift of `lambda` to all four curvatures and re-validates.
pub fn shifted_splitting(s: &Splitting, lambda: f64) -> Result<Splitting> {
    s.shifted(lambda)
}

/// Rate denominator and regime of the shifted splitting.
pub fn p_of_shift(s: &Splitting, lambda: f64) -> Result<(f64, Regime)> {
    let r = classify(&s.shifted(lambda)?)?;
    Ok((r.p, r.regime))
}

/// Largest admissible shift `(mu1 + min(mu1, mu2)) / 2`.
pub fn lambda_max(s: &Splitting) -> f64 {
    (s.mu1() + s.mu1().min(s.mu2())) / 2.0
}

/// Whether `lambda_max` itself is admissible: only when it equals `mu1`
/// with `mu2 >= mu1`, so that the shifted pair is `(0, mu2 - mu1 >= 0)`.
pub fn lambda_max_included(s: &Splitting) -> bool {
    s.mu2() >= s.mu1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSearch {
    /// Lower end of the search window; defaults to
    /// `mu2 - 10 max(1, |mu1|, |mu2|)`.
    pub lambda_lo: Option<f64>,
    /// Optional upper cap, clipped to the admissible range.
    pub lambda_hi: Option<f64>,
    pub grid_points: usize,
    pub refine_tol: f64,
    pub keep_profile: bool,
}

impl Default for ShiftSearch {
    fn default() -> Self {
        ShiftSearch {
            lambda_lo: None,
            lambda_hi: None,
            grid_points: 4096,
            refine_tol: 1e-10,
            keep_profile: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub p: f64,
    pub regime: Regime,
}

/// A change of regime between two neighbouring grid points, located by
/// bisection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeTransition {
    pub lambda: f64,
    pub from: Regime,
    pub to: Regime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    pub lambda_star: f64,
    pub p_star: f64,
    pub regime_at_star: Regime,
    pub lambda_max: f64,
    pub lambda_max_included: bool,
    /// `p` of the unshifted splitting, when it is valid.
    pub p_at_zero: Option<f64>,
    pub transitions: Vec<RegimeTransition>,
    pub profile: Option<Vec<ProfilePoint>>,
}

fn p_or_neg_inf(s: &Splitting, lambda: f64) -> f64 {
    p_of_shift(s, lambda).map_or(f64::NEG_INFINITY, |(p, _)| p)
}

fn sample_points(lo: f64, hi: f64, hi_included: bool, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    let n = n.max(2);
    if hi_included {
        (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect()
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }
}

fn golden_section(s: &Splitting, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (p_or_neg_inf(s, c), p_or_neg_inf(s, d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = p_or_neg_inf(s, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = p_or_neg_inf(s, d);
        }
    }
    (a + b) / 2.0
}

fn locate_transition(s: &Splitting, mut a: f64, mut b: f64, from: Regime) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        match p_of_shift(s, m) {
            Ok((_, r)) if r == from => a = m,
            _ => b = m,
        }
    }
    0.5 * (a + b)
}

/// Maximizes `p(lambda)` by a uniform grid followed by golden-section
/// refinement around the best grid point.
pub fn optimize_shift(s: &Splitting, search: &ShiftSearch) -> Result<ShiftResult> {
    let lmax = lambda_max(s);
    let closed = lambda_max_included(s);
    let lo = search
        .lambda_lo
        .unwrap_or(s.mu2() - 10.0 * 1f64.max(s.mu1().abs()).max(s.mu2().abs()));
    let (hi, hi_included) = match search.lambda_hi {
        Some(h) if h < lmax => (h, true),
        Some(h) if h == lmax => (h, closed),
        _ => (lmax, closed),
    };
    if !lo.is_finite() || !hi.is_finite() || lo > hi || (lo == hi && !hi_included) {
        return Err(Error::InfeasibleRange { lo, hi });
    }

    let points = sample_points(lo, hi, hi_included, search.grid_points);
    let evals: Vec<Option<(f64, Regime)>> = points.iter().map(|&l| p_of_shift(s, l).ok()).collect();
    let (best, &(best_p, _)) = evals
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.as_ref().map(|v| (i, v)))
        .fold(None::<(usize, &(f64, Regime))>, |acc, (i, v)| match acc {
            Some((_, a)) if a.0 >= v.0 => acc,
            _ => Some((i, v)),
        })
        .ok_or(Error::InfeasibleRange { lo, hi })?;

    let mut lambda_star = points[best];
    let mut p_star = best_p;
    if points.len() > 1 {
        let a = points[best.saturating_sub(1)];
        let b = points.get(best + 1).copied().unwrap_or(hi);
        let x = golden_section(s, a, b, search.refine_tol);
        let px = p_or_neg_inf(s, x);
        // p is flat to rounding near an included lambda_max; keep the grid point there
        if px > p_star + 1e-12 * p_star.abs() {
            lambda_star = x;
            p_star = px;
        }
    }
    let (_, regime_at_star) = p_of_shift(s, lambda_star)?;

    let mut transitions = Vec::new();
    for i in 1..points.len() {
        if let (Some((_, r0)), Some((_, r1))) = (evals[i - 1], evals[i]) {
            if r0 != r1 {
                transitions.push(RegimeTransition {
                    lambda: locate_transition(s, points[i - 1], points[i], r0),
                    from: r0,
                    to: r1,
                });
            }
        }
    }

    let profile = search.keep_profile.then(|| {
        points
            .iter()
            .zip(&evals)
            .filter_map(|(&lambda, e)| e.map(|(p, regime)| ProfilePoint { lambda, p, regime }))
            .collect()
    });

    Ok(ShiftResult {
        lambda_star,
        p_star,
        regime_at_star,
        lambda_max: lmax,
        lambda_max_included: closed,
        p_at_zero: classify(s).ok().map(|r| r.p),
        transitions,
        profile,
    })
}

/// Writes a shift profile as CSV `lambda,p,regime`.
pub fn write_profile_csv<W: Write>(profile: &[ProfilePoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["lambda", "p", "regime"])?;
    for pt in profile {
        w.write_record([pt.lambda.to_string(), pt.p.to_string(), pt.regime.to_string()])?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

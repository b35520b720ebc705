//! Sublinear rate bounds on the smallest residual after `N` DCA steps.

use serde::{Deserialize, Serialize};

use crate::curvature::Splitting;
use crate::error::{Error, Result};
use crate::regimes::{classify, Regime};

/// Bounds on `min_k |g1^k - g2^k|^2 / 2` after `n` iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub regime: Regime,
    pub p: f64,
    pub n: usize,
    /// `deltaF / (p N)` where `deltaF = F(x0) - F(xN)`.
    pub bound_simple: f64,
    /// `(F(x0) - F_lo) / (p N + 1/(L1 - mu2))`, when a gap to the infimum is
    /// given and `L1 > mu2`.
    pub bound_flo: Option<f64>,
}

pub fn rate_bound(
    s: &Splitting,
    n: usize,
    delta_f: f64,
    flo_gap: Option<f64>,
) -> Result<RateBound> {
    if n < 1 {
        return Err(Error::InvalidN);
    }
    if !(delta_f >= 0.0 && delta_f.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "objective decrease must be finite and nonnegative (got {delta_f})"
        )));
    }
    if let Some(g) = flo_gap {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "gap to the infimum must be finite and nonnegative (got {g})"
            )));
        }
    }
    let report = classify(s)?;
    let pn = report.p * n as f64;
    let bound_flo = flo_gap.and_then(|gap| {
        let lf = s.l1().sub(s.mu2());
        lf.gt(0.0).then(|| gap / (pn + lf.inv().value()))
    });
    Ok(RateBound {
        regime: report.regime,
        p: report.p,
        n,
        bound_simple: delta_f / pn,
        bound_flo,
    })
}

//! Regime classification and exact one-step decrease coefficients.
//!
//! Every splitting that satisfies the decrease condition falls into one of
//! six parameter cells (plus the degenerate `mu1 = mu2 = 0` case). In each
//! cell one DCA step from `x` to `x+` satisfies
//!
//! ```text
//! F(x) - F(x+) >= sigma/2 * |g1 - g2|^2 + sigma_plus/2 * |g1+ - g2+|^2
//! ```
//!
//! and `p = sigma + sigma_plus` is the denominator of the sublinear rate.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{inv, ExtReal, Splitting};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    /// `mu1 = mu2 = 0`, where the first two cells coincide.
    Degenerate,
}

impl Regime {
    pub const ALL: [Regime; 7] = [
        Regime::P1,
        Regime::P2,
        Regime::P3,
        Regime::P4,
        Regime::P5,
        Regime::P6,
        Regime::Degenerate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::P1 => "p1",
            Regime::P2 => "p2",
            Regime::P3 => "p3",
            Regime::P4 => "p4",
            Regime::P5 => "p5",
            Regime::P6 => "p6",
            Regime::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidClass(format!("unknown regime '{s}'")))
    }
}

/// Classification result with coefficients and diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub sigma: f64,
    pub sigma_plus: f64,
    pub p: f64,
    /// `1/mu1 + 1/mu2 + 1/L2`.
    pub b: ExtReal,
    /// Boundary quantity, only defined for `mu2 < 0`.
    pub e: Option<ExtReal>,
    /// Set in regime p6: `F` is concave and unbounded below.
    pub concave_unbounded: bool,
    pub description: String,
}

/// Threshold `B = inv(mu1) + inv(mu2) + inv(L2)`.
pub fn threshold_b(s: &Splitting) -> ExtReal {
    inv(s.mu1()).add(inv(s.mu2())).add(s.l2().inv())
}

/// Boundary quantity
/// `E = ((L2 + mu2)/(L1 L2)) ((L2 - L1)/(-mu2)) + 1/mu1 - 1/L1`,
/// evaluated in the equivalent form `E = B - (2 + L2/mu2)/L1`, which stays
/// finite at `L2 = 0` and extends to infinite curvatures. `None` unless
/// `mu2 < 0`.
pub fn boundary_e(s: &Splitting) -> Option<ExtReal> {
    if s.mu2() >= 0.0 {
        return None;
    }
    let b = threshold_b(s);
    if s.both_nonsmooth() {
        return None;
    }
    let e = match (s.l1().finite_value(), s.l2().finite_value()) {
        (None, Some(_)) => b,
        // (2 + L2/mu2)/L1 -> -inf as L2 -> inf with mu2 < 0
        (Some(_), None) => ExtReal::INFINITY,
        (Some(l1), Some(l2)) => {
            if b.is_infinite() {
                ExtReal::INFINITY
            } else {
                ExtReal::finite(b.value() - (2.0 + l2 / s.mu2()) / l1)
            }
        }
        (None, None) => unreachable!(),
    };
    Some(e)
}

/// Comparison helpers that widen non-strict inequalities by `tol`.
#[derive(Clone, Copy)]
struct Cmp {
    tol: f64,
}

impl Cmp {
    fn ge(self, a: f64, b: f64) -> bool {
        if a == f64::INFINITY {
            return true;
        }
        a >= b - self.tol
    }
    fn le(self, a: f64, b: f64) -> bool {
        self.ge(b, a)
    }
}

/// Tests whether `s` lies in the domain of `regime`, with non-strict
/// inequalities widened by `tol`.
pub fn in_domain(regime: Regime, s: &Splitting, tol: f64) -> bool {
    let c = Cmp { tol };
    let (m1, l1, m2, l2) = (s.mu1(), s.l1().value(), s.mu2(), s.l2().value());
    let b = threshold_b(s).value();
    let e = boundary_e(s).map(ExtReal::value);
    let e_le0 = e.is_some_and(|e| c.le(e, 0.0));
    let e_ge0 = e.is_some_and(|e| c.ge(e, 0.0));
    match regime {
        Regime::Degenerate => m1 == 0.0 && m2 == 0.0,
        Regime::P1 => {
            c.ge(l1, l2) && c.ge(l2, m1) && m1 >= 0.0 && l1 > m2 && (c.ge(m2, 0.0) || e_le0)
        }
        Regime::P2 => c.ge(l2, l1) && c.ge(l1, m2) && c.ge(m2, 0.0) && l2 > m1 && m1 >= 0.0,
        Regime::P3 => {
            m2 < 0.0
                && m1 > 0.0
                && l2 > m1
                && l1 > m2
                && c.le(b, 0.0)
                && ((c.ge(l1, l2) && e_ge0) || l2 > l1)
        }
        Regime::P4 => {
            // At L2 = 0, B = +inf; for L2 < 0, B < 0 is implied by mu1 + mu2 > 0.
            m2 < 0.0 && m1 > 0.0 && l1 > m2 && ((b > 0.0 && l2 > 0.0) || l2 <= 0.0)
        }
        Regime::P5 => {
            l1 > m1 && c.ge(m1, l2) && l2 > 0.0 && l1 > m2 && (c.ge(m2, 0.0) || c.le(b, 0.0))
        }
        Regime::P6 => l2 > m2 && c.ge(m2, l1) && l1 > m1 && m1 >= 0.0,
    }
}

/// Evaluates the coefficient formulas of `regime` at `s` regardless of
/// domain membership. Returns `(sigma, sigma_plus)`.
pub fn regime_coefficients(regime: Regime, s: &Splitting) -> (f64, f64) {
    let (m1, m2) = (s.mu1(), s.mu2());
    let (l1, l2) = (s.l1(), s.l2());
    match regime {
        Regime::Degenerate => (l1.inv().value(), l2.inv().value()),
        Regime::P1 => match (l1.finite_value(), l2.finite_value()) {
            (None, Some(l2)) => (0.0, (l2 + m1) / (l2 * l2)),
            (Some(l1), Some(l2)) => (
                (l2 - m1) / (l2 * (l1 - m1)),
                (1.0 + m1 * (l1 - l2) / (l2 * (l1 - m1))) / l2,
            ),
            _ => (0.0, 0.0),
        },
        Regime::P2 => match (l1.finite_value(), l2.finite_value()) {
            (Some(l1), None) => ((l1 + m2) / (l1 * l1), 0.0),
            (Some(l1), Some(l2)) => (
                (1.0 + m2 * (l2 - l1) / (l1 * (l2 - m2))) / l1,
                (l1 - m2) / (l1 * (l2 - m2)),
            ),
            _ => (0.0, 0.0),
        },
        Regime::P3 => {
            let sigma = match l1.finite_value() {
                None => 0.0,
                Some(l1) => {
                    let b = threshold_b(s).value();
                    (b / l1) / (b - 1.0 / l1)
                }
            };
            let sigma_plus = l2.add(ExtReal::finite(m2)).inv().value();
            (sigma, sigma_plus)
        }
        Regime::P4 => (0.0, (m1 + m2) / (m2 * m2)),
        Regime::P5 => {
            let l2 = l2.value();
            (0.0, (l2 + m1) / (l2 * l2))
        }
        Regime::P6 => {
            let l1 = l1.value();
            ((l1 + m2) / (l1 * l1), 0.0)
        }
    }
}

/// All regimes whose domain contains `s` (more than one only on boundaries).
pub fn matching_regimes(s: &Splitting, tol: f64) -> Vec<Regime> {
    Regime::ALL
        .into_iter()
        .filter(|&r| in_domain(r, s, tol))
        .collect()
}

fn describe(s: &Splitting) -> String {
    fn term(mu: f64, l: ExtReal) -> &'static str {
        if l.value() <= 0.0 {
            "concave"
        } else if mu > 0.0 {
            "strongly convex"
        } else if mu == 0.0 {
            "convex"
        } else {
            "weakly convex"
        }
    }
    fn smooth(l: ExtReal) -> &'static str {
        if l.is_infinite() {
            " nonsmooth"
        } else {
            ""
        }
    }
    let c = s.objective_curvatures();
    let f = match (c.nonconvex, c.nonconcave) {
        (true, true) => "nonconvex-nonconcave",
        (true, false) => "concave",
        (false, true) => "convex",
        (false, false) => "affine",
    };
    format!(
        "f1{} {}, f2{} {}, F {}",
        smooth(s.l1()),
        term(s.mu1(), s.l1()),
        smooth(s.l2()),
        term(s.mu2(), s.l2()),
        f
    )
}

/// Classifies `s` with exact boundary comparisons.
pub fn classify(s: &Splitting) -> Result<RegimeReport> {
    classify_with_tol(s, 0.0)
}

/// Classifies `s`; `tol` widens the non-strict boundary inequalities for
/// noisy inputs. Regimes are tested in the order p1..p6 and the first match
/// wins, which only matters on boundaries where the formulas agree.
pub fn classify_with_tol(s: &Splitting, tol: f64) -> Result<RegimeReport> {
    if s.both_nonsmooth() {
        return Err(Error::BothNonsmooth);
    }
    if !s.decrease_condition() {
        return Err(Error::OutsideAllRegimes(format!(
            "mu1 + mu2 = {} <= 0 for {s}",
            s.mu1() + s.mu2()
        )));
    }
    let order = [
        Regime::Degenerate,
        Regime::P1,
        Regime::P2,
        Regime::P3,
        Regime::P4,
        Regime::P5,
        Regime::P6,
    ];
    let regime = order
        .into_iter()
        .find(|&r| in_domain(r, s, tol))
        .ok_or_else(|| Error::OutsideAllRegimes(format!("no domain contains {s}")))?;
    let (sigma, sigma_plus) = regime_coefficients(regime, s);
    Ok(RegimeReport {
        regime,
        sigma,
        sigma_plus,
        p: sigma + sigma_plus,
        b: threshold_b(s),
        e: boundary_e(s),
        concave_unbounded: regime == Regime::P6,
        description: describe(s),
    })
}

/// Inclusive, evenly spaced sample of an interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SampleRange {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        SampleRange { lo, hi, points }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// One cell of a contour grid; `regime` is `None` for infeasible cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub mu2: f64,
    pub l2: f64,
    pub regime: Option<Regime>,
    pub p: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_plus: Option<f64>,
}

/// Classifies every `(mu2, L2)` cell for fixed `(mu1, L1)`. Rows are ordered
/// by `mu2`, then `L2`.
pub fn contour_grid(
    mu1: f64,
    l1: ExtReal,
    mu2_range: SampleRange,
    l2_range: SampleRange,
) -> Result<Vec<GridCell>> {
    let mu2s = mu2_range.values();
    let l2s = l2_range.values();
    if mu2s.is_empty() || l2s.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let coords: Vec<(f64, f64)> = mu2s
        .iter()
        .flat_map(|&m| l2s.iter().map(move |&l| (m, l)))
        .collect();
    Ok(coords
        .into_par_iter()
        .map(|(mu2, l2)| {
            let report = Splitting::lenient(mu1, l1, mu2, ExtReal::finite(l2))
                .ok()
                .and_then(|s| classify(&s).ok());
            GridCell {
                mu2,
                l2,
                regime: report.as_ref().map(|r| r.regime),
                p: report.as_ref().map(|r| r.p),
                sigma: report.as_ref().map(|r| r.sigma),
                sigma_plus: report.as_ref().map(|r| r.sigma_plus),
            }
        })
        .collect())
}

/// Writes grid cells as CSV with header `mu2,L2,regime,p,sigma,sigma_plus`.
/// Infeasible cells carry `infeasible` and empty coefficient fields.
pub fn write_grid_csv<W: std::io::Write>(cells: &[GridCell], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["mu2", "L2", "regime", "p", "sigma", "sigma_plus"])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for c in cells {
        w.write_record([
            c.mu2.to_string(),
            c.l2.to_string(),
            c.regime.map_or("infeasible".to_string(), |r| r.to_string()),
            opt(c.p),
            opt(c.sigma),
            opt(c.sigma_plus),
        ])?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

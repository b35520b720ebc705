//! Proximal gradient descent as DCA.
//!
//! PGD on `F = phi + h` with stepsize `gamma` is DCA on
//! `f1 = h + |x|^2/(2 gamma)`, `f2 = |x|^2/(2 gamma) - phi`, so every DCA
//! bound transfers through the curvature map
//! `(mu1, L1, mu2, L2) = (1/gamma + mu_h, 1/gamma + L_h, 1/gamma - L_phi, 1/gamma - mu_phi)`.

use serde::{Deserialize, Serialize};

use crate::curvature::{inv, validate_splitting, ExtReal, Splitting};
use crate::dca::{DcOracles, DcaOptions, DcaTrajectory};
use crate::error::{Error, Result};
use crate::regimes::{classify, Regime, SampleRange};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdSetting {
    pub l_phi: f64,
    pub mu_phi: f64,
    pub mu_h: f64,
    pub l_h: ExtReal,
    pub gamma: f64,
}

impl PgdSetting {
    /// Smooth `phi` in `F(mu_phi, L_phi)` and a convex nonsmooth `h`.
    pub fn new(l_phi: f64, mu_phi: f64, gamma: f64) -> Result<Self> {
        PgdSetting {
            l_phi,
            mu_phi,
            mu_h: 0.0,
            l_h: ExtReal::INFINITY,
            gamma,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidPgdSetting(m));
        if !(self.l_phi > 0.0 && self.l_phi.is_finite()) {
            return bad(format!("L_phi must be positive and finite (got {})", self.l_phi));
        }
        if !(self.mu_phi.is_finite() && self.mu_phi < self.l_phi) {
            return bad(format!("need mu_phi < L_phi (got {} and {})", self.mu_phi, self.l_phi));
        }
        if !(self.mu_h >= 0.0 && self.mu_h.is_finite() && self.l_h.gt(self.mu_h)) {
            return bad(format!("need 0 <= mu_h < L_h (got {} and {})", self.mu_h, self.l_h));
        }
        if !(self.gamma > 0.0 && self.gamma * self.l_phi < 2.0) {
            return bad(format!("gamma must lie in (0, 2/L_phi) (got {})", self.gamma));
        }
        Ok(self)
    }
}

/// Curvatures of the equivalent DCA splitting.
pub fn pgd_to_dca(p: &PgdSetting) -> Result<Splitting> {
    let p = p.validated()?;
    let g = 1.0 / p.gamma;
    validate_splitting(
        g + p.mu_h,
        p.l_h.add(ExtReal::finite(g)),
        g - p.l_phi,
        ExtReal::finite(g - p.mu_phi),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PgdBranch {
    /// `mu_phi <= 0` and (`gamma <= 1/L_phi` or `B <= 0`).
    SmallOrBelowThreshold,
    /// `mu_phi <= 0`, `gamma > 1/L_phi` and `B > 0`.
    AboveThreshold,
    /// `mu_phi > 0`: the closed-form branches do not apply and the generic
    /// classifier value is reported.
    NotCovered,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdSigma {
    pub sigma_plus: f64,
    pub branch: PgdBranch,
    /// `1 + 1/(1 - gamma L_phi) + 1/(1 - gamma mu_phi)`.
    pub b: ExtReal,
    /// The classifier's `sigma_plus` on the mapped splitting.
    pub classifier_sigma_plus: f64,
    pub regime: Regime,
}

/// Stepsize threshold `B = 1 + 1/(1 - gamma L) + 1/(1 - gamma mu)`.
pub fn pgd_threshold(l_phi: f64, mu_phi: f64, gamma: f64) -> ExtReal {
    ExtReal::finite(1.0)
        .add(inv(1.0 - gamma * l_phi))
        .add(inv(1.0 - gamma * mu_phi))
}

/// Closed-form PGD decrease coefficient (with `h` convex and nonsmooth).
pub fn pgd_sigma_plus(l_phi: f64, mu_phi: f64, gamma: f64) -> Result<PgdSigma> {
    let setting = PgdSetting::new(l_phi, mu_phi, gamma)?;
    let report = classify(&pgd_to_dca(&setting)?)?;
    let b = pgd_threshold(l_phi, mu_phi, gamma);
    let (sigma_plus, branch) = if mu_phi > 0.0 {
        (report.sigma_plus, PgdBranch::NotCovered)
    } else if gamma * l_phi <= 1.0 || b.value() <= 0.0 {
        let t = 1.0 - gamma * mu_phi;
        (gamma * (2.0 - gamma * mu_phi) / (t * t), PgdBranch::SmallOrBelowThreshold)
    } else {
        let t = 1.0 - gamma * l_phi;
        (gamma * (2.0 - gamma * l_phi) / (t * t), PgdBranch::AboveThreshold)
    };
    Ok(PgdSigma {
        sigma_plus,
        branch,
        b,
        classifier_sigma_plus: report.sigma_plus,
        regime: report.regime,
    })
}

/// `F_gap / (sigma_plus N)` bound on `min_k |grad phi(x^k) + g_h^k|^2 / 2`.
pub fn pgd_rate(p: &PgdSetting, n: usize, f_gap: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidN);
    }
    let p = p.validated()?;
    let sigma_plus = if p.mu_h == 0.0 && p.l_h.is_infinite() {
        pgd_sigma_plus(p.l_phi, p.mu_phi, p.gamma)?.sigma_plus
    } else {
        classify(&pgd_to_dca(&p)?)?.p
    };
    Ok(f_gap / (sigma_plus * n as f64))
}

/// Stepsize regions of the PGD regime summary, by convexity of `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepsizeCell {
    NonconvexSmall,
    NonconvexUnit,
    NonconvexLarge,
    ConvexSmall,
    ConvexUnit,
    ConvexLarge,
    StronglyConvexSmall,
    StronglyConvexUnit,
    StronglyConvexMid,
    StronglyConvexLarge,
}

impl StepsizeCell {
    pub fn of(l_phi: f64, mu_phi: f64, gamma: f64) -> StepsizeCell {
        use StepsizeCell::*;
        let unit = 1.0 / l_phi;
        let pos = if gamma < unit {
            0
        } else if gamma == unit {
            1
        } else {
            2
        };
        if mu_phi < 0.0 {
            [NonconvexSmall, NonconvexUnit, NonconvexLarge][pos]
        } else if mu_phi == 0.0 {
            [ConvexSmall, ConvexUnit, ConvexLarge][pos]
        } else if pos < 2 {
            [StronglyConvexSmall, StronglyConvexUnit][pos]
        } else if gamma < 2.0 / (l_phi + mu_phi) {
            StronglyConvexMid
        } else {
            StronglyConvexLarge
        }
    }

    /// Regime label as printed in the PGD regime summary.
    pub fn printed(self) -> &'static str {
        use StepsizeCell::*;
        match self {
            NonconvexSmall | NonconvexUnit => "p1",
            NonconvexLarge => "p1 or p4",
            ConvexSmall | ConvexUnit => "p1 = p5",
            ConvexLarge => "p4",
            StronglyConvexSmall | StronglyConvexUnit => "p5",
            StronglyConvexMid => "p4 or p5",
            StronglyConvexLarge => "p4",
        }
    }

    /// Regimes the cell admits once the ambiguous entries are resolved by the
    /// sign of the stepsize threshold. The large-step convex cell is printed
    /// as p4 but lies in p1 (equivalently p5) while the threshold is
    /// nonpositive, i.e. for `gamma L_phi <= 3/2`.
    pub fn expected(self, threshold: ExtReal) -> &'static [Regime] {
        use StepsizeCell::*;
        let below = threshold.value() <= 0.0;
        match self {
            NonconvexSmall | NonconvexUnit => &[Regime::P1],
            NonconvexLarge | ConvexLarge if below => &[Regime::P1],
            NonconvexLarge | ConvexLarge => &[Regime::P4],
            ConvexSmall | ConvexUnit => &[Regime::P1, Regime::P5],
            StronglyConvexSmall | StronglyConvexUnit => &[Regime::P5],
            StronglyConvexMid if below => &[Regime::P5],
            StronglyConvexMid | StronglyConvexLarge => &[Regime::P4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdMapRow {
    pub gamma: f64,
    pub mu2: f64,
    pub l2: f64,
    pub regime: Regime,
    pub sigma_plus: f64,
    pub cell: StepsizeCell,
}

/// Mapped curvatures, regime and decrease coefficient over a stepsize sweep.
/// Stepsizes outside `(0, 2/L_phi)` are skipped.
pub fn pgd_map(
    l_phi: f64,
    mu_phi: f64,
    mu_h: f64,
    l_h: ExtReal,
    gammas: SampleRange,
) -> Result<Vec<PgdMapRow>> {
    let vals = gammas.values();
    if vals.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::new();
    for gamma in vals {
        let setting = PgdSetting {
            l_phi,
            mu_phi,
            mu_h,
            l_h,
            gamma,
        };
        let Ok(setting) = setting.validated() else {
            if gamma > 0.0 && gamma * l_phi < 2.0 {
                setting.validated()?;
            }
            continue;
        };
        let s = pgd_to_dca(&setting)?;
        let r = classify(&s)?;
        rows.push(PgdMapRow {
            gamma,
            mu2: s.mu2(),
            l2: s.l2().value(),
            regime: r.regime,
            sigma_plus: r.sigma_plus,
            cell: StepsizeCell::of(l_phi, mu_phi, gamma),
        });
    }
    Ok(rows)
}

/// Oracles of a composite problem `phi + h`.
pub trait CompositeOracles {
    fn phi(&self, x: &[f64]) -> f64;
    fn phi_grad(&self, x: &[f64]) -> Vec<f64>;
    fn h(&self, x: &[f64]) -> f64;
    /// `argmin_w h(w) + |w - y|^2 / (2 gamma)`.
    fn prox_h(&self, y: &[f64], gamma: f64) -> Vec<f64>;
    /// A subgradient of `h`; only queried at the starting point.
    fn h_subgrad(&self, x: &[f64]) -> Vec<f64>;
}

/// Runs `x+ = prox_(gamma h)(x - gamma grad phi(x))`.
///
/// For `k >= 1` the recorded `h`-subgradient comes from the prox optimality
/// condition, `g_h^k = (x^(k-1) - gamma grad phi(x^(k-1)) - x^k) / gamma`,
/// and the residual is `|grad phi(x^k) + g_h^k|^2`. The `g1`/`g2` columns
/// hold `g_h + x/gamma` and `x/gamma - grad phi(x)`, the subgradients of the
/// equivalent DCA splitting.
pub fn run_pgd<C: CompositeOracles + ?Sized>(
    oracles: &C,
    x0: &[f64],
    gamma: f64,
    opts: &DcaOptions,
) -> Result<DcaTrajectory> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidPgdSetting(format!("gamma must be positive (got {gamma})")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("starting point"));
    }
    let mut traj = DcaTrajectory::default();
    let mut x = x0.to_vec();
    let mut gh = oracles.h_subgrad(&x);
    let mut f = oracles.phi(&x) + oracles.h(&x);
    for k in 0..=opts.max_iter {
        let grad = oracles.phi_grad(&x);
        let r: f64 = grad.iter().zip(&gh).map(|(a, b)| (a + b) * (a + b)).sum();
        let g1: Vec<f64> = gh.iter().zip(&x).map(|(g, x)| g + x / gamma).collect();
        let g2: Vec<f64> = grad.iter().zip(&x).map(|(g, x)| x / gamma - g).collect();
        traj.push_with_residual(x.clone(), g1, g2, f, r);
        if k == opts.max_iter || opts.stop_tol.is_some_and(|t| r <= t) {
            break;
        }
        let y: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x - gamma * g).collect();
        let next = oracles.prox_h(&y, gamma);
        if next.len() != x.len() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::ProxFailure(k + 1));
        }
        let f_next = oracles.phi(&next) + oracles.h(&next);
        if opts.expect_monotone && f_next - f > 1e-9 * (1.0 + f.abs()) {
            return Err(Error::DivergenceDetected {
                iteration: k + 1,
                increase: f_next - f,
            });
        }
        gh = y.iter().zip(&next).map(|(y, n)| (y - n) / gamma).collect();
        x = next;
        f = f_next;
    }
    Ok(traj)
}

/// The DCA splitting `f1 = h + |x|^2/(2 gamma)`, `f2 = |x|^2/(2 gamma) - phi`
/// of a composite problem.
pub struct PgdAsDca<'a, C: CompositeOracles + ?Sized> {
    pub inner: &'a C,
    pub gamma: f64,
}

fn half_sq_norm(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|v| v * v).sum::<f64>()
}

impl<C: CompositeOracles + ?Sized> DcOracles for PgdAsDca<'_, C> {
    fn eval_f1(&self, x: &[f64]) -> f64 {
        self.inner.h(x) + half_sq_norm(x) / self.gamma
    }
    fn eval_f2(&self, x: &[f64]) -> f64 {
        half_sq_norm(x) / self.gamma - self.inner.phi(x)
    }
    fn subgrad_f1(&self, x: &[f64]) -> Vec<f64> {
        self.inner
            .h_subgrad(x)
            .iter()
            .zip(x)
            .map(|(g, x)| g + x / self.gamma)
            .collect()
    }
    fn subgrad_f2(&self, x: &[f64]) -> Vec<f64> {
        self.inner
            .phi_grad(x)
            .iter()
            .zip(x)
            .map(|(g, x)| x / self.gamma - g)
            .collect()
    }
    fn conj_step_f1(&self, g: &[f64]) -> Result<Vec<f64>> {
        let y: Vec<f64> = g.iter().map(|v| self.gamma * v).collect();
        Ok(self.inner.prox_h(&y, self.gamma))
    }
}

/// `phi(x) = a/2 x^2 + b x` and `h(x) = kappa |x|` in one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticL1 {
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
}

impl CompositeOracles for QuadraticL1 {
    fn phi(&self, x: &[f64]) -> f64 {
        0.5 * self.a * x[0] * x[0] + self.b * x[0]
    }
    fn phi_grad(&self, x: &[f64]) -> Vec<f64> {
        vec![self.a * x[0] + self.b]
    }
    fn h(&self, x: &[f64]) -> f64 {
        self.kappa * x[0].abs()
    }
    fn prox_h(&self, y: &[f64], gamma: f64) -> Vec<f64> {
        let t = gamma * self.kappa;
        vec![y[0].signum() * (y[0].abs() - t).max(0.0)]
    }
    fn h_subgrad(&self, x: &[f64]) -> Vec<f64> {
        vec![if x[0] == 0.0 { 0.0 } else { self.kappa * x[0].signum() }]
    }
}

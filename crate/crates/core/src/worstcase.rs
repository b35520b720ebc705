//! Exact one-dimensional worst-case instances for regimes p1 and p2.
//!
//! Both constructions place the iterates on an arithmetic grid with a
//! constant residual `U = -sqrt(2 Delta / (p N))` and an objective that
//! drops by exactly `Delta / N` per step, so the one-step bound holds with
//! equality and the `N`-step rate is attained.

use serde::{Deserialize, Serialize};

use crate::curvature::{ExtReal, Splitting};
use crate::dca::DcOracles;
use crate::error::{Error, Result};
use crate::interpolation::Triplet;
use crate::piecewise::{PiecewiseQuadratic1D, QuadPiece};
use crate::regimes::{in_domain, regime_coefficients, Regime};

/// Anchor of the construction at the first iterate. The function built as a
/// single quadratic passes through `(x0, f_0)` with slope `g0`, where
/// `f_0 = f2_0` for p1 and `f_0 = f2_0 + Delta` for p2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub x0: f64,
    pub f2_0: f64,
    pub g0: f64,
}

impl Default for Anchors {
    fn default() -> Self {
        Anchors {
            x0: 0.0,
            f2_0: 0.0,
            g0: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseInstance {
    pub regime: Regime,
    pub f1: PiecewiseQuadratic1D,
    pub f2: PiecewiseQuadratic1D,
    pub splitting: Splitting,
    pub n: usize,
    pub delta: f64,
    pub p: f64,
    pub u: f64,
    pub x_iters: Vec<f64>,
    pub xbar: Vec<f64>,
    pub predicted_min_residual_sq: f64,
}

fn check_common(delta: f64, n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidN);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidProblem(format!("delta must be positive (got {delta})")));
    }
    Ok(())
}

fn violation(regime: Regime, reason: impl Into<String>) -> Error {
    Error::DomainViolation {
        regime,
        reason: reason.into(),
    }
}

/// Builds the p1 instance: `f2` is the `L2`-quadratic through the anchor and
/// `f1` alternates curvature `L1` on `[x^k, xbar^k]` and `mu1` on
/// `[xbar^k, x^(k+1)]`, with `L1` tails.
pub fn instance_p1(
    mu1: f64,
    l1: f64,
    mu2: f64,
    l2: f64,
    delta: f64,
    n: usize,
    anchors: Anchors,
) -> Result<WorstCaseInstance> {
    if mu1 == 0.0 {
        return Err(Error::DegenerateMu1);
    }
    if !l1.is_finite() {
        return Err(violation(Regime::P1, "L1 must be finite"));
    }
    let s = Splitting::lenient(mu1, ExtReal::finite(l1), mu2, ExtReal::new(l2)?)
        .map_err(|e| violation(Regime::P1, e.to_string()))?;
    if !s.decrease_condition() || !in_domain(Regime::P1, &s, 0.0) {
        return Err(violation(Regime::P1, format!("{s} is outside the p1 domain")));
    }
    check_common(delta, n)?;
    let (sigma, sigma_plus) = regime_coefficients(Regime::P1, &s);
    let p = sigma + sigma_plus;
    let nf = n as f64;
    let u = -(2.0 * delta / (p * nf)).sqrt();
    let h = -u / l2;
    let Anchors { x0, f2_0, g0 } = anchors;

    let f2 = PiecewiseQuadratic1D::quadratic(l2, x0, f2_0, g0);
    let x_iters: Vec<f64> = (0..=n).map(|k| x0 + k as f64 * h).collect();
    let g1 = |k: usize| g0 - (k as f64 - 1.0) * u;
    let f1v = |k: usize| f2.value(x_iters[k]) + (n - k) as f64 * delta / nf;
    let ratio = (l2 - mu1) / (l1 - mu1);
    let xbar: Vec<f64> = (0..n).map(|k| x_iters[k] + ratio * h).collect();

    let mut breakpoints = vec![x0];
    let mut pieces = vec![QuadPiece::new(l1, g1(0), f1v(0), x0)];
    for k in 0..n {
        // zero-length pieces occur at L2 = mu1 (no L1 part) and L1 = L2 (no mu1 part)
        if ratio > 0.0 {
            pieces.push(QuadPiece::new(l1, g1(k), f1v(k), x_iters[k]));
            if ratio < 1.0 {
                breakpoints.push(xbar[k]);
            }
        }
        if ratio < 1.0 {
            pieces.push(QuadPiece::new(mu1, g1(k + 1), f1v(k + 1), x_iters[k + 1]));
        }
        breakpoints.push(x_iters[k + 1]);
    }
    pieces.push(QuadPiece::new(l1, g1(n), f1v(n), x_iters[n]));
    let f1 = PiecewiseQuadratic1D::new(breakpoints, pieces)?;

    Ok(WorstCaseInstance {
        regime: Regime::P1,
        f1,
        f2,
        splitting: s,
        n,
        delta,
        p,
        u,
        x_iters,
        xbar,
        predicted_min_residual_sq: u * u,
    })
}

/// Builds the p2 instance: `f1` is the `L1`-quadratic through the anchor and
/// `f2` alternates curvature `mu2` on `[x^k, xbar^k]` and `L2` on
/// `[xbar^k, x^(k+1)]`, with `mu2` tails.
pub fn instance_p2(
    mu1: f64,
    l1: f64,
    mu2: f64,
    l2: f64,
    delta: f64,
    n: usize,
    anchors: Anchors,
) -> Result<WorstCaseInstance> {
    let ok = mu1 >= 0.0 && mu2 >= 0.0 && mu1.max(mu2) < l1 && l1 < l2 && l2.is_finite();
    if !ok {
        return Err(violation(
            Regime::P2,
            format!("need mu1, mu2 >= 0 and max(mu1, mu2) < L1 < L2 < inf, got ({mu1}, {l1}, {mu2}, {l2})"),
        ));
    }
    let s = Splitting::lenient(mu1, ExtReal::finite(l1), mu2, ExtReal::finite(l2))?;
    check_common(delta, n)?;
    let (sigma, sigma_plus) = regime_coefficients(Regime::P2, &s);
    let p = sigma + sigma_plus;
    let nf = n as f64;
    let u = -(2.0 * delta / (p * nf)).sqrt();
    let h = -u / l1;
    let Anchors { x0, f2_0, g0 } = anchors;

    let f1 = PiecewiseQuadratic1D::quadratic(l1, x0, f2_0 + delta, g0);
    let x_iters: Vec<f64> = (0..=n).map(|k| x0 + k as f64 * h).collect();
    let g2 = |k: usize| g0 - (k as f64 + 1.0) * u;
    let f2v = |k: usize| f1.value(x_iters[k]) - (n - k) as f64 * delta / nf;
    let ratio = (l2 - l1) / (l2 - mu2);
    let xbar: Vec<f64> = (0..n).map(|k| x_iters[k] + ratio * h).collect();

    let mut breakpoints = vec![x0];
    let mut pieces = vec![QuadPiece::new(mu2, g2(0), f2v(0), x0)];
    for k in 0..n {
        pieces.push(QuadPiece::new(mu2, g2(k), f2v(k), x_iters[k]));
        breakpoints.push(xbar[k]);
        pieces.push(QuadPiece::new(l2, g2(k + 1), f2v(k + 1), x_iters[k + 1]));
        breakpoints.push(x_iters[k + 1]);
    }
    pieces.push(QuadPiece::new(mu2, g2(n), f2v(n), x_iters[n]));
    let f2 = PiecewiseQuadratic1D::new(breakpoints, pieces)?;

    Ok(WorstCaseInstance {
        regime: Regime::P2,
        f1,
        f2,
        splitting: s,
        n,
        delta,
        p,
        u,
        x_iters,
        xbar,
        predicted_min_residual_sq: u * u,
    })
}

impl WorstCaseInstance {
    pub fn as_oracles(&self) -> PiecewiseDc {
        PiecewiseDc {
            f1: self.f1.clone(),
            f2: self.f2.clone(),
        }
    }

    /// Triplets of `f1` and `f2` at all iterates and breakpoints.
    pub fn triplets(&self) -> (Vec<Triplet>, Vec<Triplet>) {
        let sample = |f: &PiecewiseQuadratic1D| {
            let mut xs: Vec<f64> = self.x_iters.iter().chain(&self.xbar).copied().collect();
            xs.extend_from_slice(self.f1.breakpoints());
            xs.extend_from_slice(self.f2.breakpoints());
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            xs.iter()
                .map(|&x| Triplet::scalar(x, f.derivative(x), f.value(x)))
                .collect::<Vec<_>>()
        };
        (sample(&self.f1), sample(&self.f2))
    }
}

/// Oracles of a splitting with piecewise-quadratic terms; the conjugate step
/// inverts the derivative of `f1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDc {
    pub f1: PiecewiseQuadratic1D,
    pub f2: PiecewiseQuadratic1D,
}

impl DcOracles for PiecewiseDc {
    fn eval_f1(&self, x: &[f64]) -> f64 {
        self.f1.value(x[0])
    }
    fn eval_f2(&self, x: &[f64]) -> f64 {
        self.f2.value(x[0])
    }
    fn subgrad_f1(&self, x: &[f64]) -> Vec<f64> {
        vec![self.f1.derivative(x[0])]
    }
    fn subgrad_f2(&self, x: &[f64]) -> Vec<f64> {
        vec![self.f2.derivative(x[0])]
    }
    fn conj_step_f1(&self, g: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.f1.inverse_derivative(g[0])?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dca::{check_step_bounds, one_step_slacks, run_dca, DcaOptions};
    use crate::interpolation::interpolation_check;
    use approx::assert_relative_eq;

    fn run(inst: &WorstCaseInstance) -> crate::dca::DcaTrajectory {
        run_dca(&inst.as_oracles(), &[inst.x_iters[0]], &DcaOptions::steps(inst.n)).unwrap()
    }

    #[test]
    fn p1_small_stepsize_setup() {
        let inst = instance_p1(0.1, 2.0, -0.01, 0.5, 1.0, 3, Anchors::default()).unwrap();
        assert!((inst.p - 2.736842).abs() < 1e-6);
        let t = run(&inst);
        for (k, x) in t.points.iter().enumerate() {
            assert!((x[0] - inst.x_iters[k]).abs() < 1e-10);
        }
        assert_relative_eq!(t.final_min_residual_sq() / 2.0, 1.0 / (3.0 * inst.p), max_relative = 1e-9);
        assert_relative_eq!(t.final_min_residual_sq() / 2.0, 0.121795, epsilon = 1e-6);
        for r in &t.residual_sq {
            assert_relative_eq!(*r, inst.predicted_min_residual_sq, max_relative = 1e-9);
        }
        assert_relative_eq!(t.objective[0] - t.objective[3], 1.0, max_relative = 1e-12);
        for s in one_step_slacks(&inst.splitting, &t).unwrap() {
            assert!(s.abs() < 1e-9);
        }
        assert!(check_step_bounds(&inst.splitting, &t, 1e-9));
    }

    #[test]
    fn p1_normalized_single_step() {
        let s = Splitting::finite(0.3, 5.0, 0.2, 1.0).unwrap();
        let p = crate::classify(&s).unwrap().p;
        let inst = instance_p1(0.3, 5.0, 0.2, 1.0, p / 2.0, 1, Anchors::default()).unwrap();
        assert_relative_eq!(inst.u, -1.0, max_relative = 1e-15);
        let t = run(&inst);
        assert_relative_eq!(t.residual_sq[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(t.residual_sq[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn p1_conjugate_step_hits_next_iterate() {
        let inst = instance_p1(0.5, 3.0, 0.2, 2.0, 1.0, 4, Anchors { x0: 1.0, f2_0: -2.0, g0: 0.3 }).unwrap();
        let o = inst.as_oracles();
        let g = o.subgrad_f2(&[1.0]);
        let x1 = o.conj_step_f1(&g).unwrap()[0];
        assert_relative_eq!(x1, 1.0 - inst.u / 2.0, max_relative = 1e-14);
        for k in 0..inst.n {
            assert!(inst.x_iters[k] <= inst.xbar[k] && inst.xbar[k] <= inst.x_iters[k + 1]);
        }
    }

    #[test]
    fn p1_edge_ratios_drop_empty_pieces() {
        // L1 = L2: no mu1 piece
        let a = instance_p1(0.3, 2.0, 0.1, 2.0, 1.0, 3, Anchors::default()).unwrap();
        assert_eq!(a.f1.curvature_range(), (2.0, 2.0));
        // L2 = mu1: no L1 piece between iterates
        let b = instance_p1(0.5, 2.0, 0.1, 0.5, 1.0, 3, Anchors::default()).unwrap();
        let t = run(&b);
        assert_relative_eq!(t.final_min_residual_sq() / 2.0, 1.0 / (3.0 * b.p), max_relative = 1e-9);
    }

    #[test]
    fn p1_rejections() {
        assert_eq!(
            instance_p1(0.0, 2.0, 0.5, 1.0, 1.0, 2, Anchors::default()),
            Err(Error::DegenerateMu1)
        );
        assert!(matches!(
            instance_p1(1.0, 2.0, 0.5, 0.5, 1.0, 2, Anchors::default()),
            Err(Error::DomainViolation { regime: Regime::P1, .. })
        ));
        // E > 0 with mu2 < 0 belongs to p3
        assert!(matches!(
            instance_p1(1.0, 2.0, -0.5, 1.5, 1.0, 2, Anchors::default()),
            Err(Error::DomainViolation { .. })
        ));
        assert_eq!(instance_p1(0.3, 2.0, 0.1, 1.0, 1.0, 0, Anchors::default()), Err(Error::InvalidN));
    }

    #[test]
    fn p2_reference_setup() {
        let inst = instance_p2(0.25, 1.5, 1.0, 2.0, 1.0, 3, Anchors::default()).unwrap();
        let t = run(&inst);
        assert_relative_eq!(t.final_min_residual_sq() / 2.0, 1.0 / (3.0 * inst.p), max_relative = 1e-9);
        assert_relative_eq!(inst.p, 11.0 / 9.0, max_relative = 1e-12);
        for s in one_step_slacks(&inst.splitting, &t).unwrap() {
            assert!(s.abs() < 1e-9);
        }
        let (_, t2) = inst.triplets();
        assert!(interpolation_check(&t2, 1.0, ExtReal::finite(2.0), 1e-10).unwrap().ok);
        assert!(!interpolation_check(&t2, 1.0, ExtReal::finite(1.9), 1e-10).unwrap().ok);
    }

    #[test]
    fn p2_example_splitting_single_step() {
        let inst = instance_p2(1.5, 2.0, 1.0, 2.5, 1.0, 1, Anchors::default()).unwrap();
        let t = run(&inst);
        assert!((t.final_min_residual_sq() / 2.0 - 1.0 / 0.9167).abs() < 1e-3);
        assert_relative_eq!(t.final_min_residual_sq() / 2.0, 1.0 / inst.p, max_relative = 1e-12);
    }

    #[test]
    fn p2_rejections() {
        assert!(matches!(
            instance_p2(0.25, 2.0, 1.0, 2.0, 1.0, 3, Anchors::default()),
            Err(Error::DomainViolation { regime: Regime::P2, .. })
        ));
        assert!(instance_p2(0.25, 1.5, -0.1, 2.0, 1.0, 3, Anchors::default()).is_err());
    }

    #[test]
    fn p1_generated_functions_interpolate() {
        let inst = instance_p1(0.1, 2.0, -0.01, 0.5, 1.0, 5, Anchors::default()).unwrap();
        let (t1, t2) = inst.triplets();
        assert!(interpolation_check(&t1, 0.1, ExtReal::finite(2.0), 1e-10).unwrap().ok);
        assert!(interpolation_check(&t2, -0.01, ExtReal::finite(0.5), 1e-10).unwrap().ok);
        let js = serde_json::to_string(&inst).unwrap();
        let back: WorstCaseInstance = serde_json::from_str(&js).unwrap();
        assert_eq!(back, inst);
    }
}

//! DCA over caller-supplied oracles, with runtime checks of the one-step
//! and per-step decrease bounds.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::curvature::Splitting;
use crate::error::{Error, Result};
use crate::regimes::classify;

/// First-order oracles of a splitting `F = f1 - f2`.
///
/// `conj_step_f1(g)` must return a minimizer of `f1(w) - <g, w>`, i.e. an
/// element of the conjugate subdifferential of `f1` at `g`. When several
/// minimizers exist, whichever the oracle returns is the next iterate.
pub trait DcOracles {
    fn eval_f1(&self, x: &[f64]) -> f64;
    fn eval_f2(&self, x: &[f64]) -> f64;
    fn subgrad_f1(&self, x: &[f64]) -> Vec<f64>;
    fn subgrad_f2(&self, x: &[f64]) -> Vec<f64>;
    fn conj_step_f1(&self, g: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcaOptions {
    /// Number of DCA steps `N`.
    pub max_iter: usize,
    /// Stop once `|g1^k - g2^k|^2 <= stop_tol`.
    pub stop_tol: Option<f64>,
    /// Fail with [`Error::DivergenceDetected`] if `F` increases by more than
    /// `1e-9 (1 + |F|)`. Only meaningful when `mu1 + mu2 >= 0`.
    pub expect_monotone: bool,
}

impl DcaOptions {
    pub fn steps(n: usize) -> Self {
        DcaOptions {
            max_iter: n,
            stop_tol: None,
            expect_monotone: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DcaTrajectory {
    pub points: Vec<Vec<f64>>,
    /// `g1^k`; for `k >= 1` this is exactly `g2^(k-1)`.
    pub g1: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub objective: Vec<f64>,
    pub residual_sq: Vec<f64>,
    /// Running minimum of `residual_sq`.
    pub min_residual_sq: Vec<f64>,
    /// `|x^k - x^(k+1)|^2` for each step taken.
    pub step_norms: Vec<f64>,
}

impl DcaTrajectory {
    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn final_min_residual_sq(&self) -> f64 {
        self.min_residual_sq.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Appends one iterate with its subgradients and objective value.
    pub fn push(&mut self, x: Vec<f64>, g1: Vec<f64>, g2: Vec<f64>, objective: f64) {
        let r = sq_dist(&g1, &g2);
        self.push_with_residual(x, g1, g2, objective, r);
    }

    /// Like `push`, with the residual computed by the caller.
    pub fn push_with_residual(&mut self, x: Vec<f64>, g1: Vec<f64>, g2: Vec<f64>, objective: f64, r: f64) {
        let m = self.min_residual_sq.last().copied().unwrap_or(f64::INFINITY).min(r);
        if let Some(prev) = self.points.last() {
            self.step_norms.push(sq_dist(prev, &x));
        }
        self.points.push(x);
        self.g1.push(g1);
        self.g2.push(g2);
        self.objective.push(objective);
        self.residual_sq.push(r);
        self.min_residual_sq.push(m);
    }

    /// CSV with header `k,x_1,..,x_d,F,residual_sq`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["k".to_string()];
        header.extend((1..=self.dim()).map(|i| format!("x_{i}")));
        header.push("F".into());
        header.push("residual_sq".into());
        w.write_record(&header)?;
        for (k, x) in self.points.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(x.iter().map(f64::to_string));
            row.push(self.objective[k].to_string());
            row.push(self.residual_sq[k].to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs up to `opts.max_iter` DCA steps `x+ = argmin f1(w) - <g2, w>` with
/// `g2` a subgradient of `f2` at `x`.
pub fn run_dca<O: DcOracles + ?Sized>(
    oracles: &O,
    x0: &[f64],
    opts: &DcaOptions,
) -> Result<DcaTrajectory> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("starting point"));
    }
    let mut traj = DcaTrajectory::default();
    let mut x = x0.to_vec();
    let mut g1 = oracles.subgrad_f1(&x);
    let mut f = oracles.eval_f1(&x) - oracles.eval_f2(&x);
    for k in 0..=opts.max_iter {
        let g2 = oracles.subgrad_f2(&x);
        traj.push(x.clone(), g1, g2.clone(), f);
        let r = *traj.residual_sq.last().unwrap();
        if k == opts.max_iter || opts.stop_tol.is_some_and(|t| r <= t) {
            break;
        }
        let next = oracles.conj_step_f1(&g2).map_err(|e| match e {
            Error::NonInvertibleDerivative(_) => e,
            _ => Error::OracleFailure(k + 1),
        })?;
        if next.len() != x.len() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::OracleFailure(k + 1));
        }
        let f_next = oracles.eval_f1(&next) - oracles.eval_f2(&next);
        if opts.expect_monotone && f_next - f > 1e-9 * (1.0 + f.abs()) {
            return Err(Error::DivergenceDetected {
                iteration: k + 1,
                increase: f_next - f,
            });
        }
        x = next;
        g1 = g2;
        f = f_next;
    }
    Ok(traj)
}

/// Default absolute tolerance for runtime bound checks at objective level `f`.
pub fn default_tol(f: f64) -> f64 {
    1e-9 + 1e-12 * f.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneStepCheck {
    pub slack: f64,
    pub holds: bool,
}

/// Slack of the one-step bound
/// `F(x) - F(x+) >= sigma G^2/2 + sigma_plus G+^2/2`.
pub fn check_one_step(
    s: &Splitting,
    f_x: f64,
    f_xplus: f64,
    g_sq: f64,
    gplus_sq: f64,
    tol: f64,
) -> Result<OneStepCheck> {
    let r = classify(s)?;
    let slack = (f_x - f_xplus) - r.sigma * g_sq / 2.0 - r.sigma_plus * gplus_sq / 2.0;
    Ok(OneStepCheck {
        slack,
        holds: slack >= -tol,
    })
}

/// One-step slacks for every consecutive pair of a trajectory.
pub fn one_step_slacks(s: &Splitting, traj: &DcaTrajectory) -> Result<Vec<f64>> {
    (0..traj.steps())
        .map(|k| {
            check_one_step(
                s,
                traj.objective[k],
                traj.objective[k + 1],
                traj.residual_sq[k],
                traj.residual_sq[k + 1],
                0.0,
            )
            .map(|c| c.slack)
        })
        .collect()
}

/// Worst slacks of the per-step sandwich
/// `(mu1+mu2)/2 |dx|^2 <= F(x) - F(x+) <= (L1+L2)/2 |dx|^2`.
/// The upper slack is `None` when either upper curvature is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepBoundSlacks {
    pub lower: f64,
    pub upper: Option<f64>,
}

pub fn step_bound_slacks(s: &Splitting, traj: &DcaTrajectory) -> StepBoundSlacks {
    let lo_c = (s.mu1() + s.mu2()) / 2.0;
    let hi_c = match (s.l1().finite_value(), s.l2().finite_value()) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        _ => None,
    };
    let mut lower = f64::INFINITY;
    let mut upper = hi_c.map(|_| f64::INFINITY);
    for k in 0..traj.steps() {
        let df = traj.objective[k] - traj.objective[k + 1];
        let dx = traj.step_norms[k];
        lower = lower.min(df - lo_c * dx);
        if let (Some(u), Some(c)) = (upper.as_mut(), hi_c) {
            *u = u.min(c * dx - df);
        }
    }
    StepBoundSlacks { lower, upper }
}

/// Checks the per-step sandwich on every step of `traj`.
pub fn check_step_bounds(s: &Splitting, traj: &DcaTrajectory, tol: f64) -> bool {
    let b = step_bound_slacks(s, traj);
    b.lower >= -tol && b.upper.map_or(true, |u| u >= -tol)
}

/// Slack of the `N`-step rate on a trajectory:
/// `(F(x0) - F(xN))/(p N) - min_k residual_sq/2`.
pub fn rate_slack(s: &Splitting, traj: &DcaTrajectory) -> Result<f64> {
    let n = traj.steps();
    if n == 0 {
        return Err(Error::InvalidN);
    }
    let p = classify(s)?.p;
    let df = traj.objective[0] - traj.objective[n];
    Ok(df / (p * n as f64) - traj.min_residual_sq[n - 1] / 2.0)
}

/// Separable quadratics `f_i(x) = sum_j a_ij/2 x_j^2 + b_ij x_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableQuadratics {
    pub a1: Vec<f64>,
    pub b1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl SeparableQuadratics {
    /// Requires `a1 > 0` componentwise so the conjugate step is unique.
    pub fn new(a1: Vec<f64>, b1: Vec<f64>, a2: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        let d = a1.len();
        if b1.len() != d || a2.len() != d || b2.len() != d || d == 0 {
            return Err(Error::InvalidProblem("coefficient lengths differ".into()));
        }
        if a1.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidProblem("f1 curvatures must be positive".into()));
        }
        Ok(SeparableQuadratics { a1, b1, a2, b2 })
    }

    fn eval(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
        x.iter()
            .zip(a.iter().zip(b))
            .map(|(x, (a, b))| 0.5 * a * x * x + b * x)
            .sum()
    }

    fn grad(a: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
        x.iter().zip(a.iter().zip(b)).map(|(x, (a, b))| a * x + b).collect()
    }
}

impl DcOracles for SeparableQuadratics {
    fn eval_f1(&self, x: &[f64]) -> f64 {
        Self::eval(&self.a1, &self.b1, x)
    }
    fn eval_f2(&self, x: &[f64]) -> f64 {
        Self::eval(&self.a2, &self.b2, x)
    }
    fn subgrad_f1(&self, x: &[f64]) -> Vec<f64> {
        Self::grad(&self.a1, &self.b1, x)
    }
    fn subgrad_f2(&self, x: &[f64]) -> Vec<f64> {
        Self::grad(&self.a2, &self.b2, x)
    }
    fn conj_step_f1(&self, g: &[f64]) -> Result<Vec<f64>> {
        Ok(g.iter()
            .zip(self.a1.iter().zip(&self.b1))
            .map(|(g, (a, b))| (g - b) / a)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::ExtReal;
    use approx::assert_relative_eq;

    fn half_contraction() -> SeparableQuadratics {
        // f1 = x^2, f2 = x^2/2
        SeparableQuadratics::new(vec![2.0], vec![0.0], vec![1.0], vec![0.0]).unwrap()
    }

    #[test]
    fn quadratic_pair_halves_iterates() {
        let t = run_dca(&half_contraction(), &[1.0], &DcaOptions::steps(3)).unwrap();
        let xs: Vec<f64> = t.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(t.objective[0], 0.5);
        // g1^(k+1) = g2^k by construction
        for k in 0..3 {
            assert_eq!(t.g1[k + 1], t.g2[k]);
        }
        assert_eq!(t.residual_sq[0], 1.0);
        assert_eq!(t.step_norms, vec![0.25, 0.0625, 0.015625]);
        assert_eq!(*t.min_residual_sq.last().unwrap(), t.residual_sq[3]);
    }

    #[test]
    fn early_stop() {
        let opts = DcaOptions {
            stop_tol: Some(1e-2),
            ..DcaOptions::steps(100)
        };
        let t = run_dca(&half_contraction(), &[1.0], &opts).unwrap();
        assert!(t.residual_sq.last().unwrap() <= &1e-2);
        assert!(t.residual_sq[t.steps() - 1] > 1e-2);
    }

    #[test]
    fn misspecified_classes_are_flagged() {
        // F drop 3/8, G^2 = 1 at x = 1, G+^2 = (1 - 1/4)^2 at x = 1/2
        let s = Splitting::finite(1.999, 2.0, 0.999, 1.0).unwrap();
        assert_eq!(classify(&s).unwrap().regime, crate::Regime::P5);
        let c = check_one_step(&s, 0.5, 0.125, 1.0, 9.0 / 16.0, 1e-9).unwrap();
        assert_relative_eq!(c.slack, 0.375 - 2.999 * 9.0 / 32.0, max_relative = 1e-12);
        assert!(!c.holds);
    }

    #[test]
    fn degenerate_one_step() {
        let s = Splitting::finite(0.0, 1.0, 0.0, 1.0).unwrap();
        let c = check_one_step(&s, 1.0, 0.7, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(c.slack, 0.3);
        assert!(c.holds);
        assert!(!check_one_step(&s, 0.7, 1.0, 0.0, 0.0, 0.0).unwrap().holds);
    }

    #[test]
    fn correct_classes_satisfy_bounds() {
        let s = Splitting::finite(2.0 - 1e-9, 2.0, 1.0 - 1e-9, 1.0).unwrap();
        let t = run_dca(&half_contraction(), &[1.0], &DcaOptions::steps(5)).unwrap();
        assert!(one_step_slacks(&s, &t).unwrap().iter().all(|&x| x >= -1e-9));
        assert!(check_step_bounds(&s, &t, 1e-12));
        assert!(rate_slack(&s, &t).unwrap() >= -1e-12);
    }

    #[test]
    fn fabricated_increase_fails_step_bounds() {
        let s = Splitting::finite(1.0, 2.0, 0.5, 1.5).unwrap();
        let mut t = run_dca(&half_contraction(), &[1.0], &DcaOptions::steps(2)).unwrap();
        t.objective[1] = t.objective[0] + 0.1;
        assert!(!check_step_bounds(&s, &t, 1e-9));
    }

    #[test]
    fn infinite_l1_skips_upper_bound() {
        let s = Splitting::lenient(1.0, ExtReal::INFINITY, 0.5, ExtReal::finite(1.0)).unwrap();
        let mut t = run_dca(&half_contraction(), &[1.0], &DcaOptions::steps(2)).unwrap();
        assert_eq!(step_bound_slacks(&s, &t).upper, None);
        // a drop far larger than any finite upper bound is still accepted
        t.objective[1] -= 100.0;
        t.objective[2] -= 100.0;
        assert!(check_step_bounds(&s, &t, 1e-9));
    }

    #[test]
    fn divergence_and_oracle_failures() {
        // inconsistent oracle: the step moves toward the maximizer of F = -x^2
        struct Bad;
        impl DcOracles for Bad {
            fn eval_f1(&self, x: &[f64]) -> f64 {
                -x[0] * x[0]
            }
            fn eval_f2(&self, _: &[f64]) -> f64 {
                0.0
            }
            fn subgrad_f1(&self, x: &[f64]) -> Vec<f64> {
                vec![x[0]]
            }
            fn subgrad_f2(&self, x: &[f64]) -> Vec<f64> {
                vec![x[0]]
            }
            fn conj_step_f1(&self, g: &[f64]) -> Result<Vec<f64>> {
                if g[0].abs() > 1.0 {
                    Ok(vec![f64::NAN])
                } else {
                    Ok(vec![g[0] * 0.1])
                }
            }
        }
        assert!(matches!(
            run_dca(&Bad, &[0.5], &DcaOptions::steps(3)),
            Err(Error::DivergenceDetected { iteration: 1, .. })
        ));
        assert_eq!(
            run_dca(&Bad, &[2.0], &DcaOptions::steps(3)),
            Err(Error::OracleFailure(1))
        );
        let relaxed = DcaOptions {
            expect_monotone: false,
            ..DcaOptions::steps(3)
        };
        assert_eq!(run_dca(&Bad, &[0.5], &relaxed).unwrap().steps(), 3);
    }

    #[test]
    fn trajectory_csv() {
        let t = run_dca(&half_contraction(), &[1.0], &DcaOptions::steps(1)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,x_1,F,residual_sq\n0,1,0.5,1\n1,0.5,0.125,0.25\n"
        );
        let js = serde_json::to_string(&t).unwrap();
        let back: DcaTrajectory = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
    }
}

//! Sparse PCA with elastic-net regularization, solved by DCA under a
//! curvature shift.
//!
//! The objective is `kappa |x|_1 + eta/2 |x|^2 - 1/2 x^T Sigma x` over the
//! unit ball, split as `f1 = kappa |x|_1 + (eta - lambda)/2 |x|^2 + ball`
//! and `f2 = 1/2 x^T Sigma x - lambda/2 |x|^2`.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{ExtReal, Splitting};
use crate::dca::{run_dca, DcOracles, DcaOptions};
use crate::error::{Error, Result};
use crate::shift::{lambda_max, optimize_shift, ShiftSearch};

/// Distribution of the nonzero entries of the data matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryDistribution {
    #[default]
    Gaussian,
    /// Uniform on `[0, 1]`.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpcaProblem {
    /// `A^T A` divided by its largest eigenvalue.
    pub sigma: Array2<f64>,
    pub kappa: f64,
    pub eta: f64,
    /// Smallest eigenvalue of `sigma`.
    pub mu2: f64,
    /// Largest eigenvalue of `sigma`, 1 by construction.
    pub l2: f64,
    pub lambda: f64,
}

/// Relative residual tolerance of the power iterations.
pub const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 200_000;

fn power_iteration(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut v = Array1::from_shape_fn(n, |i| 1.0 + 1e-3 * i as f64);
    v /= v.dot(&v).sqrt();
    let mut theta = 0.0;
    for _ in 0..EIGEN_MAX_ITER {
        let w = m.dot(&v);
        theta = v.dot(&w);
        let res = &w - &(&v * theta);
        if res.dot(&res).sqrt() <= EIGEN_TOL * theta.abs() {
            break;
        }
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
    }
    theta
}

/// Largest and smallest eigenvalue of a symmetric PSD matrix, the latter
/// from power iteration on `lambda_max I - m`.
pub fn eigen_extremes(m: &Array2<f64>) -> (f64, f64) {
    let hi = power_iteration(m);
    let shifted = Array2::from_diag_elem(m.nrows(), hi) - m;
    let lo = hi - power_iteration(&shifted);
    (hi, lo.max(0.0))
}

/// Draws a sparse `20n x n` matrix `A` and returns the normalized `A^T A`.
pub fn build_problem(
    n: usize,
    density: f64,
    kappa: f64,
    eta: f64,
    seed: u64,
    dist: EntryDistribution,
) -> Result<SpcaProblem> {
    if n < 2 {
        return Err(Error::InvalidProblem(format!("need n >= 2 (got {n})")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidProblem(format!("density must lie in (0, 1] (got {density})")));
    }
    if !(kappa > 0.0 && kappa.is_finite() && eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidProblem(format!("need kappa > 0 and eta >= 0 (got {kappa}, {eta})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = 20 * n;
    let mut a = Array2::<f64>::zeros((rows, n));
    for v in a.iter_mut() {
        if rng.random::<f64>() < density {
            *v = match dist {
                EntryDistribution::Gaussian => rng.sample(StandardNormal),
                EntryDistribution::Uniform => rng.random::<f64>(),
            };
        }
    }
    let gram = a.t().dot(&a);
    // exact symmetry
    let gram = Array2::from_shape_fn((n, n), |(i, j)| if i <= j { gram[[i, j]] } else { gram[[j, i]] });
    let (hi, _) = eigen_extremes(&gram);
    if !(hi > 1e-12) {
        return Err(Error::SingularCase);
    }
    let sigma = gram / hi;
    let (_, lo) = eigen_extremes(&sigma);
    if lo >= 1.0 {
        return Err(Error::SingularCase);
    }
    Ok(SpcaProblem {
        sigma,
        kappa,
        eta,
        mu2: lo,
        l2: 1.0,
        lambda: 0.0,
    })
}

impl SpcaProblem {
    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Same data with curvature shift `lambda`.
    pub fn with_shift(&self, lambda: f64) -> Result<SpcaProblem> {
        if !(lambda <= self.eta) {
            return Err(Error::NegativeCurvature(self.eta - lambda));
        }
        Ok(SpcaProblem {
            lambda,
            ..self.clone()
        })
    }

    /// Unshifted splitting `(eta, inf, mu2, L2)`.
    pub fn base_splitting(&self) -> Result<Splitting> {
        Splitting::lenient(self.eta, ExtReal::INFINITY, self.mu2, ExtReal::finite(self.l2))
    }

    /// Splitting after the shift, `(eta - lambda, inf, mu2 - lambda, L2 - lambda)`.
    pub fn shifted_splitting(&self) -> Result<Splitting> {
        let l = self.lambda;
        Splitting::lenient(
            self.eta - l,
            ExtReal::INFINITY,
            self.mu2 - l,
            ExtReal::finite(self.l2 - l),
        )
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let v = ArrayView1::from(x);
        let l1: f64 = x.iter().map(|t| t.abs()).sum();
        self.kappa * l1 + 0.5 * self.eta * v.dot(&v) - 0.5 * v.dot(&self.sigma.dot(&v))
    }
}

/// Minimizer of `kappa |w|_1 + c/2 |w|^2 - <y, w>` over the unit ball:
/// soft-threshold `y` by `kappa`, then scale by `1 / max(c, |s|)`.
/// Returns the zero vector when the thresholded vector vanishes.
pub fn spca_conjugate_step(y: &[f64], kappa: f64, eta_minus_lambda: f64) -> Result<Vec<f64>> {
    if eta_minus_lambda < 0.0 {
        return Err(Error::NegativeCurvature(eta_minus_lambda));
    }
    let s: Vec<f64> = y.iter().map(|v| v.signum() * (v.abs() - kappa).max(0.0)).collect();
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(vec![0.0; y.len()]);
    }
    let d = eta_minus_lambda.max(norm);
    Ok(s.into_iter().map(|v| v / d).collect())
}

/// DCA oracles of the shifted splitting.
pub struct SpcaOracles<'a> {
    pub problem: &'a SpcaProblem,
}

impl SpcaOracles<'_> {
    fn c(&self) -> f64 {
        self.problem.eta - self.problem.lambda
    }
}

impl DcOracles for SpcaOracles<'_> {
    fn eval_f1(&self, x: &[f64]) -> f64 {
        let l1: f64 = x.iter().map(|t| t.abs()).sum();
        let n2: f64 = x.iter().map(|t| t * t).sum();
        self.problem.kappa * l1 + 0.5 * self.c() * n2
    }
    fn eval_f2(&self, x: &[f64]) -> f64 {
        let v = ArrayView1::from(x);
        0.5 * v.dot(&self.problem.sigma.dot(&v)) - 0.5 * self.problem.lambda * v.dot(&v)
    }
    fn subgrad_f1(&self, x: &[f64]) -> Vec<f64> {
        let k = self.problem.kappa;
        x.iter()
            .map(|&t| {
                let sign = if t == 0.0 { 0.0 } else { t.signum() };
                k * sign + self.c() * t
            })
            .collect()
    }
    fn subgrad_f2(&self, x: &[f64]) -> Vec<f64> {
        let v = ArrayView1::from(x);
        (self.problem.sigma.dot(&v) - &(&v * self.problem.lambda)).to_vec()
    }
    fn conj_step_f1(&self, g: &[f64]) -> Result<Vec<f64>> {
        spca_conjugate_step(g, self.problem.kappa, self.c())
    }
}

/// Shifts `{0, +-lambda*, +-lambda*/2, lambda_max}` for a base problem, with
/// `lambda*` from the shift optimizer on `(eta, inf, mu2, L2)`.
pub fn default_lambdas(problem: &SpcaProblem) -> Result<Vec<f64>> {
    let s = problem.base_splitting()?;
    let star = optimize_shift(&s, &ShiftSearch::default())?.lambda_star;
    let max = lambda_max(&s);
    let mut out = vec![0.0, star, -star, 0.5 * star, -0.5 * star];
    if !out.contains(&max) {
        out.push(max);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpcaConfig {
    pub n: usize,
    pub density: f64,
    pub kappa: f64,
    pub eta: f64,
    /// `None` uses [`default_lambdas`].
    pub lambdas: Option<Vec<f64>>,
    pub starts: usize,
    pub epsilons: Vec<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub distribution: EntryDistribution,
}

impl Default for SpcaConfig {
    fn default() -> Self {
        SpcaConfig {
            n: 50,
            density: 0.1,
            kappa: 0.02,
            eta: 0.5,
            lambdas: None,
            starts: 50,
            epsilons: (1..=12).map(|k| 10f64.powi(-k)).collect(),
            max_iter: 5000,
            seed: 0,
            distribution: EntryDistribution::Gaussian,
        }
    }
}

/// Average first-hit iteration counts, `counts[i][j]` for `lambdas[i]` and
/// `epsilons[j]`. A run that never reaches `eps` counts as `max_iter + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NEpsilonTable {
    pub epsilons: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub counts: Vec<Vec<f64>>,
    pub kept_runs: usize,
    pub total_runs: usize,
    /// `F` never increased (beyond `1e-9 (1 + |F|)`) on any kept run.
    pub monotone: bool,
    pub mu2: f64,
}

impl NEpsilonTable {
    pub fn count(&self, lambda_index: usize, eps: f64) -> Option<f64> {
        let j = self.epsilons.iter().position(|&e| e == eps)?;
        Some(self.counts[lambda_index][j])
    }

    /// Rows per shift, one column per accuracy level.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["lambda".to_string()];
        header.extend(self.epsilons.iter().map(|e| format!("{e:e}")));
        w.write_record(&header)?;
        for (l, row) in self.lambdas.iter().zip(&self.counts) {
            let mut rec = vec![l.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }
}

/// Support threshold used when grouping solutions.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Distance to the cluster centroid within which a run counts as converged.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Runs stop once the residual drops below this (or the smallest epsilon).
const FINAL_RESIDUAL: f64 = 1e-20;

fn sign_pattern(x: &[f64]) -> Vec<i8> {
    x.iter()
        .map(|&v| if v > SUPPORT_TOL { 1 } else if v < -SUPPORT_TOL { -1 } else { 0 })
        .collect()
}

/// Uniform draw from the unit ball.
fn ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 0.0 {
            let r = rng.random::<f64>().powf(1.0 / n as f64);
            return v.into_iter().map(|t| t * r / norm).collect();
        }
    }
}

struct RunOutcome {
    last: Vec<f64>,
    hits: Vec<usize>,
    monotone: bool,
}

fn run_one(problem: &SpcaProblem, x0: &[f64], epsilons: &[f64], max_iter: usize) -> Result<RunOutcome> {
    let floor = epsilons.iter().copied().fold(FINAL_RESIDUAL, f64::min);
    let opts = DcaOptions {
        max_iter,
        stop_tol: Some(floor),
        expect_monotone: false,
    };
    let t = run_dca(&SpcaOracles { problem }, x0, &opts)?;
    let hits = epsilons
        .iter()
        .map(|&e| t.residual_sq.iter().position(|&r| r <= e).unwrap_or(max_iter + 1))
        .collect();
    let monotone = t
        .objective
        .windows(2)
        .all(|w| w[1] - w[0] <= 1e-9 * (1.0 + w[0].abs()));
    Ok(RunOutcome {
        last: t.points.last().cloned().unwrap_or_default(),
        hits,
        monotone,
    })
}

/// Runs DCA from `starts` random points in the unit ball for every shift
/// and averages the first-hit counts over the runs that end in the dominant
/// nonzero solution cluster for all shifts.
///
/// The reference cluster is the largest group of final points of the first
/// shift sharing a sign pattern (zero solution excluded); it must hold at
/// least 20% of the starts.
pub fn run_experiment(
    problem: &SpcaProblem,
    lambdas: &[f64],
    starts: usize,
    epsilons: &[f64],
    max_iter: usize,
    seed: u64,
) -> Result<NEpsilonTable> {
    if lambdas.is_empty() || epsilons.is_empty() || starts == 0 {
        return Err(Error::InvalidProblem("need at least one shift, accuracy level and start".into()));
    }
    let shifted: Vec<SpcaProblem> = lambdas
        .iter()
        .map(|&l| {
            let p = problem.with_shift(l)?;
            if problem.eta + problem.mu2 - 2.0 * l < -1e-12 {
                return Err(Error::NoDecreaseGuarantee(problem.eta + problem.mu2 - 2.0 * l));
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let x0s: Vec<Vec<f64>> = (0..starts).map(|_| ball_point(&mut rng, problem.dim())).collect();

    let runs: Vec<Vec<RunOutcome>> = x0s
        .par_iter()
        .map(|x0| shifted.iter().map(|p| run_one(p, x0, epsilons, max_iter)).collect())
        .collect::<Result<_>>()?;

    // dominant cluster among the first shift's solutions
    let mut groups: Vec<(Vec<i8>, Vec<usize>)> = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let pat = sign_pattern(&r[0].last);
        if pat.iter().all(|&s| s == 0) {
            continue;
        }
        match groups.iter_mut().find(|(p, _)| *p == pat) {
            Some((_, members)) => members.push(i),
            None => groups.push((pat, vec![i])),
        }
    }
    let needed = starts.div_ceil(5);
    let largest = groups.iter().map(|(_, m)| m.len()).max().unwrap_or(0);
    let Some((pattern, members)) = groups.into_iter().find(|(_, m)| m.len() == largest && largest >= needed)
    else {
        return Err(Error::NoConsensusCluster {
            needed,
            total: starts,
            largest,
        });
    };
    let n = problem.dim();
    let mut centroid = vec![0.0; n];
    for &i in &members {
        for (c, v) in centroid.iter_mut().zip(&runs[i][0].last) {
            *c += v / members.len() as f64;
        }
    }
    let in_cluster = |x: &[f64]| {
        sign_pattern(x) == pattern && crate::dca::sq_dist(x, &centroid).sqrt() <= CLUSTER_RADIUS
    };
    let kept: Vec<usize> = (0..starts)
        .filter(|&i| runs[i].iter().all(|r| in_cluster(&r.last)))
        .collect();
    if kept.is_empty() {
        return Err(Error::NoConsensusCluster {
            needed,
            total: starts,
            largest: 0,
        });
    }

    let counts = (0..lambdas.len())
        .map(|li| {
            (0..epsilons.len())
                .map(|ei| kept.iter().map(|&i| runs[i][li].hits[ei] as f64).sum::<f64>() / kept.len() as f64)
                .collect()
        })
        .collect();
    let monotone = kept.iter().all(|&i| runs[i].iter().all(|r| r.monotone));
    Ok(NEpsilonTable {
        epsilons: epsilons.to_vec(),
        lambdas: lambdas.to_vec(),
        counts,
        kept_runs: kept.len(),
        total_runs: starts,
        monotone,
        mu2: problem.mu2,
    })
}

/// Builds the problem from a config and runs the experiment.
pub fn run_config(cfg: &SpcaConfig) -> Result<NEpsilonTable> {
    let problem = build_problem(cfg.n, cfg.density, cfg.kappa, cfg.eta, cfg.seed, cfg.distribution)?;
    let lambdas = match &cfg.lambdas {
        Some(l) => l.clone(),
        None => default_lambdas(&problem)?,
    };
    run_experiment(&problem, &lambdas, cfg.starts, &cfg.epsilons, cfg.max_iter, cfg.seed)
}

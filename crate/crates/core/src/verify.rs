//! Randomized self-checks of the analysis: bound validity on quadratic
//! instances, coefficient continuity across regime boundaries, the
//! `f1 <-> f2` swap symmetry and PGD/DCA equivalence.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{validate_splitting, ExtReal, Splitting};
use crate::dca::{one_step_slacks, run_dca, step_bound_slacks, DcaOptions, SeparableQuadratics};
use crate::error::{Error, Result};
use crate::pgd::{pgd_sigma_plus, pgd_threshold, pgd_to_dca, run_pgd, PgdAsDca, PgdSetting, QuadraticL1, StepsizeCell};
use crate::regimes::{classify, in_domain, regime_coefficients, threshold_b, Regime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bounds,
    Boundaries,
    Swap,
    PgdEquiv,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Bounds => "bounds",
            Suite::Boundaries => "boundaries",
            Suite::Swap => "swap",
            Suite::PgdEquiv => "pgd-equiv",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Bounds, Suite::Boundaries, Suite::Swap, Suite::PgdEquiv],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::Bounds, Suite::Boundaries, Suite::Swap, Suite::PgdEquiv, Suite::All]
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidProblem(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub samples: usize,
    /// Smallest slack seen; discrepancies are reported as negated errors.
    pub worst_slack: f64,
    pub tolerance: f64,
    pub failures: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

pub const BOUNDS_TOL: f64 = 1e-9;
pub const BOUNDARY_TOL: f64 = 1e-8;
/// At `B = 0`: `1/(L2 + mu2) = (mu1 + mu2)/mu2^2`.
pub const B_IDENTITY_TOL: f64 = 1e-12;
pub const SWAP_TOL: f64 = 1e-12;
pub const PGD_TOL: f64 = 1e-10;

/// Runs one suite (or all) with `samples` random cases per suite.
pub fn run_verify(suite: Suite, samples: usize, seed: u64) -> Result<VerifyReport> {
    let mut out = Vec::new();
    for (i, s) in suite.expand().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        out.push(match s {
            Suite::Bounds => bounds_suite(&mut rng, samples)?,
            Suite::Boundaries => boundaries_suite(&mut rng, samples)?,
            Suite::Swap => swap_suite(&mut rng, samples)?,
            Suite::PgdEquiv => pgd_suite(&mut rng, samples)?,
            Suite::All => unreachable!(),
        });
    }
    let pass = out.iter().all(|r| r.pass);
    Ok(VerifyReport { seed, suites: out, pass })
}

struct Tally {
    worst: f64,
    failures: usize,
    tol: f64,
    samples: usize,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Tally {
            worst: f64::INFINITY,
            failures: 0,
            tol,
            samples: 0,
        }
    }

    fn slack(&mut self, s: f64) {
        if !(s >= -self.tol) {
            self.failures += 1;
        }
        self.worst = if s.is_nan() { f64::NAN } else { self.worst.min(s) };
    }

    fn error(&mut self, e: f64) {
        self.slack(-e);
    }

    fn report(self, suite: Suite) -> SuiteReport {
        SuiteReport {
            suite,
            samples: self.samples,
            worst_slack: self.worst,
            tolerance: self.tol,
            failures: self.failures,
            pass: self.failures == 0,
        }
    }
}

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(scale)
}

/// Random valid splitting with `mu1 >= 0`, `mu1 + mu2 > 0`, occasionally
/// infinite upper curvature on one side, and `L1 - mu1 >= 0.1`.
pub fn random_splitting<R: Rng>(rng: &mut R) -> Splitting {
    loop {
        let mu1 = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..2.0) };
        let mu2 = rng.random_range((-mu1 + 1e-3)..2.0);
        let inf1 = rng.random_bool(0.15);
        let inf2 = !inf1 && rng.random_bool(0.15);
        let l1 = if inf1 {
            ExtReal::INFINITY
        } else {
            ExtReal::finite(mu1 + rng.random_range(0.1..3.0))
        };
        let l2 = if inf2 {
            ExtReal::INFINITY
        } else if !inf1 && rng.random_bool(0.1) && l1.value() > mu2 {
            l1
        } else {
            ExtReal::finite(mu2 + rng.random_range(1e-3..3.0))
        };
        if let Ok(s) = validate_splitting(mu1, l1, mu2, l2) {
            return s;
        }
    }
}

/// One-dimensional separable quadratics in the classes of `s`, with
/// `f1`-curvature at least 0.1 and at most 5 above the lower bound.
pub fn random_quadratics<R: Rng>(rng: &mut R, s: &Splitting) -> SeparableQuadratics {
    let a1_lo = s.mu1().max(0.1);
    let a1_hi = s.l1().value().min(s.mu1() + 5.0);
    let a1 = rng.random_range(a1_lo..=a1_hi);
    let a2_hi = s.l2().value().min(s.mu2() + 5.0);
    let a2 = rng.random_range(s.mu2()..=a2_hi);
    let (b1, b2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    SeparableQuadratics::new(vec![a1], vec![b1], vec![a2], vec![b2]).expect("a1 >= 0.1")
}

fn bounds_suite<R: Rng>(rng: &mut R, samples: usize) -> Result<SuiteReport> {
    let mut t = Tally::new(BOUNDS_TOL);
    for _ in 0..samples {
        let s = random_splitting(rng);
        let q = random_quadratics(rng, &s);
        let x0 = rng.random_range(-1.0..1.0);
        let opts = DcaOptions {
            max_iter: 1,
            stop_tol: None,
            expect_monotone: false,
        };
        let traj = run_dca(&q, &[x0], &opts)?;
        for v in one_step_slacks(&s, &traj)? {
            t.slack(v);
        }
        let b = step_bound_slacks(&s, &traj);
        t.slack(b.lower);
        if let Some(u) = b.upper {
            t.slack(u);
        }
        t.samples += 1;
    }
    Ok(t.report(Suite::Bounds))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `B = 0`: p3 | p4, or p5 | p4 when `L2 < mu1`.
    ThresholdB,
    /// `E = 0`: p1 | p3.
    BoundaryE,
    /// `L1 = L2`: p1 | p2.
    EqualUpper,
    /// `L2 = mu1`: p1 | p5.
    UpperMeetsLower,
}

impl Boundary {
    pub const ALL: [Boundary; 4] = [
        Boundary::ThresholdB,
        Boundary::BoundaryE,
        Boundary::EqualUpper,
        Boundary::UpperMeetsLower,
    ];
}

/// A point on the boundary together with the two regimes meeting there.
pub fn sample_boundary<R: Rng>(rng: &mut R, b: Boundary) -> (Splitting, Regime, Regime) {
    loop {
        let mu1 = rng.random_range(0.1..3.0);
        let picked = match b {
            Boundary::ThresholdB => {
                let t: f64 = rng.random_range(0.05..0.95);
                let mu2 = -t * mu1;
                let l2 = mu1 * t / (1.0 - t);
                let (other, l1) = if l2 > mu1 {
                    (Regime::P3, rng.random_range(0.5 * l2..3.0 * l2).max(mu1 + 1e-3))
                } else {
                    (Regime::P5, mu1 * rng.random_range(1.01..5.0))
                };
                let l1 = if rng.random_bool(0.1) { ExtReal::INFINITY } else { ExtReal::finite(l1) };
                validate_splitting(mu1, l1, mu2, ExtReal::finite(l2)).map(|s| (s, other, Regime::P4))
            }
            Boundary::BoundaryE => {
                let mu2 = -mu1 * rng.random_range(0.01..0.99);
                let l2 = mu1.max(2.0 * -mu2) * rng.random_range(1.01..4.0);
                let bb = 1.0 / mu1 + 1.0 / mu2 + 1.0 / l2;
                let l1 = (2.0 + l2 / mu2) / bb;
                if !(bb < 0.0 && l1 >= l2) {
                    continue;
                }
                validate_splitting(mu1, ExtReal::finite(l1), mu2, ExtReal::finite(l2))
                    .map(|s| (s, Regime::P1, Regime::P3))
            }
            Boundary::EqualUpper => {
                let mu2 = rng.random_range(0.0..3.0);
                let l = mu1.max(mu2) + rng.random_range(0.01..3.0);
                validate_splitting(mu1, ExtReal::finite(l), mu2, ExtReal::finite(l)).map(|s| (s, Regime::P1, Regime::P2))
            }
            Boundary::UpperMeetsLower => {
                let mu2 = if rng.random_bool(0.5) {
                    rng.random_range(0.0..mu1)
                } else {
                    -mu1 * rng.random_range(0.5..0.99)
                };
                let l1 = if rng.random_bool(0.1) {
                    ExtReal::INFINITY
                } else {
                    ExtReal::finite(mu1 * rng.random_range(1.01..5.0))
                };
                validate_splitting(mu1, l1, mu2, ExtReal::finite(mu1)).map(|s| (s, Regime::P1, Regime::P5))
            }
        };
        if let Ok(p) = picked {
            return p;
        }
    }
}

/// Largest relative gap between the two regimes' coefficient pairs,
/// measured against the rate denominator.
pub fn coefficient_gap(s: &Splitting, a: Regime, b: Regime) -> f64 {
    let (sa, spa) = regime_coefficients(a, s);
    let (sb, spb) = regime_coefficients(b, s);
    let scale = (sa + spa).abs().max((sb + spb).abs());
    rel_err(sa, sb, scale).max(rel_err(spa, spb, scale))
}

fn boundaries_suite<R: Rng>(rng: &mut R, samples: usize) -> Result<SuiteReport> {
    let mut t = Tally::new(BOUNDARY_TOL);
    let mut identity_worst = 0.0f64;
    for _ in 0..samples {
        for b in Boundary::ALL {
            let (s, ra, rb) = sample_boundary(rng, b);
            t.error(coefficient_gap(&s, ra, rb));
            if b == Boundary::ThresholdB {
                let (m1, m2, l2) = (s.mu1(), s.mu2(), s.l2().value());
                let lhs = 1.0 / (l2 + m2);
                let rhs = (m1 + m2) / (m2 * m2);
                identity_worst = identity_worst.max(rel_err(lhs, rhs, 0.0));
                debug_assert!(threshold_b(&s).value().abs() < 1e-8);
            }
        }
        t.samples += 1;
    }
    if identity_worst > B_IDENTITY_TOL {
        t.failures += 1;
    }
    Ok(t.report(Suite::Boundaries))
}

/// The regime a splitting maps to after swapping `f1` and `f2`.
pub fn mirror(r: Regime) -> Option<Regime> {
    match r {
        Regime::P1 => Some(Regime::P2),
        Regime::P2 => Some(Regime::P1),
        Regime::P5 => Some(Regime::P6),
        Regime::P6 => Some(Regime::P5),
        Regime::Degenerate => Some(Regime::Degenerate),
        Regime::P3 | Regime::P4 => None,
    }
}

fn swap_suite<R: Rng>(rng: &mut R, samples: usize) -> Result<SuiteReport> {
    let mut t = Tally::new(SWAP_TOL);
    while t.samples < samples {
        let s = random_splitting(rng);
        if s.mu2() < 0.0 || s.both_nonsmooth() {
            continue;
        }
        let r = classify(&s)?;
        let sw = s.swapped()?;
        let w = classify(&sw)?;
        // on shared boundaries the classifier may report either label, so
        // check membership of the mirrored regime's domain instead
        let label_ok = mirror(r.regime).is_some_and(|m| in_domain(m, &sw, 1e-12));
        if !label_ok {
            t.failures += 1;
        }
        let scale = r.p.abs();
        t.error(rel_err(r.sigma, w.sigma_plus, scale).max(rel_err(r.sigma_plus, w.sigma, scale)));
        t.samples += 1;
    }
    Ok(t.report(Suite::Swap))
}

fn pgd_suite<R: Rng>(rng: &mut R, samples: usize) -> Result<SuiteReport> {
    let mut t = Tally::new(PGD_TOL);
    for _ in 0..samples {
        // iterate equivalence on a convex quadratic plus soft threshold
        let c = QuadraticL1 {
            a: rng.random_range(0.05..2.0),
            b: rng.random_range(-1.0..1.0),
            kappa: rng.random_range(0.0..0.5),
        };
        let gamma = rng.random_range(0.05..0.98) * 2.0 / c.a;
        let x0 = [rng.random_range(-3.0..3.0)];
        let opts = DcaOptions::steps(20);
        let p = run_pgd(&c, &x0, gamma, &opts)?;
        let d = run_dca(&PgdAsDca { inner: &c, gamma }, &x0, &opts)?;
        for k in 0..p.points.len() {
            t.error((p.points[k][0] - d.points[k][0]).abs());
            t.error((p.residual_sq[k] - d.residual_sq[k]).abs() / (1.0 + d.residual_sq[k]));
        }

        // closed-form decrease coefficient for mu_phi <= 0
        let l_phi = rng.random_range(0.1..3.0);
        let mu_phi = -rng.random_range(0.0..3.0);
        let gamma = rng.random_range(1e-3..0.999) * 2.0 / l_phi;
        let r = pgd_sigma_plus(l_phi, mu_phi, gamma)?;
        t.error(rel_err(r.sigma_plus, r.classifier_sigma_plus, 1.0));

        // regime of each stepsize cell
        let mu_phi = match rng.random_range(0..3) {
            0 => -rng.random_range(0.01..1.0) * l_phi,
            1 => 0.0,
            _ => rng.random_range(0.01..0.99) * l_phi,
        };
        let gamma = rng.random_range(1e-3..0.999) * 2.0 / l_phi;
        let setting = PgdSetting::new(l_phi, mu_phi, gamma)?;
        let regime = classify(&pgd_to_dca(&setting)?)?.regime;
        let cell = StepsizeCell::of(l_phi, mu_phi, gamma);
        if !cell.expected(pgd_threshold(l_phi, mu_phi, gamma)).contains(&regime) {
            t.failures += 1;
        }
        t.samples += 1;
    }
    Ok(t.report(Suite::PgdEquiv))
}

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use dca_core::curvature::{validate_splitting, ExtReal, Splitting};
use dca_core::dca::{one_step_slacks, run_dca, DcaOptions, DcaTrajectory};
use dca_core::pgd::{self, pgd_threshold, PgdAsDca, PgdSetting, QuadraticL1, StepsizeCell};
use dca_core::rates::{rate_bound, RateBound};
use dca_core::regimes::{classify_with_tol, contour_grid, write_grid_csv, Regime, RegimeReport, SampleRange};
use dca_core::shift::{optimize_shift, write_profile_csv, ShiftResult, ShiftSearch};
use dca_core::spca::{run_config, EntryDistribution, NEpsilonTable, SpcaConfig};
use dca_core::verify::{run_verify, Suite, VerifyReport};
use dca_core::worstcase::{instance_p1, instance_p2, Anchors};

use crate::render::{csv_table, grid_table, json, kv_table, num, opt, Format, Rendered};

fn done(text: String) -> Result<Rendered> {
    Ok(Rendered { text, pass: true })
}

#[derive(Args, Debug, Clone)]
pub struct SplittingArgs {
    #[arg(long)]
    mu1: f64,
    /// Upper curvature of f1; `inf` for a nonsmooth term.
    #[arg(long = "L1")]
    l1: ExtReal,
    #[arg(long)]
    mu2: f64,
    /// Upper curvature of f2; `inf` for a nonsmooth term.
    #[arg(long = "L2")]
    l2: ExtReal,
}

impl SplittingArgs {
    fn strict(&self) -> Result<Splitting> {
        Ok(validate_splitting(self.mu1, self.l1, self.mu2, self.l2)?)
    }

    fn lenient(&self) -> Result<Splitting> {
        Ok(Splitting::lenient(self.mu1, self.l1, self.mu2, self.l2)?)
    }
}

fn splitting_cells(s: &Splitting) -> Vec<String> {
    vec![s.mu1().to_string(), s.l1().to_string(), s.mu2().to_string(), s.l2().to_string()]
}

// ---------------------------------------------------------------- classify

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    splitting: SplittingArgs,
    /// Widens the non-strict boundary comparisons.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub splitting: Splitting,
    pub report: RegimeReport,
}

pub fn render_classify(out: &ClassifyOutput, f: Format) -> Result<String> {
    let r = &out.report;
    match f {
        Format::Json => json(out),
        Format::Csv => {
            let mut row = splitting_cells(&out.splitting);
            row.extend([
                r.regime.to_string(),
                r.sigma.to_string(),
                r.sigma_plus.to_string(),
                r.p.to_string(),
                r.b.to_string(),
                opt(r.e),
                r.concave_unbounded.to_string(),
                r.description.clone(),
            ]);
            csv_table(
                &["mu1", "L1", "mu2", "L2", "regime", "sigma", "sigma_plus", "p", "B", "E", "concave_unbounded", "description"],
                &[row],
            )
        }
        Format::Human => Ok(kv_table(&[
            ("splitting", out.splitting.to_string()),
            ("regime", r.regime.to_string()),
            ("sigma", num(r.sigma)),
            ("sigma_plus", num(r.sigma_plus)),
            ("p", num(r.p)),
            ("B", if r.b.is_infinite() { "inf".into() } else { num(r.b.value()) }),
            ("E", r.e.map_or("undefined".into(), |e| if e.is_infinite() { "inf".into() } else { num(e.value()) })),
            ("concave_unbounded", r.concave_unbounded.to_string()),
            ("description", r.description.clone()),
        ])),
    }
}

pub fn classify(a: &ClassifyArgs, f: Format) -> Result<Rendered> {
    let s = a.splitting.strict()?;
    let report = classify_with_tol(&s, a.tol)?;
    done(render_classify(&ClassifyOutput { splitting: s, report }, f)?)
}

// ---------------------------------------------------------------- rate

#[derive(Args, Debug)]
pub struct RateArgs {
    #[command(flatten)]
    splitting: SplittingArgs,
    /// Number of DCA steps.
    #[arg(long = "N")]
    n: usize,
    /// Objective decrease F(x0) - F(xN).
    #[arg(long, default_value_t = 1.0)]
    delta_f: f64,
    /// Gap F(x0) - inf F, for the bound that uses the infimum.
    #[arg(long)]
    flo_gap: Option<f64>,
}

pub fn rate(a: &RateArgs, f: Format) -> Result<Rendered> {
    let s = a.splitting.strict()?;
    let r: RateBound = rate_bound(&s, a.n, a.delta_f, a.flo_gap)?;
    done(match f {
        Format::Json => json(&r)?,
        Format::Csv => csv_table(
            &["regime", "p", "N", "bound_simple", "bound_flo"],
            &[vec![r.regime.to_string(), r.p.to_string(), r.n.to_string(), r.bound_simple.to_string(), opt(r.bound_flo)]],
        )?,
        Format::Human => kv_table(&[
            ("regime", r.regime.to_string()),
            ("p", num(r.p)),
            ("N", r.n.to_string()),
            ("bound_simple", num(r.bound_simple)),
            ("bound_flo", r.bound_flo.map_or("n/a".into(), num)),
        ]),
    })
}

// ---------------------------------------------------------------- shift

#[derive(Args, Debug)]
pub struct ShiftArgs {
    #[command(flatten)]
    splitting: SplittingArgs,
    /// Lower end of the search window.
    #[arg(long)]
    lambda_lo: Option<f64>,
    /// Upper cap on the shift.
    #[arg(long)]
    lambda_hi: Option<f64>,
    /// Grid points before refinement.
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Refinement tolerance on lambda.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the (lambda, p, regime) curve as CSV to this file.
    #[arg(long)]
    profile: Option<PathBuf>,
}

pub fn shift(a: &ShiftArgs, f: Format) -> Result<Rendered> {
    let s = a.splitting.lenient()?;
    let search = ShiftSearch {
        lambda_lo: a.lambda_lo,
        lambda_hi: a.lambda_hi,
        grid_points: a.grid,
        refine_tol: a.tol,
        keep_profile: a.profile.is_some(),
    };
    let mut r: ShiftResult = optimize_shift(&s, &search)?;
    if let (Some(path), Some(profile)) = (&a.profile, r.profile.take()) {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_profile_csv(&profile, BufWriter::new(file))?;
    }
    done(match f {
        Format::Json => json(&r)?,
        Format::Csv => csv_table(
            &["lambda_star", "p_star", "regime_at_star", "lambda_max", "lambda_max_included", "p_at_zero"],
            &[vec![
                r.lambda_star.to_string(),
                r.p_star.to_string(),
                r.regime_at_star.to_string(),
                r.lambda_max.to_string(),
                r.lambda_max_included.to_string(),
                opt(r.p_at_zero),
            ]],
        )?,
        Format::Human => {
            let mut t = kv_table(&[
                ("lambda_star", num(r.lambda_star)),
                ("p_star", num(r.p_star)),
                ("regime_at_star", r.regime_at_star.to_string()),
                ("lambda_max", num(r.lambda_max)),
                ("lambda_max_included", r.lambda_max_included.to_string()),
                ("p_at_zero", r.p_at_zero.map_or("infeasible".into(), num)),
            ]);
            for tr in &r.transitions {
                t.push_str(&format!("{:<24}{} -> {} at {}\n", "transition", tr.from, tr.to, num(tr.lambda)));
            }
            t
        }
    })
}

// ---------------------------------------------------------------- contour

#[derive(Args, Debug)]
pub struct ContourArgs {
    #[arg(long)]
    mu1: f64,
    #[arg(long = "L1")]
    l1: ExtReal,
    #[arg(long, default_value_t = -1.0)]
    mu2_min: f64,
    #[arg(long, default_value_t = 2.0)]
    mu2_max: f64,
    #[arg(long = "L2-min", default_value_t = 0.0)]
    l2_min: f64,
    #[arg(long = "L2-max", default_value_t = 4.0)]
    l2_max: f64,
    /// Samples per axis.
    #[arg(long, default_value_t = 101)]
    points: usize,
}

pub fn contour(a: &ContourArgs, f: Format) -> Result<Rendered> {
    let cells = contour_grid(
        a.mu1,
        a.l1,
        SampleRange::new(a.mu2_min, a.mu2_max, a.points),
        SampleRange::new(a.l2_min, a.l2_max, a.points),
    )?;
    done(match f {
        Format::Json => json(&cells)?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_grid_csv(&cells, &mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Human => {
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        num(c.mu2),
                        num(c.l2),
                        c.regime.map_or("infeasible".into(), |r| r.to_string()),
                        c.p.map_or(String::new(), num),
                    ]
                })
                .collect();
            grid_table(&["mu2", "L2", "regime", "p"], &rows)
        }
    })
}

// ---------------------------------------------------------------- worstcase

#[derive(Args, Debug)]
pub struct WorstcaseArgs {
    /// p1 or p2.
    #[arg(long)]
    regime: Regime,
    #[command(flatten)]
    splitting: SplittingArgs,
    /// Objective decrease over the run.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long = "N")]
    n: usize,
    /// Starting point.
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Write the generated piecewise quadratics as JSON to this file.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Write the DCA trajectory as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// Relative tolerance on the attained rate and on the per-step equality.
const WORSTCASE_TOL: f64 = 1e-9;

#[derive(Debug, Serialize)]
struct WorstcaseReport {
    regime: Regime,
    p: f64,
    n: usize,
    delta: f64,
    predicted_wc: f64,
    achieved_wc: f64,
    rel_error: f64,
    max_step_slack: f64,
    pass: bool,
}

pub fn worstcase(a: &WorstcaseArgs, f: Format) -> Result<Rendered> {
    let sa = &a.splitting;
    let anchors = Anchors { x0: a.x0, ..Anchors::default() };
    let (l1, l2) = (sa.l1.value(), sa.l2.value());
    let inst = match a.regime {
        Regime::P1 => instance_p1(sa.mu1, l1, sa.mu2, l2, a.delta, a.n, anchors)?,
        Regime::P2 => instance_p2(sa.mu1, l1, sa.mu2, l2, a.delta, a.n, anchors)?,
        r => anyhow::bail!("worst-case instances are available for p1 and p2, not {r}"),
    };
    let traj = run_dca(&inst.as_oracles(), &[a.x0], &DcaOptions::steps(a.n))?;
    let predicted = a.delta / (inst.p * a.n as f64);
    let achieved = traj.final_min_residual_sq() / 2.0;
    let rel_error = (achieved - predicted).abs() / predicted;
    let slack = one_step_slacks(&inst.splitting, &traj)?
        .into_iter()
        .fold(0.0f64, |m, s| m.max(s.abs()));
    let pass = rel_error <= WORSTCASE_TOL && slack <= WORSTCASE_TOL * (1.0 + a.delta);

    if let Some(path) = &a.dump {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &inst)?;
    }
    if let Some(path) = &a.trace {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        traj.write_csv(BufWriter::new(file))?;
    }

    let r = WorstcaseReport {
        regime: inst.regime,
        p: inst.p,
        n: a.n,
        delta: a.delta,
        predicted_wc: predicted,
        achieved_wc: achieved,
        rel_error,
        max_step_slack: slack,
        pass,
    };
    let text = match f {
        Format::Json => json(&r)?,
        Format::Csv => csv_table(
            &["regime", "p", "N", "delta", "predicted_wc", "achieved_wc", "rel_error", "max_step_slack", "pass"],
            &[vec![
                r.regime.to_string(),
                r.p.to_string(),
                r.n.to_string(),
                r.delta.to_string(),
                r.predicted_wc.to_string(),
                r.achieved_wc.to_string(),
                r.rel_error.to_string(),
                r.max_step_slack.to_string(),
                r.pass.to_string(),
            ]],
        )?,
        Format::Human => kv_table(&[
            ("regime", r.regime.to_string()),
            ("p", num(r.p)),
            ("N", r.n.to_string()),
            ("delta", num(r.delta)),
            ("predicted_wc", num(r.predicted_wc)),
            ("achieved_wc", num(r.achieved_wc)),
            ("rel_error", format!("{:.3e}", r.rel_error)),
            ("max_step_slack", format!("{:.3e}", r.max_step_slack)),
            ("pass", r.pass.to_string()),
        ]),
    };
    Ok(Rendered { text, pass })
}

// ---------------------------------------------------------------- pgd

#[derive(Args, Debug)]
pub struct PgdMapArgs {
    /// Upper curvature of the smooth part.
    #[arg(long = "L-phi")]
    l_phi: f64,
    /// Lower curvature of the smooth part.
    #[arg(long)]
    mu_phi: f64,
    #[arg(long, default_value_t = 0.0)]
    mu_h: f64,
    #[arg(long = "L-h", default_value = "inf")]
    l_h: ExtReal,
    /// Smallest stepsize; defaults to 0.001 * 2/L_phi.
    #[arg(long)]
    gamma_min: Option<f64>,
    /// Largest stepsize; defaults to 0.999 * 2/L_phi.
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long, default_value_t = 100)]
    points: usize,
}

pub fn pgd_map(a: &PgdMapArgs, f: Format) -> Result<Rendered> {
    let top = 2.0 / a.l_phi;
    let range = SampleRange::new(a.gamma_min.unwrap_or(1e-3 * top), a.gamma_max.unwrap_or(0.999 * top), a.points);
    let rows = pgd::pgd_map(a.l_phi, a.mu_phi, a.mu_h, a.l_h, range)?;
    let cells = |r: &pgd::PgdMapRow, fmt: &dyn Fn(f64) -> String| {
        vec![fmt(r.gamma), fmt(r.mu2), fmt(r.l2), r.regime.to_string(), fmt(r.sigma_plus), r.cell.printed().to_string()]
    };
    let header = ["gamma", "mu2", "L2", "regime", "sigma_plus", "cell"];
    done(match f {
        Format::Json => json(&rows)?,
        Format::Csv => csv_table(&header, &rows.iter().map(|r| cells(r, &|x| x.to_string())).collect::<Vec<_>>())?,
        Format::Human => grid_table(&header, &rows.iter().map(|r| cells(r, &num)).collect::<Vec<_>>()),
    })
}

#[derive(Args, Debug)]
pub struct PgdSigmaArgs {
    #[arg(long = "L-phi")]
    l_phi: f64,
    #[arg(long)]
    mu_phi: f64,
    #[arg(long)]
    gamma: f64,
}

#[derive(Debug, Serialize)]
struct PgdSigmaReport {
    #[serde(flatten)]
    sigma: pgd::PgdSigma,
    cell: StepsizeCell,
    cell_regimes: Vec<Regime>,
}

pub fn pgd_sigma(a: &PgdSigmaArgs, f: Format) -> Result<Rendered> {
    let r = pgd::pgd_sigma_plus(a.l_phi, a.mu_phi, a.gamma)?;
    let cell = StepsizeCell::of(a.l_phi, a.mu_phi, a.gamma);
    let rep = PgdSigmaReport {
        sigma: r,
        cell,
        cell_regimes: cell.expected(pgd_threshold(a.l_phi, a.mu_phi, a.gamma)).to_vec(),
    };
    let branch = serde_json::to_value(r.branch)?.as_str().unwrap_or_default().to_string();
    done(match f {
        Format::Json => json(&rep)?,
        Format::Csv => csv_table(
            &["sigma_plus", "branch", "B", "classifier_sigma_plus", "regime", "cell"],
            &[vec![
                r.sigma_plus.to_string(),
                branch,
                r.b.to_string(),
                r.classifier_sigma_plus.to_string(),
                r.regime.to_string(),
                cell.printed().to_string(),
            ]],
        )?,
        Format::Human => kv_table(&[
            ("sigma_plus", num(r.sigma_plus)),
            ("branch", branch),
            ("B", if r.b.is_infinite() { "inf".into() } else { num(r.b.value()) }),
            ("classifier_sigma_plus", num(r.classifier_sigma_plus)),
            ("regime", r.regime.to_string()),
            ("cell", cell.printed().to_string()),
        ]),
    })
}

#[derive(Args, Debug)]
pub struct PgdRunArgs {
    /// Curvature of the quadratic a/2 x^2 + b x.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    /// Weight of the l1 term.
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// Lower curvature of the class the quadratic is analyzed in; must be
    /// below `a`.
    #[arg(long, default_value_t = 0.0)]
    mu_phi: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long = "N", default_value_t = 20)]
    n: usize,
}

/// Iterates of the two formulations must agree to this absolute tolerance.
const PGD_MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct PgdRunReport {
    splitting: Splitting,
    regime: Regime,
    rate: RateBound,
    max_iterate_diff: f64,
    max_residual_diff: f64,
    pass: bool,
    trajectory: DcaTrajectory,
}

pub fn pgd_run(a: &PgdRunArgs, f: Format) -> Result<Rendered> {
    let problem = QuadraticL1 { a: a.a, b: a.b, kappa: a.kappa };
    let setting = PgdSetting::new(a.a, a.mu_phi, a.gamma)?;
    let s = pgd::pgd_to_dca(&setting)?;
    let opts = DcaOptions::steps(a.n);
    let p = pgd::run_pgd(&problem, &[a.x0], a.gamma, &opts)?;
    let d = run_dca(&PgdAsDca { inner: &problem, gamma: a.gamma }, &[a.x0], &opts)?;
    let max_iterate_diff = p
        .points
        .iter()
        .zip(&d.points)
        .fold(0.0f64, |m, (u, v)| m.max((u[0] - v[0]).abs()));
    let max_residual_diff = p
        .residual_sq
        .iter()
        .zip(&d.residual_sq)
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
    let pass = p.points.len() == d.points.len() && max_iterate_diff <= PGD_MATCH_TOL;
    let decrease = (p.objective[0] - p.objective[p.steps()]).max(0.0);
    let rate = rate_bound(&s, p.steps().max(1), decrease, None)?;
    let rep = PgdRunReport {
        splitting: s,
        regime: rate.regime,
        rate,
        max_iterate_diff,
        max_residual_diff,
        pass,
        trajectory: p,
    };
    let text = match f {
        Format::Json => json(&rep)?,
        Format::Csv => {
            let mut buf = Vec::new();
            rep.trajectory.write_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Human => {
            let mut t = kv_table(&[
                ("splitting", rep.splitting.to_string()),
                ("regime", rep.regime.to_string()),
                ("p", num(rep.rate.p)),
                ("bound_simple", num(rep.rate.bound_simple)),
                ("min_residual_sq / 2", num(rep.trajectory.final_min_residual_sq() / 2.0)),
                ("max_iterate_diff", format!("{:.3e}", max_iterate_diff)),
                ("max_residual_diff", format!("{:.3e}", max_residual_diff)),
                ("pass", pass.to_string()),
            ]);
            let rows: Vec<Vec<String>> = (0..rep.trajectory.points.len())
                .map(|k| {
                    vec![
                        k.to_string(),
                        num(rep.trajectory.points[k][0]),
                        num(rep.trajectory.objective[k]),
                        num(rep.trajectory.residual_sq[k]),
                    ]
                })
                .collect();
            t.push('\n');
            t.push_str(&grid_table(&["k", "x", "F", "residual_sq"], &rows));
            t
        }
    };
    Ok(Rendered { text, pass })
}

// ---------------------------------------------------------------- spca

#[derive(Args, Debug)]
pub struct SpcaArgs {
    /// Dimension.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Fraction of nonzero entries in the data matrix.
    #[arg(long, default_value_t = 0.1)]
    density: f64,
    #[arg(long, default_value_t = 0.02)]
    kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Comma-separated shifts; defaults to 0, +-lambda*, +-lambda*/2 and lambda_max.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Random starting points per shift.
    #[arg(long, default_value_t = 50)]
    starts: usize,
    /// Comma-separated accuracy levels on the squared residual.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4,1e-6,1e-8")]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    distribution: Distribution,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Distribution {
    Gaussian,
    Uniform,
}

pub fn spca(a: &SpcaArgs, seed: u64, f: Format) -> Result<Rendered> {
    let cfg = SpcaConfig {
        n: a.n,
        density: a.density,
        kappa: a.kappa,
        eta: a.eta,
        lambdas: a.lambdas.clone(),
        starts: a.starts,
        epsilons: a.epsilons.clone(),
        max_iter: a.max_iter,
        seed,
        distribution: match a.distribution {
            Distribution::Gaussian => EntryDistribution::Gaussian,
            Distribution::Uniform => EntryDistribution::Uniform,
        },
    };
    let t: NEpsilonTable = run_config(&cfg)?;
    done(match f {
        Format::Json => json(&t)?,
        Format::Csv => {
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Human => {
            let mut out = kv_table(&[
                ("mu2", num(t.mu2)),
                ("kept_runs", format!("{} / {}", t.kept_runs, t.total_runs)),
                ("monotone", t.monotone.to_string()),
            ]);
            out.push('\n');
            let mut header = vec!["lambda".to_string()];
            header.extend(t.epsilons.iter().map(|e| format!("{e:e}")));
            let rows: Vec<Vec<String>> = t
                .lambdas
                .iter()
                .zip(&t.counts)
                .map(|(l, c)| std::iter::once(num(*l)).chain(c.iter().map(|v| format!("{v:.2}"))).collect())
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            out.push_str(&grid_table(&header, &rows));
            out
        }
    })
}

// ---------------------------------------------------------------- verify

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// bounds, boundaries, swap, pgd-equiv or all.
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// Random cases per suite.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

pub fn verify(a: &VerifyArgs, seed: u64, f: Format) -> Result<Rendered> {
    let r: VerifyReport = run_verify(a.suite, a.samples, seed)?;
    let rows: Vec<Vec<String>> = r
        .suites
        .iter()
        .map(|s| {
            vec![
                s.suite.to_string(),
                s.samples.to_string(),
                format!("{:e}", s.worst_slack),
                format!("{:e}", s.tolerance),
                s.failures.to_string(),
                if s.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let header = ["suite", "samples", "worst_slack", "tolerance", "failures", "result"];
    let text = match f {
        Format::Json => json(&r)?,
        Format::Csv => csv_table(&header, &rows)?,
        Format::Human => {
            let short: Vec<Vec<String>> = r
                .suites
                .iter()
                .zip(rows)
                .map(|(s, mut row)| {
                    row[2] = format!("{:.3e}", s.worst_slack);
                    row[3] = format!("{:.0e}", s.tolerance);
                    row
                })
                .collect();
            grid_table(&header, &short)
        }
    };
    Ok(Rendered { text, pass: r.pass })
}

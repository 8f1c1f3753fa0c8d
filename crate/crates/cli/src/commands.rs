use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use cbi_core::oracles::{mc_likelihood, run_oracle_suite, SuiteOptions};
use cbi_core::report::format_number;
use cbi_core::{
    conservative_confidence, iid_posterior, solve_cutpoints, AssessmentProblem, EngineOptions,
    GFunction, GFunctionContext, KlotzParams, PriorSpec, ResultRow,
};
use rayon::prelude::*;

use crate::config::{Axis, CommonArgs, LogRange, Settings, SweepSection};
use crate::error::CliError;

type Csv = csv::Writer<Box<dyn Write>>;

fn writer(out: &Option<PathBuf>) -> Result<Csv, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn to_n(v: f64) -> Result<u64, CliError> {
    if v.is_finite() && v >= 0.0 && v < u64::MAX as f64 {
        Ok(v.round() as u64)
    } else {
        Err(CliError::Usage(format!("n = {v} is not a demand count")))
    }
}

/// Flag values win; otherwise the `[sweep]` section of the config.
fn axis_values(
    values: Vec<f64>,
    logspace: Option<LogRange>,
    section: &SweepSection,
) -> Result<Option<Vec<f64>>, CliError> {
    let (values, logspace) = if !values.is_empty() || logspace.is_some() {
        (values, logspace)
    } else {
        (section.values.clone().unwrap_or_default(), section.logspace)
    };
    match (values.is_empty(), logspace) {
        (false, Some(_)) => Err(CliError::Usage(
            "give either explicit values or a log-spaced range, not both".into(),
        )),
        (false, None) => Ok(Some(values)),
        (true, Some(range)) => range.values().map(Some),
        (true, None) => Ok(None),
    }
}

pub fn assess(args: &CommonArgs, iid_only: bool) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    let prior = s.single_prior()?;
    let (b, n) = (s.b()?, s.n()?);
    let opts = s.engine()?;
    if iid_only {
        let iid = iid_posterior(&prior, b, n, &opts.quad)?;
        let mut w = writer(&s.out)?;
        w.write_record(["b", "n", "prior", "iid"])?;
        w.write_record([
            format_number(b),
            n.to_string(),
            prior.to_string(),
            format_number(iid),
        ])?;
        w.flush()?;
        return Ok(());
    }
    if n < 2 {
        return Err(CliError::Usage(format!(
            "n = {n}: the conservative bound needs n >= 2 failure-free demands; \
             use --iid-only for the i.i.d. posterior"
        )));
    }
    let problem = AssessmentProblem::new(prior, b, n, s.phi1, s.phi2)?;
    let result = conservative_confidence(&problem, &opts)?;
    let mut w = writer(&s.out)?;
    w.write_record(ResultRow::HEADER)?;
    w.write_record(ResultRow::from_result(&problem, result).fields())?;
    w.flush()?;
    Ok(())
}

fn assess_row(
    prior: &PriorSpec,
    b: f64,
    n: u64,
    phi1: f64,
    phi2: f64,
    opts: &EngineOptions,
) -> ResultRow {
    AssessmentProblem::new(prior.clone(), b, n, phi1, phi2)
        .and_then(|p| conservative_confidence(&p, opts).map(|r| ResultRow::from_result(&p, r)))
        .unwrap_or_else(|e| ResultRow::failed(prior, b, n, phi1, phi2, &e))
}

pub fn sweep(
    args: &CommonArgs,
    axis: Option<Axis>,
    values: Vec<f64>,
    logspace: Option<LogRange>,
) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    let axis = axis
        .or(s.file.sweep.axis)
        .ok_or_else(|| CliError::Usage("missing --axis".into()))?;
    let priors = s.prior_specs()?;
    let b = s.b()?;
    let opts = s.engine()?;
    let values = axis_values(values, logspace, &s.file.sweep)?;

    let mut points = Vec::new();
    if axis == Axis::Prior {
        if values.is_some() {
            return Err(CliError::Usage(
                "a prior sweep takes its values from repeated --prior".into(),
            ));
        }
        let n = s.n()?;
        points.extend(priors.iter().map(|p| (p, n, s.phi1, s.phi2)));
    } else {
        let values =
            values.ok_or_else(|| CliError::Usage("missing --values or --logspace".into()))?;
        for p in &priors {
            for &v in &values {
                points.push(match axis {
                    Axis::N => (p, to_n(v)?, s.phi1, s.phi2),
                    Axis::Phi1 => (p, s.n()?, v, s.phi2),
                    Axis::Phi2 => (p, s.n()?, s.phi1, v),
                    Axis::Prior => unreachable!(),
                });
            }
        }
    }

    let rows: Vec<ResultRow> = points
        .par_iter()
        .map(|&(p, n, phi1, phi2)| assess_row(p, b, n, phi1, phi2, &opts))
        .collect();
    let mut w = writer(&s.out)?;
    w.write_record(ResultRow::HEADER)?;
    for row in &rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    let failed = rows.iter().filter(|r| r.result.is_none()).count();
    if failed > 0 {
        eprintln!(
            "cbi: {failed} of {} sweep points failed; see the status column",
            rows.len()
        );
    }
    Ok(())
}

const CUTPOINT_HEADER: [&str; 20] = [
    "b",
    "n",
    "phi1",
    "phi2",
    "prior",
    "x_l",
    "x_u",
    "c1_low",
    "c2_low",
    "c1_high",
    "c2_high",
    "case_id",
    "lower_pinned",
    "upper_pinned",
    "lower_iterations",
    "upper_iterations",
    "lower_mass_residual",
    "upper_mass_residual",
    "lower_g_residual",
    "upper_g_residual",
];

pub fn cutpoints(
    args: &CommonArgs,
    values: Vec<f64>,
    logspace: Option<LogRange>,
) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    let prior = s.single_prior()?;
    let b = s.b()?;
    let opts = s.engine()?;
    let ns: Vec<u64> = match axis_values(values, logspace, &s.file.sweep)? {
        Some(v) => v.into_iter().map(to_n).collect::<Result<_, _>>()?,
        None => vec![s.n()?],
    };
    let rows = ns
        .par_iter()
        .map(|&n| -> Result<Vec<String>, CliError> {
            let problem = AssessmentProblem::new(prior.clone(), b, n, s.phi1, s.phi2)?;
            let ctx = GFunctionContext::new(n)?;
            let cp = solve_cutpoints(problem.prior(), &ctx, b, s.phi1, s.phi2, &opts.solver)?;
            Ok(vec![
                format_number(b),
                n.to_string(),
                format_number(s.phi1),
                format_number(s.phi2),
                prior.to_string(),
                format_number(ctx.x_l()),
                format_number(ctx.x_u()),
                format_number(cp.c1_low),
                format_number(cp.c2_low),
                format_number(cp.c1_high),
                format_number(cp.c2_high),
                cp.case.id().to_string(),
                cp.lower.pinned.to_string(),
                cp.upper.pinned.to_string(),
                cp.lower.iterations.to_string(),
                cp.upper.iterations.to_string(),
                format_number(cp.lower.mass_residual),
                format_number(cp.upper.mass_residual),
                opt(cp.lower.g_residual),
                opt(cp.upper.g_residual),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = writer(&s.out)?;
    w.write_record(CUTPOINT_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn gdump(args: &CommonArgs, points: Option<usize>, x_max: Option<f64>) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    let ctx = GFunctionContext::new(s.n()?)?;
    let points = points.or(s.file.gdump.points).unwrap_or(1001);
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let x_max = x_max
        .or(s.file.gdump.x_max)
        .unwrap_or_else(|| (5.0 * ctx.x_l().max(ctx.x_u())).min(1.0));
    if !(x_max > 0.0 && x_max <= 1.0) {
        return Err(CliError::Usage(format!(
            "--x-max must lie in (0, 1], got {x_max}"
        )));
    }
    let (_, lower_end) = ctx.domain(GFunction::Lower);
    let mut w = writer(&s.out)?;
    w.write_record(["x", "g_lower", "g_upper"])?;
    for i in 0..points {
        let x = x_max * i as f64 / (points - 1) as f64;
        let gl = if x <= lower_end {
            Some(ctx.g_lower(x)?)
        } else {
            None
        };
        w.write_record([format_number(x), opt(gl), format_number(ctx.g_upper(x)?)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(
    args: &CommonArgs,
    x: Option<f64>,
    lambda: Option<f64>,
    chains: Option<usize>,
    runs: Option<u64>,
) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    let sim = &s.file.simulate;
    let x = x
        .or(sim.x)
        .ok_or_else(|| CliError::Usage("missing --x".into()))?;
    let lambda = lambda
        .or(sim.lambda)
        .ok_or_else(|| CliError::Usage("missing --lambda".into()))?;
    let params = KlotzParams::new(x, lambda)?;
    let n = s.n()?;
    if n == 0 {
        return Err(CliError::Usage("simulate needs n >= 1".into()));
    }
    let mut w = writer(&s.out)?;
    if let Some(runs) = runs.or(sim.runs) {
        let est = mc_likelihood(&params, n, runs, s.seed)?;
        let exact = params.likelihood_ff(n);
        w.write_record([
            "x",
            "lambda",
            "n",
            "runs",
            "seed",
            "estimate",
            "std_error",
            "exact",
            "z_score",
        ])?;
        w.write_record([
            format_number(x),
            format_number(lambda),
            n.to_string(),
            runs.to_string(),
            s.seed.to_string(),
            format_number(est.estimate),
            format_number(est.std_error),
            format_number(exact),
            format_number(est.z_score(exact)),
        ])?;
    } else {
        let len = usize::try_from(n)
            .map_err(|_| CliError::Usage(format!("n = {n} is too long to simulate")))?;
        w.write_record([
            "chain",
            "seed",
            "x",
            "lambda",
            "n",
            "failures",
            "failure_fraction",
            "fail_after_fail",
            "trials",
        ])?;
        for chain in 0..chains.or(sim.chains).unwrap_or(1) {
            let seed = s.seed.wrapping_add(chain as u64);
            let out = params.simulate_chain(len, seed);
            let trials: String = out.trials.iter().map(|&t| char::from(b'0' + t)).collect();
            w.write_record([
                chain.to_string(),
                seed.to_string(),
                format_number(x),
                format_number(lambda),
                n.to_string(),
                out.failures().to_string(),
                format_number(out.failure_fraction()),
                opt(out.fail_after_fail_fraction()),
                trials,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn oracle_check(args: &CommonArgs, runs: Option<u64>) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    let defaults = SuiteOptions::default();
    let opts = SuiteOptions {
        seed: s.seed,
        mc_runs: runs.or(s.file.oracle.runs).unwrap_or(defaults.mc_runs),
        ..defaults
    };
    let report = run_oracle_suite(&opts)?;
    let mut w = writer(&s.out)?;
    w.write_record(["suite", "name", "measured", "tolerance", "passed"])?;
    for c in &report.checks {
        w.write_record([
            c.suite.to_string(),
            c.name.clone(),
            format_number(c.measured),
            format_number(c.tolerance),
            c.passed.to_string(),
        ])?;
    }
    w.flush()?;
    let summary = format!(
        "{} checks, {} Monte Carlo outliers beyond 3 standard errors (allowed {})",
        report.checks.len(),
        report.mc_outliers,
        report.mc_outliers_allowed
    );
    if report.passed() {
        eprintln!("oracle-check: PASS: {summary}");
        Ok(())
    } else {
        Err(CliError::OracleFailed(format!(
            "oracle-check: FAIL: {summary}"
        )))
    }
}

//! Subcommand runners. Each one loads the inputs its pipeline needs, calls
//! the library, and writes one CSV to the configured output path.
//!
//! Probability columns in `bounds` and `simulate` are clipped at 1 for
//! plotting; the library itself returns unclipped values. The `nemirovski`,
//! `chance`, and `qopt` pipelines require a unit-variance model, so the
//! loaded model is rescaled automatically and the factor is reported in a
//! `model_scale` column.

use std::path::{Path, PathBuf};

use idseries::levy_core::IdModel;
use idseries::matrix_core::{Mat, MatrixSeries, rect_series_rho1, spectral_norm};
use idseries::monte_carlo::{compare_report, empirical_expectation};
use idseries::opt_apps::{
    build_rounding, chance_gamma, feasibility_bounds, nemirovski_params, sample_rounding, solve_sdp,
};
use idseries::scalar_bounds::{bh_crossing, build_partition_bound, eval_curve, eval_hp, CurveKind};
use idseries::tail_bounds::{bound_report, expectation_bound, ExpectationVariant, SeriesScale};

use crate::config::{RunConfig, Subcommand};
use crate::csvio::{fmt_f, fmt_flag, write_csv};
use crate::{formats, AppError};

const SDP_TOL: f64 = 1e-6;
const SDP_MAX_ITER: u64 = 50_000;

/// Runs the configured subcommand, writing its CSV to `cfg.output_path`.
pub fn dispatch(cfg: &RunConfig) -> Result<(), AppError> {
    match cfg.subcommand {
        Subcommand::Curves => run_curves(cfg),
        Subcommand::Bounds => run_bounds(cfg),
        Subcommand::Simulate => run_simulate(cfg),
        Subcommand::Expectation => run_expectation(cfg),
        Subcommand::Nemirovski => run_nemirovski(cfg),
        Subcommand::Chance => run_chance(cfg),
        Subcommand::Qopt => run_qopt(cfg),
    }
}

fn require_path<'a>(
    cfg: &RunConfig,
    path: &'a Option<PathBuf>,
    flag: &str,
    key: &str,
) -> Result<&'a Path, AppError> {
    path.as_deref().ok_or_else(|| {
        AppError::missing_input(format!(
            "the {} subcommand needs {flag} (config key {key})",
            cfg.subcommand
        ))
    })
}

fn load_model(cfg: &RunConfig) -> Result<IdModel, AppError> {
    formats::load_model(require_path(cfg, &cfg.model_path, "--model", "model_path")?)
}

fn load_symmetric_series(cfg: &RunConfig) -> Result<MatrixSeries, AppError> {
    let mats = formats::load_series(require_path(cfg, &cfg.series_path, "--series", "series_path")?)?;
    formats::symmetric_series(mats)
}

fn clip(v: f64) -> f64 {
    v.min(1.0)
}

fn run_curves(cfg: &RunConfig) -> Result<(), AppError> {
    let pb = build_partition_bound(&[1.0, cfg.c])?;
    let mut svals = cfg.t_grid();
    let (s_cross, _) = bh_crossing(cfg.c)?;
    if s_cross >= cfg.t_min && s_cross <= cfg.t_max && !svals.contains(&s_cross) {
        let pos = svals.partition_point(|&x| x < s_cross);
        svals.insert(pos, s_cross);
    }
    let mut rows = Vec::with_capacity(svals.len());
    for s in svals {
        rows.push(vec![
            fmt_f(s),
            fmt_f(eval_curve(CurveKind::Q, s)?),
            fmt_f(eval_curve(CurveKind::B, s)?),
            fmt_f(eval_curve(CurveKind::T, s)?),
            fmt_f(eval_hp(&pb, s)?),
        ]);
    }
    write_csv(&cfg.output_path, "s,Q,B,T,H", &rows)
}

fn run_bounds(cfg: &RunConfig) -> Result<(), AppError> {
    let model = load_model(cfg)?;
    let series = load_symmetric_series(cfg)?;
    let scale = SeriesScale::of(&series);
    let mut rows = Vec::with_capacity(cfg.t_steps);
    for t in cfg.t_grid() {
        let b = bound_report(&model, scale, t, cfg.c)?;
        rows.push(vec![
            fmt_f(t),
            fmt_f(clip(b.exact)),
            fmt_f(clip(b.bennett)),
            fmt_f(clip(b.bernstein_smooth)),
            fmt_f(clip(b.bernstein_piecewise)),
            fmt_f(clip(b.hc)),
            fmt_f(clip(b.beta0_piecewise)),
        ]);
    }
    write_csv(&cfg.output_path, "t,exact,bennett,bernstein_smooth,bernstein_piecewise,hc,beta0", &rows)
}

fn run_simulate(cfg: &RunConfig) -> Result<(), AppError> {
    let model = load_model(cfg)?;
    let series = load_symmetric_series(cfg)?;
    let report = compare_report(&model, &series, &cfg.t_grid(), cfg.trials, cfg.seed, cfg.c)?;
    let mut rows = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        let (e, b) = (&row.estimate, &row.bounds);
        rows.push(vec![
            fmt_f(e.t),
            fmt_f(e.p_hat),
            fmt_f(e.ci_low),
            fmt_f(e.ci_high),
            fmt_f(clip(b.exact)),
            fmt_f(clip(b.bennett)),
            fmt_f(clip(b.bernstein_smooth)),
            fmt_f(clip(b.bernstein_piecewise)),
            fmt_f(clip(b.hc)),
            fmt_f(clip(b.beta0_piecewise)),
        ]);
    }
    write_csv(
        &cfg.output_path,
        "t,p_hat,ci_low,ci_high,exact,bennett,bernstein_smooth,bernstein_piecewise,hc,beta0",
        &rows,
    )?;
    if let Some(v) = report.violations.first() {
        return Err(AppError::bound_violation(format!(
            "{} bound value(s) fall below the empirical 99% lower confidence limit, first: {} = {} < {} at t = {}",
            report.violations.len(),
            v.bound_name,
            v.bound_value,
            v.ci_low,
            v.t
        )));
    }
    Ok(())
}

fn run_expectation(cfg: &RunConfig) -> Result<(), AppError> {
    let model = load_model(cfg)?;
    let series = load_symmetric_series(cfg)?;
    let scale = SeriesScale::of(&series);
    let statement = expectation_bound(&model, scale, ExpectationVariant::Statement)?;
    let proof = expectation_bound(&model, scale, ExpectationVariant::Proof)?;
    let (mean, std_err) = empirical_expectation(&model, &series, cfg.trials, cfg.seed)?;
    let rows = vec![
        vec!["expectation_statement".into(), fmt_f(statement)],
        vec!["expectation_proof".into(), fmt_f(proof)],
        vec!["empirical_mean".into(), fmt_f(mean)],
        vec!["empirical_std_err".into(), fmt_f(std_err)],
    ];
    write_csv(&cfg.output_path, "quantity,value", &rows)
}

fn run_nemirovski(cfg: &RunConfig) -> Result<(), AppError> {
    let (model, model_scale) = load_model(cfg)?.normalized()?;
    let mats = formats::load_series(require_path(cfg, &cfg.series_path, "--series", "series_path")?)?;
    let rho1 = rect_series_rho1(&mats)?;
    let (m, n) = (mats[0].rows(), mats[0].cols());
    let p = nemirovski_params(cfg.alpha, m, n, rho1, &model)?;
    let rows = vec![vec![
        fmt_f(p.c_alpha),
        fmt_f(p.tau_alpha),
        fmt_f(p.t_star),
        fmt_flag(p.condition_ok),
        fmt_f(model_scale),
    ]];
    write_csv(&cfg.output_path, "c_alpha,tau_alpha,t_star,condition_ok,model_scale", &rows)
}

fn run_chance(cfg: &RunConfig) -> Result<(), AppError> {
    let (model, model_scale) = load_model(cfg)?.normalized()?;
    let problem = formats::load_chance_problem(require_path(cfg, &cfg.problem_path, "--problem", "problem_path")?)?;
    let rho2 = problem.rho2()?;
    let g = chance_gamma(cfg.epsilon, problem.dim(), rho2, &model, cfg.c)?;
    let rows = vec![vec![
        fmt_f(g.gamma2),
        fmt_f(g.tau_c),
        fmt_f(rho2),
        fmt_flag(g.precondition_ok),
        fmt_f(model_scale),
    ]];
    write_csv(&cfg.output_path, "gamma2,tau_c,rho2,precondition_ok,model_scale", &rows)
}

fn run_qopt(cfg: &RunConfig) -> Result<(), AppError> {
    let (model, model_scale) = load_model(cfg)?.normalized()?;
    let problem = formats::load_quad_problem(require_path(cfg, &cfg.problem_path, "--problem", "problem_path")?)?;
    let sol = solve_sdp(&problem, SDP_TOL, SDP_MAX_ITER)?;
    let final_residual = sol.residuals.last().copied().unwrap_or(0.0);
    if !sol.converged {
        return Err(AppError {
            module: "opt_apps".into(),
            code: "max_iter".into(),
            detail: format!(
                "the relaxation solver exhausted {SDP_MAX_ITER} iterations with residual {final_residual}"
            ),
            exit: 2,
        });
    }
    let plan = build_rounding(&sol.y_hat, &problem)?;
    let fb = feasibility_bounds(&plan, &model)?;
    let x_hat = sample_rounding(&plan, &model, cfg.seed)?;
    let sample_norm = spectral_norm(&x_hat)?;
    let v = x_hat.vec_columns();
    let vm = Mat::from_rows(v.len(), 1, v)?;
    let mut rows = vec![
        vec!["theta_hat".into(), fmt_f(sol.theta_hat)],
        vec!["iterations".into(), format!("{}", sol.iterations)],
        vec!["final_residual".into(), fmt_f(final_residual)],
        vec!["rho3".into(), fmt_f(plan.rho3())],
    ];
    for (i, r4) in plan.rho4().iter().enumerate() {
        rows.push(vec![format!("rho4_{i}"), fmt_f(*r4)]);
    }
    rows.push(vec!["norm_bound".into(), fmt_f(fb.norm_bound)]);
    for (i, qb) in fb.quad_bounds.iter().enumerate() {
        rows.push(vec![format!("quad_bound_{i}"), fmt_f(*qb)]);
    }
    rows.push(vec!["feasibility_scale".into(), fmt_f(fb.scale)]);
    rows.push(vec!["c2".into(), fmt_f(fb.c2)]);
    rows.push(vec!["tau2".into(), fmt_f(fb.tau2)]);
    rows.push(vec!["sample_norm".into(), fmt_f(sample_norm)]);
    for (i, b) in problem.inequality_terms().iter().enumerate() {
        let bv = b.mat().matmul(&vm)?;
        rows.push(vec![format!("sample_quad_{i}"), fmt_f(vm.dot(&bv)?)]);
    }
    rows.push(vec!["model_scale".into(), fmt_f(model_scale)]);
    write_csv(&cfg.output_path, "quantity,value", &rows)
}

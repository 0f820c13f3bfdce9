use std::fs::File;
use std::io::BufWriter;

use pinney_core::ode::{integrate, PinneyParams, TrajectoryStatus, COLLAPSE_DELTA};
use pinney_core::solver::SolverOptions;
use serde_json::json;

use super::{build_profile, out_dir, scenario_label, write_json};
use crate::config::Settings;
use crate::{CliError, SimulateArgs};

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let dir = out_dir(&args.common, &settings)?;
    let scenario = scenario_label(&args.common, &settings, "simulate")?;

    let system = settings
        .string("system", args.system.as_deref())?
        .unwrap_or_else(|| "pinney".to_string());
    if system != "pinney" && system != "classical" {
        return Err(CliError::validation(format!(
            "unknown system '{system}' (expected pinney or classical)"
        )));
    }

    let profile = build_profile(&args.profile, &settings, "constant")?;
    let eps = settings.require_f64("eps", args.eps)?;
    let k = if system == "pinney" {
        settings.require_f64("k", args.k)?
    } else {
        settings.f64("k", args.k)?.unwrap_or(0.0)
    };
    let x0 = settings.require_f64("x0", args.x0)?;
    let v0 = settings.f64("v0", args.v0)?.unwrap_or(0.0);
    let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(50.0);
    let samples = settings.usize("samples", args.samples)?.unwrap_or(2001);
    let delta = settings
        .f64("collapse-delta", args.collapse_delta)?
        .unwrap_or(COLLAPSE_DELTA);
    let abs_tol = settings.f64("abs-tol", args.abs_tol)?.unwrap_or(1e-10);
    let rel_tol = settings.f64("rel-tol", args.rel_tol)?.unwrap_or(1e-10);
    settings.finish()?;

    let params = PinneyParams::new(eps, k, profile)?;
    let opts = SolverOptions::with_tol(abs_tol, rel_tol);
    let traj = if system == "pinney" {
        params.omega(0.0)?;
        params.omega(t_end)?;
        integrate(
            params.damped_pinney_field(),
            (x0, v0),
            0.0,
            t_end,
            &opts,
            Some(delta),
            samples,
        )?
    } else {
        integrate(
            params.classical_field(),
            (x0, v0),
            0.0,
            t_end,
            &opts,
            None,
            samples,
        )?
    };

    let csv_path = dir.join("trajectory.csv");
    let mut writer = BufWriter::new(File::create(&csv_path)?);
    traj.write_csv(&mut writer)?;

    let (status, t_star) = match traj.status {
        TrajectoryStatus::Completed => ("completed", None),
        TrajectoryStatus::CollapseDetected { t_star } => ("collapse-detected", Some(t_star)),
        TrajectoryStatus::StepFailure { t } => ("step-failure", Some(t)),
    };
    let summary = json!({
        "schema_version": "1",
        "scenario": scenario,
        "system": system,
        "status": status,
        "t_star": t_star,
        "eps": eps,
        "k": k,
        "x0": x0,
        "v0": v0,
        "t_end": t_end,
        "samples_written": traj.samples.len(),
        "steps": traj.stats.steps,
        "rejected_steps": traj.stats.rejected,
        "rhs_evaluations": traj.stats.rhs_evals,
    });
    write_json(&dir.join("summary.json"), &summary)?;

    match traj.status {
        TrajectoryStatus::StepFailure { t } => Err(CliError::numerical(format!(
            "step size underflow at t = {t}"
        ))),
        TrajectoryStatus::CollapseDetected { t_star } if k > 0.0 => Err(
            CliError::unexpected_collapse(format!("collapse at t = {t_star} although k = {k} > 0")),
        ),
        _ => Ok(()),
    }
}

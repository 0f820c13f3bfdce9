use pinney_core::ode::{integrate, integrate_pinney, PinneyParams, Trajectory};
use pinney_core::solver::SolverOptions;
use pinney_core::transforms::{
    abel_residual, build_quasi_invariance, mass_pinney_to_standard, rhs_mass_pinney,
    transform_residual_e3, ConstantFn, ExpFn,
};
use serde_json::json;

use super::{build_profile, out_dir, scenario_label, write_json};
use crate::config::Settings;
use crate::{CliError, TransformCheckArgs};

pub fn run(args: &TransformCheckArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let dir = out_dir(&args.common, &settings)?;
    let scenario = scenario_label(&args.common, &settings, "transform-check")?;

    let transform = settings
        .string("transform", args.transform.as_deref())?
        .ok_or_else(|| CliError::validation("missing required parameter: transform"))?;
    let profile = build_profile(&args.profile, &settings, "constant")?;
    let eps = settings.require_f64("eps", args.eps)?;
    let k = settings.require_f64("k", args.k)?;
    let x0 = settings.f64("x0", args.x0)?.unwrap_or(2.414213562373095);
    let v0 = settings.f64("v0", args.v0)?.unwrap_or(-0.17071067811865476);
    let w = settings.f64("w", args.w)?.unwrap_or(0.0);
    let rho0 = settings.f64("rho0", args.rho0)?.unwrap_or(1.0);
    let rho_dot0 = settings.f64("rho-dot0", args.rho_dot0)?.unwrap_or(-eps);
    let mass_rate = settings
        .f64("mass-rate", args.mass_rate)?
        .unwrap_or(2.0 * eps);
    let refine = settings.usize("refine", args.refine)?;
    let params = PinneyParams::new(eps, k, profile)?;

    let tight = SolverOptions::with_tol(1e-12, 1e-12);
    let report = match transform.as_str() {
        "quasi-invariance" => {
            let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(1.2);
            let samples = settings.usize("samples", args.samples)?.unwrap_or(10_000);
            settings.finish()?;
            let map = build_quasi_invariance(&params, (rho0, rho_dot0), w, t_end * 1.05)?;
            let run = |n: usize| -> Result<f64, CliError> {
                let end = t_end.min(map.t_valid_end());
                let traj = integrate_pinney(&params, (x0, v0), 0.0, end, &tight, None, n)?;
                Ok(transform_residual_e3(&map, &traj)?)
            };
            let residual = run(samples)?;
            let ratio = match refine {
                Some(f) if f > 1 => Some(residual / run(samples * f)?),
                _ => None,
            };
            residual_report(&scenario, "quasi-invariance", samples, residual, ratio)
        }
        "emden-fowler" => {
            let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(1.2);
            let samples = settings.usize("samples", args.samples)?.unwrap_or(200);
            settings.finish()?;
            if w != 0.0 {
                return Err(CliError::validation("the Emden-Fowler gauge needs W = 0"));
            }
            let map = build_quasi_invariance(&params, (rho0, rho_dot0), 0.0, t_end * 1.05)?;
            // Deviation of mu(T) from the arctan closed form available for
            // constant frequency.
            let b = {
                let om0 = params.profile.omega_ref()?;
                (om0 * om0 - eps * eps).sqrt()
            };
            let end = t_end.min(map.t_valid_end());
            let mut worst = 0.0_f64;
            for i in 0..samples {
                let t = end * i as f64 / (samples - 1) as f64;
                let (mu, big_t) = map.emden_fowler_mu(t)?;
                let closed = k * (4.0 * eps / b * (b * big_t).atan()).exp();
                worst = worst.max((mu - closed).abs() / closed);
            }
            residual_report(&scenario, "emden-fowler", samples, worst, None)
        }
        "abel" => {
            let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(3.0);
            let samples = settings.usize("samples", args.samples)?.unwrap_or(2000);
            settings.finish()?;
            let run = |n: usize| -> Result<f64, CliError> {
                let traj = integrate_pinney(&params, (x0, v0), 0.0, t_end, &tight, None, n)?;
                Ok(abel_residual(&params, &traj)?)
            };
            let residual = run(samples)?;
            let ratio = match refine {
                Some(f) if f > 1 => Some(residual / run(samples * f)?),
                _ => None,
            };
            residual_report(&scenario, "abel", samples, residual, ratio)
        }
        "mass" => {
            let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(6.0);
            let samples = settings.usize("samples", args.samples)?.unwrap_or(3000);
            settings.finish()?;
            let mass = ExpFn { rate: mass_rate };
            let rho = ConstantFn(1.0);
            let run = |n: usize| -> Result<f64, CliError> {
                let rhs = |t: f64, y: &[f64; 2]| match rhs_mass_pinney(
                    &mass,
                    &params.profile,
                    eps,
                    k,
                    t,
                    (y[0], y[1]),
                ) {
                    Ok((a, b)) => [a, b],
                    Err(_) => [f64::INFINITY, f64::INFINITY],
                };
                let traj: Trajectory<f64> = integrate(rhs, (x0, v0), 0.0, t_end, &tight, None, n)?;
                Ok(mass_pinney_to_standard(
                    &mass,
                    &params.profile,
                    eps,
                    &rho,
                    k,
                    &traj,
                )?)
            };
            let residual = run(samples)?;
            let ratio = match refine {
                Some(f) if f > 1 => Some(residual / run(samples * f)?),
                _ => None,
            };
            residual_report(&scenario, "mass", samples, residual, ratio)
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown transform '{other}' (expected quasi-invariance, emden-fowler, abel, \
                 or mass)"
            )))
        }
    };

    write_json(&dir.join("report.json"), &report)?;
    Ok(())
}

fn residual_report(
    scenario: &str,
    transform: &str,
    grid_size: usize,
    max_residual: f64,
    refinement_ratio: Option<f64>,
) -> serde_json::Value {
    json!({
        "schema_version": "1",
        "scenario": scenario,
        "transform": transform,
        "grid_size": grid_size,
        "max_residual": max_residual,
        "refinement_ratio": refinement_ratio,
    })
}

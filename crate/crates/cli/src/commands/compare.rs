use pinney_core::asymptotics::AsymptoticSolution;
use pinney_core::metrics::{compare_with_trajectory, convergence_study};
use pinney_core::ode::{integrate_pinney, PinneyParams};
use pinney_core::solver::SolverOptions;
use serde_json::json;

use super::{build_profile, out_dir, scenario_label, write_csv, write_json};
use crate::config::Settings;
use crate::{CliError, CompareArgs};

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let dir = out_dir(&args.common, &settings)?;
    let scenario = scenario_label(&args.common, &settings, "compare")?;

    let profile = build_profile(&args.profile, &settings, "constant")?;
    let eps = settings.require_f64("eps", args.eps)?;
    let k = settings.require_f64("k", args.k)?;
    let a0 = settings.require_f64("A0", args.a0)?;
    let phi = settings.f64("phi", args.phi)?.unwrap_or(0.0);
    let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(50.0);
    let samples = settings.usize("samples", args.samples)?.unwrap_or(2000);
    let envelope = settings.flag("envelope", args.envelope)?;
    let eps_list_raw = settings.string("eps-list", args.eps_list.as_deref())?;
    settings.finish()?;

    let params = PinneyParams::new(eps, k, profile)?;
    let sol = AsymptoticSolution::new(params.clone(), a0, 0.0, phi)?;
    let (x0, v0) = sol.eval_x0(0.0)?;
    let traj = integrate_pinney(
        &params,
        (x0, v0),
        0.0,
        t_end,
        &SolverOptions::default(),
        None,
        samples,
    )?;
    let report = compare_with_trajectory(&params, &sol, &traj)?;

    // Paired samples: t, numeric x, closed-form x, absolute difference.
    write_csv(
        &dir.join("paired.csv"),
        "t,x_numeric,x_asymptotic,abs_err",
        traj.samples.iter().map(|s| {
            let xa = sol.eval_x0(s.t).map(|p| p.0).unwrap_or(f64::NAN);
            vec![s.t, s.x, xa, (s.x - xa).abs()]
        }),
    )?;

    if envelope {
        write_csv(
            &dir.join("envelope.csv"),
            "t,midline",
            report.envelope_midline.iter().map(|&(t, m)| vec![t, m]),
        )?;
    }

    // Optional damping sweep.
    let mut fitted_order = None;
    let mut breakdown_eps = None;
    let mut breakdown_threshold = None;
    let mut per_eps = Vec::new();
    if let Some(raw) = eps_list_raw {
        let mut eps_values = Vec::new();
        for item in raw.split(',') {
            let value: f64 = item.trim().parse().map_err(|_| {
                CliError::validation(format!("eps-list entry '{item}' is not a number"))
            })?;
            eps_values.push(value);
        }
        let study = convergence_study(&sol, &eps_values, t_end, samples)?;
        fitted_order = study.fitted_order;
        breakdown_eps = study.breakdown_eps;
        breakdown_threshold = Some(study.breakdown_threshold);
        per_eps = study.per_eps;
    }

    let report_json = json!({
        "schema_version": "1",
        "scenario": scenario,
        "eps": eps,
        "max_abs_err": report.max_abs_err,
        "rms_err": report.rms_err,
        "sample_count": report.sample_count,
        "fitted_order": fitted_order,
        "breakdown_eps": breakdown_eps,
        "breakdown_threshold": breakdown_threshold,
        "per_eps": per_eps
            .iter()
            .map(|&(e, err)| json!({"eps": e, "max_abs_err": err}))
            .collect::<Vec<_>>(),
    });
    write_json(&dir.join("report.json"), &report_json)?;
    Ok(())
}

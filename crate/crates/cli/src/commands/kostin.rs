use pinney_core::kostin::{
    continuity_residual, evolve_kostin, EvolveMode, KostinParams, QuantumFields, WidthInit,
};
use serde_json::json;

use super::{build_profile, out_dir, scenario_label, write_csv, write_json};
use crate::config::Settings;
use crate::{CliError, KostinArgs};

pub fn run(args: &KostinArgs) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let dir = out_dir(&args.common, &settings)?;
    let scenario = scenario_label(&args.common, &settings, "kostin")?;

    let profile = build_profile(&args.profile, &settings, "oscillating")?;
    let hbar = settings.f64("hbar", args.hbar)?.unwrap_or(1.0);
    let mass = settings.f64("mass", args.mass)?.unwrap_or(1.0);
    let eps = settings.require_f64("eps", args.eps)?;
    let a0 = settings.f64("A0", args.a0)?;
    let phi = settings.f64("phi", args.phi)?.unwrap_or(0.0);
    let t0 = settings.f64("t0", args.t0)?.unwrap_or(0.0);
    let x0 = settings.f64("x0", args.x0)?;
    let xdot0 = settings.f64("xdot0", args.xdot0)?.unwrap_or(0.0);
    let qcl0 = settings.f64("qcl0", args.qcl0)?.unwrap_or(1.0);
    let qcl_dot0 = settings.f64("qcl-dot0", args.qcl_dot0)?.unwrap_or(0.0);
    let mode_name = settings
        .string("mode", args.mode.as_deref())?
        .unwrap_or_else(|| "asymptotic".to_string());
    let t_end = settings.f64("t-end", args.t_end)?.unwrap_or(60.0);
    let samples = settings.usize("samples", args.samples)?.unwrap_or(400);
    let grid_points = settings
        .usize("grid-points", args.grid_points)?
        .unwrap_or(400);
    let q_min = settings.f64("q-min", args.q_min)?;
    let q_max = settings.f64("q-max", args.q_max)?;
    settings.finish()?;

    if t0 != 0.0 {
        return Err(CliError::validation(
            "only t0 = 0 is supported for the width closed form",
        ));
    }
    let width_init = match (a0, x0) {
        (Some(a0), None) => WidthInit::Asymptotic { a0, phi },
        (None, Some(x0)) => WidthInit::State { x: x0, xdot: xdot0 },
        (Some(_), Some(_)) => {
            return Err(CliError::validation(
                "give either --A0 (asymptotic width data) or --x0 (state width data), not both",
            ))
        }
        (None, None) => {
            return Err(CliError::validation(
                "missing required parameter: A0 (or x0 for state width data)",
            ))
        }
    };
    let bounds = match (q_min, q_max) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            return Err(CliError::validation(
                "q-min and q-max must be given together",
            ))
        }
    };

    let params = KostinParams::new(hbar, mass, eps, profile, (qcl0, qcl_dot0), width_init)?;

    let run_mode = |mode: EvolveMode| evolve_kostin(&params, t_end, mode, samples);
    let (fields_series, both) = match mode_name.as_str() {
        "numeric" => (run_mode(EvolveMode::Numeric)?, None),
        "asymptotic" => (run_mode(EvolveMode::Asymptotic)?, None),
        // Fields follow the closed-form width; the numeric width rides
        // along in the summary CSV for side-by-side plotting.
        "both" => (
            run_mode(EvolveMode::Asymptotic)?,
            Some(run_mode(EvolveMode::Numeric)?),
        ),
        other => {
            return Err(CliError::validation(format!(
                "unknown mode '{other}' (expected numeric, asymptotic, or both)"
            )))
        }
    };

    match &both {
        None => write_csv(
            &dir.join("summary.csv"),
            "t,x,xdot,q_cl,q_cl_dot",
            (0..fields_series.times.len()).map(|i| {
                vec![
                    fields_series.times[i],
                    fields_series.width[i],
                    fields_series.width_dot[i],
                    fields_series.center[i],
                    fields_series.center_dot[i],
                ]
            }),
        )?,
        Some(numeric) => write_csv(
            &dir.join("summary.csv"),
            "t,x_asymptotic,xdot_asymptotic,x_numeric,xdot_numeric,q_cl,q_cl_dot",
            (0..fields_series.times.len()).map(|i| {
                vec![
                    fields_series.times[i],
                    fields_series.width[i],
                    fields_series.width_dot[i],
                    numeric.width[i],
                    numeric.width_dot[i],
                    fields_series.center[i],
                    fields_series.center_dot[i],
                ]
            }),
        )?,
    }

    let fields = QuantumFields::from_series(fields_series, grid_points, bounds)?;
    write_csv(
        &dir.join("fields.csv"),
        "t,q,n,u",
        (0..fields.times.len()).flat_map(|i| {
            let fields = &fields;
            (0..fields.grid.len()).map(move |j| {
                vec![
                    fields.times[i],
                    fields.grid[j],
                    fields.density[i][j],
                    fields.velocity[i][j],
                ]
            })
        }),
    )?;

    let mut worst_norm = 0.0_f64;
    for i in 0..fields.times.len() {
        worst_norm = worst_norm.max((fields.normalization(i) - 1.0).abs());
    }
    let continuity = continuity_residual(&fields).ok();

    let summary = json!({
        "schema_version": "1",
        "scenario": scenario,
        "mode": mode_name,
        "hbar": hbar,
        "mass": mass,
        "k": params.pinney.k,
        "eps": eps,
        "t_end": t_end,
        "samples": samples,
        "grid_points": grid_points,
        "max_normalization_deviation": worst_norm,
        "continuity_residual": continuity,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

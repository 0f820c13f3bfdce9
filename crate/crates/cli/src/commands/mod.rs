pub mod compare;
pub mod kostin;
pub mod simulate;
pub mod transform_check;

use std::fs;
use std::path::{Path, PathBuf};

use pinney_core::frequency::{parse_table_csv, FrequencyProfile};
use pinney_core::ode::format_sig17;

use crate::config::Settings;
use crate::{CliError, CommonArgs, ProfileArgs};

/// Resolve the output directory (flag over config, default `.`), creating
/// it if needed.
pub fn out_dir(common: &CommonArgs, settings: &Settings) -> Result<PathBuf, CliError> {
    let dir = match &common.out_dir {
        Some(d) => {
            settings.string("out-dir", None)?;
            d.clone()
        }
        None => settings
            .string("out-dir", None)?
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn scenario_label(
    common: &CommonArgs,
    settings: &Settings,
    default: &str,
) -> Result<String, CliError> {
    Ok(settings
        .string("scenario", common.scenario.as_deref())?
        .unwrap_or_else(|| default.to_string()))
}

/// Build the frequency profile from `omega` / `omega0` / `gamma` settings.
pub fn build_profile(
    args: &ProfileArgs,
    settings: &Settings,
    default_kind: &str,
) -> Result<FrequencyProfile<f64>, CliError> {
    let kind = settings
        .string("omega", args.omega.as_deref())?
        .unwrap_or_else(|| default_kind.to_string());

    if let Some(path) = kind.strip_prefix("tabulated:") {
        // Tabulated data carries its own frequencies; omega0/gamma unused.
        settings.f64("omega0", args.omega0)?;
        settings.f64("gamma", args.gamma)?;
        let text = fs::read_to_string(Path::new(path)).map_err(|e| {
            CliError::validation(format!("cannot read tabulated profile {path}: {e}"))
        })?;
        let points = parse_table_csv(&text)?;
        return Ok(FrequencyProfile::tabulated(points)?);
    }

    let omega0 = settings.require_f64("omega0", args.omega0)?;
    Ok(match kind.as_str() {
        "constant" => {
            settings.f64("gamma", args.gamma)?;
            FrequencyProfile::constant(omega0)?
        }
        "decaying" => {
            settings.f64("gamma", args.gamma)?;
            FrequencyProfile::decaying(omega0)?
        }
        "growing" => {
            settings.f64("gamma", args.gamma)?;
            FrequencyProfile::growing(omega0)?
        }
        "oscillating" => {
            let gamma = settings.require_f64("gamma", args.gamma)?;
            FrequencyProfile::oscillating(omega0, gamma)?
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown frequency profile '{other}' (expected constant, decaying, growing, \
                 oscillating, or tabulated:<path>)"
            )))
        }
    })
}

/// Write a CSV from a header and rows of f64 columns, 17 significant digits.
pub fn write_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format_sig17(v));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::validation(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

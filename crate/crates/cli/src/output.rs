//! File emission: RFC-4180 CSV with LF line endings, JSON with stable key
//! order, and all-or-nothing writes (temp file + rename per file, staged so
//! computation errors never leave partial output behind).

use crate::{CliError, Result};
use omcascade::dynamics::{Matrix8, QUADRATURE_LABELS};
use omcascade::gaussian::Matrix4;
use omcascade::model::Scenario;
use omcascade::scenario::ScenarioResult;
use serde_json::{json, Value};
use std::fs;
use std::path::Path;

/// Shortest round-trip decimal representation (Rust's float Display).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Build CSV bytes: header row, LF line endings, minimal quoting.
pub fn csv_bytes<I>(columns: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(columns)
        .map_err(|e| CliError::config("<csv>", e.to_string()))?;
    for row in rows {
        writer
            .write_record(&row)
            .map_err(|e| CliError::config("<csv>", e.to_string()))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::config("<csv>", e.to_string()))
}

/// Pretty JSON with a trailing newline; object keys are emitted in sorted
/// order, so output bytes are stable.
pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json serialization");
    bytes.push(b'\n');
    bytes
}

/// Write all files under `dir` atomically: every payload goes to a temp
/// file first and is renamed into place only after all temps are on disk.
pub fn write_atomic(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut staged = Vec::new();
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| CliError::Io {
            path: tmp.clone(),
            source: e,
        })?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, target) in staged {
        fs::rename(&tmp, &target).map_err(|e| CliError::Io {
            path: target.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn resonator_json(res: &omcascade::model::ResonatorParams) -> Value {
    json!({
        "refractive_index": res.refractive_index,
        "radius_m": res.radius,
        "mass_kg": res.mass,
        "omega_c_rad_s": res.omega_c,
        "wavelength_m": res.wavelength(),
        "kappa_0_rad_s": res.kappa_0,
        "kappa_ex_rad_s": res.kappa_ex,
        "omega_m_rad_s": res.omega_m,
        "gamma_m_rad_s": res.gamma_m,
        "dn_dlambda_per_m": res.dn_dlambda,
        "single_photon_coupling_rad_s": res.single_photon_coupling(),
    })
}

fn spin_json(spin: &omcascade::model::SpinConfig) -> Value {
    json!({
        "rate_rad_s": spin.angular_velocity,
        "orientation": match spin.orientation {
            omcascade::SpinOrientation::Ccw => "ccw",
            omcascade::SpinOrientation::Cw => "cw",
            omcascade::SpinOrientation::Static => "static",
        },
    })
}

/// Fully resolved scenario in strict SI units (rad/s throughout).
pub fn scenario_json(sc: &Scenario) -> Value {
    let (det_l, det_r) = sc.effective_detunings();
    let (nbar_l, nbar_r) = sc.thermal_occupancies();
    json!({
        "left": resonator_json(&sc.left),
        "right": resonator_json(&sc.right),
        "spin_left": spin_json(&sc.spin_left),
        "spin_right": spin_json(&sc.spin_right),
        "link": {
            "transmission": sc.link.transmission,
            "phase_rad": sc.link.phase,
        },
        "drive": {
            "direction": sc.drive.direction.label(),
            "power_w": sc.drive.power,
            "detuning_rad_s": sc.drive.detuning,
        },
        "environment": { "temperature_k": sc.env.temperature },
        "derived": {
            "drive_frequency_rad_s": sc.drive_frequency(),
            "drive_amplitude_sqrt_per_s": sc.drive_amplitude(),
            "effective_detuning_left_rad_s": det_l,
            "effective_detuning_right_rad_s": det_r,
            "thermal_occupancy_left": nbar_l,
            "thermal_occupancy_right": nbar_r,
        },
    })
}

/// Per-evaluation record; unstable points carry explicit nulls, never
/// silent zeros.
pub fn result_json(result: &ScenarioResult) -> Value {
    json!({
        "photons_l": result.photons_l,
        "photons_r": result.photons_r,
        "stable": result.stable,
        "stability_margin_rad_s": result.stability_margin,
        "residual": result.residual,
        "ill_conditioned": result.ill_conditioned,
        "physical": result.physical,
        "nu_minus": result.nu_minus,
        "log_negativity": result.log_negativity,
    })
}

fn matrix8_rows(m: &Matrix8) -> Vec<Vec<f64>> {
    (0..8)
        .map(|i| (0..8).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matrix4_rows(m: &Matrix4) -> Vec<Vec<f64>> {
    (0..4)
        .map(|i| (0..4).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Labeled row-major dump of the drift, diffusion, and covariance matrices.
pub fn matrices_json(
    drift: &Matrix8,
    diffusion: &Matrix8,
    covariance: Option<&Matrix8>,
) -> Value {
    json!({
        "quadrature_order": QUADRATURE_LABELS,
        "layout": "row-major",
        "drift_rad_s": matrix8_rows(drift),
        "diffusion_rad_s": matrix8_rows(diffusion),
        "covariance": covariance.map(matrix8_rows),
    })
}

/// Provenance header accompanying every table.
pub fn provenance(
    command: &str,
    raw_config: &Value,
    resolved_scenario: &Scenario,
    columns: &[&str],
    notes: Value,
) -> Value {
    json!({
        "tool": "omcascade",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "columns": columns,
        "config": raw_config,
        "resolved_scenario": scenario_json(resolved_scenario),
        "notes": notes,
    })
}

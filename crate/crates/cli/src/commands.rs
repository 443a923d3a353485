//! Command execution: every command computes its complete file set first;
//! nothing touches the filesystem until the computation has succeeded.

use crate::config::{wigner_pair_name, CommandKind, ResolvedConfig};
use crate::output::{
    csv_bytes, fmt_f64, fmt_opt, json_bytes, matrices_json, matrix4_rows, provenance,
    result_json, scenario_json,
};
use crate::{CliError, Result};
use omcascade::dynamics::{diffusion_matrix, drift_matrix};
use omcascade::gaussian::{reduce_cm, wigner_projection, GridSpec, Matrix4, MECHANICAL_MODES};
use omcascade::model::{Direction, Scenario, SpinConfig};
use omcascade::scenario::{
    directional_pair, revival_coefficient, run_scenario_full, sweep, ScenarioResult, SweepAxis,
    SweepParam,
};
use omcascade::steady_state::solve_steady_state;
use serde_json::{json, Value};

pub struct ExecOptions {
    pub dump_matrices: bool,
    /// `--set` overrides applied to the config, recorded in provenance.
    pub overrides: Vec<String>,
}

pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    /// Set when a single-point command landed on unstable dynamics; the
    /// record is still written, the process exits with the dedicated code.
    pub unstable: bool,
}

pub fn execute(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    match cfg.raw.command {
        CommandKind::Point => point(cfg, opts),
        CommandKind::Pair => pair(cfg, opts),
        CommandKind::Sweep => sweep_command(cfg, opts),
        CommandKind::Revival => revival(cfg, opts),
        CommandKind::Wigner => wigner(cfg, opts),
        CommandKind::Figure => figure(cfg, opts),
    }
}

fn raw_config_json(cfg: &ResolvedConfig, opts: &ExecOptions) -> Value {
    json!({
        "run": crate::config::to_value(&cfg.raw),
        "overrides": opts.overrides,
    })
}

const SWEEP_METRICS: [&str; 6] = [
    "photons_l",
    "photons_r",
    "stable",
    "margin",
    "nu_minus",
    "log_negativity",
];

fn sweep_row(coords: &[f64], r: &ScenarioResult) -> Vec<String> {
    let mut row: Vec<String> = coords.iter().map(|&c| fmt_f64(c)).collect();
    row.push(fmt_f64(r.photons_l));
    row.push(fmt_f64(r.photons_r));
    row.push(r.stable.to_string());
    row.push(fmt_f64(r.stability_margin));
    row.push(fmt_opt(r.nu_minus));
    row.push(fmt_opt(r.log_negativity));
    row
}

fn point(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let result = run_scenario_full(&cfg.scenario)?;
    let record = json!({
        "provenance": provenance(
            "point",
            &raw_config_json(cfg, opts),
            &cfg.scenario,
            &[],
            Value::Null,
        ),
        "result": result_json(&result),
    });
    let mut files = vec![(format!("{}.json", cfg.name), json_bytes(&record))];

    if opts.dump_matrices {
        let ss = solve_steady_state(&cfg.scenario);
        let a = drift_matrix(&cfg.scenario, &ss);
        let d = diffusion_matrix(&cfg.scenario);
        let dump = matrices_json(&a, &d, result.covariance.as_ref());
        files.push((format!("{}_matrices.json", cfg.name), json_bytes(&dump)));
    }

    Ok(Outcome {
        files,
        unstable: !result.stable,
    })
}

fn pair(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let pair = directional_pair(&cfg.scenario)?;
    let record = json!({
        "provenance": provenance(
            "pair",
            &raw_config_json(cfg, opts),
            &cfg.scenario,
            &[],
            Value::Null,
        ),
        "left": result_json(&pair.left),
        "right": result_json(&pair.right),
        "delta_log_negativity": pair.delta_log_negativity(),
    });
    Ok(Outcome {
        files: vec![(format!("{}.json", cfg.name), json_bytes(&record))],
        unstable: false,
    })
}

fn sweep_command(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let table = sweep(&cfg.scenario, &cfg.axes)?;
    let mut columns: Vec<&str> = table.axes.iter().map(|a| a.param.name()).collect();
    columns.extend(SWEEP_METRICS);

    let csv = csv_bytes(
        &columns,
        table.rows.iter().map(|row| sweep_row(&row.coords, &row.result)),
    )?;
    let meta = provenance(
        "sweep",
        &raw_config_json(cfg, opts),
        &cfg.scenario,
        &columns,
        json!({"rows": table.rows.len()}),
    );
    Ok(Outcome {
        files: vec![
            (format!("{}.csv", cfg.name), csv),
            (format!("{}.provenance.json", cfg.name), json_bytes(&meta)),
        ],
        unstable: false,
    })
}

fn revival(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let axis = &cfg.axes[0];
    let baseline = cfg.baseline.as_ref().expect("revival baseline resolved");
    let result = revival_coefficient((&cfg.scenario, axis), (baseline, axis))?;
    let record = json!({
        "provenance": provenance(
            "revival",
            &raw_config_json(cfg, opts),
            &cfg.scenario,
            &[],
            json!({"baseline_scenario": scenario_json(baseline)}),
        ),
        "enhanced_max": result.enhanced_max,
        "baseline_max": result.baseline_max,
        "revival_coefficient": result.ratio,
    });
    Ok(Outcome {
        files: vec![(format!("{}.json", cfg.name), json_bytes(&record))],
        unstable: false,
    })
}

fn reduced_mechanical(sc: &Scenario) -> Result<(ScenarioResult, Option<Matrix4>)> {
    let result = run_scenario_full(sc)?;
    if !result.stable {
        return Ok((result, None));
    }
    let v4 = reduce_cm(
        &result.covariance.unwrap(),
        MECHANICAL_MODES.0,
        MECHANICAL_MODES.1,
    )?;
    Ok((result, Some(v4)))
}

fn projection_files(
    prefix: &str,
    tag: &str,
    v4: &Matrix4,
    pairs: &[(usize, usize)],
    grid: &GridSpec,
) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for &pair in pairs {
        let name = wigner_pair_name(pair);
        let projection = wigner_projection(v4, pair, grid)?;
        let nx = projection.xs.len();
        let mut rows = Vec::with_capacity(nx * projection.ys.len());
        for (iy, &y) in projection.ys.iter().enumerate() {
            for (ix, &x) in projection.xs.iter().enumerate() {
                rows.push(vec![
                    fmt_f64(x),
                    fmt_f64(y),
                    fmt_f64(projection.density[iy * nx + ix]),
                ]);
            }
        }
        let csv = csv_bytes(&["x", "y", "w"], rows)?;
        files.push((format!("{prefix}{tag}_{name}.csv"), csv));

        let sidecar = json!({
            "pair": name,
            "quadrature_indices": [pair.0, pair.1],
            "marginal_cm": [
                [projection.marginal[(0, 0)], projection.marginal[(0, 1)]],
                [projection.marginal[(1, 0)], projection.marginal[(1, 1)]],
            ],
            "ellipse": {
                "semi_major": projection.contour.semi_major,
                "semi_minor": projection.contour.semi_minor,
                "angle_rad": projection.contour.angle,
            },
            "vacuum_radius": projection.vacuum_radius,
        });
        files.push((format!("{prefix}{tag}_{name}.ellipse.json"), json_bytes(&sidecar)));
    }
    Ok(files)
}

fn wigner(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let (result, maybe_v4) = reduced_mechanical(&cfg.scenario)?;
    let record = json!({
        "provenance": provenance(
            "wigner",
            &raw_config_json(cfg, opts),
            &cfg.scenario,
            &["x", "y", "w"],
            json!({"grid_points": cfg.wigner_grid.points,
                   "half_width_sigmas": cfg.wigner_grid.half_width_sigmas}),
        ),
        "result": result_json(&result),
        "reduced_cm": maybe_v4.as_ref().map(matrix4_rows),
    });
    let mut files = vec![(format!("{}_cm.json", cfg.name), json_bytes(&record))];
    let unstable = !result.stable;
    if let Some(v4) = maybe_v4 {
        files.extend(projection_files(
            &cfg.name,
            "",
            &v4,
            &cfg.wigner_pairs,
            &cfg.wigner_grid,
        )?);
    }
    Ok(Outcome { files, unstable })
}

// ---------------------------------------------------------------------------
// figure presets

fn figure(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let name = cfg.raw.figure.as_deref().ok_or_else(|| {
        CliError::config("figure", "figure command needs a preset name")
    })?;
    match name {
        "fig1b" | "fig1c" | "fig1d" => directional_detuning_figure(cfg, opts),
        "fig2a" | "fig2b" | "fig2cd" => chi_family_figure(cfg, opts),
        "fig2e" | "fig2f" => revival_map_figure(cfg, opts),
        "fig3" => quadrature_statistics_figure(cfg, opts),
        other => Err(CliError::config(
            "figure",
            format!("unknown figure `{other}`"),
        )),
    }
}

/// E_N(Δ) for both drive directions: columns (delta_over_wml, EN_left, EN_right).
fn directional_detuning_figure(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let left = sweep(&cfg.scenario.with_direction(Direction::Left), &cfg.axes)?;
    let right = sweep(&cfg.scenario.with_direction(Direction::Right), &cfg.axes)?;

    let columns = ["delta_over_wml", "EN_left", "EN_right"];
    let rows = left.rows.iter().zip(right.rows.iter()).map(|(l, r)| {
        vec![
            fmt_f64(l.coords[0]),
            fmt_opt(l.result.log_negativity),
            fmt_opt(r.result.log_negativity),
        ]
    });
    let csv = csv_bytes(&columns, rows)?;
    let meta = provenance(
        "figure",
        &raw_config_json(cfg, opts),
        &cfg.scenario,
        &columns,
        json!({"rows": left.rows.len()}),
    );
    Ok(Outcome {
        files: vec![
            (format!("{}.csv", cfg.name), csv),
            (format!("{}.provenance.json", cfg.name), json_bytes(&meta)),
        ],
        unstable: false,
    })
}

/// E_N(Δ) per mechanical frequency ratio, both directions:
/// columns (chi, delta_over_wml, EN_left, EN_right).
fn chi_family_figure(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let left = sweep(&cfg.scenario.with_direction(Direction::Left), &cfg.axes)?;
    let right = sweep(&cfg.scenario.with_direction(Direction::Right), &cfg.axes)?;

    let columns = ["chi", "delta_over_wml", "EN_left", "EN_right"];
    let rows = left.rows.iter().zip(right.rows.iter()).map(|(l, r)| {
        vec![
            fmt_f64(l.coords[0]),
            fmt_f64(l.coords[1]),
            fmt_opt(l.result.log_negativity),
            fmt_opt(r.result.log_negativity),
        ]
    });
    let csv = csv_bytes(&columns, rows)?;
    let meta = provenance(
        "figure",
        &raw_config_json(cfg, opts),
        &cfg.scenario,
        &columns,
        json!({"rows": left.rows.len()}),
    );
    Ok(Outcome {
        files: vec![
            (format!("{}.csv", cfg.name), csv),
            (format!("{}.provenance.json", cfg.name), json_bytes(&meta)),
        ],
        unstable: false,
    })
}

/// Revival-coefficient density map over a 2D grid. The denominator is the
/// peak E_N of the static, frequency-matched configuration swept over the
/// standard detuning axis in the same drive direction (the opposite-direction
/// pairing is reported alongside in the provenance).
fn revival_map_figure(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let table = sweep(&cfg.scenario, &cfg.axes)?;

    let mut matched = cfg.scenario;
    matched.spin_left = SpinConfig::stationary();
    matched.spin_right = SpinConfig::stationary();
    matched.right.omega_m = matched.left.omega_m;
    let detuning_axis = SweepAxis::linspace(SweepParam::DetuningRatio, 0.4, 1.4, 401);

    let denominator = |direction: Direction| -> Result<f64> {
        let curve = sweep(&matched.with_direction(direction), std::slice::from_ref(&detuning_axis))?;
        curve
            .max_log_negativity()
            .ok_or(CliError::Core(omcascade::Error::ZeroBaseline { max_en: 0.0 }))
    };
    let denom_same = denominator(cfg.scenario.drive.direction)?;
    let denom_opposite = denominator(cfg.scenario.drive.direction.opposite())?;
    if denom_same <= 1e-12 {
        return Err(CliError::Core(omcascade::Error::ZeroBaseline {
            max_en: denom_same,
        }));
    }

    let mut columns: Vec<&str> = cfg.axes.iter().map(|a| a.param.name()).collect();
    columns.extend(["EN", "eta_rev", "stable"]);
    let rows = table.rows.iter().map(|row| {
        let mut out: Vec<String> = row.coords.iter().map(|&c| fmt_f64(c)).collect();
        out.push(fmt_opt(row.result.log_negativity));
        out.push(fmt_opt(row.result.log_negativity.map(|en| en / denom_same)));
        out.push(row.result.stable.to_string());
        out
    });
    let csv = csv_bytes(&columns, rows)?;
    let max_revival = table.max_log_negativity().unwrap_or(0.0) / denom_same;
    let meta = provenance(
        "figure",
        &raw_config_json(cfg, opts),
        &cfg.scenario,
        &columns,
        json!({
            "denominator_same_direction": denom_same,
            "denominator_opposite_direction": denom_opposite,
            "denominator_axis": {"param": "delta_over_wml", "start": 0.4, "stop": 1.4, "points": 401},
            "max_revival_coefficient": max_revival,
            "rows": table.rows.len(),
        }),
    );
    Ok(Outcome {
        files: vec![
            (format!("{}.csv", cfg.name), csv),
            (format!("{}.provenance.json", cfg.name), json_bytes(&meta)),
        ],
        unstable: false,
    })
}

/// Reduced mechanical covariance matrices for both directions plus all six
/// Wigner projections per direction, with ellipse sidecars.
fn quadrature_statistics_figure(cfg: &ResolvedConfig, opts: &ExecOptions) -> Result<Outcome> {
    let mut files = Vec::new();
    let mut cms = serde_json::Map::new();
    let mut unstable = false;

    for direction in [Direction::Left, Direction::Right] {
        let sc = cfg.scenario.with_direction(direction);
        let (result, maybe_v4) = reduced_mechanical(&sc)?;
        unstable |= !result.stable;
        cms.insert(
            direction.label().to_string(),
            json!({
                "result": result_json(&result),
                "reduced_cm": maybe_v4.as_ref().map(matrix4_rows),
            }),
        );
        if let Some(v4) = maybe_v4 {
            files.extend(projection_files(
                &cfg.name,
                &format!("_{}", direction.label()),
                &v4,
                &cfg.wigner_pairs,
                &cfg.wigner_grid,
            )?);
        }
    }

    let record = json!({
        "provenance": provenance(
            "figure",
            &raw_config_json(cfg, opts),
            &cfg.scenario,
            &["x", "y", "w"],
            json!({"grid_points": cfg.wigner_grid.points,
                   "half_width_sigmas": cfg.wigner_grid.half_width_sigmas}),
        ),
        "directions": Value::Object(cms),
    });
    files.insert(0, (format!("{}_cm.json", cfg.name), json_bytes(&record)));
    Ok(Outcome { files, unstable })
}

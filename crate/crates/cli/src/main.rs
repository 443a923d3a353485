use clap::Parser;
use omcascade_cli::commands::{execute, ExecOptions};
use omcascade_cli::{config, output, presets, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Steady-state simulator for cascaded spinning optomechanical resonators.
///
/// Runs are described by a JSON config (see the repository README for the
/// schema) or by a named figure preset; outputs are CSV tables and JSON
/// records with full provenance.
#[derive(Parser, Debug)]
#[command(name = "omcascade", version, about)]
struct Cli {
    /// Path to a JSON run configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "figure")]
    config: Option<PathBuf>,

    /// Run a named figure preset (see --list-figures).
    #[arg(long, value_name = "NAME")]
    figure: Option<String>,

    /// Override a configuration value, e.g.
    /// --set scenario.drive.direction=right or --set axes.0.points=11.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweep evaluation (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// Also dump the drift, diffusion, and covariance matrices (point runs).
    #[arg(long)]
    dump_matrices: bool,

    /// List the available figure presets and exit.
    #[arg(long)]
    list_figures: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> omcascade_cli::Result<ExitCode> {
    if cli.list_figures {
        for name in presets::PRESET_NAMES {
            println!("{name}");
        }
        return Ok(ExitCode::SUCCESS);
    }

    if let Some(n) = cli.threads {
        // Ignore "already initialized": only possible in-process, not here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let mut tree = load_config_tree(&cli)?;
    for assignment in &cli.set {
        config::apply_override(&mut tree, assignment)?;
    }
    let raw = config::from_value(tree)?;
    let mut resolved = config::resolve(raw)?;

    // Overridden presets are derived configurations and get a derived name.
    if resolved.raw.command == config::CommandKind::Figure
        && !cli.set.is_empty()
        && resolved.raw.output.is_none()
    {
        resolved.name = format!("{}_custom", resolved.name);
    }

    let outcome = execute(
        &resolved,
        &ExecOptions {
            dump_matrices: cli.dump_matrices,
            overrides: cli.set.clone(),
        },
    )?;
    output::write_atomic(&cli.out, &outcome.files)?;
    for (name, _) in &outcome.files {
        println!("wrote {}", cli.out.join(name).display());
    }

    if outcome.unstable {
        eprintln!("unstable dynamics: no steady state at this operating point");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn load_config_tree(cli: &Cli) -> omcascade_cli::Result<serde_json::Value> {
    if let Some(name) = &cli.figure {
        return presets::preset_tree(name);
    }
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::config("<args>", "one of --config or --figure is required")
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    let tree: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config("<config>", format!("invalid JSON: {e}")))?;
    expand_figure_reference(tree)
}

/// A config file may point at a preset: {"command": "figure", "figure": NAME}.
/// Only the output block may accompany it; everything else comes from the
/// preset (use --set for parameter overrides).
fn expand_figure_reference(tree: serde_json::Value) -> omcascade_cli::Result<serde_json::Value> {
    let is_figure = tree
        .get("command")
        .and_then(|c| c.as_str())
        .map(|c| c == "figure")
        .unwrap_or(false);
    if !is_figure {
        return Ok(tree);
    }
    let obj = tree
        .as_object()
        .ok_or_else(|| CliError::config("<config>", "configuration must be a JSON object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "command" | "figure" | "output") {
            return Err(CliError::config(
                key,
                "figure configs take only `command`, `figure` and `output`; \
                 override preset parameters with --set",
            ));
        }
    }
    let name = obj
        .get("figure")
        .and_then(|f| f.as_str())
        .ok_or_else(|| CliError::config("figure", "figure command needs a preset name"))?;
    let mut preset = presets::preset_tree(name)?;
    if let Some(output) = obj.get("output") {
        preset
            .as_object_mut()
            .expect("preset is an object")
            .insert("output".to_string(), output.clone());
    }
    Ok(preset)
}

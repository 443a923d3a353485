//! Run configuration: JSON schema with mandatory per-field units, strict
//! validation, and `--set` overrides.
//!
//! Frequencies and rates always carry a unit annotation. Ordinary-frequency
//! units ("Hz", "kHz", "MHz", "GHz") are converted with a factor 2π;
//! angular units ("rad/s", "krad/s", "Mrad/s", "Grad/s", "MHz_rad" — the
//! latter meaning 10⁶ rad/s) are taken as-is. Detunings additionally accept
//! "omega_m_l", multiples of the left mechanical frequency.

use crate::{CliError, Result};
use omcascade::constants::SPEED_OF_LIGHT;
use omcascade::model::{
    Direction, DriveConfig, Environment, LinkConfig, ResonatorParams, Scenario, SpinConfig,
};
use omcascade::scenario::{SweepAxis, SweepParam};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Dimensioned value with a mandatory unit annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Quantity {
            value,
            unit: unit.to_string(),
        }
    }
}

fn convert(q: &Quantity, path: &str, table: &[(&str, f64)]) -> Result<f64> {
    for (unit, factor) in table {
        if q.unit == *unit {
            return Ok(q.value * factor);
        }
    }
    let known: Vec<&str> = table.iter().map(|(u, _)| *u).collect();
    Err(CliError::config(
        format!("{path}.unit"),
        format!("unknown unit `{}` (expected one of {known:?})", q.unit),
    ))
}

fn angular_rate(q: &Quantity, path: &str) -> Result<f64> {
    convert(
        q,
        path,
        &[
            ("Hz", TAU),
            ("kHz", TAU * 1e3),
            ("MHz", TAU * 1e6),
            ("GHz", TAU * 1e9),
            ("rad/s", 1.0),
            ("krad/s", 1e3),
            ("Mrad/s", 1e6),
            ("MHz_rad", 1e6),
            ("Grad/s", 1e9),
        ],
    )
}

fn length(q: &Quantity, path: &str) -> Result<f64> {
    convert(
        q,
        path,
        &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9)],
    )
}

fn mass(q: &Quantity, path: &str) -> Result<f64> {
    convert(
        q,
        path,
        &[("kg", 1.0), ("g", 1e-3), ("ug", 1e-9), ("ng", 1e-12), ("pg", 1e-15)],
    )
}

fn power(q: &Quantity, path: &str) -> Result<f64> {
    convert(q, path, &[("W", 1.0), ("mW", 1e-3), ("uW", 1e-6)])
}

fn temperature(q: &Quantity, path: &str) -> Result<f64> {
    convert(q, path, &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6)])
}

fn angle(q: &Quantity, path: &str) -> Result<f64> {
    convert(
        q,
        path,
        &[("rad", 1.0), ("deg", std::f64::consts::PI / 180.0)],
    )
}

fn inverse_length(q: &Quantity, path: &str) -> Result<f64> {
    convert(q, path, &[("1/m", 1.0), ("1/nm", 1e9)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    pub refractive_index: f64,
    pub radius: Quantity,
    pub mass: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<Quantity>,
    pub kappa_0: Quantity,
    pub kappa_ex: Quantity,
    pub omega_m: Quantity,
    pub gamma_m: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dn_dlambda: Option<Quantity>,
}

impl ResonatorConfig {
    fn resolve(&self, path: &str) -> Result<ResonatorParams> {
        let omega_c = match (&self.wavelength, &self.omega_c) {
            (Some(lambda), None) => {
                TAU * SPEED_OF_LIGHT / length(lambda, &format!("{path}.wavelength"))?
            }
            (None, Some(freq)) => angular_rate(freq, &format!("{path}.omega_c"))?,
            (Some(lambda), Some(freq)) => {
                let from_lambda =
                    TAU * SPEED_OF_LIGHT / length(lambda, &format!("{path}.wavelength"))?;
                let direct = angular_rate(freq, &format!("{path}.omega_c"))?;
                if (from_lambda - direct).abs() > 1e-12 * direct.abs() {
                    return Err(CliError::config(
                        format!("{path}.omega_c"),
                        format!(
                            "inconsistent with wavelength: 2πc/λ = {from_lambda:e}, \
                             omega_c = {direct:e}"
                        ),
                    ));
                }
                direct
            }
            (None, None) => {
                return Err(CliError::config(
                    format!("{path}.wavelength"),
                    "one of `wavelength` or `omega_c` is required",
                ))
            }
        };
        Ok(ResonatorParams {
            refractive_index: self.refractive_index,
            radius: length(&self.radius, &format!("{path}.radius"))?,
            mass: mass(&self.mass, &format!("{path}.mass"))?,
            omega_c,
            kappa_0: angular_rate(&self.kappa_0, &format!("{path}.kappa_0"))?,
            kappa_ex: angular_rate(&self.kappa_ex, &format!("{path}.kappa_ex"))?,
            omega_m: angular_rate(&self.omega_m, &format!("{path}.omega_m"))?,
            gamma_m: angular_rate(&self.gamma_m, &format!("{path}.gamma_m"))?,
            dn_dlambda: match &self.dn_dlambda {
                Some(q) => inverse_length(q, &format!("{path}.dn_dlambda"))?,
                None => 0.0,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBlock {
    pub rate: Quantity,
    pub orientation: String,
}

impl SpinBlock {
    fn resolve(&self, path: &str) -> Result<SpinConfig> {
        let rate = angular_rate(&self.rate, &format!("{path}.rate"))?;
        let spin = match self.orientation.as_str() {
            "ccw" => SpinConfig::ccw(rate),
            "cw" => SpinConfig::cw(rate),
            "static" => {
                if rate != 0.0 {
                    return Err(CliError::config(
                        format!("{path}.rate"),
                        "static orientation requires zero rate",
                    ));
                }
                SpinConfig::stationary()
            }
            other => {
                return Err(CliError::config(
                    format!("{path}.orientation"),
                    format!("unknown orientation `{other}` (ccw | cw | static)"),
                ))
            }
        };
        if spin.angular_velocity == 0.0 && spin.orientation != omcascade::SpinOrientation::Static {
            return Err(CliError::config(
                format!("{path}.orientation"),
                "zero rate must use orientation `static`",
            ));
        }
        Ok(spin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_length: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub direction: String,
    pub power: Quantity,
    pub detuning: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentBlock {
    pub temperature: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub left: ResonatorConfig,
    pub right: ResonatorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_left: Option<SpinBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_right: Option<SpinBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkBlock>,
    pub drive: DriveBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentBlock>,
}

impl ScenarioConfig {
    pub fn resolve(&self, path: &str) -> Result<Scenario> {
        let left = self.left.resolve(&format!("{path}.left"))?;
        let right = self.right.resolve(&format!("{path}.right"))?;

        let spin_left = match &self.spin_left {
            Some(block) => block.resolve(&format!("{path}.spin_left"))?,
            None => SpinConfig::stationary(),
        };
        let spin_right = match &self.spin_right {
            Some(block) => block.resolve(&format!("{path}.spin_right"))?,
            None => SpinConfig::stationary(),
        };

        let direction = match self.drive.direction.as_str() {
            "left" => Direction::Left,
            "right" => Direction::Right,
            other => {
                return Err(CliError::config(
                    format!("{path}.drive.direction"),
                    format!("unknown direction `{other}` (left | right)"),
                ))
            }
        };
        let power = power(&self.drive.power, &format!("{path}.drive.power"))?;
        let detuning_path = format!("{path}.drive.detuning");
        let detuning = if self.drive.detuning.unit == "omega_m_l" {
            self.drive.detuning.value * left.omega_m
        } else {
            angular_rate(&self.drive.detuning, &detuning_path)?
        };

        // Defaults applied only where the key is absent: φ = 0, η_f = 1.
        let link = match &self.link {
            None => LinkConfig::ideal(),
            Some(block) => {
                let transmission = block.transmission.unwrap_or(1.0);
                if !(0.0..=1.0).contains(&transmission) {
                    return Err(CliError::config(
                        format!("{path}.link.transmission"),
                        format!("must lie in [0, 1], got {transmission}"),
                    ));
                }
                let phase = match (&block.phase, &block.fiber_length) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::config(
                            format!("{path}.link.phase"),
                            "give either `phase` or `fiber_length`, not both",
                        ))
                    }
                    (Some(q), None) => angle(q, &format!("{path}.link.phase"))?,
                    (None, Some(len)) => {
                        let n = block.refractive_index.ok_or_else(|| {
                            CliError::config(
                                format!("{path}.link.refractive_index"),
                                "required alongside `fiber_length`",
                            )
                        })?;
                        let l = length(len, &format!("{path}.link.fiber_length"))?;
                        // phase accumulated at the drive wavelength
                        let first = match direction {
                            Direction::Left => &left,
                            Direction::Right => &right,
                        };
                        let lambda_d = TAU * SPEED_OF_LIGHT / (first.omega_c - detuning);
                        TAU * n * l / lambda_d
                    }
                    (None, None) => 0.0,
                };
                LinkConfig {
                    transmission,
                    phase,
                }
            }
        };

        // Default bath: 100 mK.
        let env = match &self.environment {
            Some(block) => Environment {
                temperature: temperature(
                    &block.temperature,
                    &format!("{path}.environment.temperature"),
                )?,
            },
            None => Environment { temperature: 0.1 },
        };

        let scenario = Scenario {
            left,
            right,
            spin_left,
            spin_right,
            link,
            drive: DriveConfig {
                direction,
                power,
                detuning,
            },
            env,
        };
        scenario.validate().map_err(|e| match e {
            omcascade::Error::InvalidParameter { name, reason } => {
                CliError::config(format!("{path}.{name}"), reason)
            }
            other => CliError::Core(other),
        })?;
        Ok(scenario)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl AxisConfig {
    /// Default resolution: 401 points for a single axis, 101 per axis on
    /// multi-axis grids.
    pub fn resolve(&self, path: &str, n_axes: usize) -> Result<SweepAxis> {
        let param = SweepParam::parse(&self.param).map_err(|_| {
            CliError::config(
                format!("{path}.param"),
                format!("unknown sweep parameter `{}`", self.param),
            )
        })?;
        if let Some(values) = &self.values {
            if self.start.is_some() || self.stop.is_some() || self.points.is_some() {
                return Err(CliError::config(
                    format!("{path}.values"),
                    "give either explicit `values` or a start/stop range, not both",
                ));
            }
            if values.is_empty() {
                return Err(CliError::config(
                    format!("{path}.values"),
                    "axis needs at least one value",
                ));
            }
            return Ok(SweepAxis::new(param, values.clone()));
        }
        let (start, stop) = match (self.start, self.stop) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(CliError::config(
                    format!("{path}.start"),
                    "axis needs `start` and `stop` (or explicit `values`)",
                ))
            }
        };
        let points = self
            .points
            .unwrap_or(if n_axes <= 1 { 401 } else { 101 });
        if points == 0 {
            return Err(CliError::config(
                format!("{path}.points"),
                "needs at least one point",
            ));
        }
        Ok(SweepAxis::linspace(param, start, stop, points))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Point,
    Pair,
    Sweep,
    Revival,
    Wigner,
    Figure,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Point => "point",
            CommandKind::Pair => "pair",
            CommandKind::Sweep => "sweep",
            CommandKind::Revival => "revival",
            CommandKind::Wigner => "wigner",
            CommandKind::Figure => "figure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width_sigmas: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisConfig>,
    /// Explicit revival baseline; defaults to the static, frequency-matched
    /// version of `scenario`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

/// Everything a command needs, resolved to SI/rad-s core types.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub name: String,
    pub scenario: Scenario,
    pub axes: Vec<SweepAxis>,
    pub baseline: Option<Scenario>,
    pub wigner_pairs: Vec<(usize, usize)>,
    pub wigner_grid: omcascade::gaussian::GridSpec,
}

pub const WIGNER_PAIR_NAMES: [(&str, (usize, usize)); 6] = [
    ("ql_pl", (0, 1)),
    ("ql_qr", (0, 2)),
    ("ql_pr", (0, 3)),
    ("pl_qr", (1, 2)),
    ("pl_pr", (1, 3)),
    ("qr_pr", (2, 3)),
];

pub fn wigner_pair_name(pair: (usize, usize)) -> &'static str {
    WIGNER_PAIR_NAMES
        .iter()
        .find(|(_, p)| *p == pair)
        .map(|(n, _)| *n)
        .unwrap_or("pair")
}

/// Parse config text into the raw schema (strict: unknown keys rejected).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::config("<config>", format!("invalid JSON: {e}")))?;
    from_value(value)
}

pub fn from_value(value: serde_json::Value) -> Result<RunConfig> {
    serde_json::from_value(value)
        .map_err(|e| CliError::config("<config>", format!("invalid configuration: {e}")))
}

pub fn to_value(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("RunConfig serializes")
}

/// Apply one `--set path.to.key=value` override onto the raw JSON tree.
/// The value is parsed as JSON when possible, else taken as a string.
pub fn apply_override(tree: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw_value) = assignment.split_once('=').ok_or_else(|| {
        CliError::config("--set", format!("`{assignment}` is not of the form key=value"))
    })?;
    let parsed: serde_json::Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));

    let mut node = tree;
    let segments: Vec<&str> = path.split('.').collect();
    for (k, segment) in segments.iter().enumerate() {
        let last = k + 1 == segments.len();
        if let Ok(index) = segment.parse::<usize>() {
            let arr = node.as_array_mut().ok_or_else(|| {
                CliError::config(path, format!("`{segment}` indexes a non-array"))
            })?;
            if index >= arr.len() {
                return Err(CliError::config(
                    path,
                    format!("index {index} out of bounds (len {})", arr.len()),
                ));
            }
            if last {
                arr[index] = parsed;
                return Ok(());
            }
            node = &mut arr[index];
        } else {
            let obj = node.as_object_mut().ok_or_else(|| {
                CliError::config(path, format!("`{segment}` indexes a non-object"))
            })?;
            if last {
                obj.insert(segment.to_string(), parsed);
                return Ok(());
            }
            node = obj
                .entry(segment.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
        }
    }
    Ok(())
}

/// Resolve the raw config into core types.
pub fn resolve(raw: RunConfig) -> Result<ResolvedConfig> {
    let scenario_cfg = raw.scenario.as_ref().ok_or_else(|| {
        CliError::config("scenario", "required for this command")
    })?;
    let scenario = scenario_cfg.resolve("scenario")?;

    let axes = raw
        .axes
        .iter()
        .enumerate()
        .map(|(k, axis)| axis.resolve(&format!("axes.{k}"), raw.axes.len()))
        .collect::<Result<Vec<_>>>()?;

    match raw.command {
        CommandKind::Sweep if axes.is_empty() => {
            return Err(CliError::config("axes", "sweep needs at least one axis"))
        }
        CommandKind::Sweep if axes.len() > 2 => {
            return Err(CliError::config("axes", "sweep supports 1 or 2 axes"))
        }
        CommandKind::Revival if axes.len() != 1 => {
            return Err(CliError::config(
                "axes",
                "revival needs exactly one shared detuning axis",
            ))
        }
        _ => {}
    }

    let baseline = match (&raw.baseline, raw.command) {
        (Some(cfg), _) => Some(cfg.resolve("baseline")?),
        (None, CommandKind::Revival) => {
            // Default baseline: same scenario, static and frequency-matched.
            let mut base = scenario;
            base.spin_left = SpinConfig::stationary();
            base.spin_right = SpinConfig::stationary();
            base.right.omega_m = base.left.omega_m;
            Some(base)
        }
        (None, _) => None,
    };

    let (wigner_pairs, wigner_grid) = resolve_wigner(raw.wigner.as_ref())?;

    let name = raw
        .output
        .as_ref()
        .and_then(|o| o.prefix.clone())
        .or_else(|| raw.name.clone())
        .unwrap_or_else(|| raw.command.name().to_string());

    Ok(ResolvedConfig {
        raw,
        name,
        scenario,
        axes,
        baseline,
        wigner_pairs,
        wigner_grid,
    })
}

fn resolve_wigner(
    block: Option<&WignerBlock>,
) -> Result<(Vec<(usize, usize)>, omcascade::gaussian::GridSpec)> {
    let mut grid = omcascade::gaussian::GridSpec::default();
    let mut pairs: Vec<(usize, usize)> = WIGNER_PAIR_NAMES.iter().map(|(_, p)| *p).collect();
    if let Some(block) = block {
        if let Some(points) = block.points {
            if points < 2 {
                return Err(CliError::config("wigner.points", "needs at least 2 points"));
            }
            grid.points = points;
        }
        if let Some(hw) = block.half_width_sigmas {
            if !(hw.is_finite() && hw > 0.0) {
                return Err(CliError::config(
                    "wigner.half_width_sigmas",
                    "must be finite and positive",
                ));
            }
            grid.half_width_sigmas = hw;
        }
        if let Some(names) = &block.pairs {
            pairs = names
                .iter()
                .map(|name| {
                    WIGNER_PAIR_NAMES
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, p)| *p)
                        .ok_or_else(|| {
                            CliError::config(
                                "wigner.pairs",
                                format!(
                                    "unknown pair `{name}` (expected one of {:?})",
                                    WIGNER_PAIR_NAMES.iter().map(|(n, _)| *n).collect::<Vec<_>>()
                                ),
                            )
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            if pairs.is_empty() {
                return Err(CliError::config("wigner.pairs", "needs at least one pair"));
            }
        }
    }
    Ok((pairs, grid))
}

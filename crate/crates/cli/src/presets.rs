//! Named figure presets: frozen parameter sets for the reference plots.
//!
//! All presets share one resonator platform (n = 1.48, m = 15 ng,
//! R = 36 µm, λ = 780 nm, κ₀/2π = 15 MHz, ω_m/2π = 88.54 MHz,
//! γ_m/2π = 2.2 kHz, κ_ex,l/2π = 27 MHz, κ_ex,r/2π = 30 MHz, P = 20 mW,
//! T = 100 mK, φ = 0, η_f = 1) and differ in spin rates, drive direction,
//! detuning, and mechanical frequency ratio.

use crate::config::{
    AxisConfig, CommandKind, DriveBlock, Quantity, ResonatorConfig, RunConfig, ScenarioConfig,
    SpinBlock,
};
use crate::{CliError, Result};

pub const PRESET_NAMES: [&str; 9] = [
    "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2cd", "fig2e", "fig2f", "fig3",
];

fn resonator(kappa_ex_mhz: f64, omega_m_mhz: f64) -> ResonatorConfig {
    ResonatorConfig {
        refractive_index: 1.48,
        radius: Quantity::new(36.0, "um"),
        mass: Quantity::new(15.0, "ng"),
        wavelength: Some(Quantity::new(780.0, "nm")),
        omega_c: None,
        kappa_0: Quantity::new(15.0, "MHz"),
        kappa_ex: Quantity::new(kappa_ex_mhz, "MHz"),
        omega_m: Quantity::new(omega_m_mhz, "MHz"),
        gamma_m: Quantity::new(2.2, "kHz"),
        dn_dlambda: None,
    }
}

fn spin(rate_mrad_s: f64) -> Option<SpinBlock> {
    if rate_mrad_s == 0.0 {
        None
    } else {
        Some(SpinBlock {
            rate: Quantity::new(rate_mrad_s, "MHz_rad"),
            orientation: "ccw".to_string(),
        })
    }
}

fn scenario(
    direction: &str,
    detuning_over_wml: f64,
    chi: f64,
    spin_left: f64,
    spin_right: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        left: resonator(27.0, 88.54),
        right: resonator(30.0, 88.54 * chi),
        spin_left: spin(spin_left),
        spin_right: spin(spin_right),
        link: None,
        drive: DriveBlock {
            direction: direction.to_string(),
            power: Quantity::new(20.0, "mW"),
            detuning: Quantity::new(detuning_over_wml, "omega_m_l"),
        },
        environment: None,
    }
}

fn detuning_axis() -> AxisConfig {
    AxisConfig {
        param: "delta_over_wml".into(),
        start: Some(0.4),
        stop: Some(1.4),
        points: Some(401),
        values: None,
    }
}

fn chi_axis(values: &[f64]) -> AxisConfig {
    AxisConfig {
        param: "chi".into(),
        start: None,
        stop: None,
        points: None,
        values: Some(values.to_vec()),
    }
}

fn spin_axis(param: &str) -> AxisConfig {
    AxisConfig {
        param: param.into(),
        start: Some(0.0),
        stop: Some(1.0e6),
        points: Some(101),
        values: None,
    }
}

/// Build a preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let (scenario, axes) = match name {
        // detuning sweeps of the identical-mechanics platform
        "fig1b" => (scenario("left", 1.0, 1.0, 0.0, 0.0), vec![detuning_axis()]),
        "fig1c" => (scenario("left", 1.0, 1.0, 0.6, 0.0), vec![detuning_axis()]),
        "fig1d" => (scenario("left", 1.0, 1.0, 0.6, 0.6), vec![detuning_axis()]),
        // frequency-mismatch families
        "fig2a" => (
            scenario("left", 1.0, 1.0, 0.0, 0.0),
            vec![chi_axis(&[1.0, 0.97, 0.95]), detuning_axis()],
        ),
        "fig2b" => (
            scenario("left", 1.0, 1.0, 0.8, 0.8),
            vec![chi_axis(&[0.97, 0.95]), detuning_axis()],
        ),
        "fig2cd" => (
            scenario("left", 1.0, 1.0, 0.8, 0.0),
            vec![chi_axis(&[0.97, 0.95]), detuning_axis()],
        ),
        // revival density maps
        "fig2e" => (
            scenario("right", 1.0, 1.0, 0.0, 0.0),
            vec![
                AxisConfig {
                    param: "chi".into(),
                    start: Some(0.90),
                    stop: Some(1.0),
                    points: Some(101),
                    values: None,
                },
                spin_axis("omega_l"),
            ],
        ),
        "fig2f" => (
            scenario("left", 0.68, 0.97, 0.0, 0.0),
            vec![spin_axis("omega_l"), spin_axis("omega_r")],
        ),
        // quadrature statistics at the entangled operating point
        "fig3" => (scenario("left", 0.68, 0.95, 0.8, 0.0), vec![]),
        other => {
            return Err(CliError::config(
                "figure",
                format!("unknown figure `{other}` (available: {PRESET_NAMES:?})"),
            ))
        }
    };
    Ok(RunConfig {
        command: CommandKind::Figure,
        figure: Some(name.to_string()),
        name: Some(name.to_string()),
        scenario: Some(scenario),
        axes,
        baseline: None,
        wigner: None,
        output: None,
    })
}

/// Preset as a JSON tree ready for `--set` overrides.
pub fn preset_tree(name: &str) -> Result<serde_json::Value> {
    Ok(crate::config::to_value(&preset(name)?))
}

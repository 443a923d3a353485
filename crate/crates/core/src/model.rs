//! Physical parameters, unit conventions, and closed-form derived quantities.
//!
//! Everything here is strict SI with angular frequencies in rad/s. Ordinary
//! frequencies (Hz) must be converted by the caller before they reach these
//! types; the CLI layer does that from per-field unit annotations.

use crate::constants::{HBAR, K_BOLTZMANN, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Optical and mechanical constants of one whispering-gallery resonator.
///
/// The optical mode is stored as an angular frequency `omega_c`; the vacuum
/// wavelength is derived as λ = 2πc/ω_c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorParams {
    /// Refractive index (dimensionless, > 1).
    pub refractive_index: f64,
    /// Rim radius (m).
    pub radius: f64,
    /// Effective mass of the mechanical breathing mode (kg).
    pub mass: f64,
    /// Optical resonance frequency (rad/s).
    pub omega_c: f64,
    /// Intrinsic optical decay rate (rad/s).
    pub kappa_0: f64,
    /// Fiber-resonator external coupling rate (rad/s).
    pub kappa_ex: f64,
    /// Mechanical resonance frequency (rad/s).
    pub omega_m: f64,
    /// Mechanical damping rate (rad/s).
    pub gamma_m: f64,
    /// Material dispersion dn/dλ (1/m); zero for dispersionless media.
    pub dn_dlambda: f64,
}

impl ResonatorParams {
    /// Same parameter set, with the optical mode given by its vacuum
    /// wavelength (m) instead of ω_c.
    #[allow(clippy::too_many_arguments)]
    pub fn from_wavelength(
        refractive_index: f64,
        radius: f64,
        mass: f64,
        wavelength: f64,
        kappa_0: f64,
        kappa_ex: f64,
        omega_m: f64,
        gamma_m: f64,
    ) -> Self {
        ResonatorParams {
            refractive_index,
            radius,
            mass,
            omega_c: TAU * SPEED_OF_LIGHT / wavelength,
            kappa_0,
            kappa_ex,
            omega_m,
            gamma_m,
            dn_dlambda: 0.0,
        }
    }

    /// Vacuum wavelength λ = 2πc/ω_c (m).
    pub fn wavelength(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / self.omega_c
    }

    /// Total optical linewidth Γ = κ₀ + κ_ex (rad/s).
    pub fn total_decay(&self) -> f64 {
        self.kappa_0 + self.kappa_ex
    }

    /// Single-photon optomechanical coupling g₀ = (ω_c/R)·√(ħ/(m·ω_m)) (rad/s).
    pub fn single_photon_coupling(&self) -> f64 {
        (self.omega_c / self.radius) * (HBAR / (self.mass * self.omega_m)).sqrt()
    }

    pub fn validate(&self, label: &str) -> Result<()> {
        let positive = [
            ("radius", self.radius),
            ("mass", self.mass),
            ("omega_c", self.omega_c),
            ("kappa_0", self.kappa_0),
            ("kappa_ex", self.kappa_ex),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    format!("{label}.{name}"),
                    format!("must be finite and strictly positive, got {value}"),
                ));
            }
        }
        if !(self.refractive_index.is_finite() && self.refractive_index > 1.0) {
            return Err(Error::invalid(
                format!("{label}.refractive_index"),
                format!("must be > 1, got {}", self.refractive_index),
            ));
        }
        if !self.dn_dlambda.is_finite() {
            return Err(Error::invalid(
                format!("{label}.dn_dlambda"),
                "must be finite",
            ));
        }
        Ok(())
    }
}

/// Sense of rotation of a spinning resonator, viewed from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOrientation {
    Ccw,
    Cw,
    Static,
}

/// Rotation state of one resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinConfig {
    /// Rotation rate |Ω| (rad/s, ≥ 0).
    pub angular_velocity: f64,
    pub orientation: SpinOrientation,
}

impl SpinConfig {
    pub fn stationary() -> Self {
        SpinConfig {
            angular_velocity: 0.0,
            orientation: SpinOrientation::Static,
        }
    }

    pub fn ccw(angular_velocity: f64) -> Self {
        SpinConfig {
            angular_velocity,
            orientation: SpinOrientation::Ccw,
        }
    }

    pub fn cw(angular_velocity: f64) -> Self {
        SpinConfig {
            angular_velocity,
            orientation: SpinOrientation::Cw,
        }
    }

    /// Signed convention used by sweep axes: positive = CCW, negative = CW,
    /// zero = static.
    pub fn from_signed(omega: f64) -> Self {
        if omega > 0.0 {
            SpinConfig::ccw(omega)
        } else if omega < 0.0 {
            SpinConfig::cw(-omega)
        } else {
            SpinConfig::stationary()
        }
    }

    pub fn validate(&self, label: &str) -> Result<()> {
        if !(self.angular_velocity.is_finite() && self.angular_velocity >= 0.0) {
            return Err(Error::invalid(
                format!("{label}.angular_velocity"),
                format!("must be finite and >= 0, got {}", self.angular_velocity),
            ));
        }
        let is_static = self.orientation == SpinOrientation::Static;
        if is_static != (self.angular_velocity == 0.0) {
            return Err(Error::invalid(
                format!("{label}.orientation"),
                "orientation must be `static` exactly when the angular velocity is zero",
            ));
        }
        Ok(())
    }
}

/// Unidirectional fiber link between the two resonators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    /// Power transmission η_f ∈ [0, 1].
    pub transmission: f64,
    /// Propagation phase φ accumulated between the coupling regions (rad).
    pub phase: f64,
}

impl LinkConfig {
    /// Lossless link with no phase delay.
    pub fn ideal() -> Self {
        LinkConfig {
            transmission: 1.0,
            phase: 0.0,
        }
    }

    /// Phase from the fiber geometry: φ = 2π·n·L/λ.
    pub fn from_fiber_length(
        transmission: f64,
        refractive_index: f64,
        length: f64,
        wavelength: f64,
    ) -> Self {
        LinkConfig {
            transmission,
            phase: TAU * refractive_index * length / wavelength,
        }
    }

    pub fn validate(&self, label: &str) -> Result<()> {
        if !(self.transmission.is_finite() && (0.0..=1.0).contains(&self.transmission)) {
            return Err(Error::invalid(
                format!("{label}.transmission"),
                format!("must lie in [0, 1], got {}", self.transmission),
            ));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid(format!("{label}.phase"), "must be finite"));
        }
        Ok(())
    }
}

/// Which end of the fiber the drive enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

/// Single-tone laser drive.
///
/// Both resonators share the same nominal detuning Δ; per-resonator Sagnac
/// shifts are applied on top of it (see [`Scenario::effective_detunings`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub direction: Direction,
    /// Input laser power (W, ≥ 0).
    pub power: f64,
    /// Detuning Δ = ω_c − ω_d of the driven resonance (rad/s).
    pub detuning: f64,
}

impl DriveConfig {
    pub fn validate(&self, label: &str) -> Result<()> {
        if !(self.power.is_finite() && self.power >= 0.0) {
            return Err(Error::invalid(
                format!("{label}.power"),
                format!("must be finite and >= 0, got {}", self.power),
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid(
                format!("{label}.detuning"),
                "must be finite",
            ));
        }
        Ok(())
    }
}

/// Mechanical bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    /// Bath temperature (K, ≥ 0). Optical baths are taken at T = 0.
    pub temperature: f64,
}

impl Environment {
    pub fn validate(&self, label: &str) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid(
                format!("{label}.temperature"),
                format!("must be finite and >= 0, got {}", self.temperature),
            ));
        }
        Ok(())
    }
}

/// One complete experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub left: ResonatorParams,
    pub right: ResonatorParams,
    pub spin_left: SpinConfig,
    pub spin_right: SpinConfig,
    pub link: LinkConfig,
    pub drive: DriveConfig,
    pub env: Environment,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.left.validate("left")?;
        self.right.validate("right")?;
        self.spin_left.validate("spin_left")?;
        self.spin_right.validate("spin_right")?;
        self.link.validate("link")?;
        self.drive.validate("drive")?;
        self.env.validate("env")?;
        Ok(())
    }

    pub fn resonator(&self, side: Direction) -> &ResonatorParams {
        match side {
            Direction::Left => &self.left,
            Direction::Right => &self.right,
        }
    }

    pub fn spin(&self, side: Direction) -> &SpinConfig {
        match side {
            Direction::Left => &self.spin_left,
            Direction::Right => &self.spin_right,
        }
    }

    /// The resonator the drive addresses first (cascade order).
    pub fn first(&self) -> Direction {
        self.drive.direction
    }

    /// Drive laser frequency ω_d = ω_c(first) − Δ (rad/s).
    pub fn drive_frequency(&self) -> f64 {
        self.resonator(self.first()).omega_c - self.drive.detuning
    }

    /// Drive field amplitude |ε_d| = √(P/ħω_d) (√(1/s)), real and positive
    /// by convention.
    pub fn drive_amplitude(&self) -> f64 {
        drive_amplitude(self.drive.power, self.drive_frequency())
    }

    /// Effective detunings (Δ̃_l, Δ̃_r) including the signed Sagnac shifts
    /// for the configured input direction.
    ///
    /// The radiation-pressure detuning correction is neglected here; see
    /// [`crate::steady_state::solve_with_detuning_feedback`] for the
    /// self-consistent variant.
    pub fn effective_detunings(&self) -> (f64, f64) {
        let d = self.drive.detuning;
        (
            d + sagnac_shift(&self.left, &self.spin_left, self.drive.direction),
            d + sagnac_shift(&self.right, &self.spin_right, self.drive.direction),
        )
    }

    /// Thermal phonon occupations (n̄_l, n̄_r) of the two mechanical baths.
    pub fn thermal_occupancies(&self) -> (f64, f64) {
        (
            thermal_occupancy(self.left.omega_m, self.env.temperature),
            thermal_occupancy(self.right.omega_m, self.env.temperature),
        )
    }

    /// Same scenario, driven from the other end.
    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.drive.direction = direction;
        self
    }
}

fn sagnac_sign(orientation: SpinOrientation, direction: Direction) -> f64 {
    match (orientation, direction) {
        (SpinOrientation::Static, _) => 0.0,
        (SpinOrientation::Ccw, Direction::Left) | (SpinOrientation::Cw, Direction::Right) => 1.0,
        (SpinOrientation::Ccw, Direction::Right) | (SpinOrientation::Cw, Direction::Left) => -1.0,
    }
}

/// Signed Sagnac (Fizeau) frequency shift of the driven optical mode (rad/s).
///
/// Δ_F = σ·Ω·(nRω_c/c)·(1 − 1/n² − (λ/n)·dn/dλ), with σ = +1 when the spin
/// raises the resonance seen by light entering from `direction` (CCW spin
/// with left input, CW spin with right input) and σ = −1 for the other two
/// combinations. Static resonators shift by exactly zero.
pub fn sagnac_shift(res: &ResonatorParams, spin: &SpinConfig, direction: Direction) -> f64 {
    let sigma = sagnac_sign(spin.orientation, direction);
    if sigma == 0.0 {
        return 0.0;
    }
    let n = res.refractive_index;
    let dispersion = 1.0 - 1.0 / (n * n) - (res.wavelength() / n) * res.dn_dlambda;
    sigma * spin.angular_velocity * n * res.radius * res.omega_c / SPEED_OF_LIGHT * dispersion
}

/// Single-photon optomechanical coupling strength g₀ (rad/s).
pub fn single_photon_coupling(res: &ResonatorParams) -> f64 {
    res.single_photon_coupling()
}

/// Drive field amplitude |ε_d| = √(P/ħω_d) (√(1/s)).
pub fn drive_amplitude(power: f64, drive_frequency: f64) -> f64 {
    (power / (HBAR * drive_frequency)).sqrt()
}

/// Bose-Einstein thermal occupation n̄ = 1/(exp(ħω_m/k_BT) − 1).
///
/// The T = 0 limit is handled explicitly and returns 0.
pub fn thermal_occupancy(omega_m: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_m / (K_BOLTZMANN * temperature);
    1.0 / x.exp_m1()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Resonator with the baseline constants used throughout the test suite:
    /// n = 1.48, R = 36 µm, m = 15 ng, λ = 780 nm, κ₀/2π = 15 MHz,
    /// ω_m/2π = 88.54 MHz, γ_m/2π = 2.2 kHz.
    pub(crate) fn baseline_resonator(kappa_ex_over_2pi_mhz: f64) -> ResonatorParams {
        ResonatorParams::from_wavelength(
            1.48,
            36e-6,
            15e-12,
            780e-9,
            TAU * 15e6,
            TAU * kappa_ex_over_2pi_mhz * 1e6,
            TAU * 88.54e6,
            TAU * 2.2e3,
        )
    }

    fn spinning_left(omega: f64) -> (ResonatorParams, SpinConfig) {
        (baseline_resonator(27.0), SpinConfig::ccw(omega))
    }

    #[test]
    fn wavelength_round_trips() {
        let res = baseline_resonator(27.0);
        assert_relative_eq!(res.wavelength(), 780e-9, max_relative = 1e-12);
        assert_relative_eq!(
            TAU * SPEED_OF_LIGHT / res.wavelength(),
            res.omega_c,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sagnac_static_resonator_is_zero() {
        let res = baseline_resonator(27.0);
        let spin = SpinConfig::stationary();
        assert_eq!(sagnac_shift(&res, &spin, Direction::Left), 0.0);
        assert_eq!(sagnac_shift(&res, &spin, Direction::Right), 0.0);
    }

    #[test]
    fn sagnac_matches_high_precision_value() {
        // Independent 30-digit evaluation of the closed form at
        // Ω = 0.6e6 rad/s, CCW, left input.
        let (res, spin) = spinning_left(0.6e6);
        let shift = sagnac_shift(&res, &spin, Direction::Left);
        assert_relative_eq!(shift, 1.399_491_353_575_867e8, max_relative = 1e-12);
        // and at Ω = 0.8e6 rad/s
        let spin8 = SpinConfig::ccw(0.8e6);
        assert_relative_eq!(
            sagnac_shift(&res, &spin8, Direction::Left),
            1.865_988_471_434_49e8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sagnac_sign_table() {
        let res = baseline_resonator(27.0);
        let ccw = SpinConfig::ccw(0.6e6);
        let cw = SpinConfig::cw(0.6e6);
        assert!(sagnac_shift(&res, &ccw, Direction::Left) > 0.0);
        assert!(sagnac_shift(&res, &ccw, Direction::Right) < 0.0);
        assert!(sagnac_shift(&res, &cw, Direction::Left) < 0.0);
        assert!(sagnac_shift(&res, &cw, Direction::Right) > 0.0);
    }

    #[test]
    fn sagnac_dispersion_correction_factor() {
        let mut res = baseline_resonator(27.0);
        let spin = SpinConfig::ccw(0.6e6);
        let plain = sagnac_shift(&res, &spin, Direction::Left);
        // dn/dλ = 0.01·n/λ turns the bracket into (1 − 1/n² − 0.01).
        res.dn_dlambda = 0.01 * res.refractive_index / res.wavelength();
        let corrected = sagnac_shift(&res, &spin, Direction::Left);
        let n2 = res.refractive_index * res.refractive_index;
        let expected_factor = (1.0 - 1.0 / n2 - 0.01) / (1.0 - 1.0 / n2);
        assert_relative_eq!(corrected / plain, expected_factor, max_relative = 1e-12);
    }

    #[test]
    fn single_photon_coupling_matches_high_precision_value() {
        let res = baseline_resonator(27.0);
        assert_relative_eq!(
            res.single_photon_coupling(),
            7.541_126_494_841_392e3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_photon_coupling_scalings() {
        let res = baseline_resonator(27.0);
        let g0 = res.single_photon_coupling();
        let mut heavy = res;
        heavy.mass *= 4.0;
        assert_relative_eq!(heavy.single_photon_coupling(), g0 / 2.0, max_relative = 1e-12);
        let mut wide = res;
        wide.radius *= 2.0; // ω_c held fixed
        assert_relative_eq!(wide.single_photon_coupling(), g0 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn drive_amplitude_values() {
        assert_eq!(drive_amplitude(0.0, 1e15), 0.0);
        // 20 mW at ω_d = ω_c(780 nm) − ω_m
        let res = baseline_resonator(27.0);
        let omega_d = res.omega_c - res.omega_m;
        assert_relative_eq!(
            drive_amplitude(0.02, omega_d),
            2.802_360_372_841_703e8,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            drive_amplitude(0.08, omega_d),
            2.0 * drive_amplitude(0.02, omega_d),
            max_relative = 1e-12
        );
    }

    #[test]
    fn thermal_occupancy_values() {
        let omega_m = TAU * 88.54e6;
        assert_eq!(thermal_occupancy(omega_m, 0.0), 0.0);
        assert_relative_eq!(
            thermal_occupancy(omega_m, 0.1),
            23.037_106_708_722_667,
            max_relative = 1e-12
        );
    }

    #[test]
    fn thermal_occupancy_classical_limit() {
        // k_B T >= 100 ħω_m puts the Bose factor within 1% of k_BT/ħω_m.
        let omega_m = TAU * 88.54e6;
        let t = 150.0 * HBAR * omega_m / K_BOLTZMANN;
        let classical = K_BOLTZMANN * t / (HBAR * omega_m);
        let exact = thermal_occupancy(omega_m, t);
        assert!((exact - classical).abs() / classical < 0.01);
    }

    #[test]
    fn effective_detunings_static_and_spinning() {
        let sc = baseline_scenario();
        let (dl, dr) = sc.effective_detunings();
        assert_eq!(dl, sc.drive.detuning);
        assert_eq!(dr, sc.drive.detuning);

        // Spinning the left resonator at 0.6e6 rad/s CCW restores resonance
        // from Δ/ω_m = 0.75 (left input).
        let mut spun = sc;
        spun.spin_left = SpinConfig::ccw(0.6e6);
        spun.drive.detuning = 0.75 * spun.left.omega_m;
        let (dl, _) = spun.effective_detunings();
        assert_abs_diff_eq!(dl / spun.left.omega_m, 1.0, epsilon = 2e-3);

        // Flipping the input direction moves each detuning by 2|Δ_F|.
        let flipped = spun.with_direction(Direction::Right);
        let (dl_f, _) = flipped.effective_detunings();
        let shift = sagnac_shift(&spun.left, &spun.spin_left, Direction::Left);
        assert_relative_eq!(dl - dl_f, 2.0 * shift, max_relative = 1e-12);
    }

    pub(crate) fn baseline_scenario() -> Scenario {
        let left = baseline_resonator(27.0);
        let right = baseline_resonator(30.0);
        Scenario {
            left,
            right,
            spin_left: SpinConfig::stationary(),
            spin_right: SpinConfig::stationary(),
            link: LinkConfig::ideal(),
            drive: DriveConfig {
                direction: Direction::Left,
                power: 0.02,
                detuning: left.omega_m,
            },
            env: Environment { temperature: 0.1 },
        }
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut sc = baseline_scenario();
        sc.link.transmission = 1.2;
        let err = sc.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref name, .. } if name == "link.transmission"));

        let mut sc = baseline_scenario();
        sc.left.refractive_index = 0.9;
        assert!(sc.validate().is_err());

        let mut sc = baseline_scenario();
        sc.spin_left = SpinConfig {
            angular_velocity: 0.0,
            orientation: SpinOrientation::Ccw,
        };
        assert!(sc.validate().is_err());
    }

    #[test]
    fn fiber_length_phase() {
        let link = LinkConfig::from_fiber_length(1.0, 1.45, 1e-2, 780e-9);
        assert_relative_eq!(link.phase, TAU * 1.45 * 1e-2 / 780e-9, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn sagnac_antisymmetric_and_linear(
            omega in 0.0f64..5e6,
            kex in 10.0f64..60.0,
            ccw in any::<bool>(),
        ) {
            let res = baseline_resonator(kex);
            let spin = if ccw { SpinConfig::from_signed(omega) } else { SpinConfig::from_signed(-omega) };
            let fwd = sagnac_shift(&res, &spin, Direction::Left);
            let bwd = sagnac_shift(&res, &spin, Direction::Right);
            prop_assert_eq!(fwd, -bwd);

            let doubled = SpinConfig { angular_velocity: 2.0 * spin.angular_velocity, ..spin };
            let doubled = if doubled.angular_velocity == 0.0 { SpinConfig::stationary() } else { doubled };
            prop_assert_eq!(sagnac_shift(&res, &doubled, Direction::Left), 2.0 * fwd);
        }

        #[test]
        fn drive_amplitude_sqrt_power(p in 0.0f64..1.0) {
            let omega_d = TAU * SPEED_OF_LIGHT / 780e-9;
            let e1 = drive_amplitude(p, omega_d);
            let e4 = drive_amplitude(4.0 * p, omega_d);
            prop_assert!((e4 - 2.0 * e1).abs() <= 1e-12 * e4.max(1.0));
        }

        #[test]
        fn thermal_occupancy_nonnegative_monotone(t in 0.0f64..300.0) {
            let omega_m = TAU * 88.54e6;
            let n = thermal_occupancy(omega_m, t);
            prop_assert!(n >= 0.0);
            prop_assert!(thermal_occupancy(omega_m, t + 1.0) >= n);
        }
    }
}

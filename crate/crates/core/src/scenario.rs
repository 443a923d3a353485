//! End-to-end evaluation: scenario → steady state → linear system →
//! covariance → entanglement, plus directional comparisons, parameter
//! sweeps, and the revival coefficient.
//!
//! Every grid point is an independent pure computation. With the `parallel`
//! feature (default) sweeps fan out over rayon and merge in index order, so
//! results are bit-identical to the sequential fallback.

use crate::dynamics::{self, Matrix8};
use crate::error::{Error, Result};
use crate::gaussian::{self, SteadyStateCovariance};
use crate::model::{Direction, Scenario, SpinConfig};
use crate::steady_state::{solve_steady_state, SteadyState};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Outcome of one full pipeline evaluation.
///
/// Unstable scenarios are valid results: they carry the margin and an
/// explicit flag, and no entanglement numbers (never silent zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    /// Intracavity photon numbers.
    pub photons_l: f64,
    pub photons_r: f64,
    /// max Re eig(A) (rad/s); stable iff negative.
    pub stability_margin: f64,
    pub stable: bool,
    /// Relative Lyapunov residual (stable scenarios only).
    pub residual: Option<f64>,
    /// Stability margin uncomfortably close to zero.
    pub ill_conditioned: bool,
    /// Whether the full covariance matrix satisfies the Heisenberg bound.
    /// This model's cascade drops the link's noise correlations, so the
    /// flag is typically false whenever the link actually does something.
    pub physical: bool,
    /// Mechanical-mechanical bipartition measures (stable scenarios only).
    pub nu_minus: Option<f64>,
    pub log_negativity: Option<f64>,
    /// Full 8×8 covariance matrix, kept only when requested.
    pub covariance: Option<Matrix8>,
}

impl ScenarioResult {
    /// E_N with unstable points mapped to NaN (useful for tabulation;
    /// the `stable` flag still travels alongside).
    pub fn log_negativity_or_nan(&self) -> f64 {
        self.log_negativity.unwrap_or(f64::NAN)
    }
}

/// Run the full pipeline for one scenario (covariance matrix not retained).
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioResult> {
    run_scenario_with(sc, false)
}

/// Run the full pipeline and keep the 8×8 covariance matrix.
pub fn run_scenario_full(sc: &Scenario) -> Result<ScenarioResult> {
    run_scenario_with(sc, true)
}

fn run_scenario_with(sc: &Scenario, keep_covariance: bool) -> Result<ScenarioResult> {
    sc.validate()?;
    let ss: SteadyState = solve_steady_state(sc);
    let system = dynamics::linear_system(sc, &ss)?;

    let mut result = ScenarioResult {
        scenario: *sc,
        photons_l: ss.photons_l,
        photons_r: ss.photons_r,
        stability_margin: system.stability.margin,
        stable: system.stability.is_stable,
        residual: None,
        ill_conditioned: false,
        physical: false,
        nu_minus: None,
        log_negativity: None,
        covariance: None,
    };
    if !system.stability.is_stable {
        return Ok(result);
    }

    let cov: SteadyStateCovariance = gaussian::solve_lyapunov_with_report(
        &system.drift,
        &system.diffusion,
        &system.stability,
    )?;
    let reduced = gaussian::reduce_cm(
        &cov.matrix,
        gaussian::MECHANICAL_MODES.0,
        gaussian::MECHANICAL_MODES.1,
    )?;
    let ent = gaussian::log_negativity_unchecked(&reduced);

    result.residual = Some(cov.residual);
    result.ill_conditioned = cov.ill_conditioned;
    result.physical = gaussian::physicality_check_8(&cov.matrix);
    result.nu_minus = Some(ent.nu_minus);
    result.log_negativity = Some(ent.log_negativity);
    if keep_covariance {
        result.covariance = Some(cov.matrix);
    }
    Ok(result)
}

/// Results for the same physical configuration driven from both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalPair {
    pub left: ScenarioResult,
    pub right: ScenarioResult,
}

impl DirectionalPair {
    /// E_N(left) − E_N(right); `None` unless both directions are stable.
    pub fn delta_log_negativity(&self) -> Option<f64> {
        Some(self.left.log_negativity? - self.right.log_negativity?)
    }
}

/// Evaluate both drive directions with otherwise identical parameters.
pub fn directional_pair(sc: &Scenario) -> Result<DirectionalPair> {
    Ok(DirectionalPair {
        left: run_scenario(&sc.with_direction(Direction::Left))?,
        right: run_scenario(&sc.with_direction(Direction::Right))?,
    })
}

/// Numeric scenario fields addressable by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// Shared detuning Δ (rad/s).
    Detuning,
    /// Δ in units of the left mechanical frequency.
    DetuningRatio,
    /// Signed left spin rate (rad/s): positive CCW, negative CW.
    SpinLeft,
    /// Signed right spin rate (rad/s).
    SpinRight,
    /// Mechanical frequency ratio χ = ω_m,r/ω_m,l; sets ω_m,r only.
    MechFrequencyRatio,
    /// Fiber phase φ (rad).
    LinkPhase,
    /// Fiber power transmission η_f.
    LinkTransmission,
    /// Drive power (W).
    Power,
    /// Bath temperature (K).
    Temperature,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "delta" => SweepParam::Detuning,
            "delta_over_wml" => SweepParam::DetuningRatio,
            "omega_l" => SweepParam::SpinLeft,
            "omega_r" => SweepParam::SpinRight,
            "chi" => SweepParam::MechFrequencyRatio,
            "phi" => SweepParam::LinkPhase,
            "eta_f" => SweepParam::LinkTransmission,
            "power" => SweepParam::Power,
            "temperature" => SweepParam::Temperature,
            other => return Err(Error::UnknownParameter(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Detuning => "delta",
            SweepParam::DetuningRatio => "delta_over_wml",
            SweepParam::SpinLeft => "omega_l",
            SweepParam::SpinRight => "omega_r",
            SweepParam::MechFrequencyRatio => "chi",
            SweepParam::LinkPhase => "phi",
            SweepParam::LinkTransmission => "eta_f",
            SweepParam::Power => "power",
            SweepParam::Temperature => "temperature",
        }
    }

    fn apply(&self, sc: &mut Scenario, value: f64) {
        match self {
            SweepParam::Detuning => sc.drive.detuning = value,
            SweepParam::DetuningRatio => sc.drive.detuning = value * sc.left.omega_m,
            SweepParam::SpinLeft => sc.spin_left = SpinConfig::from_signed(value),
            SweepParam::SpinRight => sc.spin_right = SpinConfig::from_signed(value),
            SweepParam::MechFrequencyRatio => sc.right.omega_m = value * sc.left.omega_m,
            SweepParam::LinkPhase => sc.link.phase = value,
            SweepParam::LinkTransmission => sc.link.transmission = value,
            SweepParam::Power => sc.drive.power = value,
            SweepParam::Temperature => sc.env.temperature = value,
        }
    }
}

/// One sweep axis: a parameter and its grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        SweepAxis { param, values }
    }

    /// `points` evenly spaced values over [start, stop] (inclusive).
    pub fn linspace(param: SweepParam, start: f64, stop: f64, points: usize) -> Self {
        let values = if points <= 1 {
            vec![start]
        } else {
            (0..points)
                .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
                .collect()
        };
        SweepAxis { param, values }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Axis values of this point, in axis order.
    pub coords: Vec<f64>,
    pub result: ScenarioResult,
}

/// Evaluated grid, row count = product of axis lengths, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<SweepAxis>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Largest E_N over the stable rows, if any row is stable.
    pub fn max_log_negativity(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.result.log_negativity)
            .fold(None, |acc, en| Some(acc.map_or(en, |m: f64| m.max(en))))
    }

    /// Coordinates of the row attaining the maximum E_N.
    pub fn argmax_log_negativity(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.result.log_negativity.is_some())
            .max_by(|a, b| {
                a.result
                    .log_negativity
                    .partial_cmp(&b.result.log_negativity)
                    .unwrap()
            })
    }
}

fn grid_coords(axes: &[SweepAxis], index: usize) -> Vec<f64> {
    let mut coords = vec![0.0; axes.len()];
    let mut rest = index;
    for (k, axis) in axes.iter().enumerate().rev() {
        let len = axis.values.len();
        coords[k] = axis.values[rest % len];
        rest /= len;
    }
    coords
}

fn evaluate_point(base: &Scenario, axes: &[SweepAxis], index: usize) -> Result<SweepRow> {
    let coords = grid_coords(axes, index);
    let mut sc = *base;
    for (axis, &value) in axes.iter().zip(coords.iter()) {
        axis.param.apply(&mut sc, value);
    }
    Ok(SweepRow {
        coords,
        result: run_scenario(&sc)?,
    })
}

/// Evaluate a 1D/2D (or higher) grid around a base scenario.
///
/// Unstable points are recorded with their flag and sentinel `None`
/// measures, never dropped. Numerical failures abort the sweep.
pub fn sweep(base: &Scenario, axes: &[SweepAxis]) -> Result<SweepTable> {
    let total: usize = axes.iter().map(|a| a.values.len()).product();

    #[cfg(feature = "parallel")]
    let rows = (0..total)
        .into_par_iter()
        .map(|k| evaluate_point(base, axes, k))
        .collect::<Result<Vec<_>>>()?;

    #[cfg(not(feature = "parallel"))]
    let rows = (0..total)
        .map(|k| evaluate_point(base, axes, k))
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepTable {
        axes: axes.to_vec(),
        rows,
    })
}

/// Sequential sweep, independent of the `parallel` feature. Produces
/// bit-identical tables; exists for benchmarking and as the fallback path.
pub fn sweep_sequential(base: &Scenario, axes: &[SweepAxis]) -> Result<SweepTable> {
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let rows = (0..total)
        .map(|k| evaluate_point(base, axes, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        axes: axes.to_vec(),
        rows,
    })
}

/// Ratio of the peak entanglement of a spinning, frequency-mismatched
/// configuration to the peak of the static, frequency-matched baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalResult {
    pub enhanced_max: f64,
    pub baseline_max: f64,
    pub ratio: f64,
}

/// Compute the revival coefficient from two sweeps sharing one axis
/// definition (typically the detuning axis).
pub fn revival_coefficient(
    enhanced: (&Scenario, &SweepAxis),
    baseline: (&Scenario, &SweepAxis),
) -> Result<RevivalResult> {
    if enhanced.1 != baseline.1 {
        return Err(Error::MismatchedAxes);
    }
    let enhanced_table = sweep(enhanced.0, std::slice::from_ref(enhanced.1))?;
    let baseline_table = sweep(baseline.0, std::slice::from_ref(baseline.1))?;
    let enhanced_max = enhanced_table.max_log_negativity().unwrap_or(0.0);
    let baseline_max = baseline_table.max_log_negativity().unwrap_or(0.0);
    if baseline_max <= 1e-12 {
        return Err(Error::ZeroBaseline {
            max_en: baseline_max,
        });
    }
    Ok(RevivalResult {
        enhanced_max,
        baseline_max,
        ratio: enhanced_max / baseline_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{baseline_resonator, baseline_scenario};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn zero_power_leaves_mechanics_thermal() {
        let mut sc = baseline_scenario();
        sc.drive.power = 0.0;
        let result = run_scenario_full(&sc).unwrap();
        assert!(result.stable);
        assert_eq!(result.log_negativity, Some(0.0));
        let v = result.covariance.unwrap();
        let (nbar_l, nbar_r) = sc.thermal_occupancies();

        // Mechanics decouple entirely at zero drive: exact thermal states,
        // uncorrelated with everything.
        for (base, nbar) in [(4, nbar_l), (6, nbar_r)] {
            assert_relative_eq!(v[(base, base)], nbar + 0.5, max_relative = 1e-6);
            assert_relative_eq!(v[(base + 1, base + 1)], nbar + 0.5, max_relative = 1e-6);
        }
        for i in 4..8 {
            for j in 0..8 {
                if i != j && !(4..8).contains(&j) {
                    assert_abs_diff_eq!(v[(i, j)], 0.0, epsilon = 1e-8 * (nbar_l + 0.5));
                }
            }
        }
        assert_abs_diff_eq!(v[(4, 6)], 0.0, epsilon = 1e-8 * (nbar_l + 0.5));
        assert_abs_diff_eq!(v[(4, 5)], 0.0, epsilon = 1e-8 * (nbar_l + 0.5));

        // The driven-side optical mode sees nothing but vacuum.
        assert_relative_eq!(v[(0, 0)], 0.5, max_relative = 1e-8);
        assert_relative_eq!(v[(1, 1)], 0.5, max_relative = 1e-8);
        assert_abs_diff_eq!(v[(0, 1)], 0.0, epsilon = 1e-8);
        // The second resonator picks up excess noise through the link: the
        // model keeps the cascade drain in A but drops the transmitted-noise
        // correlations from D, so its zero-drive state is not vacuum.
        assert!(v[(2, 2)] > 0.5);
        assert!(v[(2, 0)].abs() > 1e-3);
    }

    #[test]
    fn baseline_resonance_entangles() {
        // Static identical mechanics, Δ = ω_m: entangled steady state.
        let result = run_scenario(&baseline_scenario()).unwrap();
        assert!(result.stable);
        assert!(result.log_negativity.unwrap() > 0.0, "E_N = {:?}", result.log_negativity);
        assert!(result.residual.unwrap() < 1e-10);
    }

    #[test]
    fn off_resonance_does_not_entangle() {
        let mut sc = baseline_scenario();
        sc.drive.detuning = 0.5 * sc.left.omega_m;
        let result = run_scenario(&sc).unwrap();
        assert!(result.stable);
        assert_eq!(result.log_negativity, Some(0.0));
    }

    #[test]
    fn static_pair_is_reciprocal() {
        // Mirror symmetry needs fully identical resonators, coupling rates
        // included; asymmetric κ_ex leaves a percent-level direction bias.
        let mut sc = baseline_scenario();
        sc.right = baseline_resonator(27.0);
        let pair = directional_pair(&sc).unwrap();
        let delta = pair.delta_log_negativity().unwrap();
        let scale = pair.left.log_negativity.unwrap().max(1e-12);
        assert!(delta.abs() < 1e-9 * scale, "ΔE_N = {delta}");
    }

    #[test]
    fn single_spin_breaks_reciprocity() {
        let mut sc = baseline_scenario();
        sc.spin_left = SpinConfig::ccw(0.6e6);
        sc.drive.detuning = 0.74 * sc.left.omega_m;
        let pair = directional_pair(&sc).unwrap();
        assert!(pair.left.log_negativity.unwrap() > 0.0);
        assert_eq!(pair.right.log_negativity, Some(0.0));
    }

    #[test]
    fn sweep_single_point_matches_run_scenario() {
        let sc = baseline_scenario();
        let axis = SweepAxis::new(SweepParam::DetuningRatio, vec![1.0]);
        let table = sweep(&sc, &[axis]).unwrap();
        assert_eq!(table.rows.len(), 1);
        let direct = run_scenario(&sc).unwrap();
        assert_eq!(table.rows[0].result.log_negativity, direct.log_negativity);
        assert_eq!(table.rows[0].coords, vec![1.0]);
    }

    #[test]
    fn sweep_rows_match_pointwise_and_order() {
        let sc = baseline_scenario();
        let axes = [
            SweepAxis::new(SweepParam::DetuningRatio, vec![0.9, 1.0, 1.1]),
            SweepAxis::new(SweepParam::LinkTransmission, vec![0.8, 1.0]),
        ];
        let table = sweep(&sc, &axes).unwrap();
        assert_eq!(table.rows.len(), 6);
        // last axis fastest
        assert_eq!(table.rows[0].coords, vec![0.9, 0.8]);
        assert_eq!(table.rows[1].coords, vec![0.9, 1.0]);
        assert_eq!(table.rows[2].coords, vec![1.0, 0.8]);
        for row in &table.rows {
            let mut point = sc;
            SweepParam::DetuningRatio.apply(&mut point, row.coords[0]);
            SweepParam::LinkTransmission.apply(&mut point, row.coords[1]);
            let direct = run_scenario(&point).unwrap();
            assert_eq!(row.result.log_negativity, direct.log_negativity);
            assert_eq!(row.result.stable, direct.stable);
        }
    }

    #[test]
    fn parallel_and_sequential_sweeps_are_bit_identical() {
        let sc = baseline_scenario();
        let axes = [SweepAxis::linspace(SweepParam::DetuningRatio, 0.6, 1.4, 17)];
        let par = sweep(&sc, &axes).unwrap();
        let seq = sweep_sequential(&sc, &axes).unwrap();
        assert_eq!(par.rows.len(), seq.rows.len());
        for (a, b) in par.rows.iter().zip(seq.rows.iter()) {
            assert_eq!(a.result.log_negativity, b.result.log_negativity);
            assert_eq!(a.result.stability_margin, b.result.stability_margin);
            assert_eq!(a.coords, b.coords);
        }
    }

    #[test]
    fn no_row_reports_entanglement_without_stability() {
        // Crank the power until part of the sweep goes unstable.
        let mut sc = baseline_scenario();
        sc.drive.power = 200.0;
        sc.drive.detuning = -sc.left.omega_m;
        let axes = [SweepAxis::linspace(SweepParam::DetuningRatio, -1.2, 1.2, 25)];
        let table = sweep(&sc, &axes).unwrap();
        let unstable = table.rows.iter().filter(|r| !r.result.stable).count();
        assert!(unstable > 0, "expected some unstable rows in this regime");
        for row in &table.rows {
            if !row.result.stable {
                assert_eq!(row.result.log_negativity, None);
                assert_eq!(row.result.nu_minus, None);
            } else {
                assert!(row.result.log_negativity.is_some());
            }
        }
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        assert!(matches!(
            SweepParam::parse("coupling_rate"),
            Err(Error::UnknownParameter(_))
        ));
        assert_eq!(SweepParam::parse("chi").unwrap(), SweepParam::MechFrequencyRatio);
    }

    #[test]
    fn chi_axis_touches_only_right_mechanical_frequency() {
        let sc = baseline_scenario();
        let mut modified = sc;
        SweepParam::MechFrequencyRatio.apply(&mut modified, 0.95);
        assert_relative_eq!(modified.right.omega_m, 0.95 * sc.left.omega_m, max_relative = 1e-12);
        assert_eq!(modified.right.mass, sc.right.mass);
        assert_eq!(modified.right.gamma_m, sc.right.gamma_m);
        assert_eq!(modified.left, sc.left);
    }

    #[test]
    fn revival_of_identical_configuration_is_unity() {
        let sc = baseline_scenario();
        let axis = SweepAxis::linspace(SweepParam::DetuningRatio, 0.8, 1.2, 21);
        let r = revival_coefficient((&sc, &axis), (&sc, &axis)).unwrap();
        assert_relative_eq!(r.ratio, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn revival_with_dead_baseline_errors() {
        let sc = baseline_scenario();
        let mut dead = sc;
        dead.drive.power = 0.0;
        let axis = SweepAxis::linspace(SweepParam::DetuningRatio, 0.8, 1.2, 5);
        assert!(matches!(
            revival_coefficient((&sc, &axis), (&dead, &axis)),
            Err(Error::ZeroBaseline { .. })
        ));
        let other_axis = SweepAxis::linspace(SweepParam::Detuning, 0.8, 1.2, 5);
        assert!(matches!(
            revival_coefficient((&sc, &axis), (&sc, &other_axis)),
            Err(Error::MismatchedAxes)
        ));
    }

    #[test]
    fn sagnac_shift_equivalence_with_dark_second_resonator() {
        // With the link cut, spinning only relabels the detuning axis of the
        // driven resonator: V(Δ; Ω) == V(Δ + Δ_F; 0) up to the tiny drift of
        // ε_d with ω_d.
        let mut sc = baseline_scenario();
        sc.link.transmission = 0.0;
        let omega = 0.6e6;
        let shift = crate::model::sagnac_shift(
            &sc.left,
            &SpinConfig::ccw(omega),
            Direction::Left,
        );

        for ratio in [0.7, 0.9, 1.0, 1.2] {
            let mut spun = sc;
            spun.spin_left = SpinConfig::ccw(omega);
            spun.drive.detuning = ratio * sc.left.omega_m;
            let v_spun = run_scenario_full(&spun).unwrap().covariance.unwrap();

            let mut static_shifted = sc;
            static_shifted.drive.detuning = ratio * sc.left.omega_m + shift;
            let v_static = run_scenario_full(&static_shifted).unwrap().covariance.unwrap();

            let scale = v_spun.amax();
            assert!(
                (v_spun - v_static).amax() <= 1e-5 * scale,
                "covariances differ at ratio {ratio}"
            );
        }
    }

    #[test]
    fn opposite_spins_preserve_reciprocity() {
        // Counter-rotating identical resonators: flipping the input swaps
        // the two roles exactly, so E_N is direction-independent.
        let mut sc = baseline_scenario();
        sc.right = baseline_resonator(27.0);
        sc.spin_left = SpinConfig::ccw(0.6e6);
        sc.spin_right = SpinConfig::cw(0.6e6);
        sc.drive.detuning = 0.74 * sc.left.omega_m;
        let pair = directional_pair(&sc).unwrap();
        let delta = pair.delta_log_negativity().unwrap().abs();
        let scale = pair
            .left
            .log_negativity
            .unwrap()
            .max(pair.right.log_negativity.unwrap())
            .max(1e-9);
        assert!(delta < 1e-9 * scale, "ΔE_N = {delta}, scale = {scale}");
    }

    #[test]
    fn drive_phase_leaves_measures_invariant() {
        // Changing the global drive phase rotates the optical frame; the
        // mechanical covariance block and every derived measure must stay put.
        let sc = baseline_scenario();
        let base_ss = solve_steady_state(&sc);
        let base_a = dynamics::drift_matrix(&sc, &base_ss);
        let base_d = dynamics::diffusion_matrix(&sc);
        let base_v = gaussian::solve_lyapunov(&base_a, &base_d).unwrap().matrix;
        let base_red = gaussian::reduce_cm(&base_v, 2, 3).unwrap();
        let base_en = gaussian::log_negativity_unchecked(&base_red);

        for theta in [std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
            let ss = crate::steady_state::solve_with_drive_phase(&sc, theta);
            let a = dynamics::drift_matrix(&sc, &ss);
            let v = gaussian::solve_lyapunov(&a, &base_d).unwrap().matrix;
            let red = gaussian::reduce_cm(&v, 2, 3).unwrap();
            assert!((red - base_red).amax() <= 1e-9 * base_red.amax());
            let en = gaussian::log_negativity_unchecked(&red);
            assert_abs_diff_eq!(
                en.log_negativity,
                base_en.log_negativity,
                epsilon = 1e-9
            );
        }
    }
}

//! Shared fixtures and independent numerical oracles for the test suites.
//!
//! The Lyapunov oracles here deliberately avoid the library's algebraic
//! solvers: they integrate dV/dt = AV + VAᵀ + D in the time domain, either
//! with plain RK4 (well-conditioned systems) or by exact-propagator doubling
//! (stiff cavity-scale systems).

#![allow(dead_code)]

use nalgebra::DMatrix;
use omcascade::model::{
    Direction, DriveConfig, Environment, LinkConfig, ResonatorParams, Scenario, SpinConfig,
};
use omcascade::scenario::{sweep, SweepAxis, SweepParam, SweepTable};
use std::f64::consts::TAU;

/// Baseline resonator used across the acceptance runs: n = 1.48, R = 36 µm,
/// m = 15 ng, λ = 780 nm, κ₀/2π = 15 MHz, ω_m/2π = 88.54 MHz,
/// γ_m/2π = 2.2 kHz.
pub fn resonator(kappa_ex_over_2pi_mhz: f64) -> ResonatorParams {
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

fn scenario_with(kex_l: f64, kex_r: f64) -> Scenario {
    let left = resonator(kex_l);
    Scenario {
        left,
        right: resonator(kex_r),
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

/// Fully identical resonators (coupling rates included): the mirror-symmetric
/// configuration whose directional response is exactly reciprocal.
pub fn scenario_identical() -> Scenario {
    scenario_with(27.0, 27.0)
}

/// The asymmetric-coupling configuration (κ_ex/2π = 27 and 30 MHz).
pub fn scenario_baseline() -> Scenario {
    scenario_with(27.0, 30.0)
}

/// The 401-point detuning axis Δ/ω_m,l ∈ [0.4, 1.4].
pub fn detuning_axis() -> SweepAxis {
    SweepAxis::linspace(SweepParam::DetuningRatio, 0.4, 1.4, 401)
}

/// Sweep E_N over the detuning axis for one drive direction. Every point of
/// the acceptance sweeps is expected to be stable.
pub fn en_curve(sc: &Scenario, direction: Direction) -> (Vec<f64>, SweepTable) {
    let table = sweep(&sc.with_direction(direction), &[detuning_axis()]).expect("sweep failed");
    let ens = table
        .rows
        .iter()
        .map(|row| {
            row.result
                .log_negativity
                .expect("acceptance sweep point must be stable")
        })
        .collect();
    (ens, table)
}

pub fn max_of(values: &[f64]) -> f64 {
    values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
}

pub fn argmax_coord(values: &[f64], table: &SweepTable) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, &v) in values.iter().enumerate() {
        if v > best.0 {
            best = (v, k);
        }
    }
    table.rows[best.1].coords[0]
}

/// RK4 time integration of dV/dt = AV + VAᵀ + D from V(0) = 0.
///
/// Suitable for O(1)-rate systems; global error scales as T·dt⁴·|λ|⁵.
pub fn rk4_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>, t_final: f64, dt: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let rhs = |v: &DMatrix<f64>| a * v + v * a.transpose() + d;
    let mut v = DMatrix::<f64>::zeros(n, n);
    let steps = (t_final / dt).ceil() as usize;
    for _ in 0..steps {
        let k1 = rhs(&v);
        let k2 = rhs(&(&v + &k1 * (dt / 2.0)));
        let k3 = rhs(&(&v + &k2 * (dt / 2.0)));
        let k4 = rhs(&(&v + &k3 * dt));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    v
}

/// Steady-state covariance by exact-propagator doubling.
///
/// Seeds V(h) and E(h) = e^{Ah} from fifth-order Taylor expansions at
/// ‖A‖h ≈ 10⁻⁴, then applies V(2t) = V(t) + E(t)·V(t)·E(t)ᵀ, E(2t) = E(t)²
/// until V stops changing. Handles stiff systems that defeat explicit
/// steppers, while remaining a pure time-domain construction.
pub fn doubling_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let scale = a.amax();
    let h = 1e-4 / scale;

    // e^{Ah} by Taylor
    let mut propagator = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=6 {
        term = a * term * (h / k as f64);
        propagator += &term;
    }

    // ∫₀ʰ e^{As} D e^{Aᵀs} ds by the iterated-commutator series:
    // F₀ = D, F_{k+1} = A·F_k + F_k·Aᵀ, Q = Σ h^{k+1}/(k+1)!·F_k
    let mut v = DMatrix::<f64>::zeros(n, n);
    let mut f = d.clone();
    let mut coeff = h;
    for k in 1..=6 {
        v += &f * coeff;
        f = a * &f + &f * a.transpose();
        coeff *= h / (k + 1) as f64;
    }

    for _ in 0..200 {
        let increment = &propagator * &v * propagator.transpose();
        let rel = increment.amax() / v.amax().max(f64::MIN_POSITIVE);
        v += increment;
        propagator = &propagator * &propagator;
        if rel < 1e-15 {
            break;
        }
    }
    (&v + &v.transpose()) * 0.5
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

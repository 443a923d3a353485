//! Classical steady state of the cascaded chain.
//!
//! With the drive entering the first resonator, the mean optical amplitudes
//! follow in closed form from the cascaded input-output relations:
//!
//! ```text
//! α_first  = √κ_ex,first · ε_d / (iΔ̃_first + Γ_first/2)
//! α_second = √(η_f κ_ex,second) e^{iφ} (ε_d − √κ_ex,first α_first)
//!            / (iΔ̃_second + Γ_second/2)
//! β_j      = i g₀,j |α_j|² / (iω_m,j + γ_m,j/2)
//! ```
//!
//! All denominators contain Γ/2 > 0, so the solution is total on valid
//! scenarios.

use crate::error::{Error, Result};
use crate::model::{sagnac_shift, Direction, ResonatorParams, Scenario};
use nalgebra::Complex;

type C64 = Complex<f64>;

/// Steady-state mean amplitudes, labeled by physical side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Optical amplitude of the left resonator (√photon).
    pub alpha_l: C64,
    /// Optical amplitude of the right resonator (√photon).
    pub alpha_r: C64,
    /// Mechanical amplitude of the left resonator (√phonon).
    pub beta_l: C64,
    /// Mechanical amplitude of the right resonator (√phonon).
    pub beta_r: C64,
    /// Intracavity photon numbers N_j = |α_j|².
    pub photons_l: f64,
    pub photons_r: f64,
    /// Which side the drive addressed first (cascade order).
    pub first: Direction,
}

impl SteadyState {
    pub fn alpha(&self, side: Direction) -> C64 {
        match side {
            Direction::Left => self.alpha_l,
            Direction::Right => self.alpha_r,
        }
    }

    pub fn photons(&self, side: Direction) -> f64 {
        match side {
            Direction::Left => self.photons_l,
            Direction::Right => self.photons_r,
        }
    }

    pub fn alpha_first(&self) -> C64 {
        self.alpha(self.first)
    }

    pub fn alpha_second(&self) -> C64 {
        self.alpha(self.first.opposite())
    }
}

fn optical_response(res: &ResonatorParams, detuning: f64) -> C64 {
    C64::new(res.total_decay() / 2.0, detuning)
}

fn mechanical_amplitude(res: &ResonatorParams, photons: f64) -> C64 {
    let g0 = res.single_photon_coupling();
    C64::new(0.0, g0 * photons) / C64::new(res.gamma_m / 2.0, res.omega_m)
}

/// Closed-form steady state for the configured drive direction.
pub fn solve_steady_state(sc: &Scenario) -> SteadyState {
    solve_with_drive_phase(sc, 0.0)
}

/// Steady state with an explicit global drive phase, ε_d → |ε_d|·e^{iθ}.
///
/// Physical observables are invariant under θ; this entry point exists to
/// exercise exactly that.
pub fn solve_with_drive_phase(sc: &Scenario, phase: f64) -> SteadyState {
    let (dl, dr) = sc.effective_detunings();
    solve_at_detunings(sc, (dl, dr), phase)
}

fn solve_at_detunings(sc: &Scenario, detunings: (f64, f64), phase: f64) -> SteadyState {
    let eps = C64::from_polar(sc.drive_amplitude(), phase);
    let first = sc.first();
    let (res_f, res_s) = (sc.resonator(first), sc.resonator(first.opposite()));
    let (det_f, det_s) = match first {
        Direction::Left => (detunings.0, detunings.1),
        Direction::Right => (detunings.1, detunings.0),
    };

    let alpha_f = res_f.kappa_ex.sqrt() * eps / optical_response(res_f, det_f);
    let through = eps - res_f.kappa_ex.sqrt() * alpha_f;
    let link = C64::from_polar(1.0, sc.link.phase) * (sc.link.transmission * res_s.kappa_ex).sqrt();
    let alpha_s = link * through / optical_response(res_s, det_s);

    let (alpha_l, alpha_r) = match first {
        Direction::Left => (alpha_f, alpha_s),
        Direction::Right => (alpha_s, alpha_f),
    };
    let photons_l = alpha_l.norm_sqr();
    let photons_r = alpha_r.norm_sqr();
    SteadyState {
        alpha_l,
        alpha_r,
        beta_l: mechanical_amplitude(&sc.left, photons_l),
        beta_r: mechanical_amplitude(&sc.right, photons_r),
        photons_l,
        photons_r,
        first,
    }
}

/// Linearized coupling of one optical mode to its mechanical mode, split
/// into quadrature components: re = 2g₀Re[α], im = 2g₀Im[α] (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCoupling {
    pub re: f64,
    pub im: f64,
}

impl QuadratureCoupling {
    /// |Λ| = 2g₀|α| = 2g₀√N.
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Linearized couplings for both resonators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub left: QuadratureCoupling,
    pub right: QuadratureCoupling,
}

pub fn linearized_couplings(sc: &Scenario, ss: &SteadyState) -> Couplings {
    let g_l = sc.left.single_photon_coupling();
    let g_r = sc.right.single_photon_coupling();
    Couplings {
        left: QuadratureCoupling {
            re: 2.0 * g_l * ss.alpha_l.re,
            im: 2.0 * g_l * ss.alpha_l.im,
        },
        right: QuadratureCoupling {
            re: 2.0 * g_r * ss.alpha_r.re,
            im: 2.0 * g_r * ss.alpha_r.im,
        },
    }
}

/// Self-consistent steady state including the radiation-pressure detuning
/// correction Δ_c,j = Δ − 2g₀,j·Re[β_j].
///
/// Fixed-point iteration until successive effective detunings agree to
/// 10⁻⁹·ω_m,l. The default pipeline neglects this correction (it is far
/// below the detuning scale at typical parameters); this variant exists for
/// sensitivity studies.
pub fn solve_with_detuning_feedback(sc: &Scenario) -> Result<(SteadyState, (f64, f64), usize)> {
    const MAX_ITER: usize = 200;
    let tol = 1e-9 * sc.left.omega_m;
    let shift_l = sagnac_shift(&sc.left, &sc.spin_left, sc.drive.direction);
    let shift_r = sagnac_shift(&sc.right, &sc.spin_right, sc.drive.direction);

    let mut detunings = sc.effective_detunings();
    for iteration in 1..=MAX_ITER {
        let ss = solve_at_detunings(sc, detunings, 0.0);
        let g_l = sc.left.single_photon_coupling();
        let g_r = sc.right.single_photon_coupling();
        let next = (
            sc.drive.detuning - 2.0 * g_l * ss.beta_l.re + shift_l,
            sc.drive.detuning - 2.0 * g_r * ss.beta_r.re + shift_r,
        );
        let delta = (next.0 - detunings.0).abs().max((next.1 - detunings.1).abs());
        detunings = next;
        if delta < tol {
            return Ok((solve_at_detunings(sc, detunings, 0.0), detunings, iteration));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
    })
}

/// Integrate the transient mean-value equations with RK4 for `duration`
/// seconds from vacuum initial conditions.
///
/// This is a verification tool for the closed forms; the optical amplitudes
/// settle on the 1/Γ scale, the mechanical ones only on the much slower
/// 1/γ_m scale.
pub fn integrate_transient(sc: &Scenario, duration: f64, dt: f64) -> SteadyState {
    let (dl, dr) = sc.effective_detunings();
    let first = sc.first();
    let eps = C64::new(sc.drive_amplitude(), 0.0);
    let link = C64::from_polar(1.0, sc.link.phase);

    // State vector (α_l, α_r, β_l, β_r).
    let deriv = |y: &[C64; 4]| -> [C64; 4] {
        let (al, ar, bl, br) = (y[0], y[1], y[2], y[3]);
        let g_l = sc.left.single_photon_coupling();
        let g_r = sc.right.single_photon_coupling();
        let pump_l;
        let pump_r;
        match first {
            Direction::Left => {
                pump_l = sc.left.kappa_ex.sqrt() * eps;
                pump_r = (sc.link.transmission * sc.right.kappa_ex).sqrt()
                    * link
                    * (eps - sc.left.kappa_ex.sqrt() * al);
            }
            Direction::Right => {
                pump_r = sc.right.kappa_ex.sqrt() * eps;
                pump_l = (sc.link.transmission * sc.left.kappa_ex).sqrt()
                    * link
                    * (eps - sc.right.kappa_ex.sqrt() * ar);
            }
        }
        [
            -optical_response(&sc.left, dl) * al + pump_l,
            -optical_response(&sc.right, dr) * ar + pump_r,
            -C64::new(sc.left.gamma_m / 2.0, sc.left.omega_m) * bl
                + C64::new(0.0, g_l * al.norm_sqr()),
            -C64::new(sc.right.gamma_m / 2.0, sc.right.omega_m) * br
                + C64::new(0.0, g_r * ar.norm_sqr()),
        ]
    };

    let mut y = [C64::new(0.0, 0.0); 4];
    let steps = (duration / dt).ceil() as usize;
    for _ in 0..steps {
        let k1 = deriv(&y);
        let y2 = add_scaled(&y, &k1, dt / 2.0);
        let k2 = deriv(&y2);
        let y3 = add_scaled(&y, &k2, dt / 2.0);
        let k3 = deriv(&y3);
        let y4 = add_scaled(&y, &k3, dt);
        let k4 = deriv(&y4);
        for i in 0..4 {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }

    let photons_l = y[0].norm_sqr();
    let photons_r = y[1].norm_sqr();
    SteadyState {
        alpha_l: y[0],
        alpha_r: y[1],
        beta_l: y[2],
        beta_r: y[3],
        photons_l,
        photons_r,
        first,
    }
}

fn add_scaled(y: &[C64; 4], k: &[C64; 4], s: f64) -> [C64; 4] {
    [
        y[0] + k[0] * s,
        y[1] + k[1] * s,
        y[2] + k[2] * s,
        y[3] + k[3] * s,
    ]
}

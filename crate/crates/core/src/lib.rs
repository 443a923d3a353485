//! Steady-state Gaussian simulator for a pair of cascaded, optionally
//! spinning whispering-gallery optomechanical resonators.
//!
//! Two resonators are chained through a unidirectional fiber link: the drive
//! enters one resonator, its output field pumps the other, and nothing
//! travels back. Spinning a resonator splits its counterpropagating optical
//! resonances (Sagnac effect), so the effective detunings — and with them the
//! mechanical entanglement carried by the steady state — depend on which end
//! of the fiber the drive enters.
//!
//! The pipeline is entirely closed-form plus dense linear algebra:
//!
//! 1. [`model`] — physical parameters and derived quantities (Sagnac shift,
//!    single-photon coupling, drive amplitude, thermal occupancy).
//! 2. [`steady_state`] — classical mean amplitudes of the cascaded chain.
//! 3. [`dynamics`] — 8×8 drift and diffusion matrices of the linearized
//!    quadrature fluctuations, plus an eigenvalue stability test.
//! 4. [`gaussian`] — Lyapunov solve for the steady-state covariance matrix,
//!    logarithmic negativity, physicality checks, Wigner projections.
//! 5. [`scenario`] — end-to-end evaluation, directional comparisons,
//!    parameter sweeps and the revival coefficient.
//!
//! Sweeps evaluate grid points in parallel with rayon when the default
//! `parallel` feature is enabled; disabling it leaves a sequential fallback
//! with identical results.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod scenario;
pub mod steady_state;

pub use error::{Error, Result};
pub use model::{
    Direction, DriveConfig, Environment, LinkConfig, ResonatorParams, Scenario, SpinConfig,
    SpinOrientation,
};
pub use scenario::{run_scenario, ScenarioResult};

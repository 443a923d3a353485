//! Linearized quadrature dynamics: drift matrix A, diffusion matrix D, and
//! the stability classification of du/dt = A·u + v.
//!
//! Quadrature ordering is fixed throughout the crate:
//!
//! ```text
//! u = (X_l, Y_l, X_r, Y_r, q_l, p_l, q_r, p_r)
//! ```
//!
//! optical amplitude/phase quadratures first (left, then right), mechanical
//! position/momentum after. The cascade is unidirectional: with left input
//! the (X_l, Y_l) rows never reference (X_r, Y_r), and symmetrically for
//! right input.

use crate::error::{Error, Result};
use crate::model::{Direction, Scenario};
use crate::steady_state::{linearized_couplings, SteadyState};
use nalgebra::{DMatrix, SMatrix};

pub type Matrix8 = SMatrix<f64, 8, 8>;

/// Row/column labels of the fixed quadrature ordering.
pub const QUADRATURE_LABELS: [&str; 8] = ["X_l", "Y_l", "X_r", "Y_r", "q_l", "p_l", "q_r", "p_r"];

/// Fiber-mediated coupling between the optical quadrature pairs,
/// J·(cos φ, sin φ) with J = √(η_f·κ_ex,l·κ_ex,r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeCoupling {
    pub in_phase: f64,
    pub quadrature: f64,
}

pub fn cascade_coupling(sc: &Scenario) -> CascadeCoupling {
    let j = (sc.link.transmission * sc.left.kappa_ex * sc.right.kappa_ex).sqrt();
    CascadeCoupling {
        in_phase: j * sc.link.phase.cos(),
        quadrature: j * sc.link.phase.sin(),
    }
}

/// Assemble the 8×8 drift matrix for the given scenario and steady state.
///
/// The steady state must have been computed from the same scenario; the
/// cascade block is placed in the second resonator's optical rows according
/// to `ss.first`.
pub fn drift_matrix(sc: &Scenario, ss: &SteadyState) -> Matrix8 {
    let (det_l, det_r) = sc.effective_detunings();
    let couplings = linearized_couplings(sc, ss);
    let j = cascade_coupling(sc);

    let mut a = Matrix8::zeros();

    // Optical diagonal blocks: −Γ/2 on the diagonal, ±Δ̃ off it.
    for (base, res, det) in [(0, &sc.left, det_l), (2, &sc.right, det_r)] {
        let half_decay = res.total_decay() / 2.0;
        a[(base, base)] = -half_decay;
        a[(base, base + 1)] = det;
        a[(base + 1, base)] = -det;
        a[(base + 1, base + 1)] = -half_decay;
    }

    // Mechanical diagonal blocks: [[−γ/2, ω_m], [−ω_m, −γ/2]].
    for (base, res) in [(4, &sc.left), (6, &sc.right)] {
        a[(base, base)] = -res.gamma_m / 2.0;
        a[(base, base + 1)] = res.omega_m;
        a[(base + 1, base)] = -res.omega_m;
        a[(base + 1, base + 1)] = -res.gamma_m / 2.0;
    }

    // Optomechanical couplings, one quadrature pair per resonator.
    for (opt, mech, c) in [(0, 4, couplings.left), (2, 6, couplings.right)] {
        a[(opt, mech)] = -c.im;
        a[(opt + 1, mech)] = c.re;
        a[(mech + 1, opt)] = c.re;
        a[(mech + 1, opt + 1)] = c.im;
    }

    // Unidirectional cascade block in the second resonator's optical rows.
    let (rows, cols) = match ss.first {
        Direction::Left => (2, 0),
        Direction::Right => (0, 2),
    };
    a[(rows, cols)] = -j.in_phase;
    a[(rows, cols + 1)] = j.quadrature;
    a[(rows + 1, cols)] = -j.quadrature;
    a[(rows + 1, cols + 1)] = -j.in_phase;

    a
}

/// Diagonal diffusion matrix of the input noise,
/// D = ½·diag[Γ_l, Γ_l, Γ_r, Γ_r, γ_m,l(2n̄_l+1)×2, γ_m,r(2n̄_r+1)×2].
///
/// Optical baths are vacuum (temperature-independent); mechanical baths are
/// thermal at the scenario's bath temperature.
pub fn diffusion_matrix(sc: &Scenario) -> Matrix8 {
    let (nbar_l, nbar_r) = sc.thermal_occupancies();
    let entries = [
        sc.left.total_decay(),
        sc.left.total_decay(),
        sc.right.total_decay(),
        sc.right.total_decay(),
        sc.left.gamma_m * (2.0 * nbar_l + 1.0),
        sc.left.gamma_m * (2.0 * nbar_l + 1.0),
        sc.right.gamma_m * (2.0 * nbar_r + 1.0),
        sc.right.gamma_m * (2.0 * nbar_r + 1.0),
    ];
    Matrix8::from_diagonal(&SMatrix::<f64, 8, 1>::from(entries)) * 0.5
}

/// Stability verdict from the spectrum of A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// max Re λ over the eigenvalues of A (rad/s).
    pub margin: f64,
    pub is_stable: bool,
}

/// Classify stability by the eigenvalues of A (equivalent to the
/// Routh-Hurwitz criterion, with a usable margin as a bonus).
///
/// A failed QR/Schur iteration is reported as an explicit error rather than
/// a silent verdict.
pub fn stability(a: &Matrix8) -> Result<StabilityReport> {
    // Work on a scaled copy: rates span ~1e4..1e9 rad/s and the Schur
    // iteration's convergence thresholds are relative.
    let scale = a.amax();
    if scale == 0.0 {
        return Ok(StabilityReport {
            margin: 0.0,
            is_stable: false,
        });
    }
    let scaled = DMatrix::from_column_slice(8, 8, (a / scale).as_slice());
    let schur = nalgebra::linalg::Schur::try_new(scaled, f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolverFailure)?;
    let margin = schur
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
        * scale;
    Ok(StabilityReport {
        margin,
        is_stable: margin < 0.0,
    })
}

/// Drift, diffusion, and stability bundled for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub drift: Matrix8,
    pub diffusion: Matrix8,
    pub stability: StabilityReport,
}

pub fn linear_system(sc: &Scenario, ss: &SteadyState) -> Result<LinearSystem> {
    let drift = drift_matrix(sc, ss);
    let stability = stability(&drift)?;
    Ok(LinearSystem {
        drift,
        diffusion: diffusion_matrix(sc),
        stability,
    })
}

//! Steady-state covariance matrix and Gaussian-state measures.
//!
//! For stable drift A the steady-state covariance matrix V solves the
//! Lyapunov equation A·V + V·Aᵀ = −D. The primary solver vectorizes the
//! equation into a dense (n²×n²) linear system — trivial at n = 8 —
//! polished by iterative refinement; a Bartels-Stewart style Schur solver
//! is kept as an independent second route.
//!
//! Conventions: ħ = 1 quadratures X = (a† + a)/√2, so vacuum variance is 1/2
//! and physical states have every symplectic eigenvalue ≥ 1/2.

use crate::dynamics::{self, Matrix8};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SMatrix, SVector};

pub type Matrix4 = SMatrix<f64, 4, 4>;
pub type Matrix2 = SMatrix<f64, 2, 2>;
pub type Vector4 = SVector<f64, 4>;

/// Relative Lyapunov residual tolerance, ‖AV+VAᵀ+D‖max / ‖D‖max.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Mode indices of the fixed ordering: optical left/right, mechanical
/// left/right. Each mode spans two consecutive quadrature rows.
pub const OPTICAL_L: usize = 0;
pub const OPTICAL_R: usize = 1;
pub const MECH_L: usize = 2;
pub const MECH_R: usize = 3;

/// The mechanical-mechanical bipartition (quadrature rows 4..8).
pub const MECHANICAL_MODES: (usize, usize) = (MECH_L, MECH_R);

/// Steady-state covariance matrix with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateCovariance {
    pub matrix: Matrix8,
    /// ‖AV + VAᵀ + D‖max / ‖D‖max after refinement.
    pub residual: f64,
    /// Set when the stability margin is within 10⁻⁶·‖A‖max of zero; the
    /// solution is returned but close to the divergence boundary.
    pub ill_conditioned: bool,
}

/// Solve A·V + V·Aᵀ = −D for the 8×8 steady-state covariance matrix.
///
/// Rejects unstable drift matrices: no steady state exists there.
pub fn solve_lyapunov(a: &Matrix8, d: &Matrix8) -> Result<SteadyStateCovariance> {
    let report = dynamics::stability(a)?;
    solve_lyapunov_with_report(a, d, &report)
}

pub(crate) fn solve_lyapunov_with_report(
    a: &Matrix8,
    d: &Matrix8,
    report: &dynamics::StabilityReport,
) -> Result<SteadyStateCovariance> {
    if !report.is_stable {
        return Err(Error::UnstableDynamics {
            margin: report.margin,
        });
    }
    let a_dyn = DMatrix::from_column_slice(8, 8, a.as_slice());
    let d_dyn = DMatrix::from_column_slice(8, 8, d.as_slice());
    let (v, residual) = lyapunov_kron(&a_dyn, &d_dyn)?;
    let ill_conditioned = report.margin > -1e-6 * a.amax();
    // Near the stability boundary ‖V‖ ~ ‖D‖/|margin| blows up and the
    // achievable residual floor is ε·‖A‖‖V‖/‖D‖ — the tolerance cannot be
    // met (or even measured) there. Those solves carry the warning flag
    // instead of failing.
    if residual > RESIDUAL_TOL && !ill_conditioned {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(SteadyStateCovariance {
        matrix: Matrix8::from_column_slice(v.as_slice()),
        residual,
        ill_conditioned,
    })
}

/// General-size Lyapunov solve (vectorized route), for any stable A.
///
/// Returns the symmetrized solution and its relative residual.
pub fn solve_lyapunov_dense(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    lyapunov_kron(a, d).map(|(v, _)| v)
}

fn lyapunov_kron(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!((d.nrows(), d.ncols()), (n, n));

    // Scale so the operator has O(1) entries; V is scale-invariant under
    // (A, D) -> (A, D)/s.
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let a_s = a / scale;
    let d_s = d / scale;

    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(&a_s) + a_s.kronecker(&eye);
    let lu = op.lu();

    let rhs = -DVector::from_column_slice(d_s.as_slice());
    let x = lu.solve(&rhs).ok_or(Error::LinearSolveFailure)?;
    let mut v = DMatrix::from_column_slice(n, n, x.as_slice());

    // Iterative refinement. Near-marginal systems (margin ≪ ‖A‖) are badly
    // conditioned and need a few passes; each one contracts the residual by
    // roughly ε·cond.
    let d_scale = d_s.amax().max(f64::MIN_POSITIVE);
    for _ in 0..8 {
        let resid = &a_s * &v + &v * a_s.transpose() + &d_s;
        if resid.amax() / d_scale < RESIDUAL_TOL / 10.0 {
            break;
        }
        let correction = lu
            .solve(&-DVector::from_column_slice(resid.as_slice()))
            .ok_or(Error::LinearSolveFailure)?;
        v += DMatrix::from_column_slice(n, n, correction.as_slice());
    }
    v = (&v + &v.transpose()) * 0.5;

    let resid = &a_s * &v + &v * a_s.transpose() + &d_s;
    Ok((v, resid.amax() / d_scale))
}

/// Bartels-Stewart style solve through the real Schur form of A.
///
/// Independent second route used to cross-check the vectorized solver.
pub fn solve_lyapunov_schur(a: &Matrix8, d: &Matrix8) -> Result<Matrix8> {
    let report = dynamics::stability(a)?;
    if !report.is_stable {
        return Err(Error::UnstableDynamics {
            margin: report.margin,
        });
    }
    let scale = a.amax();
    let a_dyn = DMatrix::from_column_slice(8, 8, (a / scale).as_slice());
    let d_dyn = DMatrix::from_column_slice(8, 8, (d / scale).as_slice());
    let v = lyapunov_schur_dense(&a_dyn, &d_dyn)?;
    Ok(Matrix8::from_column_slice(v.as_slice()))
}

fn lyapunov_schur_dense(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenSolverFailure)?;
    let (q, t) = schur.unpack();
    let c = -(q.transpose() * d * &q);

    // Quasi-triangular block structure: a nonzero subdiagonal marks a 2×2
    // block holding a complex-conjugate eigenvalue pair.
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let two = i + 1 < n
            && t[(i + 1, i)].abs() > f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs());
        if two {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }

    // Back-substitution over blocks, bottom-right to top-left:
    //   T_II·Y_IJ + Y_IJ·T_JJᵀ = C_IJ − Σ_{K>I} T_IK·Y_KJ − Σ_{K>J} Y_IK·T_JKᵀ
    let nb = blocks.len();
    let mut y = DMatrix::<f64>::zeros(n, n);
    for bi in (0..nb).rev() {
        for bj in (0..nb).rev() {
            let (i0, p) = blocks[bi];
            let (j0, qn) = blocks[bj];
            let mut rhs = c.view((i0, j0), (p, qn)).clone_owned();
            for &(k0, r) in &blocks[bi + 1..] {
                rhs -= t.view((i0, k0), (p, r)) * y.view((k0, j0), (r, qn));
            }
            for &(k0, r) in &blocks[bj + 1..] {
                rhs -= y.view((i0, k0), (p, r)) * t.view((j0, k0), (qn, r)).transpose();
            }
            let tii = t.view((i0, i0), (p, p)).clone_owned();
            let tjj = t.view((j0, j0), (qn, qn)).clone_owned();
            let small = DMatrix::<f64>::identity(qn, qn).kronecker(&tii)
                + tjj.kronecker(&DMatrix::<f64>::identity(p, p));
            let x = small
                .lu()
                .solve(&DVector::from_column_slice(rhs.as_slice()))
                .ok_or(Error::LinearSolveFailure)?;
            y.view_mut((i0, j0), (p, qn))
                .copy_from(&DMatrix::from_column_slice(p, qn, x.as_slice()));
        }
    }

    let v = &q * y * q.transpose();
    Ok((&v + &v.transpose()) * 0.5)
}

/// Extract the 4×4 covariance matrix of two modes from the full 8×8 one.
///
/// `mode_a` and `mode_b` index the fixed mode ordering (see [`OPTICAL_L`]
/// etc.); the result keeps the two quadratures of `mode_a` first.
pub fn reduce_cm(v: &Matrix8, mode_a: usize, mode_b: usize) -> Result<Matrix4> {
    if mode_a >= 4 || mode_b >= 4 || mode_a == mode_b {
        return Err(Error::InvalidModePair(mode_a, mode_b));
    }
    let rows = [2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1];
    Ok(Matrix4::from_fn(|i, j| v[(rows[i], rows[j])]))
}

fn det2(m: &Matrix2) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

fn block(v: &Matrix4, row: usize, col: usize) -> Matrix2 {
    Matrix2::from_fn(|i, j| v[(row + i, col + j)])
}

/// Symplectic eigenvalues (ν⁻, ν⁺) of a two-mode covariance matrix itself
/// (no partial transpose), from the closed form
/// ν∓² = (Σ̃ ∓ √(Σ̃² − 4·det V))/2 with Σ̃ = det𝒜 + detℬ + 2·det𝒞.
///
/// The minus branch is evaluated as det V/ν⁺² to dodge the cancellation the
/// printed form suffers near pure states.
pub fn symplectic_eigenvalues_two_mode(v: &Matrix4) -> (f64, f64) {
    let (det_a, det_b, det_c, det_v) = two_mode_dets(v);
    let sigma = det_a + det_b + 2.0 * det_c;
    split_symplectic_pair(sigma, det_v)
}

/// (ν⁻, ν⁺) from the invariants Σ = ν⁻² + ν⁺² and det V = ν⁻²·ν⁺².
fn split_symplectic_pair(sigma: f64, det_v: f64) -> (f64, f64) {
    let disc = clamp_tiny_negative(sigma * sigma - 4.0 * det_v, sigma * sigma);
    let nu_plus_sq = ((sigma + disc.max(0.0).sqrt()) / 2.0).max(0.0);
    let nu_minus_sq = if nu_plus_sq > 0.0 {
        (det_v / nu_plus_sq).max(0.0)
    } else {
        0.0
    };
    (nu_minus_sq.sqrt(), nu_plus_sq.sqrt())
}

fn two_mode_dets(v: &Matrix4) -> (f64, f64, f64, f64) {
    let a = block(v, 0, 0);
    let b = block(v, 2, 2);
    let c = block(v, 0, 2);
    (det2(&a), det2(&b), det2(&c), v.determinant())
}

fn clamp_tiny_negative(x: f64, scale: f64) -> f64 {
    if x < 0.0 && x > -1e-12 * scale.max(1.0) {
        0.0
    } else {
        x
    }
}

/// Minimum symplectic eigenvalue of the partial transpose of a two-mode
/// covariance matrix:
///
/// ν⁻ = 2^{-1/2}·√(Σ − √(Σ² − 4·det V)), Σ = det𝒜 + detℬ − 2·det𝒞.
///
/// ν⁻ < 1/2 certifies entanglement of the bipartition. Rejects matrices
/// that are not themselves physical states.
pub fn symplectic_min_eigenvalue(v: &Matrix4) -> Result<f64> {
    let asym = (v - v.transpose()).amax();
    if asym > 1e-9 * v.amax().max(1.0) {
        return Err(Error::invalid(
            "covariance",
            format!("matrix is not symmetric (max asymmetry {asym:.3e})"),
        ));
    }
    let nus = symplectic_eigenvalues(&DMatrix::from_column_slice(4, 4, v.as_slice()))?;
    if nus[0] < 0.5 - 1e-9 {
        return Err(Error::NonPhysicalCovariance { nu_min: nus[0] });
    }
    Ok(symplectic_min_eigenvalue_unchecked(v))
}

/// ν⁻ of the partial transpose without the physicality gate.
///
/// The cascaded model keeps the fiber link in the drift matrix but not in
/// the noise correlations, so its steady-state covariances can dip below
/// the two-mode Heisenberg bound. Entanglement is still read off the
/// partial transpose in the usual way; callers who want the strict gate use
/// [`symplectic_min_eigenvalue`].
pub fn symplectic_min_eigenvalue_unchecked(v: &Matrix4) -> f64 {
    let (det_a, det_b, det_c, det_v) = two_mode_dets(v);
    let sigma = det_a + det_b - 2.0 * det_c;
    let (nu_minus, _) = split_symplectic_pair(sigma, det_v);
    nu_minus
}

/// Entanglement of one bipartition: ν⁻ and E_N = max(0, −ln 2ν⁻).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult {
    pub nu_minus: f64,
    pub log_negativity: f64,
}

pub fn log_negativity(v: &Matrix4) -> Result<EntanglementResult> {
    let nu_minus = symplectic_min_eigenvalue(v)?;
    Ok(EntanglementResult {
        nu_minus,
        log_negativity: (-(2.0 * nu_minus).ln()).max(0.0),
    })
}

/// E_N without the physicality gate; see
/// [`symplectic_min_eigenvalue_unchecked`].
pub fn log_negativity_unchecked(v: &Matrix4) -> EntanglementResult {
    let nu_minus = symplectic_min_eigenvalue_unchecked(v);
    EntanglementResult {
        nu_minus,
        log_negativity: (-(2.0 * nu_minus).ln()).max(0.0),
    }
}

/// Symplectic eigenvalues of an arbitrary even-dimensional symmetric
/// covariance matrix, sorted ascending.
///
/// Computed as the paired singular values of the antisymmetric matrix
/// V^{1/2}·Ω·V^{1/2}. This stays accurate for (near-)degenerate spectra,
/// where the modulus-of-eigenvalue route loses half the digits.
/// Indefinite input (negative variance directions) is rejected.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = v.nrows();
    assert!(n.is_multiple_of(2) && v.ncols() == n, "need an even square matrix");
    let sym = (v + v.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let mut roots = eig.eigenvalues.clone();
    for lambda in roots.iter_mut() {
        if *lambda < -1e-9 * max_eig.max(1.0) {
            return Err(Error::NonPhysicalCovariance { nu_min: *lambda });
        }
        *lambda = lambda.max(0.0).sqrt();
    }
    let sqrt_v = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();

    // Ω applied from the left: (ΩM) swaps quadrature rows with a sign.
    let omega_m = {
        let mut out = DMatrix::<f64>::zeros(n, n);
        for m in 0..n / 2 {
            for j in 0..n {
                out[(2 * m, j)] = sqrt_v[(2 * m + 1, j)];
                out[(2 * m + 1, j)] = -sqrt_v[(2 * m, j)];
            }
        }
        out
    };
    let core = &sqrt_v * omega_m;
    let anti = (&core - core.transpose()) * 0.5;
    let mut sv: Vec<f64> = anti.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // singular values of an antisymmetric matrix pair up as (ν, ν)
    Ok(sv.chunks(2).map(|pair| (pair[0] + pair[1]) / 2.0).collect())
}

/// Heisenberg-bound check: V must be positive semidefinite with every
/// symplectic eigenvalue ≥ 1/2 − 10⁻⁹.
pub fn physicality_check(v: &DMatrix<f64>) -> bool {
    match symplectic_eigenvalues(v) {
        Ok(nus) => nus.iter().all(|&nu| nu >= 0.5 - 1e-9),
        Err(_) => false,
    }
}

/// Convenience wrapper for the 8×8 pipeline output.
pub fn physicality_check_8(v: &Matrix8) -> bool {
    physicality_check(&DMatrix::from_column_slice(8, 8, v.as_slice()))
}

/// Reference state: two-mode squeezed covariance matrix with squeezing
/// parameter r (ν⁻ = e^{−2r}/2, E_N = 2r).
pub fn two_mode_squeezed(r: f64) -> Matrix4 {
    let ch = (2.0 * r).cosh() / 2.0;
    let sh = (2.0 * r).sinh() / 2.0;
    Matrix4::from_fn(|i, j| match (i, j) {
        (0, 0) | (1, 1) | (2, 2) | (3, 3) => ch,
        (0, 2) | (2, 0) => sh,
        (1, 3) | (3, 1) => -sh,
        _ => 0.0,
    })
}

/// Gaussian Wigner density of a two-mode state at phase-space point ψ:
/// W(ψ) = exp(−½·ψᵀV⁻¹ψ) / ((2π)²·√det V).
///
/// Normalized so that ∫W d⁴ψ = 1; the vacuum peak is 1/π².
pub fn wigner_density(v: &Matrix4, psi: &Vector4) -> Result<f64> {
    let det = v.determinant();
    if det.abs() < 1e-300 {
        return Err(Error::SingularCovariance { det });
    }
    let inv = v.try_inverse().ok_or(Error::SingularCovariance { det })?;
    let quad = (psi.transpose() * inv * psi)[(0, 0)];
    Ok((-0.5 * quad).exp() / (std::f64::consts::TAU.powi(2) * det.sqrt()))
}

/// Sampling grid for Wigner projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per axis.
    pub points: usize,
    /// Half-width in units of the larger marginal standard deviation.
    pub half_width_sigmas: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 201,
            half_width_sigmas: 4.0,
        }
    }
}

/// 1/e contour of a 2D Gaussian marginal: the ellipse ψᵀ(V₂)⁻¹ψ = 2.
/// A vacuum marginal gives the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseContour {
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis against the first quadrature (rad).
    pub angle: f64,
}

impl EllipseContour {
    fn from_marginal(v2: &Matrix2) -> Self {
        let (a, b, c) = (v2[(0, 0)], v2[(0, 1)], v2[(1, 1)]);
        let mean = (a + c) / 2.0;
        let half = ((a - c) / 2.0).hypot(b);
        let lambda_max = mean + half;
        let lambda_min = (mean - half).max(0.0);
        EllipseContour {
            semi_major: (2.0 * lambda_max).sqrt(),
            semi_minor: (2.0 * lambda_min).sqrt(),
            angle: 0.5 * (2.0 * b).atan2(a - c),
        }
    }
}

/// Marginal Wigner distribution of one quadrature pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerProjection {
    /// Quadrature indices within the reduced (q_l, p_l, q_r, p_r) ordering.
    pub pair: (usize, usize),
    /// 2×2 marginal covariance matrix.
    pub marginal: Matrix2,
    /// Grid coordinates along the first and second quadrature.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Normalized density, row-major with the y index outermost:
    /// `density[iy * xs.len() + ix]`.
    pub density: Vec<f64>,
    pub contour: EllipseContour,
    /// Radius of the vacuum 1/e reference circle.
    pub vacuum_radius: f64,
}

/// Project the two-mode Wigner function onto one quadrature pair.
///
/// Marginalizing a Gaussian keeps the corresponding covariance submatrix;
/// the grid samples the normalized 2D density and the 1/e contour is
/// reported analytically.
pub fn wigner_projection(v: &Matrix4, pair: (usize, usize), grid: &GridSpec) -> Result<WignerProjection> {
    let (i, j) = pair;
    if i >= 4 || j >= 4 || i == j {
        return Err(Error::InvalidModePair(i, j));
    }
    let marginal = Matrix2::new(v[(i, i)], v[(i, j)], v[(j, i)], v[(j, j)]);
    let det = det2(&marginal);
    if det.abs() < 1e-300 {
        return Err(Error::SingularCovariance { det });
    }
    let inv = marginal
        .try_inverse()
        .ok_or(Error::SingularCovariance { det })?;

    let sigma = marginal[(0, 0)].max(marginal[(1, 1)]).sqrt();
    let half = grid.half_width_sigmas * sigma;
    let n = grid.points.max(2);
    let coord = |k: usize| -half + 2.0 * half * (k as f64) / ((n - 1) as f64);
    let xs: Vec<f64> = (0..n).map(coord).collect();
    let ys = xs.clone();

    let norm = 1.0 / (std::f64::consts::TAU * det.sqrt());
    let mut density = Vec::with_capacity(n * n);
    for &y in &ys {
        for &x in &xs {
            let quad = inv[(0, 0)] * x * x + 2.0 * inv[(0, 1)] * x * y + inv[(1, 1)] * y * y;
            density.push(norm * (-0.5 * quad).exp());
        }
    }

    Ok(WignerProjection {
        pair,
        marginal,
        xs,
        ys,
        density,
        contour: EllipseContour::from_marginal(&marginal),
        vacuum_radius: 1.0,
    })
}

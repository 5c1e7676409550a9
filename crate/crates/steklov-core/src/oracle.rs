//! Legendre-matrix reference solver for axisymmetric Steklov–Neumann
//! eigenvalues with one polar patch, or two patches at opposite poles.
//!
//! An axisymmetric harmonic function `Σ c_n rⁿ P_n(cos θ)` satisfies the
//! patch condition when `m c_m = σ Σ_n K_{m,n} c_n`.  After eliminating `c₀`
//! the truncated system is `M c = c/μ`, where `μ` is the eigenvalue of
//! `∂_n u = μ u` on the patches.  The SN eigenvalue is `σ = εμ`, with `ε` the
//! largest patch angle (patch radii are measured in units of the largest).  Writing `K_{m,n} = (m+½) S_{m,n}`
//! with `S` a Gram matrix shows that `M` is similar to a symmetric positive
//! semidefinite matrix, which is what gets diagonalized.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::gauss_legendre;
use crate::specfun::{legendre_p_signed, legendre_table};
use crate::sphere_geometry::chord_from_angle;
use crate::{Error, Result};

/// Smallest truncation accepted by [`sn_oracle`].
pub const MIN_N_MAX: usize = 100;
/// Eigenvalues `β = 1/μ` below this fraction of the largest are discarded.
pub const BETA_FLOOR: f64 = 1e-13;

/// Eigenvalues and provenance of one oracle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Smallest positive SN eigenvalues `σ = εμ`, ascending.
    pub eigenvalues: Vec<f64>,
    /// The same eigenvalues before scaling, `μ = σ/ε`.
    pub flux_eigenvalues: Vec<f64>,
    /// `ε`: the largest patch angle.
    pub epsilon: f64,
    pub n_max: usize,
    /// Patch half-opening angles (north patch first).
    pub patch_angles: Vec<f64>,
    /// The same patch sizes as chord lengths `2 sin(θ/2)`.
    pub patch_chords: Vec<f64>,
    pub diagnostics: OracleDiagnostics,
}

/// Checks on the eigen-solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDiagnostics {
    /// `|Σβ − tr M| / tr M`.
    pub trace_defect: f64,
    /// Eigenvalues dropped as numerically zero or negative.
    pub discarded: usize,
    /// Most negative `β` seen (round-off scale for a semidefinite matrix).
    pub min_beta: f64,
    /// Largest `|Im β|` seen; zero for the symmetric path.
    pub max_imaginary: f64,
    /// Largest shift applied by truncation extrapolation, if any.
    pub extrapolation_correction: Option<f64>,
}

/// `A_k = Γ(k+½)/(√π Γ(k+1))` for `k = 0..=k_max`.
pub fn a_sequence(k_max: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(k_max + 1);
    a.push(1.0);
    for k in 1..=k_max {
        let prev = a[k - 1];
        a.push(prev * (k as f64 - 0.5) / k as f64);
    }
    a
}

fn check_angle(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(Error::Domain(format!("patch angle must lie in (0, π), got {eps}")));
    }
    Ok(())
}

/// `K_{m,n}(ε) = (m+½)∫₀^ε P_m(cos θ)P_n(cos θ) sin θ dθ` by Gauss–Legendre
/// quadrature in `x = cos θ`, exact up to round-off.
pub fn k_element(m: usize, n: usize, eps: f64) -> Result<f64> {
    check_angle(eps)?;
    let q = (m + n) / 2 + 1;
    let (t, w) = gauss_legendre(q);
    // [cos ε, 1] has length 1 − cos ε = 2 sin²(ε/2).
    let h = (eps / 2.0).sin().powi(2);
    let mut s = 0.0;
    for (tj, wj) in t.iter().zip(&w) {
        let x = 1.0 - h * (1.0 - tj);
        s += wj * legendre_p_signed(m as i64, x)? * legendre_p_signed(n as i64, x)?;
    }
    Ok((m as f64 + 0.5) * h * s)
}

/// The closed-form sum over `B_{mn}^k` for the same element.  That sum is
/// the plain overlap `∫ P_m P_n dx` (the product-linearization formula), so
/// the weight `m+½` is applied here to match the defining integral.
pub fn k_element_closed_form(m: usize, n: usize, eps: f64) -> Result<f64> {
    check_angle(eps)?;
    let a = a_sequence(m + n);
    let z = eps.cos();
    let mut s = 0.0;
    for k in 0..=m.min(n) {
        let l = (m + n - 2 * k) as i64;
        let b = a[k] * a[m - k] * a[n - k] / a[m + n - k] * (2 * (m + n) - 4 * k + 1) as f64
            / (2 * (m + n) - 2 * k + 1) as f64;
        s += b * (legendre_p_signed(l - 1, z)? - legendre_p_signed(l + 1, z)?) / (2 * l + 1) as f64;
    }
    Ok((m as f64 + 0.5) * s)
}

/// Two-patch element: north patch of angle `e1` and south patch of angle `e2`.
pub fn k_element_two(m: usize, n: usize, e1: f64, e2: f64) -> Result<f64> {
    let sign = if (m + n).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(k_element(m, n, e1)? + sign * k_element(m, n, e2)?)
}

/// Gram matrix `S_{m,n} = ∫_patches P_m P_n dx` for `m, n = 0..=n_max`.
fn gram_matrix(angles: &[f64], n_max: usize) -> Result<DMatrix<f64>> {
    let q = n_max + 1;
    let (t, w) = gauss_legendre(q);
    let mut nodes = Vec::with_capacity(q * angles.len());
    let mut weights = Vec::with_capacity(q * angles.len());
    for (p, eps) in angles.iter().enumerate() {
        let h = (eps / 2.0).sin().powi(2);
        let sign = if p == 0 { 1.0 } else { -1.0 };
        for (tj, wj) in t.iter().zip(&w) {
            nodes.push(sign * (1.0 - h * (1.0 - tj)));
            weights.push(h * wj);
        }
    }
    let cols: Vec<Vec<f64>> = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(x, wt)| -> Result<Vec<f64>> {
            let p = legendre_table(n_max, *x)?;
            Ok(p.into_iter().map(|v| v * wt.sqrt()).collect())
        })
        .collect::<Result<_>>()?;
    let n_nodes = cols.len();
    let mut pw = DMatrix::<f64>::zeros(n_max + 1, n_nodes);
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            pw[(i, j)] = *v;
        }
    }
    Ok(&pw * pw.transpose())
}

/// Symmetrized, `c₀`-eliminated matrix whose eigenvalues are `1/μ`, plus the
/// diagonal similarity factors.
fn reduced_matrix(angles: &[f64], n_max: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let s = gram_matrix(angles, n_max)?;
    let s00 = s[(0, 0)];
    let scale: Vec<f64> = (1..=n_max).map(|m| ((m as f64 + 0.5) / m as f64).sqrt()).collect();
    let mut b = DMatrix::<f64>::zeros(n_max, n_max);
    for i in 0..n_max {
        for j in 0..n_max {
            let v = s[(i + 1, j + 1)] - s[(i + 1, 0)] * s[(0, j + 1)] / s00;
            b[(i, j)] = scale[i] * v * scale[j];
        }
    }
    Ok((b, scale))
}

fn validate(angles: &[f64], n_max: usize, n_eigs: usize) -> Result<()> {
    if angles.is_empty() || angles.len() > 2 {
        return Err(Error::InvalidInput(format!("the oracle handles one or two polar patches, got {}", angles.len())));
    }
    for e in angles {
        check_angle(*e)?;
    }
    if angles.len() == 2 && angles[0] + angles[1] >= std::f64::consts::PI {
        return Err(Error::Domain("the two polar patches overlap".into()));
    }
    if n_max < MIN_N_MAX {
        return Err(Error::InvalidInput(format!("n_max must be at least {MIN_N_MAX}, got {n_max}")));
    }
    if n_eigs == 0 {
        return Err(Error::InvalidInput("n_eigs must be positive".into()));
    }
    Ok(())
}

fn finish(
    angles: &[f64],
    n_max: usize,
    n_eigs: usize,
    betas: Vec<f64>,
    trace: f64,
    max_imag: f64,
) -> Result<OracleResult> {
    let beta_max = betas.iter().copied().fold(0.0f64, f64::max);
    let min_beta = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let trace_defect = (betas.iter().sum::<f64>() - trace).abs() / trace.abs().max(f64::MIN_POSITIVE);
    let mut kept: Vec<f64> = betas.into_iter().filter(|b| *b > BETA_FLOOR * beta_max).collect();
    let discarded = n_max - kept.len();
    kept.sort_by(|a, b| b.total_cmp(a));
    if kept.len() < n_eigs {
        return Err(Error::Convergence(format!(
            "only {} positive eigenvalues available, {} requested",
            kept.len(),
            n_eigs
        )));
    }
    let flux: Vec<f64> = kept.iter().take(n_eigs).map(|b| 1.0 / b).collect();
    let epsilon = angles.iter().copied().fold(0.0, f64::max);
    Ok(OracleResult {
        eigenvalues: flux.iter().map(|m| epsilon * m).collect(),
        flux_eigenvalues: flux,
        epsilon,
        n_max,
        patch_angles: angles.to_vec(),
        patch_chords: angles.iter().map(|a| chord_from_angle(*a)).collect::<Result<_>>()?,
        diagnostics: OracleDiagnostics {
            trace_defect,
            discarded,
            min_beta,
            max_imaginary: max_imag,
            extrapolation_correction: None,
        },
    })
}

/// The `n_eigs` smallest positive SN eigenvalues for polar patches of the
/// given half-opening angles (`[north]` or `[north, south]`), truncating the
/// Legendre expansion at degree `n_max`.
pub fn sn_oracle(angles: &[f64], n_max: usize, n_eigs: usize) -> Result<OracleResult> {
    validate(angles, n_max, n_eigs)?;
    let (b, _) = reduced_matrix(angles, n_max)?;
    let trace = b.trace();
    let betas: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    finish(angles, n_max, n_eigs, betas, trace, 0.0)
}

/// Runs [`sn_oracle`] at `n_max` and `2·n_max` and removes the leading
/// `O(n_max⁻²)` truncation error by Richardson extrapolation.  The reported
/// `n_max` is the larger truncation; `trace_defect` is the worse of the two
/// and `extrapolation_correction` records the largest shift.
pub fn sn_oracle_extrapolated(angles: &[f64], n_max: usize, n_eigs: usize) -> Result<OracleResult> {
    let coarse = sn_oracle(angles, n_max, n_eigs)?;
    let mut fine = sn_oracle(angles, 2 * n_max, n_eigs)?;
    let mut correction = 0.0f64;
    for (f, c) in fine.eigenvalues.iter_mut().zip(&coarse.eigenvalues) {
        let delta = (*f - c) / 3.0;
        correction = correction.max(delta.abs());
        *f += delta;
    }
    for (f, c) in fine.flux_eigenvalues.iter_mut().zip(&coarse.flux_eigenvalues) {
        *f += (*f - c) / 3.0;
    }
    fine.diagnostics.trace_defect = fine.diagnostics.trace_defect.max(coarse.diagnostics.trace_defect);
    fine.diagnostics.extrapolation_correction = Some(correction);
    Ok(fine)
}

/// Same eigenvalues from the unsymmetrized matrix `M` through a real Schur
/// decomposition; eigenvalues with imaginary part above `1e−8` or nonpositive
/// real part are dropped.  Cubic cost with a large constant, meant for
/// cross-checks at moderate `n_max`.
pub fn sn_oracle_nonsymmetric(angles: &[f64], n_max: usize, n_eigs: usize) -> Result<OracleResult> {
    validate(angles, n_max, n_eigs)?;
    let (b, scale) = reduced_matrix(angles, n_max)?;
    // M = D B D⁻¹ with D = diag(scale).
    let mut m = b;
    for i in 0..n_max {
        for j in 0..n_max {
            m[(i, j)] *= scale[i] / scale[j];
        }
    }
    let trace = m.trace();
    let eig = m
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| Error::Convergence("Schur decomposition did not converge".into()))?
        .complex_eigenvalues();
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let betas: Vec<f64> = eig.iter().filter(|z| z.im.abs() <= 1e-8).map(|z| z.re).collect();
    let dropped = n_max - betas.len();
    let mut out = finish(angles, n_max - dropped, n_eigs, betas, trace, max_imag)?;
    out.n_max = n_max;
    out.diagnostics.discarded += dropped;
    Ok(out)
}

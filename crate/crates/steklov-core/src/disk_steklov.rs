//! Local exterior Steklov problem on a flat disk patch and every
//! reactivity-dependent patch quantity derived from its spectrum.
//!
//! The integral eigenproblem
//! `∫₀^a k(r,r′) ψ(r′) r′ dr′ = μ⁻¹ ψ(r)` with the axisymmetric kernel
//! `k(r,r′) = 2K(2√(rr′)/(r+r′)) / (π(r+r′))` is discretized by a Nyström
//! scheme in the variable `ν = √(1 − r²/a²)`, in which the eigenfunctions are
//! analytic up to both the rim (`ν = 0`) and the center (`ν = 1`).  The
//! logarithmic part of the kernel is integrated by product weights on the
//! self and neighbouring panels; panels are graded geometrically toward both
//! ends of `[0, 1]`.
//!
//! Elliptic integrals use the modulus convention throughout.

use crate::error::{Error, Result};
use crate::quadrature::{cumulative_trapezoid, log_product_weights, CompositeRule};
use crate::reactivity::Reactivity;
use crate::specfun::{elliptic_e, elliptic_k_from_complement};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Gauss points per panel of the radial grid.
pub const PANEL_ORDER: usize = 16;
/// Default number of retained modes for reference models.
pub const DEFAULT_N_MODES: usize = 64;
/// Default total number of radial quadrature nodes.
pub const DEFAULT_N_QUAD: usize = 800;
/// Relative distance (in units of `μ₀`) below which `κ` counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-6;
/// Step of the radial trapezoid rule used for the monopole coefficient.
pub const MONOPOLE_STEP: f64 = 1e-4;
/// Upper reactivity (in units of `1/a`) for which the charge-density series
/// is considered reliable.
pub const CHARGE_DENSITY_KAPPA_MAX: f64 = 500.0;
/// Format tag written into serialized spectra.
pub const SPECTRUM_FORMAT_VERSION: u32 = 1;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Axisymmetric spectrum of the local Steklov problem for a disk of radius `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSteklovSpectrum {
    pub version: u32,
    pub radius: f64,
    pub n_quad: usize,
    /// Panel breakpoints in `ν ∈ [0, 1]`.
    pub breaks: Vec<f64>,
    /// Eigenvalues `μ_k`, increasing.
    pub mu: Vec<f64>,
    /// Weights `d_k = 2π∫ψ_k r dr ≥ 0`.
    pub d: Vec<f64>,
    /// `ψ_k` sampled at the Nyström nodes (ordered by increasing `ν`).
    pub psi: Vec<Vec<f64>>,
    #[serde(skip)]
    rule: Option<CompositeRule>,
}

/// Breakpoints graded geometrically toward `ν = 0` and `ν = 1`.
fn graded_breaks(n_panels: usize) -> Vec<f64> {
    let levels = ((n_panels.saturating_sub(2)) / 4).clamp(1, 13);
    let n_mid = n_panels.saturating_sub(2 * (levels + 1)).max(1);
    let s = 0.25;
    let mut b = vec![0.0];
    for l in (1..=levels).rev() {
        b.push(s * 0.5f64.powi(l as i32));
    }
    for m in 0..=n_mid {
        b.push(s + (1.0 - 2.0 * s) * m as f64 / n_mid as f64);
    }
    for l in 1..=levels {
        b.push(1.0 - s * 0.5f64.powi(l as i32));
    }
    b.push(1.0);
    b
}

/// Nodes of the rule together with `1 − ν`, formed without cancellation.
fn nodes_and_complements(rule: &CompositeRule) -> (Vec<f64>, Vec<f64>) {
    let mut nu = Vec::with_capacity(rule.nodes.len());
    let mut om = Vec::with_capacity(rule.nodes.len());
    for p in &rule.panels {
        let h = p.half_width();
        let c_om = 0.5 * ((1.0 - p.lo) + (1.0 - p.hi));
        for t in &rule.ref_nodes {
            nu.push(p.center() + h * t);
            om.push(c_om - h * t);
        }
    }
    (nu, om)
}

impl DiskSteklovSpectrum {
    /// Solves the discretized eigenproblem and keeps the `n_modes` smallest
    /// eigenvalues.  `n_quad` is rounded down to a multiple of the panel order.
    pub fn solve(a: f64, n_modes: usize, n_quad: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(format!("disk radius must be positive, got {a}")));
        }
        if n_modes == 0 {
            return Err(Error::InvalidInput("n_modes must be at least 1".into()));
        }
        if n_quad < 4 * n_modes {
            return Err(Error::InvalidInput(format!("n_quad = {n_quad} must be at least 4·n_modes = {}", 4 * n_modes)));
        }
        let n_panels = (n_quad / PANEL_ORDER).max(4);
        let breaks = graded_breaks(n_panels);
        let rule = CompositeRule::from_breaks(&breaks, PANEL_ORDER);
        let n = rule.nodes.len();
        if n < n_modes {
            return Err(Error::InvalidInput("grid too coarse for requested modes".into()));
        }
        let (nu, om) = nodes_and_complements(&rule);
        let a2 = a * a;
        let r: Vec<f64> = nu.iter().zip(&om).map(|(v, o)| a * (o * (1.0 + v)).sqrt()).collect();
        let node_panel: Vec<usize> =
            rule.panels.iter().enumerate().flat_map(|(p, _)| std::iter::repeat_n(p, PANEL_ORDER)).collect();

        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; n];
                let pi_ = node_panel[i];
                for (q, panel) in rule.panels.iter().enumerate() {
                    let near = q + 1 >= pi_ && q <= pi_ + 1;
                    let logw = if near { Some(log_product_weights(&rule, q, nu[i])) } else { None };
                    for jj in 0..PANEL_ORDER {
                        let j = panel.first + jj;
                        let rs = r[i] + r[j];
                        let w = rule.weights[j];
                        if i == j {
                            let lam = -a2 * nu[i] / (PI * r[i]);
                            let sig = a2 * nu[i] / (PI * r[i]) * (8.0 * r[i] * r[i] / (nu[i] * a2)).ln();
                            row[j] = w * sig + logw.as_ref().unwrap()[jj] * lam;
                            continue;
                        }
                        let dr = (a2 * (nu[j] - nu[i]) * (nu[j] + nu[i]) / rs).abs();
                        let kp = dr / rs;
                        let k = 2.0 * (r[i] * r[j]).sqrt() / rs;
                        let big_k = elliptic_k_from_complement(kp);
                        let full = 2.0 / (PI * rs) * big_k * a2 * nu[j];
                        match &logw {
                            Some(lw) => {
                                let kk_comp = elliptic_k_from_complement(k);
                                let lam = -4.0 * a2 * nu[j] * kk_comp / (PI * PI * rs);
                                let sig = full - lam * (nu[i] - nu[j]).abs().ln();
                                row[j] = w * sig + lw[jj] * lam;
                            }
                            None => row[j] = w * full,
                        }
                    }
                }
                row
            })
            .collect();

        // Symmetrize with the measure ω_j = a² ν_j w_j.
        let omega: Vec<f64> = (0..n).map(|j| a2 * nu[j] * rule.weights[j]).collect();
        let sq: Vec<f64> = omega.iter().map(|v| v.sqrt()).collect();
        let b = DMatrix::from_fn(n, n, |i, j| {
            let bij = sq[i] * rows[i][j] / sq[j];
            let bji = sq[j] * rows[j][i] / sq[i];
            0.5 * (bij + bji)
        });
        let eig = b.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

        let mut mu = Vec::with_capacity(n_modes);
        let mut d = Vec::with_capacity(n_modes);
        let mut psi = Vec::with_capacity(n_modes);
        let norm = (2.0 * PI).sqrt();
        for &idx in order.iter().take(n_modes) {
            let lam = eig.eigenvalues[idx];
            if !(lam > 0.0) {
                return Err(Error::Convergence(format!(
                    "only {} positive eigenvalues found, {} requested",
                    mu.len(),
                    n_modes
                )));
            }
            let v = eig.eigenvectors.column(idx);
            let mut dk: f64 = (0..n).map(|j| sq[j] * v[j]).sum::<f64>() * norm;
            let sign = if dk < 0.0 { -1.0 } else { 1.0 };
            dk *= sign;
            let p: Vec<f64> = (0..n).map(|j| sign * v[j] / (norm * sq[j])).collect();
            mu.push(1.0 / lam);
            d.push(dk);
            psi.push(p);
        }
        Ok(DiskSteklovSpectrum {
            version: SPECTRUM_FORMAT_VERSION,
            radius: a,
            n_quad: n,
            breaks,
            mu,
            d,
            psi,
            rule: Some(rule),
        })
    }

    /// Reference unit-disk spectrum with the default truncation.
    pub fn unit_default() -> Result<Self> {
        Self::solve(1.0, DEFAULT_N_MODES, DEFAULT_N_QUAD)
    }

    pub fn n_modes(&self) -> usize {
        self.mu.len()
    }

    fn rule(&self) -> CompositeRule {
        match &self.rule {
            Some(r) => r.clone(),
            None => CompositeRule::from_breaks(&self.breaks, PANEL_ORDER),
        }
    }

    fn ensure_rule(&mut self) {
        if self.rule.is_none() {
            self.rule = Some(CompositeRule::from_breaks(&self.breaks, PANEL_ORDER));
        }
    }

    /// Dilates the spectrum to radius `new_a`: `μ → μ/s`, `d → s·d`,
    /// `ψ(r) → ψ(r/s)/s` with `s = new_a / a`.
    pub fn scaled(&self, new_a: f64) -> Result<Self> {
        if !(new_a > 0.0) || !new_a.is_finite() {
            return Err(Error::InvalidInput(format!("disk radius must be positive, got {new_a}")));
        }
        let s = new_a / self.radius;
        let mut out = self.clone();
        out.radius = new_a;
        out.mu.iter_mut().for_each(|m| *m /= s);
        out.d.iter_mut().for_each(|v| *v *= s);
        out.psi.iter_mut().for_each(|p| p.iter_mut().for_each(|v| *v /= s));
        Ok(out)
    }

    /// Keeps only the first `n` modes.
    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.clone();
        let n = n.min(self.n_modes());
        out.mu.truncate(n);
        out.d.truncate(n);
        out.psi.truncate(n);
        out
    }

    /// Radii `r_j` of the Nyström nodes.
    pub fn node_radii(&self) -> Vec<f64> {
        let rule = self.rule();
        let (nu, om) = nodes_and_complements(&rule);
        nu.iter().zip(&om).map(|(v, o)| self.radius * (o * (1.0 + v)).sqrt()).collect()
    }

    /// Area weights `r_j dr_j` of the Nyström nodes, so that
    /// `∫₀^a f r dr ≈ Σ_j weights_j f(r_j)`.
    pub fn node_area_weights(&self) -> Vec<f64> {
        let rule = self.rule();
        let a2 = self.radius * self.radius;
        rule.nodes.iter().zip(&rule.weights).map(|(v, w)| a2 * v * w).collect()
    }

    /// Lagrange interpolation data at radius `r` (`0 ≤ r ≤ a`).
    fn basis(&self, r: f64) -> (usize, Vec<f64>) {
        let x = (r / self.radius).clamp(0.0, 1.0);
        let nu = ((1.0 - x) * (1.0 + x)).sqrt();
        match &self.rule {
            Some(rule) => rule.basis_at(nu),
            None => self.rule().basis_at(nu),
        }
    }

    /// `ψ_k(r)` for every retained mode.
    pub fn psi_all(&self, r: f64) -> Vec<f64> {
        let (first, basis) = self.basis(r);
        self.psi.iter().map(|p| basis.iter().enumerate().map(|(j, b)| b * p[first + j]).sum()).collect()
    }

    /// `ψ_k(r)` for a single mode.
    pub fn psi_at(&self, k: usize, r: f64) -> f64 {
        let (first, basis) = self.basis(r);
        basis.iter().enumerate().map(|(j, b)| b * self.psi[k][first + j]).sum()
    }

    /// `Σ_k d_k²`, which equals `πa²` for the untruncated spectrum.
    pub fn weight_sum(&self) -> f64 {
        self.d.iter().map(|v| v * v).sum()
    }

    /// Largest retained eigenvalue.
    pub fn mu_max(&self) -> f64 {
        *self.mu.last().expect("non-empty spectrum")
    }

    /// Checks that `κ` is not within tolerance of a pole `−μ_k` with `d_k ≠ 0`.
    pub fn check_pole(&self, kappa: f64) -> Result<()> {
        let tol = POLE_TOLERANCE * self.mu[0];
        for (m, dk) in self.mu.iter().zip(&self.d) {
            if (kappa + m).abs() < tol && dk.abs() > 1e-12 {
                return Err(Error::Pole { kappa, pole: -m });
            }
        }
        Ok(())
    }

    /// Writes the spectrum to a JSON file; floats round-trip exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Reads a spectrum written by [`DiskSteklovSpectrum::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: DiskSteklovSpectrum = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if s.version != SPECTRUM_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported spectrum format version {}", s.version)));
        }
        let n = (s.breaks.len().saturating_sub(1)) * PANEL_ORDER;
        if s.mu.len() != s.d.len() || s.psi.len() != s.mu.len() || s.psi.iter().any(|p| p.len() != n) {
            return Err(Error::Parse("inconsistent spectrum dimensions".into()));
        }
        s.ensure_rule();
        Ok(s)
    }

    /// Loads a cached spectrum for `(a, n_modes, n_quad)` from `dir`, solving
    /// and storing it when absent.
    pub fn cached(dir: &Path, a: f64, n_modes: usize, n_quad: usize) -> Result<Self> {
        let name = format!("disk_a{:016x}_m{n_modes}_q{n_quad}_v{SPECTRUM_FORMAT_VERSION}.json", a.to_bits());
        let path = dir.join(name);
        if path.exists() {
            if let Ok(s) = Self::load(&path) {
                return Ok(s);
            }
        }
        let s = Self::solve(a, n_modes, n_quad)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        s.save(&path)?;
        Ok(s)
    }
}

/// How a [`CapacitanceModel`] evaluates patch quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacitanceMode {
    /// Spectral sums over the disk spectrum (reference).
    Spectral,
    /// Closed-form sigmoidal interpolation and the matching heuristic for `E`.
    Sigmoidal,
    /// Small-reactivity Taylor polynomial of the given order (1 to 3).
    Taylor(usize),
    /// Large-reactivity asymptote.
    LargeKappa,
}

/// A value from an approximation together with a validity warning.
#[derive(Debug, Clone, PartialEq)]
pub struct Approx {
    pub value: f64,
    pub warning: Option<String>,
}

/// Reactivity-dependent quantities of a disk patch.
#[derive(Debug, Clone)]
pub struct CapacitanceModel {
    pub spectrum: DiskSteklovSpectrum,
    pub mode: CapacitanceMode,
}

/// `𝒞^app(μ) = 2μ/(πμ + 4)` for the unit disk.
pub fn sigmoidal_unit(mu: f64) -> f64 {
    if mu.is_infinite() {
        2.0 / PI
    } else {
        2.0 * mu / (PI * mu + 4.0)
    }
}

/// Sigmoidal approximation `a·𝒞^app(κa)`.
pub fn capacitance_sigmoidal(a: f64, kappa: Reactivity) -> f64 {
    a * sigmoidal_unit(kappa.as_f64() * a)
}

/// Taylor polynomial `a(c₁κa − c₂(κa)² + c₃(κa)³)` truncated to the
/// supplied coefficients.  Warns when `κa ≥ 0.45`.
pub fn capacitance_taylor(a: f64, coeffs: &[f64], kappa: f64) -> Approx {
    let x = kappa * a;
    let mut v = 0.0;
    let mut p = x;
    let mut sign = 1.0;
    for c in coeffs {
        v += sign * c * p;
        p *= x;
        sign = -sign;
    }
    let warning =
        (x.abs() >= 0.45).then(|| format!("Taylor capacitance used at κa = {x}, outside its accuracy range κa < 0.45"));
    Approx { value: a * v, warning }
}

/// Large-reactivity asymptote
/// `2a/π − 2a(ln(κa) + ln 2 + γ + 1)/(π²κa)`.  Warns when `κa ≤ 10`.
pub fn capacitance_large_kappa(a: f64, kappa: Reactivity) -> Approx {
    let x = kappa.as_f64() * a;
    if x.is_infinite() {
        return Approx { value: 2.0 * a / PI, warning: None };
    }
    let value = 2.0 * a / PI - 2.0 * a * (x.ln() + 2f64.ln() + EULER_GAMMA + 1.0) / (PI * PI * x);
    let warning = (x <= 10.0).then(|| format!("large-κ asymptote used at κa = {x}, outside its range κa > 10"));
    Approx { value, warning }
}

/// Heuristic monopole coefficient of the unit disk,
/// `ℰ^app(μ) = 𝒞^app(μ)²(3/4 − ln 2 + 1/(1/(ln 2 − 5/8) + 5.17 μ^0.81))`.
pub fn monopole_unit_heuristic(mu: f64) -> f64 {
    let c = sigmoidal_unit(mu);
    let tail = if mu.is_infinite() { 0.0 } else { 1.0 / (1.0 / (2f64.ln() - 0.625) + 5.17 * mu.powf(0.81)) };
    c * c * (0.75 - 2f64.ln() + tail)
}

/// Heuristic `E^app = −(a² ln a)/2·𝒞^app(κa)² + a²ℰ^app(κa)`.
pub fn monopole_e_heuristic(a: f64, kappa: Reactivity) -> f64 {
    let mu = kappa.as_f64() * a;
    let c = sigmoidal_unit(mu);
    -(a * a * a.ln()) / 2.0 * c * c + a * a * monopole_unit_heuristic(mu)
}

/// Dirichlet-limit monopole coefficient of the unit disk, `(3 − 4 ln 2)/π²`.
pub fn monopole_unit_infinite() -> f64 {
    (3.0 - 4.0 * 2f64.ln()) / (PI * PI)
}

/// `ω(r) = (2a/π)E(r/a)`: potential of the uniform unit density on the disk.
pub fn uniform_potential(a: f64, r: f64) -> f64 {
    let x = (r / a).clamp(0.0, 1.0);
    2.0 * a / PI * elliptic_e(x).expect("modulus in range")
}

/// Taylor coefficient `c₂ = (1/(2π))∫_disk ω dA` for the unit disk, by Gauss
/// quadrature of the elliptic integral; equals `4/(3π)`.
pub fn c2_by_elliptic_quadrature() -> f64 {
    // c₂ = (1/2π)·2π∫₀¹ (2/π)E(r) r dr = (2/π)∫₀¹ E(z) z dz.
    let f = |z: f64| elliptic_e(z).unwrap() * z;
    2.0 / PI * graded_integral(f)
}

/// `c₃ = (1/(2π))∫_disk ω² dA = (4/π²)∫₀¹ r E(r)² dr` for the unit disk.
pub fn c3_by_elliptic_quadrature() -> f64 {
    let f = |z: f64| {
        let e = elliptic_e(z).unwrap();
        z * e * e
    };
    4.0 / (PI * PI) * graded_integral(f)
}

/// `∫₀¹ f` with panels graded toward the logarithmic endpoint at 1.
fn graded_integral(f: impl Fn(f64) -> f64) -> f64 {
    let mut b = vec![0.0, 0.5];
    for l in 2..=40 {
        b.push(1.0 - 0.5f64.powi(l));
    }
    b.push(1.0);
    let rule = CompositeRule::from_breaks(&b, 20);
    rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f(*x)).sum()
}

impl CapacitanceModel {
    pub fn new(spectrum: DiskSteklovSpectrum, mode: CapacitanceMode) -> Self {
        CapacitanceModel { spectrum, mode }
    }

    pub fn spectral(spectrum: DiskSteklovSpectrum) -> Self {
        Self::new(spectrum, CapacitanceMode::Spectral)
    }

    /// Same spectrum, different evaluation mode.
    pub fn with_mode(&self, mode: CapacitanceMode) -> Self {
        Self::new(self.spectrum.clone(), mode)
    }

    pub fn radius(&self) -> f64 {
        self.spectrum.radius
    }

    /// `C(∞) = Σ μ_k d_k²/(2π)` from the retained modes.
    pub fn capacitance_infinite_spectral(&self) -> f64 {
        let s = &self.spectrum;
        s.mu.iter().zip(&s.d).map(|(m, d)| m * d * d).sum::<f64>() / (2.0 * PI)
    }

    /// Spectral `C(κ)` for finite `κ`.
    ///
    /// Below the largest retained eigenvalue the exact `Σd² = πa²` is used to
    /// subtract the leading part of the sum; above it the plain sum has the
    /// smaller truncation error.
    fn capacitance_spectral(&self, kappa: f64) -> Result<f64> {
        let s = &self.spectrum;
        s.check_pole(kappa)?;
        if kappa.abs() < s.mu_max() {
            let sum: f64 = s.mu.iter().zip(&s.d).map(|(m, d)| d * d / (m + kappa)).sum();
            Ok(kappa / (2.0 * PI) * (PI * s.radius * s.radius - kappa * sum))
        } else {
            let sum: f64 = s.mu.iter().zip(&s.d).map(|(m, d)| m * d * d / (m + kappa)).sum();
            Ok(kappa / (2.0 * PI) * sum)
        }
    }

    /// `C(κ)` in the model's evaluation mode.
    pub fn capacitance(&self, kappa: Reactivity) -> Result<f64> {
        let a = self.radius();
        match (self.mode, kappa) {
            // The series for κ = ∞ has a tail decaying only like 1/n, so the
            // closed-form disk value is used; see `capacitance_infinite_spectral`.
            (CapacitanceMode::Spectral, Reactivity::Infinite) => Ok(2.0 * a / PI),
            (CapacitanceMode::Spectral, Reactivity::Finite(k)) => self.capacitance_spectral(k),
            (CapacitanceMode::Sigmoidal, k) => Ok(capacitance_sigmoidal(a, k)),
            (CapacitanceMode::Taylor(order), Reactivity::Finite(k)) => {
                Ok(capacitance_taylor(a, &self.taylor_coeffs(order)?, k).value)
            }
            (CapacitanceMode::Taylor(_), Reactivity::Infinite) => {
                Err(Error::Domain("Taylor capacitance is undefined at κ = ∞".into()))
            }
            (CapacitanceMode::LargeKappa, k) => Ok(capacitance_large_kappa(a, k).value),
        }
    }

    /// `C′(κ) = (1/2π)Σ μ_k² d_k²/(μ_k+κ)²`, in the model's mode.
    pub fn capacitance_derivative(&self, kappa: Reactivity) -> Result<f64> {
        let a = self.radius();
        let k = match kappa {
            Reactivity::Infinite => return Ok(0.0),
            Reactivity::Finite(k) => k,
        };
        match self.mode {
            CapacitanceMode::Spectral => {
                let s = &self.spectrum;
                s.check_pole(k)?;
                if k.abs() < s.mu_max() {
                    let (mut s1, mut s2) = (0.0, 0.0);
                    for (m, d) in s.mu.iter().zip(&s.d) {
                        let t = d * d / (m + k);
                        s1 += t;
                        s2 += t / (m + k);
                    }
                    Ok((PI * a * a - 2.0 * k * s1 + k * k * s2) / (2.0 * PI))
                } else {
                    let sum: f64 = s.mu.iter().zip(&s.d).map(|(m, d)| (m * d / (m + k)).powi(2)).sum();
                    Ok(sum / (2.0 * PI))
                }
            }
            CapacitanceMode::Sigmoidal => {
                let x = k * a;
                Ok(a * a * 8.0 / (PI * x + 4.0).powi(2))
            }
            CapacitanceMode::Taylor(order) => {
                let c = self.taylor_coeffs(order)?;
                let x = k * a;
                let mut v = 0.0;
                let mut sign = 1.0;
                for (n, cn) in c.iter().enumerate() {
                    v += sign * (n as f64 + 1.0) * cn * x.powi(n as i32);
                    sign = -sign;
                }
                Ok(a * a * v)
            }
            CapacitanceMode::LargeKappa => {
                let x = k * a;
                Ok(2.0 * a * a * (x.ln() + 2f64.ln() + EULER_GAMMA) / (PI * PI * x * x))
            }
        }
    }

    /// Taylor coefficients `c_1..c_n` of `C(κ)/a` in powers of `κa`,
    /// `c_n = (1/(2πa^{n+1}))Σ d_k²/μ_k^{n−1}`.  `c₁` is returned as its exact
    /// value `1/2`; see [`CapacitanceModel::c1_spectral`].
    pub fn taylor_coeffs(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidInput("Taylor order must be at least 1".into()));
        }
        let s = &self.spectrum;
        let a = s.radius;
        let mut out = vec![0.5];
        for order in 2..=n {
            let sum: f64 = s.mu.iter().zip(&s.d).map(|(m, d)| d * d / m.powi(order as i32 - 1)).sum();
            out.push(sum / (2.0 * PI * a.powi(order as i32 + 1)));
        }
        Ok(out)
    }

    /// `c₁` from the truncated spectral sum (tends to `1/2`).
    pub fn c1_spectral(&self) -> f64 {
        self.spectrum.weight_sum() / (2.0 * PI * self.radius().powi(2))
    }

    /// `w(r;κ) = κΣ d_kψ_k(r)/(μ_k+κ)`, evaluated as
    /// `κ[ω(r) − κΣ d_kψ_k(r)/(μ_k(μ_k+κ))]`.
    pub fn patch_solution_w(&self, kappa: Reactivity, r: f64) -> Result<f64> {
        let s = &self.spectrum;
        self.check_r(r)?;
        let k = match kappa {
            Reactivity::Infinite => return Ok(1.0),
            Reactivity::Finite(k) => k,
        };
        s.check_pole(k)?;
        let psi = s.psi_all(r);
        let sum: f64 = (0..s.n_modes()).map(|i| s.d[i] * psi[i] / (s.mu[i] * (s.mu[i] + k))).sum();
        Ok(k * (uniform_potential(s.radius, r) - k * sum))
    }

    /// `w_c(r;−σ) = −Σ μ_k d_kψ_k(r)/(μ_k−σ)²`, the derivative of `w` with
    /// respect to `σ = −κ`, evaluated with the same subtraction as `w`.
    pub fn patch_solution_wc(&self, sigma: f64, r: f64) -> Result<f64> {
        let s = &self.spectrum;
        self.check_r(r)?;
        let k = -sigma;
        s.check_pole(k)?;
        let psi = s.psi_all(r);
        let (mut s1, mut s2) = (0.0, 0.0);
        for ((m, d), p) in s.mu.iter().zip(&s.d).zip(&psi) {
            let t = d * p / (m * (m + k));
            s1 += t;
            s2 += t / (m + k);
        }
        // ∂w/∂κ = ω − 2κS₁ + κ²S₂ ; ∂/∂σ = −∂/∂κ.
        Ok(-(uniform_potential(s.radius, r) - 2.0 * k * s1 + k * k * s2))
    }

    fn check_r(&self, r: f64) -> Result<()> {
        let a = self.radius();
        if !(0.0..=a * (1.0 + 1e-12)).contains(&r) {
            return Err(Error::Domain(format!("radius {r} outside the patch [0, {a}]")));
        }
        Ok(())
    }

    /// Charge density `q(r;κ) = (κ/2)(1 − w(r;κ))` on the patch, with
    /// `q(r;∞) = 1/(π√(a² − r²))`.
    pub fn charge_density(&self, kappa: Reactivity, r: f64) -> Result<f64> {
        Ok(self.charge_density_checked(kappa, r)?.value)
    }

    /// As [`CapacitanceModel::charge_density`], flagging `κa` beyond the range
    /// where the truncated series is trusted.
    pub fn charge_density_checked(&self, kappa: Reactivity, r: f64) -> Result<Approx> {
        let a = self.radius();
        self.check_r(r)?;
        match kappa {
            Reactivity::Infinite => {
                if r >= a {
                    return Err(Error::Domain("q(r;∞) is singular at the rim".into()));
                }
                Ok(Approx { value: 1.0 / (PI * ((a - r) * (a + r)).sqrt()), warning: None })
            }
            Reactivity::Finite(k) => {
                let w = self.patch_solution_w(kappa, r)?;
                let warning = (k.abs() * a > CHARGE_DENSITY_KAPPA_MAX).then(|| {
                    format!(
                        "charge density at κa = {} beyond {CHARGE_DENSITY_KAPPA_MAX}; series accuracy degrades",
                        k * a
                    )
                });
                Ok(Approx { value: 0.5 * k * (1.0 - w), warning })
            }
        }
    }

    /// Unit-disk monopole integral
    /// `ℰ(κa) = 2∫₀¹ (1/ρ)(∫₀^ρ η·a q(aη;κ) dη)² dρ` by nested trapezoid rules
    /// with step [`MONOPOLE_STEP`].
    pub fn monopole_unit_quadrature(&self, kappa: Reactivity) -> Result<f64> {
        let a = self.radius();
        let n = (1.0 / MONOPOLE_STEP).round() as usize;
        let h = 1.0 / n as f64;
        let inner: Vec<f64> = match kappa {
            // ∫₀^ρ η/(π√(1−η²)) dη in closed form.
            Reactivity::Infinite => (0..=n)
                .map(|i| {
                    let rho = i as f64 * h;
                    (1.0 - ((1.0 - rho) * (1.0 + rho)).sqrt()) / PI
                })
                .collect(),
            Reactivity::Finite(k) => {
                self.spectrum.check_pole(k)?;
                let f: Vec<f64> = (0..=n)
                    .into_par_iter()
                    .map(|i| {
                        let eta = i as f64 * h;
                        self.charge_density(kappa, a * eta).map(|q| eta * a * q)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                cumulative_trapezoid(&f, h)
            }
        };
        let outer: Vec<f64> =
            inner.iter().enumerate().map(|(i, v)| if i == 0 { 0.0 } else { v * v / (i as f64 * h) }).collect();
        Ok(2.0 * crate::quadrature::trapezoid(&outer, h))
    }

    /// Monopole coefficient `E(κ)` in the model's mode.
    pub fn monopole_e(&self, kappa: Reactivity) -> Result<f64> {
        let a = self.radius();
        let c = self.capacitance(kappa)?;
        let log_part = -(a.ln()) / 2.0 * c * c;
        match self.mode {
            CapacitanceMode::Spectral => Ok(log_part + a * a * self.monopole_unit_quadrature(kappa)?),
            CapacitanceMode::Sigmoidal => Ok(monopole_e_heuristic(a, kappa)),
            CapacitanceMode::Taylor(_) => Ok(c * c * (0.125 - a.ln() / 2.0)),
            CapacitanceMode::LargeKappa => Ok(log_part + a * a * monopole_unit_infinite()),
        }
    }

    /// Zeros `μ_k^N` of `C(−σ)` for `k = 0..=k_max`, with `μ_0^N = 0` and
    /// `μ_k^N ∈ (μ_{k−1}, μ_k)` found by bisection.
    pub fn neumann_zeros(&self, k_max: usize) -> Result<Vec<f64>> {
        let s = &self.spectrum;
        if k_max >= s.n_modes() {
            return Err(Error::Bracketing(format!("{} modes cannot bracket {} Neumann zeros", s.n_modes(), k_max)));
        }
        let mut out = vec![0.0];
        for k in 1..=k_max {
            let (lo, hi) = (s.mu[k - 1], s.mu[k]);
            // C(−σ) is strictly decreasing between poles.
            let f = |sig: f64| self.capacitance_spectral(-sig);
            out.push(bisect_between_poles(f, lo, hi)?);
        }
        Ok(out)
    }

    /// Reactivity-scaled copy: the same spectrum viewed at another radius.
    pub fn scaled(&self, new_a: f64) -> Result<Self> {
        Ok(Self::new(self.spectrum.scaled(new_a)?, self.mode))
    }
}

/// Finds the unique root of a function strictly decreasing from `+∞` to `−∞`
/// on the open interval `(lo, hi)` between two poles.
pub fn bisect_between_poles(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    // Start at 1e-6 of the gap and back off while an endpoint is still
    // inside the pole tolerance of the evaluator.
    let mut delta = 1e-6 * (hi - lo);
    let (mut a, mut b, fa, fb) = loop {
        let (a, b) = (lo + delta, hi - delta);
        match (f(a), f(b)) {
            (Ok(fa), Ok(fb)) => break (a, b, fa, fb),
            (Err(Error::Pole { .. }), _) | (_, Err(Error::Pole { .. })) if delta < 1e-3 * (hi - lo) => {
                delta *= 2.0;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    };
    if !(fa > 0.0 && fb < 0.0) {
        return Err(Error::Bracketing(format!("no sign change on ({lo}, {hi}): f = {fa} .. {fb}")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_breaks_are_increasing() {
        for n in [4, 10, 50, 125] {
            let b = graded_breaks(n);
            assert_eq!(b[0], 0.0);
            assert_eq!(*b.last().unwrap(), 1.0);
            assert!(b.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn closed_form_helpers() {
        assert!((capacitance_sigmoidal(1.0, Reactivity::Finite(1.0)) - 2.0 / (PI + 4.0)).abs() < 1e-15);
        assert!((capacitance_sigmoidal(1.0, Reactivity::Infinite) - 2.0 / PI).abs() < 1e-15);
        assert!((capacitance_large_kappa(1.0, Reactivity::Finite(100.0)).value - 0.6227).abs() < 5e-5);
        assert!((monopole_e_heuristic(1.0, Reactivity::Infinite) - monopole_unit_infinite()).abs() < 1e-15);
        assert_eq!(monopole_e_heuristic(1.0, Reactivity::Finite(0.0)), 0.0);
        assert!((c2_by_elliptic_quadrature() - 4.0 / (3.0 * PI)).abs() < 1e-12);
        assert!((c3_by_elliptic_quadrature() - 0.3651).abs() < 5e-4);
    }

    #[test]
    fn small_solve_is_sane() {
        let s = DiskSteklovSpectrum::solve(1.0, 4, 160).unwrap();
        assert!((s.mu[0] - 1.1578).abs() < 2e-3, "{:?}", s.mu);
        assert!(s.d.iter().all(|d| *d >= 0.0));
    }
}

//! Small-patch asymptotics of mixed Steklov eigenvalues on the unit sphere.
//!
//! Every branch has the form `σ(ε) = σ₀ + ε log(ε/2) σ₁ + ε σ₂`. Three
//! families are covered: one Steklov patch among Dirichlet patches (SDN),
//! Steklov patches with no Dirichlet part away from local resonances, and
//! groups of identical patches that resonate with a local eigenvalue.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk_steklov::{bisect_between_poles, CapacitanceMode, CapacitanceModel, DiskSteklovSpectrum};
use crate::quadrature::{gauss_legendre_on, rim_graded_rule};
use crate::sphere_geometry::{GreenMatrix, Vec3, UNIT_TOLERANCE};
use crate::{Error, Reactivity, Result};

/// Relative distance under which two poles are treated as the same value.
pub const POLE_MERGE_TOLERANCE: f64 = 1e-9;
/// Relative gap under which a local eigenvalue is considered repeated.
pub const SIMPLE_EIGENVALUE_TOLERANCE: f64 = 1e-6;
/// Relative spread under which two values of `α` count as one eigenvalue.
pub const ALPHA_CLUSTER_TOLERANCE: f64 = 1e-9;
/// Weights below this are treated as zero.
const WEIGHT_FLOOR: f64 = 1e-12;
const RIM_ORDER: usize = 20;

/// Which construction produced a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Sdn,
    SnNonresonant,
    SnNearResonant,
    /// Eigenvalues whose eigenfunction lives on one patch only; only `σ₀` is known.
    LeadingOrderOnly,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Sdn => "sdn",
            Regime::SnNonresonant => "sn_nonresonant",
            Regime::SnNearResonant => "sn_near_resonant",
            Regime::LeadingOrderOnly => "leading_order_only",
        }
    }
}

/// One asymptotic eigenvalue branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBranch {
    pub regime: Regime,
    /// Gap index for root branches, local mode index for resonant ones.
    pub k: usize,
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// How many branches share these coefficients.
    pub multiplicity: usize,
    /// Patch capacitances at `σ₀` (Dirichlet patches at `κ = ∞`).
    pub capacitances: Vec<f64>,
    /// Patch monopole coefficients at `σ₀`.
    pub monopoles: Vec<f64>,
    /// Eigenvalue of the projected Green's matrix (resonant branches).
    pub alpha: Option<f64>,
    /// Unit-norm amplitudes on the resonant patches, summing to zero.
    pub amplitudes: Option<Vec<f64>>,
    /// Self-interaction integral of the resonant local mode.
    pub j_integral: Option<f64>,
    pub notes: Vec<String>,
}

impl EigenBranch {
    /// `σ(ε) = σ₀ + ε log(ε/2) σ₁ + ε σ₂`.
    pub fn evaluate(&self, eps: f64) -> f64 {
        self.sigma0 + eps * (eps / 2.0).ln() * self.sigma1 + eps * self.sigma2
    }

    fn root_branch(regime: Regime, k: usize, sigma0: f64) -> Self {
        EigenBranch {
            regime,
            k,
            sigma0,
            sigma1: 0.0,
            sigma2: 0.0,
            multiplicity: 1,
            capacitances: vec![],
            monopoles: vec![],
            alpha: None,
            amplitudes: None,
            j_integral: None,
            notes: vec![],
        }
    }
}

fn require_spectral(models: &[&CapacitanceModel]) -> Result<()> {
    if models.iter().any(|m| m.mode != CapacitanceMode::Spectral) {
        return Err(Error::Unsupported(
            "eigenvalue asymptotics need spectral capacitance models (poles must be resolved)".into(),
        ));
    }
    Ok(())
}

fn check_centers(centers: &[Vec3], n: usize) -> Result<GreenMatrix> {
    if centers.len() != n {
        return Err(Error::InvalidInput(format!("{} centers supplied for {} patches", centers.len(), n)));
    }
    for (i, c) in centers.iter().enumerate() {
        let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if (r - 1.0).abs() > UNIT_TOLERANCE.max(1e-9) {
            return Err(Error::InvalidInput(format!("center {i} is not a unit vector (|x| = {r})")));
        }
    }
    GreenMatrix::from_centers(centers)
}

/// Poles `μ_k/a` carrying nonzero weight, ascending.
fn poles(model: &CapacitanceModel) -> Vec<f64> {
    let s = &model.spectrum;
    s.mu.iter().zip(&s.d).filter(|(_, d)| d.abs() > WEIGHT_FLOOR).map(|(m, _)| *m).collect()
}

/// SDN branches for one Steklov patch (`models[0]`, centered at `centers[0]`)
/// and Dirichlet patches described by `dirichlet`.
///
/// Branch `k` is the root of `C₁(−σ₀) = −Σ C_i(∞)` in the `k`-th gap of the
/// pole set, the first gap being `(0, μ₀)`.
pub fn sdn_eigenvalues(
    steklov: &CapacitanceModel,
    dirichlet: &[CapacitanceModel],
    centers: &[Vec3],
    n_branches: usize,
) -> Result<Vec<EigenBranch>> {
    if dirichlet.is_empty() {
        return Err(Error::InvalidInput("the SDN problem needs at least one Dirichlet patch".into()));
    }
    require_spectral(&[steklov])?;
    let g = check_centers(centers, dirichlet.len() + 1)?;
    let p = poles(steklov);
    if n_branches > p.len() {
        return Err(Error::Bracketing(format!("{} retained poles cannot bracket {n_branches} branches", p.len())));
    }
    let c_inf: Vec<f64> = dirichlet.iter().map(|m| m.capacitance(Reactivity::Infinite)).collect::<Result<_>>()?;
    let e_inf: Vec<f64> = dirichlet.iter().map(|m| m.monopole_e(Reactivity::Infinite)).collect::<Result<_>>()?;
    let target = -c_inf.iter().sum::<f64>();
    let sum_sq: f64 = c_inf.iter().map(|c| c * c).sum();

    (0..n_branches)
        .into_par_iter()
        .map(|k| {
            let lo = if k == 0 { 0.0 } else { p[k - 1] };
            let f = |sig: f64| Ok(steklov.capacitance(Reactivity::Finite(-sig))? - target);
            let sigma0 = bisect_between_poles(f, lo, p[k])?;
            let kappa = Reactivity::Finite(-sigma0);
            let c1 = steklov.capacitance(kappa)?;
            let dc1 = steklov.capacitance_derivative(kappa)?;
            let e1 = steklov.monopole_e(kappa)?;
            let mut c = vec![c1];
            c.extend_from_slice(&c_inf);
            let mut e = vec![e1];
            e.extend_from_slice(&e_inf);

            let sigma1 = (target * target + sum_sq) / (2.0 * dc1);
            let sigma1_direct = (c1 * c1 + sum_sq) / (2.0 * dc1);
            let sigma2 = -(2.0 * PI * g.bilinear(&c, &c) + e.iter().sum::<f64>()) / dc1;
            let mut b = EigenBranch::root_branch(Regime::Sdn, k, sigma0);
            b.sigma1 = sigma1;
            b.sigma2 = sigma2;
            b.capacitances = c;
            b.monopoles = e;
            let rel = (sigma1 - sigma1_direct).abs() / sigma1.abs().max(f64::MIN_POSITIVE);
            if rel > 1e-10 {
                b.notes.push(format!("sigma1 forms differ by {rel:.2e} relative"));
            }
            Ok(b)
        })
        .collect()
}

/// Groups of patches whose models share the same pole set, i.e. identical
/// patches up to the merge tolerance.  Singletons are omitted.
pub fn resonant_groups(models: &[CapacitanceModel]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'outer: for i in 0..models.len() {
        for g in groups.iter_mut() {
            if same_spectrum(&models[g[0]], &models[i]) {
                g.push(i);
                continue 'outer;
            }
        }
        groups.push(vec![i]);
    }
    groups.retain(|g| g.len() > 1);
    groups
}

fn same_spectrum(a: &CapacitanceModel, b: &CapacitanceModel) -> bool {
    let (pa, pb) = (poles(a), poles(b));
    pa.len() == pb.len() && pa.iter().zip(&pb).all(|(x, y)| (x - y).abs() <= POLE_MERGE_TOLERANCE * x.abs())
}

/// Union of the pole sets of all models with near-equal values merged.
pub fn merged_poles(models: &[CapacitanceModel]) -> Vec<f64> {
    let mut all: Vec<f64> = models.iter().flat_map(poles).collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite poles"));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for p in all {
        match out.last() {
            Some(q) if (p - q).abs() <= POLE_MERGE_TOLERANCE * p.abs() => {}
            _ => out.push(p),
        }
    }
    out
}

/// Non-resonant SN branches for Steklov patches with the given models and
/// centers.  Branch `k ≥ 1` is the root of `Σ C_i(−σ₀) = 0` between the
/// `(k−1)`-th and `k`-th merged poles; the trivial eigenvalue `σ = 0` is not
/// reported.  The pole set is capped so every branch lies below the largest
/// pole retained by every model.
pub fn sn_nonresonant(models: &[CapacitanceModel], centers: &[Vec3], n_branches: usize) -> Result<Vec<EigenBranch>> {
    if models.is_empty() {
        return Err(Error::InvalidInput("at least one Steklov patch is required".into()));
    }
    require_spectral(&models.iter().collect::<Vec<_>>())?;
    let g = check_centers(centers, models.len())?;
    let cap = models.iter().map(|m| m.spectrum.mu_max()).fold(f64::INFINITY, f64::min);
    let p: Vec<f64> = merged_poles(models).into_iter().filter(|x| *x <= cap * (1.0 + 1e-12)).collect();
    if n_branches + 1 > p.len() {
        return Err(Error::Bracketing(format!("{} merged poles cannot bracket {n_branches} branches", p.len())));
    }
    let groups = resonant_groups(models);
    let note = (!groups.is_empty()).then(|| {
        format!(
            "identical patches {:?}: the near-resonant branches at the shared poles come from sn_near_resonant",
            groups
        )
    });

    let total_c = |sig: f64| -> Result<f64> { models.iter().map(|m| m.capacitance(Reactivity::Finite(-sig))).sum() };
    (1..=n_branches)
        .into_par_iter()
        .map(|k| {
            let sigma0 = bisect_between_poles(total_c, p[k - 1], p[k])?;
            let kappa = Reactivity::Finite(-sigma0);
            let c: Vec<f64> = models.iter().map(|m| m.capacitance(kappa)).collect::<Result<_>>()?;
            let dc: f64 = models.iter().map(|m| m.capacitance_derivative(kappa)).sum::<Result<f64>>()?;
            let e: Vec<f64> = models.iter().map(|m| m.monopole_e(kappa)).collect::<Result<_>>()?;
            let mut b = EigenBranch::root_branch(Regime::SnNonresonant, k, sigma0);
            b.sigma1 = 0.5 * c.iter().map(|x| x * x).sum::<f64>() / dc;
            b.sigma2 = -(2.0 * PI * g.bilinear(&c, &c) + e.iter().sum::<f64>()) / dc;
            b.capacitances = c;
            b.monopoles = e;
            b.notes.extend(note.clone());
            Ok(b)
        })
        .collect()
}

/// `𝒥 = (4π³/d²)∫₀¹ (1/ρ)(∫₀^ρ η ψ(η) dη)² dρ` for local mode `k` of a disk,
/// written in the unit-disk variable, minus `π log a` for a disk of radius `a`.
pub fn resonant_j_integral(spectrum: &DiskSteklovSpectrum, k: usize) -> Result<f64> {
    if k >= spectrum.n_modes() {
        return Err(Error::InvalidInput(format!("mode {k} not retained ({} modes)", spectrum.n_modes())));
    }
    let a = spectrum.radius;
    let d = spectrum.d[k];
    if d.abs() <= WEIGHT_FLOOR {
        return Err(Error::Domain(format!("mode {k} has zero weight")));
    }
    // Work on the unit disk: η ψ_a(aη) a² dη carries the same integral.
    let inner = |lo: f64, hi: f64| -> f64 {
        let (x, w) = gauss_legendre_on(RIM_ORDER, lo, hi);
        x.iter().zip(&w).map(|(t, wt)| wt * t * a * a * spectrum.psi_at(k, a * t)).sum()
    };
    let rule = rim_graded_rule(1.0, RIM_ORDER);
    let mut acc = 0.0;
    let mut total = 0.0;
    for (pi, panel) in rule.panels.iter().enumerate() {
        let base = pi * RIM_ORDER;
        for j in 0..RIM_ORDER {
            let rho = rule.nodes[base + j];
            let i_rho = acc + inner(panel.lo, rho);
            total += rule.weights[base + j] * i_rho * i_rho / rho;
        }
        acc += inner(panel.lo, panel.hi);
    }
    Ok(4.0 * PI.powi(3) / (d * d) * total - PI * a.ln())
}

/// Orthonormal basis of the complement of `(1, …, 1)` in `ℝ^m`, as columns.
fn complement_of_ones(m: usize) -> DMatrix<f64> {
    let mut seed = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        seed[(i, 0)] = 1.0;
    }
    let q = seed.qr().q();
    q.columns(1, m - 1).into_owned()
}

/// Eigenpairs `(α, A)` of `(I − eeᵀ/M)𝒢_sc` restricted to `eᵀA = 0`, with
/// unit-norm `A`, ascending in `α`.
pub fn deflated_green_eigenpairs(g: &GreenMatrix) -> Vec<(f64, Vec<f64>)> {
    let m = g.size();
    let q = complement_of_ones(m);
    let reduced = q.transpose() * &g.entries * &q;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..m - 1)
        .map(|j| {
            let a = &q * eig.eigenvectors.column(j);
            let mut v: Vec<f64> = a.iter().copied().collect();
            // Deterministic sign: first entry of largest magnitude positive.
            let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[j], v)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    pairs
}

/// Near-resonant SN branches for `M = centers.len()` identical patches
/// resonating with local mode `k_prime` of `common`.  Returns `M − 1`
/// branches, one per eigenvalue `α` counted with multiplicity.
pub fn sn_near_resonant(common: &CapacitanceModel, centers: &[Vec3], k_prime: usize) -> Result<Vec<EigenBranch>> {
    let m = centers.len();
    if m < 2 {
        return Err(Error::InvalidInput("near-resonance needs at least two identical patches".into()));
    }
    require_spectral(&[common])?;
    let g = check_centers(centers, m)?;
    let s = &common.spectrum;
    if k_prime >= s.n_modes() {
        return Err(Error::InvalidInput(format!("mode {k_prime} not retained ({} modes)", s.n_modes())));
    }
    let mu = s.mu[k_prime];
    let d = s.d[k_prime];
    if d.abs() <= WEIGHT_FLOOR {
        return Err(Error::Domain(format!(
            "local mode {k_prime} has zero weight d; it does not couple to the bulk, so no near-resonant branch exists"
        )));
    }
    let neighbours = [k_prime.checked_sub(1), Some(k_prime + 1)];
    for j in neighbours.into_iter().flatten() {
        if j < s.n_modes() && (s.mu[j] - mu).abs() <= SIMPLE_EIGENVALUE_TOLERANCE * mu {
            return Err(Error::Unsupported(format!("local eigenvalue mu_{k_prime} = {mu} is not simple")));
        }
    }
    let sigma1 = mu * mu * d * d / (4.0 * PI);
    let j_int = resonant_j_integral(s, k_prime)?;
    let pairs = deflated_green_eigenpairs(&g);
    let alphas: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let scale = alphas.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);
    Ok(pairs
        .into_iter()
        .map(|(alpha, a)| {
            let multiplicity =
                alphas.iter().filter(|x| (*x - alpha).abs() <= ALPHA_CLUSTER_TOLERANCE.max(1e-10) * scale).count();
            let mut b = EigenBranch::root_branch(Regime::SnNearResonant, k_prime, mu);
            b.sigma1 = sigma1;
            b.sigma2 = -(sigma1 / PI) * (4.0 * PI * PI * alpha + j_int);
            b.multiplicity = multiplicity;
            b.alpha = Some(alpha);
            b.amplitudes = Some(a);
            b.j_integral = Some(j_int);
            b
        })
        .collect())
}

/// Near-resonant branches for identical unit patches at the vertices of a
/// platonic solid with `n ∈ {4, 6, 8, 12, 20}` vertices.
pub fn sn_near_resonant_platonic(common: &CapacitanceModel, n: usize, k_prime: usize) -> Result<Vec<EigenBranch>> {
    let centers = crate::sphere_geometry::platonic_layout(n)?;
    sn_near_resonant(common, &centers, k_prime)
}

/// Leading-order branches `σ₀ = μ_k^N`, `k = 1..=k_max`, of eigenfunctions
/// concentrated on a single patch; the higher-order terms are not known.
pub fn zero_bulk_branches(model: &CapacitanceModel, k_max: usize) -> Result<Vec<EigenBranch>> {
    require_spectral(&[model])?;
    let zeros = model.neumann_zeros(k_max)?;
    Ok(zeros
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(k, z)| {
            let mut b = EigenBranch::root_branch(Regime::LeadingOrderOnly, k, z);
            b.sigma1 = f64::NAN;
            b.sigma2 = f64::NAN;
            b.notes.push("leading-order only: higher-order terms are not available".into());
            b
        })
        .collect())
}

/// How the patch profile of an eigenfunction is scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// `U₀ = 1` for root branches and unit-norm amplitudes for resonant ones.
    Raw,
    /// `Σ_i ∫_{patch i} u² ds = 1` on the sphere with patch radius `ε`.
    Sphere(f64),
}

/// Leading-order restriction of an eigenfunction to patch `patch`.
///
/// For root branches this is `U₀(1 − w(r; −σ₀))` with `models[patch]`; for an
/// SDN branch only patch 0 carries the Steklov condition and the Dirichlet
/// patches return zero.  For a resonant branch it is `A_i ψ̃(r)` with
/// `ψ̃ = 2πψ/(μd)`.  `models` lists the Steklov models in branch order.
pub fn eigenfunction_on_patch(
    branch: &EigenBranch,
    models: &[CapacitanceModel],
    patch: usize,
    r: f64,
    normalization: Normalization,
) -> Result<f64> {
    let model = models
        .get(patch)
        .ok_or_else(|| Error::InvalidInput(format!("patch {patch} out of range ({} models)", models.len())))?;
    match branch.regime {
        Regime::LeadingOrderOnly => {
            Err(Error::Unsupported("eigenfunctions of zero-bulk branches are not constructed".into()))
        }
        Regime::Sdn if patch > 0 => Ok(0.0),
        Regime::Sdn | Regime::SnNonresonant => {
            let kappa = Reactivity::Finite(-branch.sigma0);
            let profile = 1.0 - model.patch_solution_w(kappa, r)?;
            let u0 = match normalization {
                Normalization::Raw => 1.0,
                Normalization::Sphere(eps) => {
                    let used = if branch.regime == Regime::Sdn { &models[..1] } else { models };
                    let mut total = 0.0;
                    for m in used {
                        total += profile_square_integral(m, |r| Ok(1.0 - m.patch_solution_w(kappa, r)?))?;
                    }
                    1.0 / (eps * total.sqrt())
                }
            };
            Ok(u0 * profile)
        }
        Regime::SnNearResonant => {
            let amps = branch
                .amplitudes
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("resonant branch without amplitudes".into()))?;
            let amp = *amps.get(patch).ok_or_else(|| {
                Error::InvalidInput(format!("patch {patch} out of range ({} amplitudes)", amps.len()))
            })?;
            let s = &model.spectrum;
            let k = branch.k;
            let tilde = 2.0 * PI * s.psi_at(k, r) / (s.mu[k] * s.d[k]);
            let scale = match normalization {
                Normalization::Raw => 1.0,
                // ε² AᵀA ∫ψ̃² dy = 1 with ∫ψ̃² dy = π/σ₁.
                Normalization::Sphere(eps) => (branch.sigma1 / PI).sqrt() / eps,
            };
            Ok(scale * amp * tilde)
        }
    }
}

/// `∫_Γ f(r)² dA` over a disk patch.
pub fn profile_square_integral(model: &CapacitanceModel, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let rule = rim_graded_rule(model.radius(), RIM_ORDER);
    let mut s = 0.0;
    for (r, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(*r)?;
        s += w * v * v * r;
    }
    Ok(2.0 * PI * s)
}

/// `∫_Γ f(r) dA` over a disk patch.
pub fn profile_integral(model: &CapacitanceModel, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let rule = rim_graded_rule(model.radius(), RIM_ORDER);
    let mut s = 0.0;
    for (r, w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * f(*r)? * r;
    }
    Ok(2.0 * PI * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_basis_is_orthonormal() {
        for m in 2..7 {
            let q = complement_of_ones(m);
            let gram = q.transpose() * &q;
            assert!((gram - DMatrix::<f64>::identity(m - 1, m - 1)).norm() < 1e-12);
            for j in 0..m - 1 {
                assert!(q.column(j).sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn antipodal_alpha() {
        let g = GreenMatrix::from_centers(&crate::sphere_geometry::antipodal_pair()).unwrap();
        let pairs = deflated_green_eigenpairs(&g);
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].0 - (2f64.ln() - 1.0) / (4.0 * PI)).abs() < 1e-12);
        let a = &pairs[0].1;
        assert!((a[0] + a[1]).abs() < 1e-12);
    }

    #[test]
    fn evaluate_three_terms() {
        let mut b = EigenBranch::root_branch(Regime::Sdn, 0, 1.0);
        b.sigma1 = 2.0;
        b.sigma2 = -3.0;
        let eps = 0.1f64;
        assert!((b.evaluate(eps) - (1.0 + 0.2 * 0.05f64.ln() - 0.3)).abs() < 1e-15);
    }
}

//! Small-patch expansions: mean first-reaction time, splitting
//! probabilities, the principal Robin eigenvalue, the moderate-reactivity
//! expansion, boundary homogenization and the general-domain MFRT.

use crate::disk_steklov::{CapacitanceMode, CapacitanceModel, DiskSteklovSpectrum};
use crate::error::{Error, Result};
use crate::reactivity::Reactivity;
use crate::sphere_geometry::{green_matrix, green_s, GreenMatrix, PatchLayout, Vec3};
use serde::Serialize;
use std::f64::consts::PI;

/// Volume of the unit ball.
pub const UNIT_BALL_VOLUME: f64 = 4.0 * PI / 3.0;
/// Default defect coefficient `b₁` of the homogenized rate.
pub const B1_UNIFORM: f64 = -0.5;
/// Refined defect coefficient accounting for tiling defects.
pub const B1_REFINED: f64 = -0.5523;

/// Which quantity an [`ExpansionResult`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    Mfrt,
    Splitting,
    Lambda0,
    MfrtModerate,
}

/// Non-power factor multiplying a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    One,
    /// `ln(ε/2)`
    LogHalfEps,
    /// `ln(2/ε)`
    LogTwoOverEps,
}

impl Gauge {
    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            Gauge::One => 1.0,
            Gauge::LogHalfEps => (eps / 2.0).ln(),
            Gauge::LogTwoOverEps => (2.0 / eps).ln(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Gauge::One => "1",
            Gauge::LogHalfEps => "log(eps/2)",
            Gauge::LogTwoOverEps => "log(2/eps)",
        }
    }
}

/// One term `coefficient · ε^power · gauge(ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub power: i32,
    pub gauge: Gauge,
    pub coefficient: f64,
}

impl Term {
    fn new(label: &str, power: i32, gauge: Gauge, coefficient: f64) -> Self {
        Term { label: label.to_string(), power, gauge, coefficient }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        self.coefficient * eps.powi(self.power) * self.gauge.eval(eps)
    }
}

/// Ordered expansion terms together with the patch data that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionResult {
    pub kind: ExpansionKind,
    pub terms: Vec<Term>,
    /// Capacitances `C_i` used.
    pub capacitances: Vec<f64>,
    /// Monopole coefficients `E_i` used.
    pub monopoles: Vec<f64>,
    /// `U₀`, `Ū₁₀/U₀`, `Ū₁₁/U₀` for the MFRT and splitting expansions.
    pub ratios: Option<[f64; 3]>,
    /// Caveats attached to the result.
    pub flags: Vec<String>,
}

impl ExpansionResult {
    /// Sum of all terms at `ε`, in declared order.
    pub fn evaluate(&self, eps: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(eps)).sum()
    }

    /// Values of the individual terms at `ε`.
    pub fn term_values(&self, eps: f64) -> Vec<f64> {
        self.terms.iter().map(|t| t.eval(eps)).collect()
    }
}

/// Capacitances and monopole coefficients of each patch at its reactivity.
pub fn patch_coefficients(layout: &PatchLayout, models: &[CapacitanceModel]) -> Result<(Vec<f64>, Vec<f64>)> {
    if models.len() != layout.len() {
        return Err(Error::InvalidInput(format!(
            "{} capacitance models supplied for {} patches",
            models.len(),
            layout.len()
        )));
    }
    let mut c = Vec::with_capacity(models.len());
    let mut e = Vec::with_capacity(models.len());
    for (i, (m, k)) in models.iter().zip(&layout.reactivities).enumerate() {
        if (m.radius() - layout.radii[i]).abs() > 1e-12 * layout.radii[i] {
            return Err(Error::InvalidInput(format!(
                "model {i} has radius {} but the patch radius is {}",
                m.radius(),
                layout.radii[i]
            )));
        }
        c.push(m.capacitance(*k)?);
        e.push(m.monopole_e(*k)?);
    }
    Ok((c, e))
}

/// One model per patch, obtained by dilating a unit-disk spectrum.
pub fn models_for_layout(
    unit: &DiskSteklovSpectrum,
    layout: &PatchLayout,
    mode: CapacitanceMode,
) -> Result<Vec<CapacitanceModel>> {
    layout.radii.iter().map(|a| Ok(CapacitanceModel::new(unit.scaled(*a)?, mode))).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `U₀ = 2/(3C̄)`, `Ū₁₀/U₀ = −CᵀC/(2C̄)`, `Ū₁₁/U₀ = 2πCᵀ𝒢C/C̄ + Ē/C̄`.
pub fn mfrt_from_data(c: &[f64], e: &[f64], g: &GreenMatrix) -> Result<ExpansionResult> {
    let cbar: f64 = c.iter().sum();
    if !(cbar > 0.0) {
        return Err(Error::Domain("total capacitance must be positive".into()));
    }
    let ebar: f64 = e.iter().sum();
    let u0 = 2.0 / (3.0 * cbar);
    let r10 = -dot(c, c) / (2.0 * cbar);
    let r11 = 2.0 * PI * g.bilinear(c, c) / cbar + ebar / cbar;
    Ok(ExpansionResult {
        kind: ExpansionKind::Mfrt,
        terms: vec![
            Term::new("U0", -1, Gauge::One, u0),
            Term::new("U10", 0, Gauge::LogHalfEps, u0 * r10),
            Term::new("U11", 0, Gauge::One, u0 * r11),
        ],
        capacitances: c.to_vec(),
        monopoles: e.to_vec(),
        ratios: Some([u0, r10, r11]),
        flags: vec![],
    })
}

/// Three-term volume-averaged MFRT expansion.
pub fn mfrt_coeffs(layout: &PatchLayout, models: &[CapacitanceModel]) -> Result<ExpansionResult> {
    let g = green_matrix(layout)?;
    let (c, e) = patch_coefficients(layout, models)?;
    mfrt_from_data(&c, &e, &g)
}

/// Caveat attached to spatial profiles that carry the undetermined `Ū₂`.
pub const U2_FLAG: &str = "U2 set to 0: the constant of the eps^2 log(eps/2) term is undetermined at this order";

/// Spatial MFRT `u(x)` through `O(ε)`, plus the `ε² ln(ε/2)` spatial term
/// with `Ū₂ = 0`.
pub fn mfrt_field(result: &ExpansionResult, layout: &PatchLayout, x: &Vec3, eps: f64) -> Result<(f64, Vec<String>)> {
    let [u0, r10, r11] = result.ratios.ok_or_else(|| Error::InvalidInput("expansion carries no MFRT ratios".into()))?;
    let gs = field_greens(layout, x, eps)?;
    let c = &result.capacitances;
    let s1: f64 = c.iter().zip(&gs).map(|(ci, g)| ci * g).sum();
    let s2: f64 = c.iter().zip(&gs).map(|(ci, g)| ci * (ci / 2.0 + r10) * g).sum();
    let l = (eps / 2.0).ln();
    let u = u0 / eps * (1.0 + eps * l * r10 + eps * (r11 - 2.0 * PI * s1) + eps * eps * l * (0.0 - 2.0 * PI * s2));
    Ok((u, vec![U2_FLAG.to_string()]))
}

fn field_greens(layout: &PatchLayout, x: &Vec3, eps: f64) -> Result<Vec<f64>> {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if r2 > 1.0 + 1e-12 {
        return Err(Error::Domain("point outside the unit ball".into()));
    }
    layout
        .centers
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let d = ((x[0] - xi[0]).powi(2) + (x[1] - xi[1]).powi(2) + (x[2] - xi[2]).powi(2)).sqrt();
            if d <= 3.0 * eps {
                return Err(Error::Domain(format!(
                    "point at distance {d} from patch {i}: the outer expansion needs more than 3·eps = {}",
                    3.0 * eps
                )));
            }
            green_s(x, xi)
        })
        .collect()
}

/// Splitting-probability expansion for the patch `target`.
pub fn splitting_from_data(c: &[f64], e: &[f64], g: &GreenMatrix, target: usize) -> Result<ExpansionResult> {
    let n = c.len();
    if n < 2 {
        return Err(Error::InvalidInput("splitting probabilities need at least two patches".into()));
    }
    if target >= n {
        return Err(Error::InvalidInput(format!("target {target} out of range for {n} patches")));
    }
    let cbar: f64 = c.iter().sum();
    if !(cbar > 0.0) {
        return Err(Error::Domain("total capacitance must be positive".into()));
    }
    let ebar: f64 = e.iter().sum();
    let ct = c[target];
    let gc = g.apply(c);
    let ctgc = dot(c, &gc);
    let u0 = ct / cbar;
    let u10 = -u0 * (dot(c, c) - ct * cbar) / (2.0 * cbar);
    // Ū₁₁ written without dividing by C_t so that C_t = 0 gives zero.
    let u11 = u0 * (ebar / cbar + 2.0 * PI * (ctgc / cbar - gc[target])) - e[target] / cbar;
    let mut flags = vec![];
    let ratios = if ct != 0.0 {
        Some([u0, u10 / u0, u11 / u0])
    } else {
        flags.push("target capacitance is zero: splitting probability vanishes; ratios undefined".into());
        None
    };
    Ok(ExpansionResult {
        kind: ExpansionKind::Splitting,
        terms: vec![
            Term::new("U0", 0, Gauge::One, u0),
            Term::new("U10", 1, Gauge::LogHalfEps, u10),
            Term::new("U11", 1, Gauge::One, u11),
        ],
        capacitances: c.to_vec(),
        monopoles: e.to_vec(),
        ratios,
        flags,
    })
}

/// Volume-averaged splitting probability expansion for patch `target`.
pub fn splitting_coeffs(layout: &PatchLayout, models: &[CapacitanceModel], target: usize) -> Result<ExpansionResult> {
    let g = green_matrix(layout)?;
    let (c, e) = patch_coefficients(layout, models)?;
    splitting_from_data(&c, &e, &g, target)
}

/// `Σ_targets ū_target(ε) − 1`.
pub fn splitting_sum_check(layout: &PatchLayout, models: &[CapacitanceModel], eps: f64) -> Result<f64> {
    let g = green_matrix(layout)?;
    let (c, e) = patch_coefficients(layout, models)?;
    let mut s = 0.0;
    for t in 0..c.len() {
        s += splitting_from_data(&c, &e, &g, t)?.evaluate(eps);
    }
    Ok(s - 1.0)
}

/// Principal eigenvalue of the Robin Laplacian:
/// `λ₀ ≈ 2πεC̄/|Ω| + ε² ln(ε/2)πCᵀC/|Ω| − (2πε²/|Ω|)(2πCᵀ𝒢C + Ē)`.
pub fn lambda0_from_data(c: &[f64], e: &[f64], g: &GreenMatrix) -> ExpansionResult {
    let cbar: f64 = c.iter().sum();
    let ebar: f64 = e.iter().sum();
    let vol = UNIT_BALL_VOLUME;
    ExpansionResult {
        kind: ExpansionKind::Lambda0,
        terms: vec![
            Term::new("lambda01", 1, Gauge::One, 2.0 * PI * cbar / vol),
            Term::new("lambda02", 2, Gauge::LogHalfEps, PI * dot(c, c) / vol),
            Term::new("lambda03", 2, Gauge::One, -2.0 * PI / vol * (2.0 * PI * g.bilinear(c, c) + ebar)),
        ],
        capacitances: c.to_vec(),
        monopoles: e.to_vec(),
        ratios: None,
        flags: vec![],
    }
}

pub fn principal_eigenvalue(layout: &PatchLayout, models: &[CapacitanceModel], eps: f64) -> Result<ExpansionResult> {
    let l = layout.with_epsilon(eps)?;
    let g = green_matrix(&l)?;
    let (c, e) = patch_coefficients(&l, models)?;
    Ok(lambda0_from_data(&c, &e, &g))
}

/// Conversion between the dimensional problem in a sphere of radius `R`
/// with diffusivity `D` and its dimensionless form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensional {
    pub sphere_radius: f64,
    pub diffusivity: f64,
}

impl Dimensional {
    pub fn new(sphere_radius: f64, diffusivity: f64) -> Result<Self> {
        if !(sphere_radius > 0.0 && diffusivity > 0.0) {
            return Err(Error::InvalidInput("R and D must be positive".into()));
        }
        Ok(Dimensional { sphere_radius, diffusivity })
    }

    /// `ε = L/R` for the largest patch radius `L`.
    pub fn epsilon(&self, patch_radius: f64) -> f64 {
        patch_radius / self.sphere_radius
    }

    /// Local reactivity `κ = L𝒦/D`.
    pub fn local_reactivity(&self, patch_radius: f64, reactivity: Reactivity) -> Reactivity {
        reactivity.scaled(patch_radius / self.diffusivity)
    }

    /// Time scale `R²/D` multiplying dimensionless times.
    pub fn time(&self, dimensionless: f64) -> f64 {
        self.sphere_radius * self.sphere_radius / self.diffusivity * dimensionless
    }
}

/// Shape data of a patch entering the moderate-reactivity expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchShape {
    /// Area in units of `(εR)²` (`πa²` for a disk of relative radius `a`).
    pub area: f64,
    /// Relative size `a_i` (dimensional size `L_i = εRa_i`).
    pub size: f64,
    pub c2: f64,
    pub c3: f64,
    /// Small-reactivity ratio `e_i = lim E_i/C_i²`.
    pub e: f64,
}

impl PatchShape {
    /// Disk of relative radius `a`, with `c₂ = 4/(3π)`, the supplied `c₃`
    /// and `e = 1/8 − (ln a)/2`.
    pub fn disk(a: f64, c3: f64) -> Self {
        PatchShape { area: PI * a * a, size: a, c2: 4.0 / (3.0 * PI), c3, e: 0.125 - a.ln() / 2.0 }
    }
}

/// Four-term MFRT for finite dimensional reactivities `𝒦_i`.  Each term is
/// homogeneous in `ε`, so coefficients are stored at `ε = 1`.
pub fn mfrt_moderate_reactivity(
    layout: &PatchLayout,
    reactivities: &[f64],
    shapes: &[PatchShape],
    dim: Dimensional,
) -> Result<ExpansionResult> {
    let n = layout.len();
    if reactivities.len() != n || shapes.len() != n {
        return Err(Error::InvalidInput("one reactivity and one shape per patch required".into()));
    }
    if reactivities.iter().any(|k| !k.is_finite() || !(*k > 0.0)) {
        return Err(Error::Domain(
            "moderate-reactivity expansion needs finite positive reactivities (κ = ∞ is a singular limit)".into(),
        ));
    }
    let g = green_matrix(layout)?;
    let (r, d) = (dim.sphere_radius, dim.diffusivity);
    let surf = 4.0 * PI * r * r;
    let vol = 4.0 * PI * r.powi(3) / 3.0;
    // ε = 1: L_i = R a_i, |∂Ω_i| = area_i R².
    let k: Vec<f64> = (0..n).map(|i| reactivities[i] * shapes[i].area * r * r / surf).collect();
    let kbar: f64 = k.iter().sum();
    let kn = |order: i32, c: &dyn Fn(&PatchShape) -> f64| -> f64 {
        2.0 * PI / (d.powi(order - 1) * surf)
            * (0..n)
                .map(|i| c(&shapes[i]) * (r * shapes[i].size).powi(order + 1) * reactivities[i].powi(order))
                .sum::<f64>()
    };
    let k2 = kn(2, &|s| s.c2);
    let k3 = kn(3, &|s| s.c3);
    let pre = vol / surf;
    let ek: f64 = (0..n).map(|i| shapes[i].e * k[i] * k[i]).sum();
    Ok(ExpansionResult {
        kind: ExpansionKind::MfrtModerate,
        terms: vec![
            Term::new("reaction-limited", -2, Gauge::One, pre / kbar),
            Term::new("shape", -1, Gauge::One, pre * k2 / (kbar * kbar)),
            Term::new(
                "logarithmic",
                0,
                Gauge::LogTwoOverEps,
                pre * surf * dot(&k, &k) / (4.0 * PI * d * r * kbar * kbar),
            ),
            Term::new("second-shape", 0, Gauge::One, pre * (k2 * k2 - k3 * kbar) / kbar.powi(3)),
            Term::new(
                "configuration",
                0,
                Gauge::One,
                pre * surf / (2.0 * PI * r * d * kbar * kbar) * (2.0 * PI * g.bilinear(&k, &k) + ek),
            ),
        ],
        capacitances: vec![],
        monopoles: vec![],
        ratios: None,
        flags: vec![],
    })
}

/// Closed form of the moderate-reactivity expansion for `N` identical
/// circular patches of radius `εR`; returns the five terms at `ε`.
pub fn mfrt_moderate_identical_circular(
    n: usize,
    reactivity: f64,
    c3: f64,
    green_sum: f64,
    dim: Dimensional,
    eps: f64,
) -> [f64; 5] {
    let (r, d, k) = (dim.sphere_radius, dim.diffusivity, reactivity);
    let nf = n as f64;
    let pre = 4.0 * PI * r.powi(3) / 3.0 / (nf * PI);
    [
        pre / (k * r * r * eps * eps),
        pre * 8.0 / (3.0 * PI * r * d * eps),
        pre * (2.0 / eps).ln() / (4.0 * d * r),
        pre * (64.0 / (9.0 * PI * PI) - 2.0 * c3) * k / (d * d),
        pre / (2.0 * r * d) * (0.125 + 2.0 * PI * green_sum / nf),
    ]
}

/// Dilute-limit effective reactivity of uniformly spread identical patches,
/// `k_eff = (2fC/ε)[1 + 4b₁C√f + εC(E/C² − 1/4 − ¼ ln f)]⁻¹`.
pub fn k_eff(c: f64, e: f64, f: f64, eps: f64, b1: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) || !(eps > 0.0) || !(c > 0.0) {
        return Err(Error::Domain(format!("k_eff needs 0 < f < 1, eps > 0, C > 0 (f = {f}, eps = {eps}, C = {c})")));
    }
    let bracket = 1.0 + 4.0 * b1 * c * f.sqrt() + eps * c * (e / (c * c) - 0.25 - 0.25 * f.ln());
    if !(bracket > 0.0) {
        return Err(Error::Domain(format!("homogenization bracket {bracket} is not positive")));
    }
    Ok(2.0 * f * c / eps / bracket)
}

/// Warning for surface fractions outside the dilute regime.
pub fn homogenization_warning(f: f64) -> Option<String> {
    (f > 0.2).then(|| format!("surface fraction f = {f} exceeds 0.2; the dilute-limit formula may be inaccurate"))
}

/// Large-reactivity closed form
/// `(4f/(πε))[1 + (8b₁/π)√f + (ε/π)(1 − ln 4 − ½ ln f)]⁻¹`.
pub fn k_eff_large_kappa(f: f64, eps: f64, b1: f64) -> f64 {
    4.0 * f / (PI * eps) / (1.0 + 8.0 * b1 / PI * f.sqrt() + eps / PI * (1.0 - 4f64.ln() - 0.5 * f.ln()))
}

/// Small-reactivity closed form
/// `(fκ/ε)[1 + 2b₁κ√f − (εκ/16)(1 + 2 ln f)]⁻¹`.
pub fn k_eff_small_kappa(kappa: f64, f: f64, eps: f64, b1: f64) -> f64 {
    f * kappa / eps / (1.0 + 2.0 * b1 * kappa * f.sqrt() - eps * kappa / 16.0 * (1.0 + 2.0 * f.ln()))
}

/// Dimensional effective reactivity `𝒦_eff = (D/L)k_eff` with `ε = L/R`.
pub fn keff_dimensional(c: f64, e: f64, f: f64, l: f64, r: f64, d: f64, b1: f64) -> Result<f64> {
    if !(l > 0.0 && r > 0.0 && d > 0.0) {
        return Err(Error::InvalidInput("L, R and D must be positive".into()));
    }
    Ok(d / l * k_eff(c, e, f, l / r, b1)?)
}

/// Volume-averaged MFRT of the homogenized problem, `1/15 + 1/(3k_eff)`.
pub fn homogenized_mean_time(keff: f64) -> f64 {
    1.0 / 15.0 + 1.0 / (3.0 * keff)
}

/// Surface fraction `f = Nε²/4` of `N` disks of radius `ε`.
pub fn surface_fraction(n: usize, eps: f64) -> f64 {
    n as f64 * eps * eps / 4.0
}

/// Two-term MFRT in a general smooth domain,
/// `ū ≈ |Ω|/(2πC̄ε)(1 − (ΣH_iC_i²/(2C̄)) ε ln ε)`.
pub fn general_domain_mfrt(volume: f64, curvatures: &[f64], c: &[f64], eps: f64) -> Result<f64> {
    if curvatures.len() != c.len() {
        return Err(Error::InvalidInput("one mean curvature per patch required".into()));
    }
    let cbar: f64 = c.iter().sum();
    if !(cbar > 0.0) {
        return Err(Error::Domain("total capacitance must be positive".into()));
    }
    let h: f64 = curvatures.iter().zip(c).map(|(h, ci)| h * ci * ci).sum();
    Ok(volume / (2.0 * PI * cbar * eps) * (1.0 - h / (2.0 * cbar) * eps * eps.ln()))
}

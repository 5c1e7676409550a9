//! Surface Neumann Green's function of the unit ball, Green's matrices over
//! patch centers, the discrete energy, and patch-layout utilities.

use crate::error::{Error, Result};
use crate::reactivity::Reactivity;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Vec3 = [f64; 3];

/// Regular part `R_s = −9/(20π)` on the diagonal of the Green's matrix.
pub const GREEN_SELF: f64 = -9.0 / (20.0 * PI);
/// Tolerance on `|x_i| = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Separation threshold in units of `ε·max a_i`.
pub const SEPARATION_FACTOR: f64 = 4.0;

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dist(a: &Vec3, b: &Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Scales a nonzero vector to unit length.
pub fn normalize(a: Vec3) -> Result<Vec3> {
    let n = norm(&a);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
    }
    Ok([a[0] / n, a[1] / n, a[2] / n])
}

/// Unit vector from polar angle `θ` (from the north pole) and azimuth `φ`.
pub fn from_spherical(theta: f64, phi: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Chord length `2 sin(θ/2)` subtended by the polar angle `θ`.
pub fn chord_from_angle(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("angle {theta} outside (0, π)")));
    }
    Ok(2.0 * (0.5 * theta).sin())
}

/// Polar angle whose chord is `eps`; inverse of [`chord_from_angle`].
pub fn angle_from_chord(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::Domain(format!("chord {eps} outside (0, 2)")));
    }
    Ok(2.0 * (0.5 * eps).asin())
}

/// Surface Neumann Green's function `G_s(x; ξ)` of the unit ball with a
/// source at the boundary point `ξ` and zero volume average.
pub fn green_s(x: &Vec3, xi: &Vec3) -> Result<f64> {
    let r = dist(x, xi);
    if r == 0.0 {
        return Err(Error::Domain("Green's function evaluated at its source".into()));
    }
    let x2 = dot(x, x);
    if x2 > 1.0 + 1e-12 {
        return Err(Error::Domain("evaluation point outside the unit ball".into()));
    }
    Ok(1.0 / (2.0 * PI * r) + (x2 + 1.0) / (8.0 * PI) + (2.0 / (1.0 - dot(x, xi) + r)).ln() / (4.0 * PI)
        - 7.0 / (10.0 * PI))
}

/// `G_s` between two boundary points at chord distance `d`.
pub fn green_s_chord(d: f64) -> f64 {
    // On the sphere 1 − x·ξ = d²/2.
    1.0 / (2.0 * PI * d) + 1.0 / (4.0 * PI) + (2.0 / (0.5 * d * d + d)).ln() / (4.0 * PI) - 7.0 / (10.0 * PI)
}

/// Volume integral of `G_s(·; north pole)` over the unit ball by a
/// tensor-product Gauss–Legendre rule in `(r, cos θ)`.
pub fn green_volume_integral(n: usize) -> f64 {
    let (x, w) = crate::quadrature::gauss_legendre(n);
    let xi = [0.0, 0.0, 1.0];
    let mut s = 0.0;
    for (ri, wr) in x.iter().zip(&w) {
        let r = 0.5 * (ri + 1.0);
        for (ci, wc) in x.iter().zip(&w) {
            let p = [r * (1.0 - ci * ci).sqrt(), 0.0, r * ci];
            s += 0.5 * wr * wc * r * r * green_s(&p, &xi).unwrap();
        }
    }
    2.0 * PI * s
}

/// Patch configuration on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchLayout {
    pub centers: Vec<Vec3>,
    /// Dimensionless radii `a_i`; the largest equals one.
    pub radii: Vec<f64>,
    pub reactivities: Vec<Reactivity>,
    pub epsilon: f64,
}

impl PatchLayout {
    /// Builds and validates a layout.
    pub fn new(centers: Vec<Vec3>, radii: Vec<f64>, reactivities: Vec<Reactivity>, epsilon: f64) -> Result<Self> {
        let l = PatchLayout { centers, radii, reactivities, epsilon };
        l.validate()?;
        Ok(l)
    }

    /// Identical unit-radius patches with a common reactivity.
    pub fn identical(centers: Vec<Vec3>, kappa: Reactivity, epsilon: f64) -> Result<Self> {
        let n = centers.len();
        Self::new(centers, vec![1.0; n], vec![kappa; n], epsilon)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Same centers and radii at another `ε` (validated again).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.centers.clone(), self.radii.clone(), self.reactivities.clone(), epsilon)
    }

    /// Checks the structural invariants and the separation condition.
    pub fn validate(&self) -> Result<()> {
        let n = self.centers.len();
        if n == 0 {
            return Err(Error::InvalidInput("layout has no patches".into()));
        }
        if self.radii.len() != n || self.reactivities.len() != n {
            return Err(Error::InvalidInput(format!(
                "layout sizes disagree: {} centers, {} radii, {} reactivities",
                n,
                self.radii.len(),
                self.reactivities.len()
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for (i, c) in self.centers.iter().enumerate() {
            if (norm(c) - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::InvalidInput(format!("center {i} is not a unit vector (|x| = {})", norm(c))));
            }
        }
        if self.radii.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidInput("radii must be positive".into()));
        }
        let amax = self.radii.iter().cloned().fold(0.0, f64::max);
        if (amax - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("largest radius must equal 1, got {amax}")));
        }
        for (i, k) in self.reactivities.iter().enumerate() {
            if let Reactivity::Finite(v) = k {
                if !(*v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("reactivity {i} must be in [0, ∞], got {v}")));
                }
            }
        }
        let threshold = SEPARATION_FACTOR * self.epsilon * amax;
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(&self.centers[i], &self.centers[j]);
                if d < threshold {
                    return Err(Error::Separation { i, j, distance: d, threshold });
                }
            }
        }
        Ok(())
    }
}

/// Symmetric Green's matrix `𝒢_s` over a set of patch centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenMatrix {
    pub entries: DMatrix<f64>,
}

impl GreenMatrix {
    /// Builds the matrix for arbitrary distinct unit vectors.
    pub fn from_centers(centers: &[Vec3]) -> Result<Self> {
        let n = centers.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = GREEN_SELF;
            for j in i + 1..n {
                let d = dist(&centers[i], &centers[j]);
                if d == 0.0 {
                    return Err(Error::InvalidInput(format!("centers {i} and {j} coincide")));
                }
                let g = green_s_chord(d);
                m[(i, j)] = g;
                m[(j, i)] = g;
            }
        }
        Ok(GreenMatrix { entries: m })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// `uᵀ𝒢_s v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                s += ui * self.entries[(i, j)] * vj;
            }
        }
        s
    }

    /// `𝒢_s v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| self.entries[(i, j)] * v[j]).sum()).collect()
    }

    /// Row sums `𝒢_s e`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.apply(&vec![1.0; self.size()])
    }
}

/// Green's matrix of a validated layout.
pub fn green_matrix(layout: &PatchLayout) -> Result<GreenMatrix> {
    layout.validate()?;
    GreenMatrix::from_centers(&layout.centers)
}

/// Discrete energy
/// `ℋ = Σ_{i<j} (1/d_ij − ½ ln d_ij − ½ ln(2 + d_ij))`.
pub fn discrete_energy(centers: &[Vec3]) -> Result<f64> {
    let mut h = 0.0;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let d = dist(&centers[i], &centers[j]);
            if d == 0.0 {
                return Err(Error::InvalidInput(format!("centers {i} and {j} coincide")));
            }
            h += 1.0 / d - 0.5 * d.ln() - 0.5 * (2.0 + d).ln();
        }
    }
    Ok(h)
}

/// Continuum value of the `N^{3/2}` coefficient `b₁` of the discrete energy.
pub const B1_CONTINUUM: f64 = -0.5;

/// `b₁` corrected for the defects of near-optimal point sets.  A Fibonacci
/// lattice of 500 points fits `b₁ ≈ −0.552`.
pub const B1_DEFECT_CORRECTED: f64 = -0.5523;

/// Large-`N` asymptote of the discrete energy for uniformly spread points,
/// `N²(1 − ln 2)/2 + b₁N^{3/2} + b₂N ln N + b₃N` with `b₂ = −1/8` and
/// `b₃ = (ln 2 − 1/4)/2`.
pub fn discrete_energy_asymptote(n: usize, b1: f64) -> f64 {
    let n = n as f64;
    let ln2 = 2f64.ln();
    n * n * (1.0 - ln2) / 2.0 + b1 * n.powf(1.5) - n * n.ln() / 8.0 + n * (ln2 - 0.25) / 2.0
}

/// `P = 2π eᵀ𝒢_s e = −9N²/10 + N(N−1) ln 2 + 2ℋ`.
pub fn pair_energy_p(centers: &[Vec3]) -> Result<f64> {
    let n = centers.len() as f64;
    Ok(-0.9 * n * n + n * (n - 1.0) * 2f64.ln() + 2.0 * discrete_energy(centers)?)
}

/// Golden-spiral lattice with `z_i = 1 − 2i/(N−1)`; `N = 1` gives the north
/// pole.
pub fn fibonacci_layout(n: usize) -> Result<Vec<Vec3>> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if n == 1 {
        return Ok(vec![[0.0, 0.0, 1.0]]);
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    Ok((0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * i as f64 / (n - 1) as f64;
            let rho = ((1.0 - z) * (1.0 + z)).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect())
}

/// Vertices of the Platonic solid with `N ∈ {4, 6, 8, 12, 20}` vertices,
/// projected on the unit sphere.
pub fn platonic_layout(n: usize) -> Result<Vec<Vec3>> {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let raw: Vec<Vec3> = match n {
        4 => vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
        6 => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ],
        8 => {
            let mut v = Vec::new();
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        v.push([sx, sy, sz]);
                    }
                }
            }
            v
        }
        12 => {
            let mut v = Vec::new();
            for s1 in [-1.0, 1.0] {
                for s2 in [-1.0, 1.0] {
                    v.push([0.0, s1, s2 * phi]);
                    v.push([s1, s2 * phi, 0.0]);
                    v.push([s2 * phi, 0.0, s1]);
                }
            }
            v
        }
        20 => {
            let mut v = Vec::new();
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        v.push([sx, sy, sz]);
                    }
                }
            }
            for s1 in [-1.0, 1.0] {
                for s2 in [-1.0, 1.0] {
                    v.push([0.0, s1 / phi, s2 * phi]);
                    v.push([s1 / phi, s2 * phi, 0.0]);
                    v.push([s2 * phi, 0.0, s1 / phi]);
                }
            }
            v
        }
        _ => return Err(Error::InvalidInput(format!("no Platonic solid has {n} vertices"))),
    };
    raw.into_iter().map(normalize).collect()
}

/// Antipodal pair along the polar axis.
pub fn antipodal_pair() -> Vec<Vec3> {
    vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_values() {
        let g0 = green_s(&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((g0 + 3.0 / (40.0 * PI)).abs() < 1e-15);
        let ga = green_s(&[0.0, 0.0, -1.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((ga - (0.5 - 2f64.ln() / 4.0 - 0.7) / PI).abs() < 1e-15);
        assert!((ga - green_s_chord(2.0)).abs() < 1e-15);
        assert!(green_s(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn platonic_sizes() {
        for n in [4, 6, 8, 12, 20] {
            let v = platonic_layout(n).unwrap();
            assert_eq!(v.len(), n);
            let g = GreenMatrix::from_centers(&v).unwrap();
            let rs = g.row_sums();
            assert!(rs.iter().all(|s| (s - rs[0]).abs() < 1e-12), "N={n}: {rs:?}");
        }
        assert!(platonic_layout(5).is_err());
    }

    #[test]
    fn chord_angle_roundtrip() {
        assert!((chord_from_angle(PI / 3.0).unwrap() - 1.0).abs() < 1e-15);
        let e = chord_from_angle(0.2).unwrap();
        assert!((angle_from_chord(e).unwrap() - 0.2).abs() < 1e-15);
    }
}

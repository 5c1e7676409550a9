//! Reading patch layouts from JSON.
//!
//! ```json
//! {
//!   "size": { "angle": 0.2 },
//!   "patches": [
//!     { "center": [0, 0, 1], "radius": 1.0, "kappa": "inf" },
//!     { "theta": 3.14159, "phi": 0.0, "radius": 0.5, "kappa": 4.0 }
//!   ]
//! }
//! ```
//!
//! The patch size is given in exactly one form: `{"angle": θ}` (geodesic
//! radius of the largest patch, which is the expansion parameter `ε`),
//! `{"chord": c}` (straight-line radius, converted to the angle) or
//! `{"dimensional": {"patch_radius": L, "sphere_radius": R}}` (`ε = L/R`).

use serde::{Deserialize, Serialize};

use crate::sphere_geometry::{angle_from_chord, from_spherical, normalize, PatchLayout, Vec3};
use crate::{Error, Reactivity, Result};

/// One of the accepted ways to state the patch size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PatchSize {
    Angle(f64),
    Chord(f64),
    Dimensional { patch_radius: f64, sphere_radius: f64 },
}

impl PatchSize {
    /// The expansion parameter `ε` (geodesic radius on the unit sphere).
    pub fn epsilon(&self) -> Result<f64> {
        let eps = match *self {
            PatchSize::Angle(a) => a,
            PatchSize::Chord(c) => angle_from_chord(c)?,
            PatchSize::Dimensional { patch_radius, sphere_radius } => {
                if !(sphere_radius > 0.0) {
                    return Err(Error::InvalidInput(format!("sphere radius must be positive, got {sphere_radius}")));
                }
                patch_radius / sphere_radius
            }
        };
        if !(eps > 0.0 && eps < std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!("patch size ε = {eps} is outside (0, π)")));
        }
        Ok(eps)
    }
}

/// A patch center as a unit vector or as spherical angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterSpec {
    Vector { center: Vec3 },
    Angles { theta: f64, phi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    #[serde(flatten)]
    pub center: CenterSpec,
    #[serde(default = "unit_radius")]
    pub radius: f64,
    #[serde(default = "dirichlet")]
    pub kappa: Reactivity,
}

fn unit_radius() -> f64 {
    1.0
}

fn dirichlet() -> Reactivity {
    Reactivity::Infinite
}

/// Top-level layout file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub size: PatchSize,
    pub patches: Vec<PatchSpec>,
}

impl LayoutFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("layout: {e}")))
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Centers as unit vectors; vectors must already have unit length.
    pub fn centers(&self) -> Result<Vec<Vec3>> {
        self.patches
            .iter()
            .enumerate()
            .map(|(i, p)| match p.center {
                CenterSpec::Vector { center } => {
                    let n = normalize(center)?;
                    let r = (center[0].powi(2) + center[1].powi(2) + center[2].powi(2)).sqrt();
                    if (r - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidInput(format!(
                            "center of patch {i} is not a unit vector (|x| = {r})"
                        )));
                    }
                    Ok(n)
                }
                CenterSpec::Angles { theta, phi } => Ok(from_spherical(theta, phi)),
            })
            .collect()
    }

    /// Converts to a validated [`PatchLayout`].
    pub fn to_layout(&self) -> Result<PatchLayout> {
        if self.patches.is_empty() {
            return Err(Error::InvalidInput("layout has no patches".into()));
        }
        PatchLayout::new(
            self.centers()?,
            self.patches.iter().map(|p| p.radius).collect(),
            self.patches.iter().map(|p| p.kappa).collect(),
            self.size.epsilon()?,
        )
    }
}

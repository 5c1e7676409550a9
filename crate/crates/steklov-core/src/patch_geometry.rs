//! Area and small-reactivity coefficients `c₂`, `c₃` of a flat patch of
//! arbitrary shape, computed from its boundary without solving a Steklov
//! problem.
//!
//! With `ω(y) = (1/2π)∫_Γ dy'/|y − y'|` and `a` the half-diameter,
//! `c₂ = (2πa³)⁻¹∫_Γ ω` and `c₃ = (2πa⁴)⁻¹∫_Γ ω²`.  Since `Δ|y − y'| =
//! 1/|y − y'|` in the plane, `ω` reduces to a boundary integral, which is
//! exact in closed form edge by edge for a polygon.  The area integrals use
//! Gauss rules along horizontal scanlines, split at the vertex heights.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result};

pub type Point2 = [f64; 2];

/// Nodes per scanline interval.
const ORDER_X: usize = 24;
/// Nodes per band between consecutive vertex heights.
const ORDER_Y: usize = 24;

/// Gauss rule on `[a, b]` after the substitution `s ↦ s³/(s³ + (1 − s)³)`,
/// which clusters nodes at both ends and absorbs the `d ln d` endpoint
/// behaviour of the integrands near corners.
fn graded_rule(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, w) = gauss_legendre_on(n, 0.0, 1.0);
    s.iter()
        .zip(&w)
        .map(|(&s, &w)| {
            let (p, q) = (s.powi(3), (1.0 - s).powi(3));
            let t = p / (p + q);
            let dt = 3.0 * s * s * (1.0 - s) * (1.0 - s) / (p + q).powi(2);
            (a + (b - a) * t, w * (b - a) * dt)
        })
        .unzip()
}

/// Geometric data of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchGeometry {
    pub area: f64,
    /// Half of the largest distance between two boundary points.
    pub half_diameter: f64,
    pub c2: f64,
    pub c3: f64,
}

struct Edge {
    p: Point2,
    /// Unit tangent.
    u: Point2,
    /// Outward unit normal.
    n: Point2,
    len: f64,
}

/// A validated counterclockwise simple polygon.
pub struct Polygon {
    vertices: Vec<Point2>,
    edges: Vec<Edge>,
}

fn cross(a: Point2, b: Point2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2, o: f64| {
        o == 0.0 && r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

impl Polygon {
    /// Checks the boundary: at least three distinct vertices, finite
    /// coordinates, no self-intersection and counterclockwise orientation.
    /// A repeated closing vertex is dropped.
    pub fn new(boundary: &[Point2]) -> Result<Self> {
        let mut v: Vec<Point2> = boundary.to_vec();
        if v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        if v.len() < 3 {
            return Err(Error::InvalidInput("a patch boundary needs at least three vertices".into()));
        }
        if v.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("boundary coordinates must be finite".into()));
        }
        let n = v.len();
        for i in 0..n {
            if v[i] == v[(i + 1) % n] {
                return Err(Error::InvalidInput(format!("boundary vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return Err(Error::InvalidInput(format!("boundary edges {i} and {j} intersect")));
                }
            }
        }
        let signed = 0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>();
        if !(signed > 0.0) {
            return Err(Error::InvalidInput("boundary must be oriented counterclockwise".into()));
        }
        let edges = (0..n)
            .map(|i| {
                let (p, q) = (v[i], v[(i + 1) % n]);
                let d = sub(q, p);
                let len = d[0].hypot(d[1]);
                let u = [d[0] / len, d[1] / len];
                Edge { p, u, n: [u[1], -u[0]], len }
            })
            .collect();
        Ok(Polygon { vertices: v, edges })
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        0.5 * (0..v.len()).map(|i| cross(v[i], v[(i + 1) % v.len()])).sum::<f64>()
    }

    pub fn half_diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d2 = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let d = sub(v[i], v[j]);
                d2 = d2.max(d[0] * d[0] + d[1] * d[1]);
            }
        }
        0.5 * d2.sqrt()
    }

    /// `ω(y) = −(1/2π)∮ n'·(y − y')/|y − y'| ds'`, summed in closed form.
    pub fn omega(&self, y: Point2) -> f64 {
        let mut s = 0.0;
        for e in &self.edges {
            let r = sub(y, e.p);
            let h = e.n[0] * r[0] + e.n[1] * r[1];
            if h == 0.0 {
                continue;
            }
            let s0 = e.u[0] * r[0] + e.u[1] * r[1];
            let ah = h.abs();
            s += h * (((e.len - s0) / ah).asinh() + (s0 / ah).asinh());
        }
        -s / (2.0 * PI)
    }

    /// `∫_Γ f dA` along horizontal scanlines.
    pub fn integrate(&self, f: impl Fn(Point2) -> f64 + Sync) -> f64 {
        let mut levels: Vec<f64> = self.vertices.iter().map(|p| p[1]).collect();
        levels.sort_by(f64::total_cmp);
        let span = levels[levels.len() - 1] - levels[0];
        levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * span);
        levels
            .par_windows(2)
            .map(|w| {
                let (ys, wy) = graded_rule(ORDER_Y, w[0], w[1]);
                ys.iter().zip(&wy).map(|(y, wy)| wy * self.integrate_line(*y, &f)).sum::<f64>()
            })
            .sum()
    }

    fn integrate_line(&self, y: f64, f: &impl Fn(Point2) -> f64) -> f64 {
        let mut xs: Vec<f64> = self
            .edges
            .iter()
            .filter_map(|e| {
                let q1 = e.p[1] + e.u[1] * e.len;
                ((e.p[1] <= y) != (q1 <= y)).then(|| {
                    let t = (y - e.p[1]) / (q1 - e.p[1]);
                    e.p[0] + t * e.u[0] * e.len
                })
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.chunks_exact(2)
            .map(|c| {
                let (nodes, w) = graded_rule(ORDER_X, c[0], c[1]);
                nodes.iter().zip(&w).map(|(x, w)| w * f([*x, y])).sum::<f64>()
            })
            .sum()
    }

    /// `c₂` from the double boundary integral
    /// `−(4π²a³)⁻¹∮∮|y − y'|(n·n') ds ds'`.
    pub fn c2_boundary(&self) -> f64 {
        let a = self.half_diameter();
        let (t, w) = gauss_legendre_on(8, 0.0, 1.0);
        let total: f64 = self
            .edges
            .par_iter()
            .enumerate()
            .map(|(i, ei)| {
                let mut s = 0.0;
                for (j, ej) in self.edges.iter().enumerate() {
                    let nn = ei.n[0] * ej.n[0] + ei.n[1] * ej.n[1];
                    if i == j {
                        s += ei.len.powi(3) / 3.0;
                        continue;
                    }
                    let mut acc = 0.0;
                    for (ta, wa) in t.iter().zip(&w) {
                        let ya = [ei.p[0] + ta * ei.len * ei.u[0], ei.p[1] + ta * ei.len * ei.u[1]];
                        for (tb, wb) in t.iter().zip(&w) {
                            let yb = [ej.p[0] + tb * ej.len * ej.u[0], ej.p[1] + tb * ej.len * ej.u[1]];
                            let d = sub(ya, yb);
                            acc += wa * wb * d[0].hypot(d[1]);
                        }
                    }
                    s += nn * acc * ei.len * ej.len;
                }
                s
            })
            .sum();
        -total / (4.0 * PI * PI * a.powi(3))
    }
}

/// Area, half-diameter, `c₂` and `c₃` of the patch bounded by a
/// counterclockwise simple polygon.
pub fn geometric_coeffs_arbitrary(boundary: &[Point2]) -> Result<PatchGeometry> {
    let poly = Polygon::new(boundary)?;
    let a = poly.half_diameter();
    let int_omega = poly.integrate(|y| poly.omega(y));
    let int_omega2 = poly.integrate(|y| poly.omega(y).powi(2));
    Ok(PatchGeometry {
        area: poly.area(),
        half_diameter: a,
        c2: int_omega / (2.0 * PI * a.powi(3)),
        c3: int_omega2 / (2.0 * PI * a.powi(4)),
    })
}

/// Regular `n`-gon inscribed in the circle of radius `a`, counterclockwise.
pub fn regular_polygon(n: usize, a: f64) -> Vec<Point2> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [a * t.cos(), a * t.sin()]
        })
        .collect()
}

//! Quadrature building blocks: Gauss–Legendre rules, composite panels and
//! product-integration weights for logarithmic kernels.

use crate::specfun::legendre_p_unchecked;
use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("nonzero"));
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| h * v).collect())
}

/// One panel of a composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    /// Index of the first node of this panel in the global node list.
    pub first: usize,
}

impl Panel {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
    /// Local coordinate of `x` in the reference interval `[-1, 1]`.
    pub fn local(&self, x: f64) -> f64 {
        (x - self.center()) / self.half_width()
    }
}

/// Composite Gauss–Legendre rule over consecutive panels.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub order: usize,
    pub panels: Vec<Panel>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Reference nodes and weights on `[-1, 1]`.
    pub ref_nodes: Vec<f64>,
    pub ref_weights: Vec<f64>,
    /// Barycentric weights of the reference nodes.
    bary: Vec<f64>,
}

impl CompositeRule {
    /// Builds a rule from sorted breakpoints `b_0 < b_1 < … < b_P`.
    pub fn from_breaks(breaks: &[f64], order: usize) -> Self {
        let (rx, rw) = gauss_legendre(order);
        let mut panels = Vec::with_capacity(breaks.len().saturating_sub(1));
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for win in breaks.windows(2) {
            let p = Panel { lo: win[0], hi: win[1], first: nodes.len() };
            let h = p.half_width();
            let c = p.center();
            for (t, w) in rx.iter().zip(&rw) {
                nodes.push(c + h * t);
                weights.push(h * w);
            }
            panels.push(p);
        }
        let bary = barycentric_weights(&rx);
        CompositeRule { order, panels, nodes, weights, ref_nodes: rx, ref_weights: rw, bary }
    }

    /// Index of the panel containing `x` (clamped to the end panels).
    pub fn panel_of(&self, x: f64) -> usize {
        let idx = self.panels.partition_point(|p| p.hi < x);
        idx.min(self.panels.len() - 1)
    }

    /// Interpolates nodal values `f` (one per global node) at `x` using the
    /// polynomial of the panel containing `x`.
    pub fn interpolate(&self, f: &[f64], x: f64) -> f64 {
        let p = &self.panels[self.panel_of(x)];
        let t = p.local(x);
        let vals = &f[p.first..p.first + self.order];
        barycentric_eval(&self.ref_nodes, &self.bary, vals, t)
    }

    /// Lagrange basis values of the panel containing `x`, returned with the
    /// panel's first node index.
    pub fn basis_at(&self, x: f64) -> (usize, Vec<f64>) {
        let p = &self.panels[self.panel_of(x)];
        let t = p.local(x);
        (p.first, lagrange_basis(&self.ref_nodes, &self.bary, t))
    }
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let prod: f64 = (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            1.0 / prod
        })
        .collect()
}

fn barycentric_eval(x: &[f64], bw: &[f64], f: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..x.len() {
        let d = t - x[j];
        if d == 0.0 {
            return f[j];
        }
        let c = bw[j] / d;
        num += c * f[j];
        den += c;
    }
    num / den
}

fn lagrange_basis(x: &[f64], bw: &[f64], t: f64) -> Vec<f64> {
    if let Some(j) = x.iter().position(|&xj| xj == t) {
        let mut out = vec![0.0; x.len()];
        out[j] = 1.0;
        return out;
    }
    let c: Vec<f64> = (0..x.len()).map(|j| bw[j] / (t - x[j])).collect();
    let den: f64 = c.iter().sum();
    c.into_iter().map(|v| v / den).collect()
}

/// `Q̃_j(t0) = ∫_{-1}^{1} P_j(t) / (t0 − t) dt` for `j = 0..=n`
/// (principal value when `|t0| < 1`).
fn legendre_cauchy_moments(t0: f64, n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n + 1];
    if t0.abs() < 1.0 {
        // Forward recurrence is stable on the cut.
        q[0] = ((1.0 + t0) / (1.0 - t0)).ln();
        if n >= 1 {
            q[1] = t0 * q[0] - 2.0;
        }
        for j in 1..n {
            let jf = j as f64;
            q[j + 1] = ((2.0 * jf + 1.0) * t0 * q[j] - jf * q[j - 1]) / (jf + 1.0);
        }
        return q;
    }
    // Off the cut the moments form the minimal solution of the recurrence,
    // so run it backwards (Miller) and normalize against the exact Q̃_0.
    let x = t0.abs();
    let rho = x + (x * x - 1.0).sqrt();
    let extra = if rho > 1.0 { (40.0 / rho.ln()).ceil() as usize } else { 4000 };
    let top = n + extra.clamp(20, 20000);
    let mut hi = 0.0;
    let mut cur = 1e-300;
    let mut tmp = vec![0.0; n + 1];
    for j in (1..=top).rev() {
        let jf = j as f64;
        // (j+1) Q_{j+1} = (2j+1) x Q_j − j Q_{j−1}  →  Q_{j−1} = ((2j+1) x Q_j − (j+1) Q_{j+1}) / j
        let prev = ((2.0 * jf + 1.0) * x * cur - (jf + 1.0) * hi) / jf;
        hi = cur;
        cur = prev;
        if j - 1 <= n {
            tmp[j - 1] = cur;
        }
        if cur.abs() > 1e250 {
            for v in tmp.iter_mut() {
                *v *= 1e-250;
            }
            cur *= 1e-250;
            hi *= 1e-250;
        }
    }
    let q0 = ((x + 1.0) / (x - 1.0)).ln();
    let scale = q0 / tmp[0];
    for j in 0..=n {
        // Q̃_j(−x) = (−1)^{j+1} Q̃_j(x)
        let sign = if t0 < 0.0 && j % 2 == 0 { -1.0 } else { 1.0 };
        q[j] = sign * tmp[j] * scale;
    }
    q
}

/// Moments `∫_{-1}^{1} ln|t0 − t| P_k(t) dt` for `k = 0..n`.
pub fn log_moments(t0: f64, n: usize) -> Vec<f64> {
    let q = legendre_cauchy_moments(t0, n + 1);
    let mut m = vec![0.0; n];
    let xlogx = |y: f64| if y == 0.0 { 0.0 } else { y * y.abs().ln() };
    if n == 0 {
        return m;
    }
    m[0] = xlogx(t0 + 1.0) - xlogx(t0 - 1.0) - 2.0;
    for k in 1..n {
        m[k] = (q[k + 1] - q[k - 1]) / (2.0 * k as f64 + 1.0);
    }
    m
}

/// Nodal weights `W_j` with `∫_panel ln|x − s| f(s) ds ≈ Σ_j W_j f(s_j)` for a
/// polynomial interpolant through the panel's Gauss nodes.
pub fn log_product_weights(rule: &CompositeRule, panel: usize, x: f64) -> Vec<f64> {
    let p = &rule.panels[panel];
    let h = p.half_width();
    let t0 = p.local(x);
    let n = rule.order;
    let m = log_moments(t0, n);
    let lnh = h.ln();
    (0..n)
        .map(|j| {
            let tj = rule.ref_nodes[j];
            let wj = rule.ref_weights[j];
            let mut s = 0.0;
            for (k, mk) in m.iter().enumerate() {
                s += mk * (2.0 * k as f64 + 1.0) * 0.5 * legendre_p_unchecked(k, tj);
            }
            h * wj * (lnh + s)
        })
        .collect()
}

/// Composite Gauss rule on `[0, a]` with panels halving toward `a`, suited to
/// integrands with square-root behaviour at the rim of a disk.
pub fn rim_graded_rule(a: f64, order: usize) -> CompositeRule {
    let mut b = vec![0.0, 0.5 * a];
    for l in 2..=40 {
        b.push(a * (1.0 - 0.5f64.powi(l)));
    }
    b.push(a);
    CompositeRule::from_breaks(&b, order)
}

/// Cumulative trapezoid integral of samples `f` on a uniform grid of step `h`.
pub fn cumulative_trapezoid(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Trapezoid rule on a uniform grid of step `h`.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

//! Legendre polynomials and complete elliptic integrals.
//!
//! Elliptic integrals take the *modulus* `k` throughout (not the parameter
//! `m = k^2`), so `elliptic_e(k) = ∫₀^{π/2} √(1 − k² sin²θ) dθ`.

use crate::error::{Error, Result};
use crate::float::FloatT;

/// Slack allowed on `|x| ≤ 1` before a Legendre argument is rejected.
const LEGENDRE_X_SLACK: f64 = 1e-12;

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p<T: FloatT>(n: usize, x: T) -> Result<T> {
    check_legendre_arg(x)?;
    Ok(legendre_p_unchecked(n, x))
}

/// Legendre polynomial with a signed degree: `P_{-n-1} = P_n`, so `P_{-1} = 1`.
pub fn legendre_p_signed<T: FloatT>(n: i64, x: T) -> Result<T> {
    let idx = if n < 0 { (-n - 1) as usize } else { n as usize };
    legendre_p(idx, x)
}

/// All of `P_0(x), …, P_n(x)`.
pub fn legendre_table<T: FloatT>(n: usize, x: T) -> Result<Vec<T>> {
    check_legendre_arg(x)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    if n >= 1 {
        out.push(x);
    }
    for j in 1..n {
        let jf = T::lit(j as f64);
        let next = ((jf + jf + T::one()) * x * out[j] - jf * out[j - 1]) / (jf + T::one());
        out.push(next);
    }
    Ok(out)
}

pub(crate) fn legendre_p_unchecked<T: FloatT>(n: usize, x: T) -> T {
    let mut p0 = T::one();
    if n == 0 {
        return p0;
    }
    let mut p1 = x;
    for j in 1..n {
        let jf = T::lit(j as f64);
        let p2 = ((jf + jf + T::one()) * x * p1 - jf * p0) / (jf + T::one());
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn check_legendre_arg<T: FloatT>(x: T) -> Result<()> {
    if !(x.abs() <= T::one() + T::lit(LEGENDRE_X_SLACK)) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(())
}

/// Arithmetic–geometric mean iteration; returns the mean and the
/// weighted sum `Σ 2^{n-1} c_n²` needed for the second-kind integral.
fn agm<T: FloatT>(a0: T, b0: T, c0: T) -> (T, T) {
    let mut a = a0;
    let mut b = b0;
    let mut pow = T::lit(0.5);
    let mut sum = pow * c0 * c0;
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..64 {
        if (a - b).abs() <= tol * a {
            break;
        }
        let c = (a - b) * T::lit(0.5);
        let an = (a + b) * T::lit(0.5);
        b = (a * b).sqrt();
        a = an;
        pow = pow + pow;
        sum = sum + pow * c * c;
    }
    (a, sum)
}

fn check_modulus<T: FloatT>(k: T, name: &str, allow_one: bool) -> Result<()> {
    let ok = k >= T::zero() && if allow_one { k <= T::one() } else { k < T::one() };
    if !ok {
        return Err(Error::Domain(format!("{name}: modulus {k} outside the admissible range")));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind `K(k)`, `0 ≤ k < 1`.
pub fn elliptic_k<T: FloatT>(k: T) -> Result<T> {
    check_modulus(k, "elliptic_k", false)?;
    let kp = ((T::one() - k) * (T::one() + k)).sqrt();
    Ok(elliptic_k_from_complement(kp))
}

/// `K(k)` evaluated from the complementary modulus `k' = √(1 − k²)`.
///
/// Near the logarithmic singularity `k → 1` this keeps full relative accuracy
/// when the caller can form `k'` without cancellation.
pub fn elliptic_k_from_complement<T: FloatT>(kp: T) -> T {
    let (m, _) = agm(T::one(), kp, T::zero());
    T::FRAC_PI_2() / m
}

/// Complete elliptic integral of the second kind `E(k)`, `0 ≤ k ≤ 1`.
pub fn elliptic_e<T: FloatT>(k: T) -> Result<T> {
    check_modulus(k, "elliptic_e", true)?;
    if k == T::one() {
        return Ok(T::one());
    }
    let kp = ((T::one() - k) * (T::one() + k)).sqrt();
    let (m, sum) = agm(T::one(), kp, k);
    Ok(T::FRAC_PI_2() / m * (T::one() - sum))
}

/// Both `K(k)` and `E(k)` from a single AGM sweep (`0 ≤ k < 1`).
pub fn elliptic_ke<T: FloatT>(k: T) -> Result<(T, T)> {
    check_modulus(k, "elliptic_ke", false)?;
    let kp = ((T::one() - k) * (T::one() + k)).sqrt();
    let (m, sum) = agm(T::one(), kp, k);
    let kk = T::FRAC_PI_2() / m;
    Ok((kk, kk * (T::one() - sum)))
}

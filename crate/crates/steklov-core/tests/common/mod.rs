//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

use steklov_core::disk_steklov::{CapacitanceModel, DiskSteklovSpectrum};

/// Unit-disk spectrum at the default resolution, solved once per test binary.
pub fn unit_spectrum() -> &'static DiskSteklovSpectrum {
    static S: OnceLock<DiskSteklovSpectrum> = OnceLock::new();
    S.get_or_init(|| DiskSteklovSpectrum::solve(1.0, 64, 800).expect("unit disk spectrum"))
}

pub fn unit_model() -> CapacitanceModel {
    CapacitanceModel::spectral(unit_spectrum().clone())
}

/// Unit of the last printed digit of a published value.
pub fn last_digit_unit(published: &str) -> f64 {
    let decimals = published.split('.').nth(1).map_or(0, str::len);
    10f64.powi(-(decimals as i32))
}

/// `|x − p| ≤` one unit of the last printed digit of `p`.
pub fn within_last_digit(x: f64, published: &str) -> bool {
    let p: f64 = published.parse().unwrap();
    (x - p).abs() <= last_digit_unit(published) * (1.0 + 1e-9)
}

/// `x` rounds to exactly the printed string.
pub fn rounds_to(x: f64, published: &str) -> bool {
    let decimals = published.split('.').nth(1).map_or(0, str::len);
    format!("{x:.decimals$}") == published
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

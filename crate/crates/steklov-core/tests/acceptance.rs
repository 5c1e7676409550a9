//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the PASS/FAIL lines always appear in
//! the `cargo test` output.  The process exits nonzero if any check fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::{log_log_slope, rounds_to, unit_model, unit_spectrum, within_last_digit};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use steklov_core::disk_steklov::{
    c2_by_elliptic_quadrature, c3_by_elliptic_quadrature, capacitance_sigmoidal, monopole_e_heuristic, CapacitanceMode,
    DiskSteklovSpectrum,
};
use steklov_core::expansions::{
    k_eff, k_eff_large_kappa, k_eff_small_kappa, mfrt_coeffs, mfrt_moderate_identical_circular,
    mfrt_moderate_reactivity, models_for_layout, principal_eigenvalue, splitting_sum_check, Dimensional, PatchShape,
};
use steklov_core::oracle::{sn_oracle, sn_oracle_extrapolated};
use steklov_core::sphere_geometry::{
    antipodal_pair, discrete_energy, discrete_energy_asymptote, fibonacci_layout, from_spherical, green_matrix,
    PatchLayout, B1_CONTINUUM, B1_DEFECT_CORRECTED,
};
use steklov_core::steklov_asym::{sdn_eigenvalues, sn_near_resonant, sn_nonresonant};
use steklov_core::Reactivity;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: steklov_core::Error) -> String {
    e.to_string()
}

const C1_MU: [&str; 8] = ["1.1578", "4.3168", "7.4602", "10.602", "13.744", "16.886", "20.028", "23.169"];
const C1_D: [&str; 8] = ["1.7524", "0.2298", "0.1000", "0.0587", "0.0397", "0.0291", "0.0225", "0.0180"];
const C1_W: [&str; 8] = ["0.9775", "0.0168", "0.0032", "0.0011", "0.0005", "0.0003", "0.0002", "0.0001"];

fn disk_spectrum() -> Outcome {
    let start = Instant::now();
    let s = DiskSteklovSpectrum::solve(1.0, 64, 800).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    for k in 0..8 {
        ensure(within_last_digit(s.mu[k], C1_MU[k]), format!("mu_{k} = {} vs {}", s.mu[k], C1_MU[k]))?;
        ensure(within_last_digit(s.d[k].abs(), C1_D[k]), format!("d_{k} = {} vs {}", s.d[k], C1_D[k]))?;
        let w = s.d[k] * s.d[k] / PI;
        ensure(within_last_digit(w, C1_W[k]), format!("d_{k}^2/pi = {w} vs {}", C1_W[k]))?;
    }
    let partial: f64 = s.d[..8].iter().map(|d| d * d / PI).sum();
    ensure(secs < 10.0, format!("solve took {secs:.2} s"))?;
    Ok(format!(
        "mu, d and d^2/pi for k < 8 within the last printed digit; sum of 8 weights {partial:.4}; solve {secs:.2} s"
    ))
}

fn capacitance_values() -> Outcome {
    let m = unit_model();
    let c_inf = m.capacitance_infinite_spectral();
    let rel = (c_inf - 2.0 / PI).abs() / (2.0 / PI);
    ensure(rel < 5e-3, format!("truncated C(inf) = {c_inf}, off by {rel:.2e}"))?;
    let c = m.taylor_coeffs(3).map_err(err)?;
    ensure(c[0] == 0.5, format!("c1 = {}", c[0]))?;
    let c2_exact = 4.0 / (3.0 * PI);
    for (label, c2) in [("spectral", c[1]), ("elliptic", c2_by_elliptic_quadrature())] {
        ensure((c2 - c2_exact).abs() < 1e-3, format!("{label} c2 = {c2}"))?;
    }
    for (label, c3) in [("spectral", c[2]), ("elliptic", c3_by_elliptic_quadrature())] {
        ensure((c3 - 0.3651).abs() < 1e-3, format!("{label} c3 = {c3}"))?;
    }
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let kappa = 10f64.powf(-2.0 + 5.0 * i as f64 / 100.0);
        let spectral = m.capacitance(Reactivity::Finite(kappa)).map_err(err)?;
        let sig = capacitance_sigmoidal(1.0, Reactivity::Finite(kappa));
        worst = worst.max((sig - spectral).abs() / spectral);
    }
    // The published bound is a one-figure percentage.
    ensure(worst < 0.0405, format!("sigmoidal deviation {worst:.4}"))?;
    Ok(format!(
        "C(inf) truncated off by {rel:.2e}; c1 = 0.5; c2 = {:.6}, {:.6}; c3 = {:.6}, {:.6}; sigmoidal max deviation {:.2}%",
        c[1],
        c2_by_elliptic_quadrature(),
        c[2],
        c3_by_elliptic_quadrature(),
        100.0 * worst
    ))
}

fn monopole() -> Outcome {
    let m = unit_model();
    let start = Instant::now();
    let e_inf = m.monopole_unit_quadrature(Reactivity::Infinite).map_err(err)?;
    let exact = (3.0 - 4.0 * 2f64.ln()) / (PI * PI);
    ensure((e_inf - exact).abs() < 1e-4, format!("E(inf) = {e_inf} vs {exact}"))?;
    let mut worst = 0.0f64;
    let mut slowest = start.elapsed().as_secs_f64();
    for i in 0..=60 {
        let kappa = 10f64.powf(-1.0 + 3.0 * i as f64 / 60.0);
        let t = Instant::now();
        let e = m.monopole_e(Reactivity::Finite(kappa)).map_err(err)?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let h = monopole_e_heuristic(1.0, Reactivity::Finite(kappa));
        worst = worst.max((h - e).abs() / e);
    }
    ensure(worst < 7e-3, format!("heuristic deviation {worst:.5}"))?;
    ensure(slowest < 30.0, format!("slowest E evaluation {slowest:.2} s"))?;
    Ok(format!(
        "E(inf) = {e_inf:.7} (exact {exact:.7}); heuristic max deviation {:.3}% on [0.1, 100]; slowest {slowest:.3} s",
        100.0 * worst
    ))
}

fn neumann_zeros() -> Outcome {
    let m = unit_model();
    let z = m.neumann_zeros(3).map_err(err)?;
    for (k, p) in [(1, "4.1213"), (2, "7.3421"), (3, "10.517")] {
        ensure(within_last_digit(z[k], p), format!("mu_{k}^N = {} vs {p}", z[k]))?;
    }
    let mu = &m.spectrum.mu;
    let all = m.neumann_zeros(20).map_err(err)?;
    for k in 1..=20 {
        ensure(mu[k - 1] < all[k] && all[k] < mu[k], format!("zero {k} does not interlace"))?;
    }
    Ok(format!("mu^N = {:.5}, {:.5}, {:.5}; interlacing holds for k <= 20", z[1], z[2], z[3]))
}

fn sdn() -> Outcome {
    let m = unit_model();
    let b = sdn_eigenvalues(&m, std::slice::from_ref(&m), &antipodal_pair(), 3).map_err(err)?;
    let table = [(0.1, ["0.5561", "4.146", "7.338"]), (0.2, ["0.5286", "4.088", "7.282"])];
    let mut shown = Vec::new();
    for (eps, row) in table {
        for (br, p) in b.iter().zip(row) {
            let v = br.evaluate(eps);
            ensure(within_last_digit(v, p), format!("eps {eps} k {}: {v} vs {p}", br.k))?;
            shown.push(format!("{v:.4}"));
        }
    }
    Ok(format!("eps 0.1: {}; eps 0.2: {}", shown[..3].join(", "), shown[3..].join(", ")))
}

fn sn_single() -> Outcome {
    let b = sn_nonresonant(&[unit_model()], &[[0.0, 0.0, 1.0]], 4).map_err(err)?;
    let published = [(4.121, -0.573), (7.342, -0.552), (10.517, -0.542), (13.677, -0.535)];
    let mut shown = Vec::new();
    for (br, (s0, s2)) in b.iter().zip(published) {
        ensure((br.sigma0 - s0).abs() <= 2e-3, format!("sigma0 {} vs {s0}", br.sigma0))?;
        ensure((br.sigma2 - s2).abs() <= 5e-3, format!("sigma2 {} vs {s2}", br.sigma2))?;
        shown.push(format!("({:.4}, {:.4})", br.sigma0, br.sigma2));
    }
    Ok(shown.join(" "))
}

fn oracle() -> Outcome {
    let f1 = [(0.1, "4.0646"), (0.15, "4.0362"), (0.2, "4.0080"), (0.25, "3.9801"), (0.3, "3.9523")];
    for (eps, p) in f1 {
        let r = sn_oracle(&[eps], 1000, 1).map_err(err)?;
        ensure(rounds_to(r.eigenvalues[0], p), format!("eps {eps}: {} vs {p}", r.eigenvalues[0]))?;
    }
    let start = Instant::now();
    let r = sn_oracle(&[0.2, 0.2], 2000, 5).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let accurate = ["1.0305", "4.0080", "4.1950", "7.2325", "7.3448"];
    for (v, p) in r.eigenvalues.iter().zip(accurate) {
        ensure(rounds_to(*v, p), format!("two patches: {v} vs {p}"))?;
    }
    ensure(secs < 120.0, format!("n_max = 2000 solve took {secs:.1} s"))?;
    Ok(format!("Table F.1 row (n_max 1000) and two-patch row (n_max 2000, {secs:.1} s) match to 4 decimals"))
}

fn near_resonant() -> Outcome {
    let m = unit_model();
    let centers = antipodal_pair();
    let alpha_exact = (2f64.ln() - 1.0) / (4.0 * PI);
    let mut shown = Vec::new();
    for (k, p) in [(0, 1.0075), (1, 4.1896), (2, 7.3416)] {
        let b = sn_near_resonant(&m, &centers, k).map_err(err)?;
        ensure(b.len() == 1, format!("expected one branch, got {}", b.len()))?;
        let alpha = b[0].alpha.unwrap_or(f64::NAN);
        ensure((alpha - alpha_exact).abs() < 1e-12, format!("alpha = {alpha}"))?;
        let v = b[0].evaluate(0.2);
        ensure((v - p).abs() <= 1e-3, format!("k' = {k}: {v} vs {p}"))?;
        shown.push(format!("{v:.4}"));
    }
    Ok(format!("eps 0.2: {}; alpha = (ln 2 - 1)/(4 pi)", shown.join(", ")))
}

fn convergence_order() -> Outcome {
    let eps = [0.1f64, 0.15, 0.2, 0.25, 0.3];
    let asy = sn_nonresonant(&[unit_model()], &[[0.0, 0.0, 1.0]], 2).map_err(err)?;
    let mut errors = [Vec::new(), Vec::new()];
    for e in eps {
        let n_max = (100.0 / e).round() as usize;
        let r = sn_oracle_extrapolated(&[e], n_max, 2).map_err(err)?;
        for b in 0..2 {
            errors[b].push((r.eigenvalues[b] - asy[b].evaluate(e)).abs());
        }
    }
    let slopes: Vec<f64> = errors.iter().map(|er| log_log_slope(&eps, er)).collect();
    for (b, s) in slopes.iter().enumerate() {
        ensure(*s >= 1.8, format!("branch {} slope {s:.3}", b + 1))?;
    }
    Ok(format!("log-log slopes {:.3} and {:.3} (extrapolated oracle)", slopes[0], slopes[1]))
}

fn expansions() -> Outcome {
    let unit = unit_spectrum();
    // Splitting probabilities sum to one for random three-patch layouts.
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 48, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let angles = (0.0..PI, 0.0..2.0 * PI);
    let kappa = prop_oneof![Just(Reactivity::Infinite), (0.05f64..50.0).prop_map(Reactivity::Finite)];
    let strategy =
        ([angles.clone(), angles.clone(), angles], [0.3f64..1.0, 0.3f64..1.0], [kappa.clone(), kappa.clone(), kappa]);
    let worst_sum = std::cell::Cell::new(0.0f64);
    let cases = std::cell::Cell::new(0usize);
    runner
        .run(&strategy, |(pos, radii, kappas)| {
            let centers = pos.iter().map(|(t, p)| from_spherical(*t, *p)).collect();
            let layout = match PatchLayout::new(centers, vec![1.0, radii[0], radii[1]], kappas.to_vec(), 0.05) {
                Ok(l) => l,
                Err(_) => return Err(TestCaseError::reject("patches too close")),
            };
            let models = models_for_layout(unit, &layout, CapacitanceMode::Spectral).unwrap();
            let defect = splitting_sum_check(&layout, &models, 0.05).unwrap().abs();
            worst_sum.set(worst_sum.get().max(defect));
            cases.set(cases.get() + 1);
            prop_assert!(defect < 1e-10, "sum defect {}", defect);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    // Taylor and spectral capacitance paths agree for small reactivity.
    let mut worst_taylor = 0.0f64;
    for kappa in [0.005, 0.01, 0.02, 0.04] {
        let layout = PatchLayout::identical(antipodal_pair(), Reactivity::Finite(kappa), 0.1).map_err(err)?;
        let spectral = models_for_layout(unit, &layout, CapacitanceMode::Spectral).map_err(err)?;
        let taylor = models_for_layout(unit, &layout, CapacitanceMode::Taylor(3)).map_err(err)?;
        let a = mfrt_coeffs(&layout, &spectral).map_err(err)?.evaluate(0.1);
        let b = mfrt_coeffs(&layout, &taylor).map_err(err)?.evaluate(0.1);
        worst_taylor = worst_taylor.max((a - b).abs() / a.abs());
    }
    ensure(worst_taylor < 1e-3, format!("Taylor vs spectral MFRT differ by {worst_taylor:.2e}"))?;

    // λ₀·ū − 1 shrinks like ε² log² ε.  A single patch is used because with
    // several patches the O(ε) coefficient of ū can vanish at some ε and
    // spoil a log-log fit over a finite range.
    let eps = [0.00125, 0.0025, 0.005, 0.01, 0.02, 0.04];
    let mut slope = f64::INFINITY;
    for kappa in [Reactivity::Infinite, Reactivity::Finite(5.0)] {
        let layout = PatchLayout::identical(vec![[0.0, 0.0, 1.0]], kappa, 0.01).map_err(err)?;
        let models = models_for_layout(unit, &layout, CapacitanceMode::Spectral).map_err(err)?;
        let mfrt = mfrt_coeffs(&layout, &models).map_err(err)?;
        let mut defects = Vec::new();
        for e in eps {
            let lambda = principal_eigenvalue(&layout, &models, e).map_err(err)?.evaluate(e);
            defects.push((lambda * mfrt.evaluate(e) - 1.0).abs());
        }
        let s = log_log_slope(&eps, &defects);
        ensure(s > 1.3, format!("lambda0*u slope {s:.3} at kappa {kappa}"))?;
        let scaled: Vec<f64> = eps.iter().zip(&defects).map(|(e, d)| d / (e * e * (e / 2.0).ln().powi(2))).collect();
        let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        ensure(spread < 3.0, format!("defect / (eps log eps)^2 varies by a factor {spread:.2} at kappa {kappa}"))?;
        slope = slope.min(s);
    }

    // Moderate-reactivity coefficients for N identical circular patches.
    let dim = Dimensional::new(2.0, 0.7).map_err(err)?;
    let c3 = c3_by_elliptic_quadrature();
    let mut worst_coeff = 0.0f64;
    for n in [1usize, 2, 5, 12] {
        let layout =
            PatchLayout::identical(fibonacci_layout(n).map_err(err)?, Reactivity::Finite(3.0), 0.05).map_err(err)?;
        let general =
            mfrt_moderate_reactivity(&layout, &vec![3.0; n], &vec![PatchShape::disk(1.0, c3); n], dim).map_err(err)?;
        let g = green_matrix(&layout).map_err(err)?;
        let green_sum = g.bilinear(&vec![1.0; n], &vec![1.0; n]);
        let closed = mfrt_moderate_identical_circular(n, 3.0, c3, green_sum, dim, 0.05);
        for (a, b) in general.term_values(0.05).iter().zip(closed) {
            worst_coeff = worst_coeff.max((a - b).abs() / b.abs().max(1e-300));
        }
    }
    ensure(worst_coeff < 1e-12, format!("moderate-reactivity coefficients differ by {worst_coeff:.2e}"))?;

    Ok(format!(
        "splitting sum defect {:.1e} over {} layouts; Taylor/spectral {worst_taylor:.1e}; \
         lambda0*u slope {slope:.2}; identical-patch coefficients {worst_coeff:.1e}",
        worst_sum.get(),
        cases.get()
    ))
}

fn homogenization() -> Outcome {
    let b1 = -0.5;
    let c_inf = 2.0 / PI;
    let e_inf = (3.0 - 4.0 * 2f64.ln()) / (PI * PI);
    let mut worst = 0.0f64;
    for (f, eps) in [(0.01, 0.02), (0.05, 0.05), (0.1, 0.01), (0.2, 0.1)] {
        let large = k_eff(c_inf, e_inf, f, eps, b1).map_err(err)?;
        worst = worst.max((large - k_eff_large_kappa(f, eps, b1)).abs() / large);
        for kappa in [0.01, 0.1, 1.0] {
            let small = k_eff(kappa / 2.0, kappa * kappa / 32.0, f, eps, b1).map_err(err)?;
            worst = worst.max((small - k_eff_small_kappa(kappa, f, eps, b1)).abs() / small);
        }
    }
    ensure(worst < 1e-10, format!("limit forms differ by {worst:.2e}"))?;
    let h = discrete_energy(&fibonacci_layout(500).map_err(err)?).map_err(err)?;
    let asym = discrete_energy_asymptote(500, B1_DEFECT_CORRECTED);
    let rel = (h - asym).abs() / asym.abs();
    ensure(rel < 0.01, format!("discrete energy {h} vs {asym}"))?;
    let continuum = discrete_energy_asymptote(500, B1_CONTINUUM);
    let rel_continuum = (h - continuum).abs() / continuum.abs();
    Ok(format!(
        "limit forms agree to {worst:.1e}; discrete energy at N = 500 within {:.3}% (b1 = -0.5523; {:.2}% with b1 = -1/2)",
        100.0 * rel,
        100.0 * rel_continuum
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("disk Steklov spectrum", disk_spectrum),
        ("capacitance values", capacitance_values),
        ("monopole coefficient", monopole),
        ("Neumann zeros", neumann_zeros),
        ("SDN asymptotics", sdn),
        ("SN single patch", sn_single),
        ("SN oracle", oracle),
        ("SN near-resonant", near_resonant),
        ("convergence order", convergence_order),
        ("MFRT and splitting properties", expansions),
        ("homogenization", homogenization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1} s): {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

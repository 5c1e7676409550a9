//! Property tests over randomly drawn inputs.

mod common;

use std::f64::consts::PI;

use common::{unit_model, unit_spectrum};
use proptest::prelude::*;
use steklov_core::disk_steklov::{CapacitanceMode, CapacitanceModel};
use steklov_core::expansions::{models_for_layout, splitting_coeffs, splitting_sum_check};
use steklov_core::io::LayoutFile;
use steklov_core::oracle::{k_element, k_element_closed_form, k_element_two};
use steklov_core::sphere_geometry::{
    angle_from_chord, chord_from_angle, from_spherical, platonic_layout, GreenMatrix, PatchLayout,
};
use steklov_core::steklov_asym::{deflated_green_eigenpairs, merged_poles, sn_near_resonant, sn_nonresonant};
use steklov_core::Reactivity;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn reactivity() -> impl Strategy<Value = Reactivity> {
    prop_oneof![Just(Reactivity::Infinite), (0.01f64..100.0).prop_map(Reactivity::Finite)]
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn capacitance_is_increasing_and_bounded(k1 in 1e-3f64..1e3, k2 in 1e-3f64..1e3) {
        let m = unit_model();
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        prop_assume!(hi - lo > 1e-9 * hi);
        let c_lo = m.capacitance(Reactivity::Finite(lo)).unwrap();
        let c_hi = m.capacitance(Reactivity::Finite(hi)).unwrap();
        prop_assert!(c_lo < c_hi);
        prop_assert!(c_hi < 2.0 / PI);
        prop_assert!(c_lo <= lo / 2.0 * (1.0 + 1e-12));
        prop_assert!(m.capacitance_derivative(Reactivity::Finite(lo)).unwrap() > 0.0);
    }

    #[test]
    fn capacitance_scales_with_radius(a in 0.2f64..3.0, kappa in 1e-2f64..1e2) {
        let m = unit_model();
        let scaled = CapacitanceModel::spectral(unit_spectrum().scaled(a).unwrap());
        let direct = scaled.capacitance(Reactivity::Finite(kappa)).unwrap();
        let via_unit = a * m.capacitance(Reactivity::Finite(kappa * a)).unwrap();
        prop_assert!((direct - via_unit).abs() <= 1e-12 * via_unit.abs().max(1e-300));
    }

    #[test]
    fn monopole_ratio_lies_between_limits(kappa in 1e-2f64..1e3) {
        let m = unit_model();
        let c = m.capacitance(Reactivity::Finite(kappa)).unwrap();
        let e = m.monopole_e(Reactivity::Finite(kappa)).unwrap();
        let ratio = e / (c * c);
        prop_assert!(ratio < 0.125 + 1e-9, "E/C^2 = {}", ratio);
        prop_assert!(ratio > 0.75 - 2f64.ln() - 1e-6, "E/C^2 = {}", ratio);
    }

    #[test]
    fn legendre_overlap_is_symmetric(m in 0usize..40, n in 0usize..40, eps in 0.01f64..3.0) {
        let kmn = k_element(m, n, eps).unwrap();
        let knm = k_element(n, m, eps).unwrap();
        // K_{m,n} / (m + 1/2) is a plain overlap integral.
        prop_assert!((kmn / (m as f64 + 0.5) - knm / (n as f64 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn antipodal_overlap_has_parity(m in 0usize..30, n in 0usize..30, eps in 0.01f64..1.5) {
        // The south cap sees P_m(−x) = (−1)^m P_m(x).
        let both = k_element_two(m, n, eps, eps).unwrap();
        let north = k_element(m, n, eps).unwrap();
        let expected = if (m + n) % 2 == 0 { 2.0 * north } else { 0.0 };
        prop_assert!((both - expected).abs() < 1e-11 * (1.0 + north.abs()), "{} vs {}", both, expected);
    }

    #[test]
    fn closed_form_overlap_matches_quadrature(m in 0usize..10, n in 0usize..10, eps in 0.05f64..2.5) {
        let q = k_element(m, n, eps).unwrap();
        let c = k_element_closed_form(m, n, eps).unwrap();
        prop_assert!((q - c).abs() < 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn chord_angle_round_trip(theta in 1e-4f64..3.1) {
        let back = angle_from_chord(chord_from_angle(theta).unwrap()).unwrap();
        prop_assert!((back - theta).abs() < 1e-12);
    }

    #[test]
    fn reactivity_text_round_trip(k in reactivity()) {
        let back: Reactivity = k.to_string().parse().unwrap();
        prop_assert_eq!(back, k);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn splitting_probabilities_sum_to_one(
        pos in prop::collection::vec((0.0f64..PI, 0.0f64..2.0 * PI), 2..6),
        kappas in prop::collection::vec(reactivity(), 6),
        eps in 0.01f64..0.1,
    ) {
        let n = pos.len();
        let centers = pos.iter().map(|(t, p)| from_spherical(*t, *p)).collect();
        let layout = PatchLayout::new(centers, vec![1.0; n], kappas[..n].to_vec(), eps);
        prop_assume!(layout.is_ok());
        let layout = layout.unwrap();
        let models = models_for_layout(unit_spectrum(), &layout, CapacitanceMode::Spectral).unwrap();
        prop_assert!(splitting_sum_check(&layout, &models, eps).unwrap().abs() < 1e-10);
        for t in 0..n {
            let u = splitting_coeffs(&layout, &models, t).unwrap().evaluate(eps);
            prop_assert!(u.is_finite());
        }
    }

    #[test]
    fn sn_roots_lie_between_merged_poles(radii in prop::collection::vec(0.4f64..1.0, 1..3)) {
        let mut radii = radii;
        radii.insert(0, 1.0);
        let n = radii.len();
        let centers: Vec<_> = (0..n).map(|i| from_spherical(PI * i as f64 / n as f64 + 0.3, 1.1 * i as f64)).collect();
        let models: Vec<CapacitanceModel> =
            radii.iter().map(|a| CapacitanceModel::spectral(unit_spectrum().scaled(*a).unwrap())).collect();
        let poles = merged_poles(&models);
        let branches = sn_nonresonant(&models, &centers, 4).unwrap();
        for b in &branches {
            prop_assert!(poles[b.k - 1] < b.sigma0 && b.sigma0 < poles[b.k]);
            let total: f64 = b.capacitances.iter().sum();
            prop_assert!(total.abs() < 1e-8, "sum of capacitances {}", total);
        }
    }
}

#[test]
fn deflated_eigenvectors_are_orthogonal_to_uniform() {
    for n in [4, 6, 8, 12, 20] {
        let g = GreenMatrix::from_centers(&platonic_layout(n).unwrap()).unwrap();
        let pairs = deflated_green_eigenpairs(&g);
        assert_eq!(pairs.len(), n - 1);
        for (i, (_, a)) in pairs.iter().enumerate() {
            assert!(a.iter().sum::<f64>().abs() < 1e-12);
            for (_, b) in &pairs[..i] {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn near_resonant_multiplicities_on_the_cube() {
    let m = unit_model();
    let branches = sn_near_resonant(&m, &platonic_layout(8).unwrap(), 0).unwrap();
    assert_eq!(branches.len(), 7);
    let total: usize = {
        let mut alphas: Vec<f64> = branches.iter().map(|b| b.alpha.unwrap()).collect();
        alphas.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        alphas.iter().map(|a| branches.iter().filter(|b| (b.alpha.unwrap() - a).abs() < 1e-9).count()).sum()
    };
    assert_eq!(total, 7);
    // The cube's projected Green's matrix has eigenvalues of multiplicity 3, 3 and 1.
    let mut mult: Vec<usize> = branches.iter().map(|b| b.multiplicity).collect();
    mult.sort_unstable();
    assert_eq!(mult, vec![1, 3, 3, 3, 3, 3, 3]);
}

#[test]
fn layout_file_round_trip() {
    let text = r#"{"size": {"angle": 0.1}, "patches": [
        {"center": [0, 0, 1], "kappa": "inf"},
        {"theta": 2.0, "phi": 1.0, "radius": 0.5, "kappa": 3.5}]}"#;
    let file = LayoutFile::parse(text).unwrap();
    let again = LayoutFile::parse(&serde_json::to_string(&file).unwrap()).unwrap();
    assert_eq!(file, again);
    assert_eq!(file.to_layout().unwrap(), again.to_layout().unwrap());
}

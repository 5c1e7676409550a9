//! Serialized spectra reproduce downstream results bit for bit.

use steklov_core::disk_steklov::{CapacitanceModel, DiskSteklovSpectrum};
use steklov_core::sphere_geometry::antipodal_pair;
use steklov_core::steklov_asym::sdn_eigenvalues;
use steklov_core::Reactivity;

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("steklov-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn cache_round_trip_is_bit_identical() {
    let dir = scratch_dir("cache");
    let fresh = DiskSteklovSpectrum::cached(&dir, 1.0, 24, 200).unwrap();
    let loaded = DiskSteklovSpectrum::cached(&dir, 1.0, 24, 200).unwrap();
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
    assert_eq!(fresh.mu, loaded.mu);
    assert_eq!(fresh.d, loaded.d);
    assert_eq!(fresh.psi, loaded.psi);

    let a = CapacitanceModel::spectral(fresh);
    let b = CapacitanceModel::spectral(loaded);
    for k in [0.1, 1.0, 10.0, -0.5] {
        let k = Reactivity::Finite(k);
        assert_eq!(a.capacitance(k).unwrap().to_bits(), b.capacitance(k).unwrap().to_bits());
        assert_eq!(a.monopole_e(k).unwrap().to_bits(), b.monopole_e(k).unwrap().to_bits());
        assert_eq!(a.patch_solution_w(k, 0.3).unwrap().to_bits(), b.patch_solution_w(k, 0.3).unwrap().to_bits());
    }
    let centers = antipodal_pair();
    let sa = sdn_eigenvalues(&a, std::slice::from_ref(&a), &centers, 2).unwrap();
    let sb = sdn_eigenvalues(&b, std::slice::from_ref(&b), &centers, 2).unwrap();
    assert_eq!(sa, sb);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn corrupt_cache_file_is_replaced() {
    let dir = scratch_dir("corrupt");
    let first = DiskSteklovSpectrum::cached(&dir, 1.0, 8, 64).unwrap();
    let path = std::fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path();
    std::fs::write(&path, "{ not json").unwrap();
    let again = DiskSteklovSpectrum::cached(&dir, 1.0, 8, 64).unwrap();
    assert_eq!(first.mu, again.mu);
    assert!(DiskSteklovSpectrum::load(&path).is_ok());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn load_rejects_malformed_file() {
    let dir = scratch_dir("malformed");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"version": 1}"#).unwrap();
    assert!(DiskSteklovSpectrum::load(&path).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

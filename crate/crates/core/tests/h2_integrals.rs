use std::path::PathBuf;

use qipa::encoding::{jordan_wigner, parse_integrals};
use qipa::linalg::Spectrum;
use qipa::Observable;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn fci_energy(text: &str) -> f64 {
    text.lines().find_map(|l| l.strip_prefix("# fci_energy ")).unwrap().trim().parse().unwrap()
}

#[test]
fn qubit_hamiltonians_are_hermitian_and_reproduce_fci() {
    let mut files: Vec<_> = std::fs::read_dir(data("h2")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 5);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        let h = jordan_wigner(&parse_integrals(&text).unwrap(), 4).unwrap();
        assert!(h.is_hermitian(1e-12), "{}", path.display());
        assert!(h.max_imaginary() < 1e-12);
        let dense = h.to_dense().unwrap();
        assert!((&dense - dense.adjoint()).iter().all(|z| z.norm() < 1e-12));
        let e0 = Spectrum::new(&dense).ground_energy();
        assert!((e0 - fci_energy(&text)).abs() < 1e-8, "{}: {e0} vs {}", path.display(), fci_energy(&text));
    }
}

#[test]
fn qubit_hamiltonian_conserves_particle_number() {
    let text = std::fs::read_to_string(data("h2/h2_r0.74.int")).unwrap();
    let dense = jordan_wigner(&parse_integrals(&text).unwrap(), 4).unwrap().to_dense().unwrap();
    for r in 0..16usize {
        for c in 0..16usize {
            if r.count_ones() != c.count_ones() {
                assert!(dense[(r, c)].norm() < 1e-12);
            }
        }
    }
}

#[test]
fn shipped_pauli_file_matches_the_mapping() {
    let text = std::fs::read_to_string(data("h2/h2_r0.74.int")).unwrap();
    let h = jordan_wigner(&parse_integrals(&text).unwrap(), 4).unwrap();
    let shipped = std::fs::read_to_string(data("problems/h2_r0.74.txt")).unwrap();
    assert_eq!(h.to_pauli_text().unwrap(), shipped);
    let parsed = Observable::from_pauli_text(&shipped, Some(4)).unwrap();
    let diff = (&parsed.to_dense().unwrap() - &h.to_dense().unwrap()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12);
}

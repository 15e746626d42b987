mod common;

use std::f64::consts::FRAC_PI_2;

use hybrid_radiance::heff::product_with_center_of_mass;
use hybrid_radiance::linalg::trace;
use hybrid_radiance::spectra::eigendecompose_matrix;
use hybrid_radiance::{
    build_heff, build_matrices, eigendecompose, enumerate_basis, find_kappa0, match_separable, separable_block,
    two_atom_spectrum, Complex64, EigenMode, Error, GeometryConfig, Parity,
};
use ndarray::Array1;

use common::multiset_deviation;

fn spectrum(g: &GeometryConfig) -> Vec<EigenMode> {
    let k = build_matrices(g).unwrap();
    let b = enumerate_basis(g).unwrap();
    eigendecompose(&build_heff(g, &k, &b).unwrap()).unwrap()
}

fn eigenvalues(modes: &[EigenMode]) -> Vec<Complex64> {
    modes.iter().map(|m| m.eigenvalue).collect()
}

#[test]
fn two_atom_levels_match_full_diagonalisation() {
    for n_ph in 0..=3 {
        for (spacing, phi, eta0) in [(0.2, FRAC_PI_2, 0.3), (0.37, 0.6, 0.15), (0.11, 2.0, 0.05)] {
            let g = GeometryConfig::new(2, spacing, phi, eta0, n_ph).unwrap();
            let k = build_matrices(&g).unwrap();
            let levels = two_atom_spectrum(&g, &k).unwrap().levels;
            assert_eq!(levels.len(), 2 * (n_ph + 1));
            let expected: Vec<Complex64> = levels.iter().map(|l| l.energy).collect();
            let dev = multiset_deviation(&expected, &eigenvalues(&spectrum(&g)), 0.0);
            assert!(dev < 1e-12, "n_ph = {n_ph}, d = {spacing}: {dev:e}");
            for l in &levels {
                assert_eq!(l.rate, -2.0 * l.energy.im);
            }
        }
    }
}

#[test]
fn two_atom_rate_formula() {
    let g = GeometryConfig::new(2, 0.23, FRAC_PI_2, 0.2, 1).unwrap();
    let k = build_matrices(&g).unwrap();
    let spec = two_atom_spectrum(&g, &k).unwrap();
    let level = spec.levels.iter().find(|l| l.parity == Parity::A && l.n_a == 1).unwrap();
    let expected = 1.0 - k.gamma_mat[[0, 1]] - 3.0 * 0.04 * k.gamma_dd[[0, 1]];
    assert!((level.rate - expected).abs() < 1e-14);
}

#[test]
fn two_atom_rates_without_coupling() {
    let g = GeometryConfig::new(2, 0.2, FRAC_PI_2, 0.0, 2).unwrap();
    let k = build_matrices(&g).unwrap();
    let mut rates: Vec<f64> = two_atom_spectrum(&g, &k).unwrap().levels.iter().map(|l| l.rate).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let g12 = k.gamma_mat[[0, 1]];
    assert_eq!(rates.len(), 2);
    assert!((rates[0] - (1.0 - g12)).abs() < 1e-15 && (rates[1] - (1.0 + g12)).abs() < 1e-15);
}

#[test]
fn two_atom_needs_two_atoms() {
    let g = GeometryConfig::new(3, 0.2, 1.0, 0.1, 1).unwrap();
    let k = build_matrices(&g).unwrap();
    assert!(matches!(two_atom_spectrum(&g, &k), Err(Error::Domain(_))));
}

#[test]
fn rates_at_magic_distance_ignore_coupling() {
    let d0 = find_kappa0(FRAC_PI_2).unwrap().d0;
    for n_ph in 0..=3 {
        let g0 = GeometryConfig::new(2, d0, FRAC_PI_2, 0.0, n_ph).unwrap();
        let reference = two_atom_spectrum(&g0, &build_matrices(&g0).unwrap()).unwrap();
        for eta0 in [0.05, 0.17, 0.3] {
            let g = GeometryConfig::new(2, d0, FRAC_PI_2, eta0, n_ph).unwrap();
            let spec = two_atom_spectrum(&g, &build_matrices(&g).unwrap()).unwrap();
            for (a, b) in spec.levels.iter().zip(&reference.levels) {
                assert!((a.rate - b.rate).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn single_atom_has_bare_decay() {
    for n_ph in 0..=3 {
        let modes = spectrum(&GeometryConfig::new(1, 0.2, 1.0, 0.3, n_ph).unwrap());
        assert_eq!(modes.len(), 1);
        assert!((modes[0].eigenvalue - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }
}

#[test]
fn uncoupled_hamiltonian_copies_m() {
    let g = GeometryConfig::new(3, 0.2, 1.1, 0.0, 2).unwrap();
    let k = build_matrices(&g).unwrap();
    let b = enumerate_basis(&g).unwrap();
    let h = build_heff(&g, &k, &b).unwrap().matrix;
    let configs = b.n_configs();
    for r in 0..b.len() {
        for c in 0..b.len() {
            let expected = if r % configs == c % configs {
                k.m_mat[[r / configs, c / configs]]
            } else {
                Complex64::default()
            };
            assert_eq!(h[[r, c]], expected);
        }
    }
}

#[test]
fn uncoupled_rates_have_binomial_multiplicity() {
    for (n, n_ph, mult) in [(3, 2, 6), (4, 1, 4), (2, 3, 4)] {
        let g = GeometryConfig::new(n, 0.2, FRAC_PI_2, 0.0, n_ph).unwrap();
        let k = build_matrices(&g).unwrap();
        let spin = eigendecompose_matrix(&k.m_mat).unwrap();
        let modes = spectrum(&g);
        for (i, m) in modes.iter().enumerate() {
            assert!((m.rate - spin[i / mult].rate).abs() < 1e-10);
            assert!(m.rate >= -1e-10);
        }
    }
}

#[test]
fn coupling_is_continuous_at_zero() {
    let g = GeometryConfig::new(3, 0.2, FRAC_PI_2, 0.0, 2).unwrap();
    let a = eigenvalues(&spectrum(&g));
    let b = eigenvalues(&spectrum(&g.with_eta0(1e-6)));
    assert!(multiset_deviation(&a, &b, 1.0) < 1e-9);
}

#[test]
fn eigenvalues_sum_to_trace() {
    let g = GeometryConfig::new(4, 0.15, 0.9, 0.25, 2).unwrap();
    let k = build_matrices(&g).unwrap();
    let b = enumerate_basis(&g).unwrap();
    let h = build_heff(&g, &k, &b).unwrap();
    let sum: Complex64 = eigendecompose(&h).unwrap().iter().map(|m| m.eigenvalue).sum();
    let tr = trace(&h.matrix);
    assert!((sum - tr).norm() <= 1e-8 * tr.norm());
}

#[test]
fn transpose_has_the_same_spectrum() {
    let g = GeometryConfig::new(3, 0.3, 0.4, 0.2, 2).unwrap();
    let k = build_matrices(&g).unwrap();
    let b = enumerate_basis(&g).unwrap();
    let h = build_heff(&g, &k, &b).unwrap().matrix;
    assert_eq!(h, h.t());
    let a = eigenvalues(&eigendecompose_matrix(&h).unwrap());
    let t = eigenvalues(&eigendecompose_matrix(&h.t().to_owned()).unwrap());
    assert!(multiset_deviation(&a, &t, 1.0) < 1e-12);
}

#[test]
fn modes_are_sorted_normalised_and_accurate() {
    let g = GeometryConfig::new(4, 0.2, FRAC_PI_2, 0.3, 2).unwrap();
    let modes = spectrum(&g);
    assert!(modes.windows(2).all(|w| w[0].rate <= w[1].rate));
    for (i, m) in modes.iter().enumerate() {
        assert_eq!(m.index, i);
        assert_eq!(m.rate, -2.0 * m.eigenvalue.im);
        assert_eq!(m.shift, m.eigenvalue.re);
        let norm: f64 = m.eigenvector.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(m.residual < 1e-10);
    }
}

#[test]
fn rate_branches_are_continuous_in_coupling() {
    let base = GeometryConfig::new(5, 0.2, FRAC_PI_2, 0.0, 2).unwrap();
    let mut previous: Option<Vec<f64>> = None;
    for i in 0..=30 {
        let eta0 = 0.01 * i as f64;
        let rates: Vec<f64> = spectrum(&base.with_eta0(eta0)).iter().map(|m| m.rate).collect();
        let floor = -10.0 * eta0.powi(4) - 1e-10;
        assert!(rates.iter().all(|&r| r >= floor), "negative rate at eta0 = {eta0}");
        if let Some(prev) = &previous {
            let jump = prev.iter().zip(&rates).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(jump < 0.05, "jump {jump} at eta0 = {eta0}");
        }
        previous = Some(rates);
    }
}

#[test]
fn separable_block_holds_the_symmetric_phonon_levels() {
    let g = GeometryConfig::new(2, 0.26, FRAC_PI_2, 0.3, 1).unwrap();
    let k = build_matrices(&g).unwrap();
    let block = separable_block(&g, &k).unwrap();
    let levels = two_atom_spectrum(&g, &k).unwrap().levels;
    let expected: Vec<Complex64> = levels.iter().filter(|l| l.n_a == 0).map(|l| l.energy).collect();
    let got = eigenvalues(&eigendecompose_matrix(&block).unwrap());
    assert!(multiset_deviation(&expected, &got, 1.0) < 1e-14);
    assert_eq!(separable_block(&g.with_eta0(0.0), &k).unwrap(), k.m_mat);
}

#[test]
fn separable_products_are_exact_eigenvectors() {
    let g = GeometryConfig::new(5, 0.2, FRAC_PI_2, 0.3, 2).unwrap();
    let k = build_matrices(&g).unwrap();
    let b = enumerate_basis(&g).unwrap();
    let h = build_heff(&g, &k, &b).unwrap().matrix;
    for spin in eigendecompose_matrix(&separable_block(&g, &k).unwrap()).unwrap() {
        let v = product_with_center_of_mass(spin.eigenvector.as_slice().unwrap(), &b);
        let r: Array1<Complex64> = h.dot(&v) - &v * spin.eigenvalue;
        let resid = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(resid < 1e-9);
    }
}

#[test]
fn matching_finds_the_separable_modes() {
    for (n, n_ph, eta0) in [(2, 1, 0.3), (5, 2, 0.3), (4, 2, 0.0), (3, 1, 0.1)] {
        let g = GeometryConfig::new(n, 0.2, FRAC_PI_2, eta0, n_ph).unwrap();
        let k = build_matrices(&g).unwrap();
        let b = enumerate_basis(&g).unwrap();
        let modes = eigendecompose(&build_heff(&g, &k, &b).unwrap()).unwrap();
        let matches = match_separable(&modes, &separable_block(&g, &k).unwrap(), &b).unwrap();
        assert_eq!(matches.len(), n);
        for m in &matches {
            assert!((modes[m.mode].eigenvalue - m.block_eigenvalue).norm() < 1e-8);
            assert!(m.overlap > 1.0 - 1e-8);
        }
        if n == 2 {
            // the matched modes are the n_a = 0 levels
            let levels = two_atom_spectrum(&g, &k).unwrap().levels;
            for m in &matches {
                let nearest = levels
                    .iter()
                    .min_by(|x, y| {
                        (x.energy - m.block_eigenvalue).norm().total_cmp(&(y.energy - m.block_eigenvalue).norm())
                    })
                    .unwrap();
                assert_eq!(nearest.n_a, 0);
            }
        }
    }
}

#[test]
fn matching_against_a_foreign_block_fails() {
    let g = GeometryConfig::new(3, 0.2, FRAC_PI_2, 0.3, 1).unwrap();
    let k = build_matrices(&g).unwrap();
    let b = enumerate_basis(&g).unwrap();
    let modes = eigendecompose(&build_heff(&g, &k, &b).unwrap()).unwrap();
    let other = GeometryConfig::new(3, 0.35, FRAC_PI_2, 0.3, 1).unwrap();
    let block = separable_block(&other, &build_matrices(&other).unwrap()).unwrap();
    match match_separable(&modes, &block, &b) {
        Err(Error::Degeneracy { expected, found, .. }) => assert_eq!((expected, found), (3, 0)),
        other => panic!("expected a degeneracy error, got {other:?}"),
    }
}

#[test]
fn mismatched_inputs_are_rejected() {
    let g = GeometryConfig::new(3, 0.2, 1.0, 0.1, 1).unwrap();
    let k = build_matrices(&g.with_spacing(0.3)).unwrap();
    let b = enumerate_basis(&g).unwrap();
    assert!(matches!(build_heff(&g, &k, &b), Err(Error::Consistency(_))));
    let k = build_matrices(&g).unwrap();
    let b = enumerate_basis(&g.with_n_phonons(2)).unwrap();
    assert!(matches!(build_heff(&g, &k, &b), Err(Error::Consistency(_))));
}

mod common;

use std::f64::consts::{FRAC_PI_2, TAU};

use hybrid_radiance::band::{ShellTable, DEFAULT_SHELLS};
use hybrid_radiance::kernels::DipoleKernel;
use hybrid_radiance::spectra::eigendecompose_matrix;
use hybrid_radiance::{band_scan, brillouin_grid, lattice_sum, Complex64, GeometryConfig, LatticeKernel, SumMethod};
use ndarray::Array2;
use proptest::prelude::*;

fn chain(spacing: f64, eta0: f64) -> GeometryConfig {
    GeometryConfig::new(1, spacing, FRAC_PI_2, eta0, 0).unwrap()
}

#[test]
fn light_cone_separates_radiant_and_dark_states() {
    let g = chain(0.2, 0.0);
    let band = band_scan(&g, &brillouin_grid(&g, 201), DEFAULT_SHELLS, SumMethod::Smoothed).unwrap();
    for p in &band {
        if p.q.abs() > 1.02 {
            assert!(p.rate.abs() <= 5e-3, "q = {}: {}", p.q, p.rate);
        } else if p.q.abs() < 0.98 {
            assert!(p.rate > 0.1, "q = {}: {}", p.q, p.rate);
        }
        assert_eq!(p.e_q, p.m_q);
        assert_eq!(p.q_d_over_pi, 2.0 * p.q * 0.2);
    }
}

#[test]
fn perpendicular_dipoles_radiate_as_the_closed_form() {
    // inside the light cone the decay sum has the closed form 3 lambda (1 + q^2) / (8 d)
    let g = chain(0.2, 0.0);
    for q in [0.0, 0.3, 0.6, 0.9] {
        let m = lattice_sum(q, &g, LatticeKernel::M, DEFAULT_SHELLS, SumMethod::Smoothed).unwrap();
        let expected = 3.0 * (1.0 + q * q) / (8.0 * 0.2);
        assert!((-2.0 * m.value.im - expected).abs() < 1e-6, "q = {q}");
    }
}

#[test]
fn coupling_correction_scales_with_eta_squared() {
    let g = chain(0.2, 0.0);
    let grid = [0.0, 0.25, 0.5, 0.75];
    let base = band_scan(&g, &grid, 20_000, SumMethod::Smoothed).unwrap();
    let mut scaled: Vec<Vec<Complex64>> = Vec::new();
    for eta0 in [0.05, 0.1, 0.3] {
        let band = band_scan(&g.with_eta0(eta0), &grid, 20_000, SumMethod::Smoothed).unwrap();
        scaled.push(band.iter().zip(&base).map(|(a, b)| (a.e_q - b.e_q) / (eta0 * eta0)).collect());
        for (a, b) in band.iter().zip(&base) {
            assert_eq!(a.rate_eta0_zero, b.rate);
            assert!((a.delta_rate - (a.rate - b.rate)).abs() < 1e-15);
        }
    }
    for s in &scaled[1..] {
        for (a, b) in s.iter().zip(&scaled[0]) {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
        }
    }
    assert!(scaled[2].iter().any(|z| z.im.abs() > 1e-3));
}

#[test]
fn doubling_shells_stays_within_the_tail_estimate() {
    for spacing in [0.2, 0.35] {
        let g = chain(spacing, 0.3);
        for q in [0.0, 0.4, 0.97, 1.03, 1.8] {
            for which in [LatticeKernel::M, LatticeKernel::MDd] {
                let a = lattice_sum(q, &g, which, 20_000, SumMethod::Smoothed).unwrap();
                let b = lattice_sum(q, &g, which, 40_000, SumMethod::Smoothed).unwrap();
                let diff = (a.value - b.value).norm();
                assert!(diff < 2.0 * a.tail_estimate, "d = {spacing}, q = {q}, {which:?}: {diff:e} vs {:e}", a.tail_estimate);
            }
        }
    }
}

#[test]
fn smoothing_beats_hard_truncation() {
    let g = chain(0.2, 0.0);
    let reference = lattice_sum(1.5, &g, LatticeKernel::M, 400_000, SumMethod::Smoothed).unwrap().value;
    let raw = lattice_sum(1.5, &g, LatticeKernel::M, 1_000, SumMethod::Raw).unwrap().value;
    let smooth = lattice_sum(1.5, &g, LatticeKernel::M, 1_000, SumMethod::Smoothed).unwrap().value;
    assert!((smooth - reference).norm() < 0.1 * (raw - reference).norm());
}

/// Rates of a ring of `n` sites, where site pairs interact across the shorter
/// arc, each labelled by the plane-wave index dominating its eigenvector.
fn ring_modes(n: usize, spacing: f64) -> Vec<(i64, f64)> {
    let kernel = DipoleKernel::new(FRAC_PI_2).unwrap();
    let mut m = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let sep = (i as isize - j as isize).unsigned_abs();
            let arc = sep.min(n - sep);
            m[[i, j]] = if arc == 0 {
                Complex64::new(0.0, -0.5)
            } else {
                kernel.m(TAU * spacing * arc as f64)
            };
        }
    }
    let half = (n as i64 - 1) / 2;
    let twiddle: Vec<Complex64> = (0..n).map(|m| Complex64::from_polar(1.0, -TAU * m as f64 / n as f64)).collect();
    eigendecompose_matrix(&m)
        .unwrap()
        .iter()
        .map(|mode| {
            let weight = |k: i64| {
                let k = k.rem_euclid(n as i64) as usize;
                (0..n)
                    .map(|j| mode.eigenvector[j] * twiddle[(k * j) % n])
                    .sum::<Complex64>()
                    .norm_sqr()
            };
            let k = (0..=half).max_by(|&a, &b| (weight(a) + weight(-a)).total_cmp(&(weight(b) + weight(-b)))).unwrap();
            (k, mode.rate)
        })
        .collect()
}

#[test]
fn finite_ring_matches_lattice_sums() {
    let (n, spacing) = (401usize, 0.2);
    let g = chain(spacing, 0.0);
    let ring = ring_modes(n, spacing);
    let q_of = |k: i64| k as f64 / (n as f64 * spacing);

    // A ring of 401 sites is the lattice sum cut after 200 shells.
    let truncated = ShellTable::new(&g, n / 2).unwrap();
    for &(k, rate) in &ring {
        let expected = -2.0 * truncated.sums(q_of(k), SumMethod::Raw).0.value.im;
        assert!((rate - expected).abs() < 1e-10, "k = {k}: ring {rate}, truncated sum {expected}");
    }

    // Against the converged sum, the ring's own cutoff error oscillates with
    // amplitude ~ 1 / (N ||q| - 1|), so compare away from the light line.
    let converged = ShellTable::new(&g, DEFAULT_SHELLS).unwrap();
    let mut compared = 0;
    for &(k, rate) in &ring {
        let q = q_of(k);
        if (q.abs() - 1.0).abs() < 0.6 {
            continue;
        }
        let expected = -2.0 * converged.sums(q, SumMethod::Smoothed).0.value.im;
        assert!((rate - expected).abs() < 1e-2, "q = {q}: ring {rate}, lattice {expected}");
        compared += 1;
    }
    assert!(compared > 150, "{compared} modes compared");
}

#[test]
fn grid_and_range_checks() {
    let g = chain(0.25, 0.0);
    assert!(lattice_sum(0.0, &g, LatticeKernel::M, 9, SumMethod::Raw).is_err());
    assert!(band_scan(&g, &[2.01], 100, SumMethod::Raw).is_err());
    let grid = brillouin_grid(&g, 5);
    assert_eq!(grid, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn band_is_even_in_q(q in 0.0f64..2.5, eta0 in 0.0f64..0.4) {
        let g = chain(0.2, eta0);
        let band = band_scan(&g, &[q, -q], 5_000, SumMethod::Smoothed).unwrap();
        prop_assert_eq!(band[0].rate, band[1].rate);
        prop_assert_eq!(band[0].e_q, band[0].m_q + band[0].m_dd_q * (eta0 * eta0));
    }
}

//! Effective non-Hermitian Hamiltonian of the single-excitation sector.
//!
//! ```text
//! H = sum_{jj'} b_j^dag b_j' [ M_jj' + eta0^2 M''_jj' (1 - delta_jj'
//!       + n_j' + n_j - a_j^dag a_j' - a_j'^dag a_j) ]
//! ```
//!
//! The phonon operator in brackets is symmetric under `j <-> j'`, so the
//! matrix is complex symmetric. It conserves the total phonon number and acts
//! within one [`HybridBasis`] sector.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{apply_hop_and_phonon, center_of_mass_amplitudes, HybridBasis, PhononAction};
use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;
use crate::kernels::KernelMatrices;

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub geom: GeometryConfig,
    pub basis: HybridBasis,
    pub matrix: Array2<Complex64>,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn same_chain(a: &GeometryConfig, b: &GeometryConfig) -> bool {
    a.n_atoms == b.n_atoms && a.spacing == b.spacing && a.phi == b.phi && a.gamma == b.gamma
}

pub(crate) fn check_kernels(geom: &GeometryConfig, kernels: &KernelMatrices) -> Result<()> {
    if same_chain(geom, &kernels.geom) {
        Ok(())
    } else {
        Err(Error::Consistency(format!(
            "kernel matrices built for {:?}, Hamiltonian requested for {:?}",
            kernels.geom, geom
        )))
    }
}

pub(crate) fn check_basis(geom: &GeometryConfig, basis: &HybridBasis) -> Result<()> {
    if basis.n_sites() == geom.n_atoms && basis.n_phonons() == geom.n_phonons {
        Ok(())
    } else {
        Err(Error::Consistency(format!(
            "basis has N = {}, n_ph = {}; geometry has N = {}, n_ph = {}",
            basis.n_sites(),
            basis.n_phonons(),
            geom.n_atoms,
            geom.n_phonons
        )))
    }
}

/// Assemble the dense effective Hamiltonian on `basis`.
///
/// `kernels` may come from a geometry that differs from `geom` only in the
/// Lamb-Dicke parameter or phonon number; `eta0` is always taken from `geom`.
pub fn build_heff(
    geom: &GeometryConfig,
    kernels: &KernelMatrices,
    basis: &HybridBasis,
) -> Result<EffectiveHamiltonian> {
    check_kernels(geom, kernels)?;
    check_basis(geom, basis)?;

    let n = geom.n_atoms;
    let eta2 = geom.eta0 * geom.eta0;
    let dim = basis.len();
    let mut h = Array2::<Complex64>::zeros((dim, dim));

    for col in 0..dim {
        let state = basis.state(col);
        let jp = state.spin_site;
        for j in 0..n {
            if j == jp {
                // the phonon bracket vanishes identically on the diagonal
                h[[col, col]] += kernels.m_mat[[j, j]];
                continue;
            }
            let m = kernels.m_mat[[j, jp]];
            let curv = kernels.m_dd[[j, jp]] * eta2;
            let terms = [
                (PhononAction::Identity, m + curv),
                (PhononAction::NumberJ, curv),
                (PhononAction::NumberJp, curv),
                (PhononAction::RaiseJLowerJp, -curv),
                (PhononAction::RaiseJpLowerJ, -curv),
            ];
            for (action, coeff) in terms {
                for (target, amp) in apply_hop_and_phonon(&state, j, jp, action)? {
                    let row = basis
                        .index_of(&target)
                        .expect("phonon-conserving hop stays in the sector");
                    h[[row, col]] += coeff * amp;
                }
            }
        }
    }

    Ok(EffectiveHamiltonian {
        geom: *geom,
        basis: basis.clone(),
        matrix: h,
    })
}

/// Symmetric (`s`) or antisymmetric (`a`) two-atom spin state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    S,
    A,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::S => 1.0,
            Parity::A => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::S => "s",
            Parity::A => "a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAtomLevel {
    pub parity: Parity,
    pub n_ph: usize,
    /// Phonons in the antisymmetric (relative) mode.
    pub n_a: usize,
    pub energy: Complex64,
    pub rate: f64,
}

/// Closed-form spectrum of two atoms, one level per `(parity, n_a <= n_ph)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoAtomSpectrum {
    pub levels: Vec<TwoAtomLevel>,
}

/// Exact levels of the two-atom Hamiltonian in the symmetric/antisymmetric
/// spin and phonon modes:
/// `E = M11 +/- (M12 + eta0^2 M''12) +/- 2 eta0^2 M''12 n_a`.
pub fn two_atom_spectrum(geom: &GeometryConfig, kernels: &KernelMatrices) -> Result<TwoAtomSpectrum> {
    if geom.n_atoms != 2 {
        return Err(Error::domain(format!("two-atom spectrum needs N = 2, got {}", geom.n_atoms)));
    }
    check_kernels(geom, kernels)?;
    let eta2 = geom.eta0 * geom.eta0;
    let m11 = Complex64::new(0.0, -0.5 * geom.gamma);
    let m12 = kernels.m_mat[[0, 1]];
    let m12_dd = kernels.m_dd[[0, 1]];

    let mut levels = Vec::with_capacity(2 * (geom.n_phonons + 1));
    for parity in [Parity::S, Parity::A] {
        for n_a in 0..=geom.n_phonons {
            let energy = m11 + parity.sign() * (m12 + m12_dd * eta2 * (2 * n_a + 1) as f64);
            levels.push(TwoAtomLevel {
                parity,
                n_ph: geom.n_phonons,
                n_a,
                energy,
                rate: -2.0 * energy.im,
            });
        }
    }
    Ok(TwoAtomSpectrum { levels })
}

/// Spin-space matrix `B = M + eta0^2 M'' (1 - delta)` whose eigenvalues are
/// the energies of the separable states `|spin> (a0^dag)^n |0>`.
pub fn separable_block(geom: &GeometryConfig, kernels: &KernelMatrices) -> Result<Array2<Complex64>> {
    check_kernels(geom, kernels)?;
    let eta2 = geom.eta0 * geom.eta0;
    let mut b = kernels.m_mat.clone();
    for ((j, jp), v) in b.indexed_iter_mut() {
        if j != jp {
            *v += kernels.m_dd[[j, jp]] * eta2;
        }
    }
    Ok(b)
}

/// `spin (x) (a0^dag)^n |0>` as a vector on `basis`, normalised if `spin` is.
pub fn product_with_center_of_mass(spin: &[Complex64], basis: &HybridBasis) -> Array1<Complex64> {
    let phonons = center_of_mass_amplitudes(basis);
    let k = phonons.len();
    let mut out = Array1::zeros(basis.len());
    for (j, &s) in spin.iter().enumerate() {
        for (c, &p) in phonons.iter().enumerate() {
            out[j * k + c] = s * p;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_basis;
    use crate::kernels::build_matrices;
    use std::f64::consts::PI;

    fn setup(n: usize, n_ph: usize, eta0: f64) -> (GeometryConfig, KernelMatrices, HybridBasis) {
        let g = GeometryConfig::new(n, 0.2, PI / 2.0, eta0, n_ph).unwrap();
        let k = build_matrices(&g).unwrap();
        let b = enumerate_basis(&g).unwrap();
        (g, k, b)
    }

    #[test]
    fn complex_symmetric() {
        let (g, k, b) = setup(4, 2, 0.3);
        let h = build_heff(&g, &k, &b).unwrap().matrix;
        assert_eq!(h, h.t());
    }

    #[test]
    fn zero_eta_is_block_diagonal_copy_of_m() {
        let (g, k, b) = setup(3, 2, 0.0);
        let h = build_heff(&g, &k, &b).unwrap().matrix;
        let nc = b.n_configs();
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                let expected = if r % nc == c % nc {
                    k.m_mat[[r / nc, c / nc]]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert_eq!(h[[r, c]], expected);
            }
        }
    }

    #[test]
    fn single_atom_only_decays() {
        let (g, k, b) = setup(1, 3, 0.3);
        let h = build_heff(&g, &k, &b).unwrap().matrix;
        assert_eq!(h.shape(), &[1, 1]);
        assert_eq!(h[[0, 0]], Complex64::new(0.0, -0.5));
    }

    #[test]
    fn mismatched_geometry_rejected() {
        let (g, k, b) = setup(3, 1, 0.1);
        let other = g.with_spacing(0.3);
        assert!(matches!(build_heff(&other, &k, &b), Err(Error::Consistency(_))));
        let (_, _, b2) = setup(3, 2, 0.1);
        assert!(matches!(build_heff(&g, &k, &b2), Err(Error::Consistency(_))));
    }

    #[test]
    fn two_atom_levels() {
        let (g, k, _) = setup(2, 1, 0.3);
        let spec = two_atom_spectrum(&g, &k).unwrap();
        assert_eq!(spec.levels.len(), 4);
        let g12 = k.gamma_mat[[0, 1]];
        let g12_dd = k.gamma_dd[[0, 1]];
        let a1 = spec
            .levels
            .iter()
            .find(|l| l.parity == Parity::A && l.n_a == 1)
            .unwrap();
        assert!((a1.rate - (1.0 - g12 - 3.0 * 0.09 * g12_dd)).abs() < 1e-14);

        let (g0, k0, _) = setup(2, 2, 0.0);
        let spec0 = two_atom_spectrum(&g0, &k0).unwrap();
        let mut rates: Vec<f64> = spec0.levels.iter().map(|l| l.rate).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        assert_eq!(rates.len(), 2);
        assert!((rates[0] - (1.0 - k0.gamma_mat[[0, 1]])).abs() < 1e-15);
        assert!((rates[1] - (1.0 + k0.gamma_mat[[0, 1]])).abs() < 1e-15);

        let (g3, k3, _) = setup(3, 1, 0.3);
        assert!(two_atom_spectrum(&g3, &k3).is_err());
    }

    #[test]
    fn separable_block_zero_eta_is_m() {
        let (g, k, _) = setup(4, 1, 0.0);
        assert_eq!(separable_block(&g, &k).unwrap(), k.m_mat);
    }

    #[test]
    fn center_of_mass_states_are_annihilated_by_relative_operators() {
        // (a_j^dag - a_j'^dag)(a_j - a_j') (a0^dag)^n |0> = 0
        for n in 2..=5 {
            for n_ph in 0..=3 {
                let (g, _, b) = setup(n, n_ph, 0.1);
                let com = center_of_mass_amplitudes(&b);
                for j in 0..n {
                    for jp in 0..n {
                        if j == jp {
                            continue;
                        }
                        let mut out = vec![0.0; com.len()];
                        for (c, occ) in b.configs().iter().enumerate() {
                            let amp = com[c];
                            out[c] += amp * (occ[j] + occ[jp]) as f64;
                            for (from, to) in [(jp, j), (j, jp)] {
                                if let Some((o, a)) = crate::basis::transfer(occ, from, to) {
                                    out[b.config_index(&o).unwrap()] -= amp * a;
                                }
                            }
                        }
                        let worst = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                        assert!(worst < 1e-13, "N = {n}, n_ph = {n_ph}, ({j}, {jp}): {worst}");
                    }
                }
                let _ = g;
            }
        }
    }
}

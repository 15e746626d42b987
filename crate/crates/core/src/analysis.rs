//! End-to-end pipelines combining the lower-level modules: full spectra with
//! entropies and separability flags, and entropy scans over chain length.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{enumerate_basis, HybridBasis};
use crate::entanglement::{mode_entropy, EntropyPoint};
use crate::error::Result;
use crate::geometry::GeometryConfig;
use crate::heff::{build_heff, separable_block};
use crate::kernels::{build_matrices, KernelMatrices};
use crate::spectra::{eigendecompose, match_separable, EigenMode, SeparableMatch};

/// One row of a spectrum report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSummary {
    pub index: usize,
    pub re_e: f64,
    pub im_e: f64,
    pub rate: f64,
    pub shift: f64,
    pub entropy: f64,
    pub separable: bool,
    pub negative_rate: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub geom: GeometryConfig,
    pub basis: HybridBasis,
    pub modes: Vec<EigenMode>,
    pub entropies: Vec<f64>,
    pub separable: Vec<SeparableMatch>,
}

impl SpectrumReport {
    pub fn is_separable(&self, mode: usize) -> bool {
        self.separable.iter().any(|m| m.mode == mode)
    }

    pub fn max_entropy(&self) -> f64 {
        self.entropies.iter().copied().fold(0.0, f64::max)
    }

    pub fn summaries(&self) -> Vec<ModeSummary> {
        self.modes
            .iter()
            .zip(&self.entropies)
            .map(|(m, &s)| ModeSummary {
                index: m.index,
                re_e: m.eigenvalue.re,
                im_e: m.eigenvalue.im,
                rate: m.rate,
                shift: m.shift,
                entropy: s,
                separable: self.is_separable(m.index),
                negative_rate: m.has_negative_rate(),
            })
            .collect()
    }
}

/// Diagonalise the effective Hamiltonian of `geom`, attach the entropy of
/// every mode and identify the separable centre-of-mass modes.
pub fn analyze_spectrum(geom: &GeometryConfig) -> Result<SpectrumReport> {
    let kernels = build_matrices(geom)?;
    let basis = enumerate_basis(geom)?;
    analyze_with(geom, &kernels, basis)
}

/// As [`analyze_spectrum`] with precomputed kernels and basis.
pub fn analyze_with(geom: &GeometryConfig, kernels: &KernelMatrices, basis: HybridBasis) -> Result<SpectrumReport> {
    let h = build_heff(geom, kernels, &basis)?;
    let modes = eigendecompose(&h)?;
    let entropies = modes
        .iter()
        .map(|m| mode_entropy(&m.eigenvector, &basis))
        .collect::<Result<Vec<_>>>()?;
    let block = separable_block(geom, kernels)?;
    let separable = match_separable(&modes, &block, &basis)?;
    Ok(SpectrumReport {
        geom: *geom,
        basis,
        modes,
        entropies,
        separable,
    })
}

/// Largest mode entropy for each chain length in `n_list`, with the other
/// parameters taken from `base`.
pub fn entropy_scan(base: &GeometryConfig, n_list: &[usize], eta0: f64, n_phonons: usize) -> Result<Vec<EntropyPoint>> {
    n_list
        .par_iter()
        .map(|&n| {
            let geom = base.with_n_atoms(n).with_eta0(eta0).with_n_phonons(n_phonons);
            geom.validate()?;
            let kernels = build_matrices(&geom)?;
            let basis = enumerate_basis(&geom)?;
            let h = build_heff(&geom, &kernels, &basis)?;
            let max_entropy = eigendecompose(&h)?
                .iter()
                .map(|m| mode_entropy(&m.eigenvector, &basis))
                .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))?;
            Ok(EntropyPoint {
                n_atoms: n,
                ln_n: (n as f64).ln(),
                max_entropy,
                spacing: geom.spacing,
            })
        })
        .collect()
}

//! Spin-phonon entanglement of pure hybrid states.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::HybridBasis;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, trace};

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues of the reduced state may stray this far outside [0, 1] before
/// it is rejected; within the window they are clamped.
const CLAMP_WINDOW: f64 = 1e-10;

/// Reduced density matrix of the spin after tracing out the phonons.
#[derive(Debug, Clone)]
pub struct ReducedSpinState {
    pub rho: Array2<Complex64>,
    /// Ascending eigenvalues of `rho`.
    pub populations: Vec<f64>,
}

impl ReducedSpinState {
    /// Validate a spin density matrix.
    pub fn new(rho: Array2<Complex64>) -> Result<Self> {
        let defect = hermiticity_defect(&rho);
        if defect > HERMITIAN_TOL {
            return Err(Error::domain(format!("reduced state not Hermitian (defect {defect:.3e})")));
        }
        let tr = trace(&rho);
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::domain(format!("reduced state has trace {tr}")));
        }
        let populations = hermitian_eigenvalues(&rho)?;
        if let Some(p) = populations
            .iter()
            .find(|&&p| !(-CLAMP_WINDOW..=1.0 + CLAMP_WINDOW).contains(&p))
        {
            return Err(Error::domain(format!("reduced state eigenvalue {p:.3e} outside [0, 1]")));
        }
        Ok(ReducedSpinState { rho, populations })
    }

    pub fn purity(&self) -> f64 {
        self.populations.iter().map(|p| p * p).sum()
    }
}

/// Partial trace over phonons:
/// `rho[j, j'] = sum_occ psi[(j, occ)] conj(psi[(j', occ)])`.
pub fn reduce_spin(psi: &Array1<Complex64>, basis: &HybridBasis) -> Result<ReducedSpinState> {
    if psi.len() != basis.len() {
        return Err(Error::domain(format!(
            "state has {} amplitudes, basis has {}",
            psi.len(),
            basis.len()
        )));
    }
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm2.sqrt() - 1.0).abs() > NORM_TOL {
        return Err(Error::domain(format!("state norm {} is not 1", norm2.sqrt())));
    }
    let (n, k) = (basis.n_sites(), basis.n_configs());
    let amps = psi
        .view()
        .into_shape_with_order((n, k))
        .expect("spin-major layout");
    let conj = amps.mapv(|z| z.conj());
    let rho = amps.dot(&conj.t());
    ReducedSpinState::new(rho)
}

/// Von Neumann entropy in nats, `-sum p ln p` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(state: &ReducedSpinState) -> f64 {
    state
        .populations
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of one eigenmode.
pub fn mode_entropy(psi: &Array1<Complex64>, basis: &HybridBasis) -> Result<f64> {
    Ok(von_neumann_entropy(&reduce_spin(psi, basis)?))
}

/// Largest mode entropy of one chain length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub n_atoms: usize,
    pub ln_n: f64,
    pub max_entropy: f64,
    pub spacing: f64,
}

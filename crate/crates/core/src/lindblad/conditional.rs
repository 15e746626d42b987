use num_complex::Complex64;
use serde::Serialize;

use super::dynamics::MasterGenerator;
use super::space::TruncatedSpace;
use super::build_jump_family;
use crate::basis::HybridBasis;
use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;
use crate::heff::{build_heff, check_basis};
use crate::kernels::KernelMatrices;

/// Entry-wise comparison of the master equation's no-jump generator,
/// restricted to the single-excitation sector, with the effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalCheck {
    /// Largest deviation of imaginary parts.
    pub imag_deviation: f64,
    /// Largest deviation of real parts after applying `real_sign`.
    pub real_deviation: f64,
    /// Global sign relating the real parts, `Re H_cond = real_sign * Re H_eff`.
    pub real_sign: f64,
    pub dim: usize,
}

impl ConditionalCheck {
    pub fn max_deviation(&self) -> f64 {
        self.imag_deviation.max(self.real_deviation)
    }
}

/// Build the conditional Hamiltonian `-sum_{m != m'} W_mm' J_m^dag J_m'
/// - (i/2) sum G_mm' J_m^dag J_m'` on a space truncated at `n_max = n_ph`,
/// project it on `basis` and compare with the effective Hamiltonian.
///
/// Imaginary parts are compared as they are. The coherent terms of the two
/// forms carry opposite sign conventions, so real parts are compared up to a
/// global sign, chosen as the one with the smaller deviation.
pub fn conditional_generator_check(
    geom: &GeometryConfig,
    kernels: &KernelMatrices,
    basis: &HybridBasis,
) -> Result<ConditionalCheck> {
    check_basis(geom, basis)?;
    let space = TruncatedSpace::new(geom.n_atoms, geom.n_phonons)?;
    let family = build_jump_family(geom, kernels, &space)?;
    let no_jump = MasterGenerator::new(&family);
    let k = no_jump.no_jump();
    let heff = build_heff(geom, kernels, basis)?;

    let embedded = basis
        .states()
        .map(|s| {
            space
                .embed(&s)
                .ok_or_else(|| Error::domain(format!("basis state {s:?} does not fit the truncated space")))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut imag, mut same, mut flipped) = (0.0f64, 0.0f64, 0.0f64);
    for (r, &er) in embedded.iter().enumerate() {
        for (c, &ec) in embedded.iter().enumerate() {
            // H_cond = i K
            let cond = Complex64::i() * k[[er, ec]];
            let h = heff.matrix[[r, c]];
            imag = imag.max((cond.im - h.im).abs());
            same = same.max((cond.re - h.re).abs());
            flipped = flipped.max((cond.re + h.re).abs());
        }
    }
    let (real_deviation, real_sign) = if flipped < same { (flipped, -1.0) } else { (same, 1.0) };
    Ok(ConditionalCheck {
        imag_deviation: imag,
        real_deviation,
        real_sign,
        dim: basis.len(),
    })
}

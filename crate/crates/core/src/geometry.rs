//! Physical parameters of a uniformly spaced emitter chain.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamb-Dicke parameters above this value are outside the small-eta expansion.
pub const ETA0_WARN_THRESHOLD: f64 = 0.5;

/// Chain geometry, dipole orientation, Lamb-Dicke parameter and phonon sector.
///
/// Lengths are in units of the transition wavelength and rates in units of the
/// single-atom decay rate, so `gamma` is 1 unless explicitly overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_atoms: usize,
    /// Lattice constant d / lambda0.
    pub spacing: f64,
    /// Angle between the transition dipole and the chain axis, radians.
    pub phi: f64,
    pub eta0: f64,
    #[serde(default = "unit_rate")]
    pub gamma: f64,
    #[serde(default)]
    pub n_phonons: usize,
}

fn unit_rate() -> f64 {
    1.0
}

impl GeometryConfig {
    /// A chain with `gamma = 1`, validated.
    pub fn new(n_atoms: usize, spacing: f64, phi: f64, eta0: f64, n_phonons: usize) -> Result<Self> {
        let geom = GeometryConfig {
            n_atoms,
            spacing,
            phi,
            eta0,
            gamma: 1.0,
            n_phonons,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::domain("n_atoms must be positive"));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::domain(format!("spacing must be > 0, got {}", self.spacing)));
        }
        check_phi(self.phi)?;
        if !(self.eta0.is_finite() && self.eta0 >= 0.0) {
            return Err(Error::domain(format!("eta0 must be >= 0, got {}", self.eta0)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::domain(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.eta0 > ETA0_WARN_THRESHOLD {
            log::warn!(
                "eta0 = {} is outside the Lamb-Dicke regime; second-order results may be unreliable",
                self.eta0
            );
        }
        Ok(())
    }

    /// Reduced distance k0 |z_j - z_j'| between sites `j` and `jp`.
    pub fn kappa(&self, j: usize, jp: usize) -> f64 {
        TAU * self.spacing * j.abs_diff(jp) as f64
    }

    /// Nearest-neighbour reduced distance, 2 pi d / lambda0.
    pub fn kappa_nn(&self) -> f64 {
        TAU * self.spacing
    }

    pub fn with_eta0(mut self, eta0: f64) -> Self {
        self.eta0 = eta0;
        self
    }

    pub fn with_n_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_n_phonons(mut self, n_phonons: usize) -> Self {
        self.n_phonons = n_phonons;
        self
    }
}

pub(crate) fn check_phi(phi: f64) -> Result<()> {
    if (0.0..=PI).contains(&phi) {
        Ok(())
    } else {
        Err(Error::domain(format!("phi must lie in [0, pi], got {phi}")))
    }
}

//! Collective radiance of one-dimensional emitter chains whose trap motion
//! couples to photon emission at second order in the Lamb-Dicke parameter.
//!
//! Rates are in units of the single-emitter rate `gamma`, distances in units
//! of the transition wavelength, entropies in nats.

pub mod analysis;
pub mod band;
pub mod basis;
pub mod entanglement;
pub mod error;
pub mod geometry;
pub mod heff;
pub mod kernels;
pub mod lindblad;
pub mod linalg;
pub mod spectra;

pub use analysis::{analyze_spectrum, analyze_with, entropy_scan, ModeSummary, SpectrumReport};
pub use band::{band_scan, brillouin_grid, lattice_sum, BandPoint, LatticeKernel, LatticeSum, SumMethod};
pub use basis::{enumerate_basis, HybridBasis, HybridBasisState, PhononAction};
pub use entanglement::{reduce_spin, von_neumann_entropy, EntropyPoint, ReducedSpinState};
pub use error::{Error, Result};
pub use geometry::GeometryConfig;
pub use heff::{build_heff, separable_block, two_atom_spectrum, EffectiveHamiltonian, Parity, TwoAtomLevel, TwoAtomSpectrum};
pub use kernels::{build_matrices, find_kappa0, KernelKind, KernelMatrices, MagicDistance};
pub use lindblad::{DensityOperator, JumpFamily, TruncatedSpace};
pub use spectra::{eigendecompose, match_separable, EigenMode, SeparableMatch};

pub use num_complex::Complex64;

//! Master equation for spins and trap phonons to second order in the
//! Lamb-Dicke parameter, on a truncated Fock space.
//!
//! ```text
//! d rho/dt = sum_{mm'} G_mm' (J_m' rho J_m^dag - 1/2 {J_m^dag J_m', rho})
//!          + i sum_{m != m'} W_mm' [J_m^dag J_m', rho]
//! ```
//!
//! with the 4N jump operators `sigma_j`, `sigma_j a_j`, `sigma_j a_j^dag`,
//! `sigma_j (1 + 2 a_j^dag a_j)` and 4N x 4N coefficient matrices `G`, `W`
//! assembled from the decay and exchange kernels.

mod conditional;
mod dynamics;
mod space;

pub use conditional::{conditional_generator_check, ConditionalCheck};
pub use dynamics::{evolve, master_rhs, DensityOperator, EvolveOptions, MasterGenerator, Sample, Trajectory};
pub use space::{SiteState, SparseOp, TruncatedSpace, DEFAULT_SPACE_CAP};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;
use crate::heff::check_kernels;
use crate::kernels::KernelMatrices;

/// The four operator families, in block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// `sigma_j`
    Decay,
    /// `sigma_j a_j`
    DecayLower,
    /// `sigma_j a_j^dag`
    DecayRaise,
    /// `sigma_j (1 + 2 a_j^dag a_j)`
    DecayNumber,
}

impl JumpKind {
    pub const ALL: [JumpKind; 4] = [
        JumpKind::Decay,
        JumpKind::DecayLower,
        JumpKind::DecayRaise,
        JumpKind::DecayNumber,
    ];
}

/// Jump operators `J_m` (index `m = block * N + j`) with their coefficient
/// matrices.
#[derive(Debug, Clone)]
pub struct JumpFamily {
    pub space: TruncatedSpace,
    pub eta0: f64,
    pub ops: Vec<SparseOp>,
    /// Dissipative coefficients, 4N x 4N.
    pub gamma_tilde: Array2<f64>,
    /// Coherent coefficients, 4N x 4N.
    pub v_tilde: Array2<f64>,
}

impl JumpFamily {
    pub fn n_sites(&self) -> usize {
        self.space.n_sites
    }

    pub fn op(&self, kind: JumpKind, site: usize) -> &SparseOp {
        let block = JumpKind::ALL.iter().position(|&k| k == kind).unwrap();
        &self.ops[block * self.n_sites() + site]
    }
}

/// Local jump operator on one site. `a^dag` out of the cutoff level is dropped.
fn local_jump(kind: JumpKind, n_max: usize, s: SiteState) -> Option<(SiteState, f64)> {
    if !s.up {
        return None;
    }
    let n = s.phonons;
    let down = |phonons| SiteState { up: false, phonons };
    match kind {
        JumpKind::Decay => Some((down(n), 1.0)),
        JumpKind::DecayLower => (n > 0).then(|| (down(n - 1), (n as f64).sqrt())),
        JumpKind::DecayRaise => (n < n_max).then(|| (down(n + 1), ((n + 1) as f64).sqrt())),
        JumpKind::DecayNumber => Some((down(n), 1.0 + 2.0 * n as f64)),
    }
}

/// Block layout shared by both coefficient matrices:
/// `(1,1) = K`, `(2,2) = (3,3) = -eta0^2 K''`, `(1,4) = (4,1) = eta0^2 K'' / 2`.
fn block_matrix(base: &Array2<f64>, curv: &Array2<f64>, eta2: f64) -> Array2<f64> {
    let n = base.nrows();
    let mut out = Array2::zeros((4 * n, 4 * n));
    for j in 0..n {
        for jp in 0..n {
            out[[j, jp]] = base[[j, jp]];
            out[[n + j, n + jp]] = -eta2 * curv[[j, jp]];
            out[[2 * n + j, 2 * n + jp]] = -eta2 * curv[[j, jp]];
            out[[j, 3 * n + jp]] = 0.5 * eta2 * curv[[j, jp]];
            out[[3 * n + j, jp]] = 0.5 * eta2 * curv[[j, jp]];
        }
    }
    out
}

/// Explicit jump operators and coefficient blocks for `geom` on `space`.
pub fn build_jump_family(
    geom: &GeometryConfig,
    kernels: &KernelMatrices,
    space: &TruncatedSpace,
) -> Result<JumpFamily> {
    check_kernels(geom, kernels)?;
    if space.n_sites != geom.n_atoms {
        return Err(Error::Consistency(format!(
            "truncated space has {} sites, geometry has {}",
            space.n_sites, geom.n_atoms
        )));
    }
    let n = geom.n_atoms;
    let mut ops = Vec::with_capacity(4 * n);
    for kind in JumpKind::ALL {
        for j in 0..n {
            ops.push(SparseOp::on_site(space, j, |s| local_jump(kind, space.n_max, s)));
        }
    }
    let eta2 = geom.eta0 * geom.eta0;
    Ok(JumpFamily {
        space: *space,
        eta0: geom.eta0,
        ops,
        gamma_tilde: block_matrix(&kernels.gamma_mat, &kernels.gamma_dd, eta2),
        v_tilde: block_matrix(&kernels.v_mat, &kernels.v_dd, eta2),
    })
}

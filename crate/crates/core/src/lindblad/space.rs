use ndarray::Array2;
use num_complex::Complex64;

use crate::basis::HybridBasisState;
use crate::error::{Error, Result};

pub const DEFAULT_SPACE_CAP: usize = 4096;

/// Product of per-site two-level spin and Fock space truncated at `n_max`.
///
/// Site 0 is the most significant digit of the global index; within a site
/// the local index is `spin * (n_max + 1) + n` with spin 0 = down, 1 = up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedSpace {
    pub n_sites: usize,
    pub n_max: usize,
    dim: usize,
}

/// Local state of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteState {
    pub up: bool,
    pub phonons: usize,
}

impl TruncatedSpace {
    pub fn new(n_sites: usize, n_max: usize) -> Result<Self> {
        Self::with_cap(n_sites, n_max, DEFAULT_SPACE_CAP)
    }

    pub fn with_cap(n_sites: usize, n_max: usize, cap: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::domain("truncated space needs at least one site"));
        }
        let local = 2 * (n_max + 1);
        let too_big = |dim| Error::Capacity {
            what: format!("truncated Fock space (N = {n_sites}, n_max = {n_max})"),
            dim,
            cap,
        };
        let dim = (0..n_sites)
            .try_fold(1usize, |acc, _| acc.checked_mul(local))
            .ok_or_else(|| too_big(usize::MAX))?;
        if dim > cap {
            return Err(too_big(dim));
        }
        Ok(TruncatedSpace { n_sites, n_max, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn local_dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    fn stride(&self, site: usize) -> usize {
        self.local_dim().pow((self.n_sites - 1 - site) as u32)
    }

    pub fn site(&self, index: usize, site: usize) -> SiteState {
        let local = (index / self.stride(site)) % self.local_dim();
        SiteState {
            up: local > self.n_max,
            phonons: local % (self.n_max + 1),
        }
    }

    /// Replace the local state of `site` in the global `index`.
    pub fn with_site(&self, index: usize, site: usize, state: SiteState) -> usize {
        let stride = self.stride(site);
        let old = (index / stride) % self.local_dim();
        let new = usize::from(state.up) * (self.n_max + 1) + state.phonons;
        index - old * stride + new * stride
    }

    pub fn index_of(&self, sites: &[SiteState]) -> usize {
        sites
            .iter()
            .fold(0, |acc, s| acc * self.local_dim() + usize::from(s.up) * (self.n_max + 1) + s.phonons)
    }

    /// Embed a single-excitation hybrid state; `None` if a site exceeds the cutoff.
    pub fn embed(&self, state: &HybridBasisState) -> Option<usize> {
        if state.phonon_occupation.len() != self.n_sites
            || state.phonon_occupation.iter().any(|&n| n as usize > self.n_max)
        {
            return None;
        }
        let sites: Vec<SiteState> = state
            .phonon_occupation
            .iter()
            .enumerate()
            .map(|(j, &n)| SiteState {
                up: j == state.spin_site,
                phonons: n as usize,
            })
            .collect();
        Some(self.index_of(&sites))
    }

    pub fn excitations(&self, index: usize) -> usize {
        (0..self.n_sites).filter(|&j| self.site(index, j).up).count()
    }

    /// All spins down, no phonons.
    pub fn ground_index(&self) -> usize {
        0
    }
}

/// Real sparse operator stored as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        SparseOp { dim, entries: Vec::new() }
    }

    /// Operator acting as `local` on `site`, identity elsewhere. `local` maps a
    /// site state to at most one image with its amplitude.
    pub fn on_site(space: &TruncatedSpace, site: usize, local: impl Fn(SiteState) -> Option<(SiteState, f64)>) -> Self {
        let entries = (0..space.dim())
            .filter_map(|col| {
                let (to, amp) = local(space.site(col, site))?;
                (amp != 0.0).then(|| (space.with_site(col, site, to), col, amp))
            })
            .collect();
        SparseOp { dim: space.dim(), entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.entries {
            out[[r, c]] += Complex64::new(v, 0.0);
        }
        out
    }

    /// Dense `self^dag other`.
    pub fn adjoint_times(&self, other: &SparseOp) -> Array2<f64> {
        // (A^T B)[i, k] = sum_r A[r, i] B[r, k]
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut out = Array2::zeros((self.dim, self.dim));
        for &(r, i, a) in &self.entries {
            for &(k, b) in &by_row[r] {
                out[[i, k]] += a * b;
            }
        }
        out
    }
}

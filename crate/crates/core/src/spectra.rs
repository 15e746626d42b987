//! Dense non-Hermitian eigendecomposition and mode bookkeeping.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use faer::Mat;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::basis::HybridBasis;
use crate::error::{Error, Result};
use crate::heff::{product_with_center_of_mass, EffectiveHamiltonian};

/// Eigenvalues closer than this are treated as one degenerate level when
/// matching separable modes.
pub const MATCH_TOL: f64 = 1e-8;

/// Rates below `-NEGATIVE_RATE_FLAG` are flagged in reports.
pub const NEGATIVE_RATE_FLAG: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EigenMode {
    pub index: usize,
    pub eigenvalue: Complex64,
    /// `-2 Im(E)`
    pub rate: f64,
    /// `Re(E)`
    pub shift: f64,
    pub eigenvector: Array1<Complex64>,
    /// `|| H v - E v ||`
    pub residual: f64,
}

impl EigenMode {
    fn new(index: usize, eigenvalue: Complex64, eigenvector: Array1<Complex64>, residual: f64) -> Self {
        EigenMode {
            index,
            eigenvalue,
            rate: -2.0 * eigenvalue.im,
            shift: eigenvalue.re,
            eigenvector,
            residual,
        }
    }

    pub fn has_negative_rate(&self) -> bool {
        self.rate < -NEGATIVE_RATE_FLAG
    }
}

/// Diagonalise the effective Hamiltonian.
pub fn eigendecompose(h: &EffectiveHamiltonian) -> Result<Vec<EigenMode>> {
    eigendecompose_matrix(&h.matrix)
}

/// Eigenmodes of a general complex square matrix, sorted by ascending rate
/// (ties by shift). Eigenvectors have unit norm and their largest component
/// real and positive.
pub fn eigendecompose_matrix(a: &Array2<Complex64>) -> Result<Vec<EigenMode>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::domain(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let fail = || Error::EigenSolver {
        fingerprint: fingerprint(a),
        dim: n,
    };

    let mat = Mat::<Complex64>::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = mat.eigen().map_err(|_| fail())?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let bound = 1e-8 * scale * n as f64;

    let mut modes = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = values[k];
        let mut v: Array1<Complex64> = (0..n).map(|i| vectors[(i, k)]).collect();
        fix_phase(&mut v);
        let resid = residual(a, &v, lambda);
        if !(resid <= bound) {
            return Err(fail());
        }
        modes.push(EigenMode::new(k, lambda, v, resid));
    }

    modes.sort_by(|x, y| {
        x.rate
            .total_cmp(&y.rate)
            .then(x.shift.total_cmp(&y.shift))
            .then(x.index.cmp(&y.index))
    });
    for (m, mode) in modes.iter_mut().enumerate() {
        mode.index = m;
    }
    Ok(modes)
}

/// Normalise and rotate so the largest-magnitude component is real positive.
fn fix_phase(v: &mut Array1<Complex64>) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (mut best, mut best_mag) = (0, -1.0);
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = m;
        }
    }
    let rot = v[best].conj() / (best_mag * norm);
    v.mapv_inplace(|z| z * rot);
    v[best] = Complex64::new(v[best].norm(), 0.0);
}

fn residual(a: &Array2<Complex64>, v: &Array1<Complex64>, lambda: Complex64) -> f64 {
    let av = a.dot(v);
    av.iter()
        .zip(v.iter())
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn fingerprint(a: &Array2<Complex64>) -> u64 {
    let mut h = DefaultHasher::new();
    a.shape().hash(&mut h);
    for z in a.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// A full-spectrum mode identified with a separable centre-of-mass state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableMatch {
    /// Index into the sorted mode list.
    pub mode: usize,
    pub block_eigenvalue: Complex64,
    /// Squared overlap of the product vector with the matched eigenvector, or
    /// with the span of the degenerate eigenvectors.
    pub overlap: f64,
}

/// Locate the eigenmodes that are products of a spin eigenvector of the
/// separable block with the centre-of-mass phonon state.
///
/// Exactly one match is returned per block eigenvalue. When several modes lie
/// within [`MATCH_TOL`] of the block eigenvalue the product vector is
/// projected onto their span, and the mode with the largest individual
/// overlap is reported.
pub fn match_separable(
    modes: &[EigenMode],
    block: &Array2<Complex64>,
    basis: &HybridBasis,
) -> Result<Vec<SeparableMatch>> {
    let n = basis.n_sites();
    if block.nrows() != n || modes.len() != basis.len() {
        return Err(Error::Consistency(format!(
            "block is {}x{}, {} modes, basis has N = {} and dimension {}",
            block.nrows(),
            block.ncols(),
            modes.len(),
            n,
            basis.len()
        )));
    }
    let spin_modes = eigendecompose_matrix(block)?;

    let mut matches = Vec::with_capacity(n);
    let mut taken = vec![false; modes.len()];
    let mut ambiguous = Vec::new();
    for spin in &spin_modes {
        let target = product_with_center_of_mass(spin.eigenvector.as_slice().unwrap(), basis);
        let candidates: Vec<usize> = modes
            .iter()
            .filter(|m| (m.eigenvalue - spin.eigenvalue).norm() < MATCH_TOL)
            .map(|m| m.index)
            .collect();

        let overlaps: Vec<f64> = candidates
            .iter()
            .map(|&c| inner(&modes[c].eigenvector, &target).norm_sqr())
            .collect();
        let total = if candidates.len() > 1 {
            subspace_overlap(candidates.iter().map(|&c| &modes[c].eigenvector), &target)
        } else {
            overlaps.first().copied().unwrap_or(0.0)
        };

        let best = candidates
            .iter()
            .zip(&overlaps)
            .filter(|(&c, _)| !taken[c])
            .max_by(|a, b| a.1.total_cmp(b.1));
        match best {
            Some((&c, _)) if total > 1.0 - MATCH_TOL => {
                taken[c] = true;
                matches.push(SeparableMatch {
                    mode: c,
                    block_eigenvalue: spin.eigenvalue,
                    overlap: total,
                });
            }
            _ => ambiguous.extend(candidates),
        }
    }

    if matches.len() != n {
        ambiguous.sort_unstable();
        ambiguous.dedup();
        return Err(Error::Degeneracy {
            expected: n,
            found: matches.len(),
            candidates: ambiguous,
        });
    }
    Ok(matches)
}

/// `<a|b>`
pub(crate) fn inner(a: &Array1<Complex64>, b: &Array1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `|| P target ||^2` for the projector onto the span of `vectors`.
fn subspace_overlap<'a>(vectors: impl Iterator<Item = &'a Array1<Complex64>>, target: &Array1<Complex64>) -> f64 {
    // modified Gram-Schmidt
    let mut basis: Vec<Array1<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &basis {
            let c = inner(q, &w);
            w.zip_mut_with(q, |x, y| *x -= c * y);
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 {
            w.mapv_inplace(|z| z / norm);
            basis.push(w);
        }
    }
    basis.iter().map(|q| inner(q, target).norm_sqr()).sum()
}

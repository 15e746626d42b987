//! Single-spin-excitation, fixed-phonon-number basis of the hybrid Hilbert
//! space.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;

/// Default cap on the basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// One spin excitation on `spin_site` with the given phonon occupations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HybridBasisState {
    pub spin_site: usize,
    pub phonon_occupation: Vec<u32>,
}

impl HybridBasisState {
    pub fn total_phonons(&self) -> u32 {
        self.phonon_occupation.iter().sum()
    }
}

/// Phonon operator accompanying a spin hop from `j'` to `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhononAction {
    Identity,
    /// `a_j^dag a_j`
    NumberJ,
    /// `a_j'^dag a_j'`
    NumberJp,
    /// `a_j^dag a_j'`
    RaiseJLowerJp,
    /// `a_j'^dag a_j`
    RaiseJpLowerJ,
}

/// Enumerated basis with spin-major layout: the state index is
/// `spin_site * n_configs + config_index`.
///
/// Phonon configurations are listed in descending lexicographic order, so the
/// first configuration puts every phonon on site 0.
#[derive(Debug, Clone)]
pub struct HybridBasis {
    pub geom: GeometryConfig,
    configs: Vec<Vec<u32>>,
    config_index: HashMap<Vec<u32>, usize>,
}

/// `C(n + k - 1, k)`: number of ways to place `k` bosons on `n` sites.
pub fn multiset_count(n: usize, k: usize) -> Option<usize> {
    if n == 0 {
        return Some(usize::from(k == 0));
    }
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - 1 + i) / i;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    usize::try_from(acc).ok()
}

/// Dimension `N * C(N + n_ph - 1, n_ph)` of the sector, if representable.
pub fn sector_dimension(n_atoms: usize, n_phonons: usize) -> Option<usize> {
    multiset_count(n_atoms, n_phonons)?.checked_mul(n_atoms)
}

/// Enumerate the sector of `geom` with the default dimension cap.
pub fn enumerate_basis(geom: &GeometryConfig) -> Result<HybridBasis> {
    HybridBasis::with_cap(geom, DEFAULT_DIMENSION_CAP)
}

impl HybridBasis {
    pub fn with_cap(geom: &GeometryConfig, cap: usize) -> Result<Self> {
        geom.validate()?;
        let (n, n_ph) = (geom.n_atoms, geom.n_phonons);
        let too_big = |dim| Error::Capacity {
            what: format!("hybrid basis (N = {n}, n_ph = {n_ph})"),
            dim,
            cap,
        };
        let dim = sector_dimension(n, n_ph).ok_or_else(|| too_big(usize::MAX))?;
        if dim > cap {
            return Err(too_big(dim));
        }

        let mut configs = Vec::with_capacity(dim / n);
        let mut current = vec![0u32; n];
        fill_configs(&mut configs, &mut current, 0, n_ph as u32);
        let config_index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(HybridBasis {
            geom: *geom,
            configs,
            config_index,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.geom.n_atoms
    }

    pub fn n_phonons(&self) -> usize {
        self.geom.n_phonons
    }

    pub fn n_configs(&self) -> usize {
        self.configs.len()
    }

    pub fn len(&self) -> usize {
        self.n_sites() * self.n_configs()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn configs(&self) -> &[Vec<u32>] {
        &self.configs
    }

    pub fn config_index(&self, occupation: &[u32]) -> Option<usize> {
        self.config_index.get(occupation).copied()
    }

    pub fn state(&self, i: usize) -> HybridBasisState {
        let k = self.n_configs();
        HybridBasisState {
            spin_site: i / k,
            phonon_occupation: self.configs[i % k].clone(),
        }
    }

    pub fn states(&self) -> impl Iterator<Item = HybridBasisState> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }

    pub fn index_of(&self, state: &HybridBasisState) -> Option<usize> {
        if state.spin_site >= self.n_sites() {
            return None;
        }
        self.config_index(&state.phonon_occupation)
            .map(|c| state.spin_site * self.n_configs() + c)
    }
}

fn fill_configs(out: &mut Vec<Vec<u32>>, current: &mut [u32], site: usize, left: u32) {
    if site + 1 == current.len() {
        current[site] = left;
        out.push(current.to_vec());
        return;
    }
    for k in (0..=left).rev() {
        current[site] = k;
        fill_configs(out, current, site + 1, left - k);
    }
    current[site] = 0;
}

/// Amplitudes of the normalised centre-of-mass state `(a0^dag)^n |0>`, with
/// `a0 = sum_j a_j / sqrt(N)`, over the phonon configurations of `basis`.
pub fn center_of_mass_amplitudes(basis: &HybridBasis) -> Vec<f64> {
    let n = basis.n_sites() as f64;
    let n_ph = basis.n_phonons();
    let ln_fact = |k: u32| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let ln_norm = 0.5 * ln_fact(n_ph as u32) - 0.5 * n_ph as f64 * n.ln();
    basis
        .configs()
        .iter()
        .map(|occ| (ln_norm - 0.5 * occ.iter().map(|&k| ln_fact(k)).sum::<f64>()).exp())
        .collect()
}

/// Apply `b_j^dag b_j'` together with a phonon operator to `state`.
///
/// Returns the resulting states with their bosonic matrix elements; the list
/// is empty when an annihilator hits an empty mode.
pub fn apply_hop_and_phonon(
    state: &HybridBasisState,
    j: usize,
    jp: usize,
    action: PhononAction,
) -> Result<Vec<(HybridBasisState, f64)>> {
    let n = state.phonon_occupation.len();
    if j >= n || jp >= n {
        return Err(Error::domain(format!("site index out of range: j = {j}, j' = {jp}, N = {n}")));
    }
    if state.spin_site != jp {
        return Err(Error::domain(format!(
            "hop from site {jp} applied to an excitation on site {}",
            state.spin_site
        )));
    }
    let occ = &state.phonon_occupation;
    let moved = |phonons: Vec<u32>| HybridBasisState {
        spin_site: j,
        phonon_occupation: phonons,
    };
    let out = match action {
        PhononAction::Identity => vec![(moved(occ.clone()), 1.0)],
        PhononAction::NumberJ => number(occ, j).map(|a| (moved(occ.clone()), a)).into_iter().collect(),
        PhononAction::NumberJp => number(occ, jp).map(|a| (moved(occ.clone()), a)).into_iter().collect(),
        PhononAction::RaiseJLowerJp => transfer(occ, jp, j).map(|(o, a)| (moved(o), a)).into_iter().collect(),
        PhononAction::RaiseJpLowerJ => transfer(occ, j, jp).map(|(o, a)| (moved(o), a)).into_iter().collect(),
    };
    Ok(out)
}

fn number(occ: &[u32], site: usize) -> Option<f64> {
    (occ[site] > 0).then(|| occ[site] as f64)
}

/// `a_to^dag a_from` on an occupation vector.
pub(crate) fn transfer(occ: &[u32], from: usize, to: usize) -> Option<(Vec<u32>, f64)> {
    if occ[from] == 0 {
        return None;
    }
    let mut out = occ.to_vec();
    let mut amp = (out[from] as f64).sqrt();
    out[from] -= 1;
    amp *= (out[to] as f64 + 1.0).sqrt();
    out[to] += 1;
    Some((out, amp))
}

//! Infinite-chain band structure of the separable centre-of-mass states.
//!
//! For quasimomentum `q` the lattice sums are
//!
//! ```text
//! M_q   = M(0) + 2 sum_{n>=1} cos(q n d) M(n d)
//! M''_q =        2 sum_{n>=1} cos(q n d) M''(n d)
//! E_q   = M_q + eta0^2 M''_q
//! ```
//!
//! The summands decay like `1/n`, so the series converge only conditionally.
//! By default partial sums are taken under a smooth flat-top window, which
//! suppresses the oscillating remainder far faster than hard truncation.
//!
//! Quasimomenta are measured in units of the transition wavenumber `k0`, so
//! the light cone sits at `|q| = 1` and the Brillouin zone edge at
//! `|q| = lambda0 / (2 d)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;
use crate::kernels::DipoleKernel;

pub const MIN_SHELLS: usize = 10;
pub const DEFAULT_SHELLS: usize = 100_000;
pub const DEFAULT_GRID_POINTS: usize = 801;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMethod {
    /// Plain truncation after `shells` terms.
    Raw,
    /// Partial sums weighted by a smooth window that is flat on the first half
    /// of the shells and tapers to zero at the last.
    #[default]
    Smoothed,
}

/// Which lattice sum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKernel {
    /// `M_q`, including the on-site term.
    M,
    /// `M''_q` over off-site shells only.
    MDd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSum {
    pub value: Complex64,
    pub tail_estimate: f64,
}

/// Kernel values on the shells of one geometry, reusable across `q`.
#[derive(Debug, Clone)]
pub struct ShellTable {
    kappa_nn: f64,
    gamma: f64,
    m: Vec<Complex64>,
    m_dd: Vec<Complex64>,
}

impl ShellTable {
    pub fn new(geom: &GeometryConfig, shells: usize) -> Result<Self> {
        geom.validate()?;
        if shells < MIN_SHELLS {
            return Err(Error::domain(format!("at least {MIN_SHELLS} shells required, got {shells}")));
        }
        let kernel = DipoleKernel::new(geom.phi)?;
        let kappa_nn = geom.kappa_nn();
        let (m, m_dd) = (1..=shells)
            .map(|n| {
                let k = kappa_nn * n as f64;
                (kernel.m(k) * geom.gamma, kernel.m_dd(k) * geom.gamma)
            })
            .unzip();
        Ok(ShellTable {
            kappa_nn,
            gamma: geom.gamma,
            m,
            m_dd,
        })
    }

    pub fn shells(&self) -> usize {
        self.m.len()
    }

    /// Both lattice sums at `q` (units of `k0`).
    pub fn sums(&self, q: f64, method: SumMethod) -> (LatticeSum, LatticeSum) {
        let full = self.shells();
        let half = full / 2;
        let (mut m_full, mut m_half) = (Complex64::default(), Complex64::default());
        let (mut d_full, mut d_half) = (Complex64::default(), Complex64::default());
        let (mut m_abs, mut d_abs) = (0.0, 0.0);
        for n in 1..=full {
            let phase = 2.0 * (q * self.kappa_nn * n as f64).cos();
            let (a, b) = (self.m[n - 1] * phase, self.m_dd[n - 1] * phase);
            let w = weight(method, n, full);
            m_full += a * w;
            d_full += b * w;
            m_abs += (a * w).norm();
            d_abs += (b * w).norm();
            if n <= half {
                let wh = weight(method, n, half);
                m_half += a * wh;
                d_half += b * wh;
            }
        }
        let onsite = Complex64::new(0.0, -0.5 * self.gamma);
        let floor = 256.0 * f64::EPSILON;
        (
            LatticeSum {
                value: onsite + m_full,
                tail_estimate: (m_full - m_half).norm() + floor * (m_abs + 0.5 * self.gamma),
            },
            LatticeSum {
                value: d_full,
                tail_estimate: (d_full - d_half).norm() + floor * d_abs,
            },
        )
    }
}

/// Window weight of shell `n` out of `total`.
fn weight(method: SumMethod, n: usize, total: usize) -> f64 {
    match method {
        SumMethod::Raw => 1.0,
        SumMethod::Smoothed => {
            let x = n as f64 / (total as f64 + 1.0);
            if x <= 0.5 {
                1.0
            } else {
                smooth_step(2.0 * (1.0 - x))
            }
        }
    }
}

/// C-infinity step rising from 0 at `t = 0` to 1 at `t = 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// One lattice sum at quasimomentum `q` (units of `k0`).
///
/// The tail estimate is the change in the value when the number of shells is
/// halved, plus a rounding floor.
pub fn lattice_sum(
    q: f64,
    geom: &GeometryConfig,
    which: LatticeKernel,
    shells: usize,
    method: SumMethod,
) -> Result<LatticeSum> {
    let table = ShellTable::new(geom, shells)?;
    let (m, m_dd) = table.sums(q, method);
    Ok(match which {
        LatticeKernel::M => m,
        LatticeKernel::MDd => m_dd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPoint {
    /// Quasimomentum in units of `k0`.
    pub q: f64,
    /// `q d / pi`, the Brillouin zone being (-1, 1].
    pub q_d_over_pi: f64,
    pub m_q: Complex64,
    pub m_dd_q: Complex64,
    pub e_q: Complex64,
    pub rate: f64,
    pub rate_eta0_zero: f64,
    pub delta_rate: f64,
    pub shells: usize,
    pub tail_estimate: f64,
}

/// Uniform grid over the closed Brillouin zone `[-pi/d, pi/d]`, in units of
/// `k0`. Odd point counts include `q = 0`.
pub fn brillouin_grid(geom: &GeometryConfig, points: usize) -> Vec<f64> {
    let edge = 0.5 / geom.spacing;
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| -edge + 2.0 * edge * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Evaluate the separable band on `q_grid` (units of `k0`).
pub fn band_scan(
    geom: &GeometryConfig,
    q_grid: &[f64],
    shells: usize,
    method: SumMethod,
) -> Result<Vec<BandPoint>> {
    let edge = 0.5 / geom.spacing;
    if let Some(q) = q_grid.iter().find(|q| !(q.abs() <= edge * (1.0 + 1e-12))) {
        return Err(Error::domain(format!(
            "q = {q} k0 lies outside the first Brillouin zone |q| <= {edge} k0"
        )));
    }
    let table = ShellTable::new(geom, shells)?;
    let eta2 = geom.eta0 * geom.eta0;
    let points = q_grid
        .par_iter()
        .map(|&q| {
            let (m, m_dd) = table.sums(q, method);
            let e_q = m.value + m_dd.value * eta2;
            let rate = -2.0 * e_q.im;
            let rate0 = -2.0 * m.value.im;
            BandPoint {
                q,
                q_d_over_pi: 2.0 * q * geom.spacing,
                m_q: m.value,
                m_dd_q: m_dd.value,
                e_q,
                rate,
                rate_eta0_zero: rate0,
                delta_rate: rate - rate0,
                shells,
                tail_estimate: m.tail_estimate + eta2 * m_dd.tail_estimate,
            }
        })
        .collect();
    Ok(points)
}

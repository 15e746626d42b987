//! Dipole-dipole decay and exchange kernels for a chain of identically
//! polarised emitters, their second derivatives in the reduced distance, and
//! the N x N coupling matrices built from them.
//!
//! With `s = sin k`, `c = cos k` the kernels read
//!
//! ```text
//! Gamma(k) = 3/2 [ f s/k + g (c/k^2 - s/k^3) ]
//! V(k)     = 3/4 [ f c/k - g (s/k^2 + c/k^3) ]
//! ```
//!
//! with `f = sin^2 phi` and `g = 1 - 3 cos^2 phi`. All values are in units of
//! the single-atom rate.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_phi, GeometryConfig};

/// Below this reduced distance the `g` part of the decay kernel is evaluated by
/// its Taylor series; the closed form cancels catastrophically there.
const SERIES_CUTOFF: f64 = 0.5;

/// Search window for the first zero of the decay kernel's second derivative.
pub const KAPPA0_WINDOW: (f64, f64) = (0.5, 12.0);
const KAPPA0_SCAN_STEP: f64 = 1e-2;
const KAPPA0_TOL: f64 = 1e-12;

/// Which kernel a derivative or lattice sum refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Gamma,
    V,
}

/// Angular prefactors `(f, g) = (sin^2 phi, 1 - 3 cos^2 phi)`.
pub fn angular_coefficients(phi: f64) -> Result<(f64, f64)> {
    check_phi(phi)?;
    let (s, c) = phi.sin_cos();
    Ok((s * s, 1.0 - 3.0 * c * c))
}

/// Decay kernel `Gamma(kappa)` in units of the single-atom rate.
pub fn gamma_kernel(kappa: f64, phi: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(DipoleKernel::new(phi)?.gamma(kappa))
}

/// Exchange kernel `V(kappa)` in units of the single-atom rate.
pub fn v_kernel(kappa: f64, phi: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(DipoleKernel::new(phi)?.v(kappa))
}

/// Second derivative of a kernel with respect to the reduced distance.
pub fn kernel_second_derivative(kappa: f64, phi: f64, which: KernelKind) -> Result<f64> {
    check_kappa(kappa)?;
    let k = DipoleKernel::new(phi)?;
    Ok(match which {
        KernelKind::Gamma => k.gamma_dd(kappa),
        KernelKind::V => k.v_dd(kappa),
    })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("reduced distance must be > 0, got {kappa}")))
    }
}

/// Kernel evaluator for a fixed dipole angle.
///
/// Methods take `kappa > 0` without checking; use the free functions for
/// validated single evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleKernel {
    pub f: f64,
    pub g: f64,
}

impl DipoleKernel {
    pub fn new(phi: f64) -> Result<Self> {
        let (f, g) = angular_coefficients(phi)?;
        Ok(DipoleKernel { f, g })
    }

    pub fn gamma(&self, k: f64) -> f64 {
        let (s, c) = k.sin_cos();
        1.5 * (self.f * s / k + self.g * radial_g(k, s, c))
    }

    pub fn v(&self, k: f64) -> f64 {
        let (s, c) = k.sin_cos();
        let k2 = k * k;
        0.75 * (self.f * c / k - self.g * (s / k2 + c / (k2 * k)))
    }

    pub fn gamma_dd(&self, k: f64) -> f64 {
        let (s, c) = k.sin_cos();
        let (k2, k3) = (k * k, k * k * k);
        let sinc_dd = -s / k - 2.0 * c / k2 + 2.0 * s / k3;
        1.5 * (self.f * sinc_dd + self.g * radial_g_dd(k, s, c))
    }

    pub fn v_dd(&self, k: f64) -> f64 {
        let (s, c) = k.sin_cos();
        let (k2, k3) = (k * k, k * k * k);
        let (k4, k5) = (k2 * k2, k2 * k3);
        let cosc_dd = -c / k + 2.0 * s / k2 + 2.0 * c / k3;
        let d_dd = -s / k2 - 5.0 * c / k3 + 12.0 * s / k4 + 12.0 * c / k5;
        0.75 * (self.f * cosc_dd - self.g * d_dd)
    }

    /// `V - i Gamma / 2`.
    pub fn m(&self, k: f64) -> Complex64 {
        Complex64::new(self.v(k), -0.5 * self.gamma(k))
    }

    /// `V'' - i Gamma'' / 2`.
    pub fn m_dd(&self, k: f64) -> Complex64 {
        Complex64::new(self.v_dd(k), -0.5 * self.gamma_dd(k))
    }
}

/// `c/k^2 - s/k^3`
fn radial_g(k: f64, s: f64, c: f64) -> f64 {
    if k < SERIES_CUTOFF {
        // sum_{n>=1} (-1)^n 2n/(2n+1)! k^(2n-2)
        let k2 = k * k;
        let mut term = -1.0 / 3.0;
        let mut sum = term;
        for n in 2..20 {
            let nf = n as f64;
            term *= -k2 * nf / ((nf - 1.0) * (2.0 * nf) * (2.0 * nf + 1.0));
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        let k2 = k * k;
        c / k2 - s / (k2 * k)
    }
}

/// Second derivative of [`radial_g`].
fn radial_g_dd(k: f64, s: f64, c: f64) -> f64 {
    if k < SERIES_CUTOFF {
        // sum_{n>=2} (-1)^n 2n (2n-2)(2n-3)/(2n+1)! k^(2n-4)
        let k2 = k * k;
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 120.0; // (2n+1)! at n = 2
        for n in 2..20 {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * 2.0 * nf * (2.0 * nf - 2.0) * (2.0 * nf - 3.0) / fact * pow;
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
            pow *= k2;
            fact *= (2.0 * nf + 2.0) * (2.0 * nf + 3.0);
        }
        sum
    } else {
        let (k2, k3) = (k * k, k * k * k);
        -c / k2 + 5.0 * s / k3 + 12.0 * c / (k2 * k2) - 12.0 * s / (k2 * k3)
    }
}

/// Real symmetric coupling matrices of a chain and their complex combinations.
///
/// Diagonals follow the convention `Gamma_jj = gamma`, `V_jj = 0` and
/// `Gamma''_jj = V''_jj = 0`. The second-derivative diagonal drops out of every
/// single-excitation expression it appears in.
#[derive(Debug, Clone)]
pub struct KernelMatrices {
    pub geom: GeometryConfig,
    pub gamma_mat: Array2<f64>,
    pub v_mat: Array2<f64>,
    pub gamma_dd: Array2<f64>,
    pub v_dd: Array2<f64>,
    pub m_mat: Array2<Complex64>,
    pub m_dd: Array2<Complex64>,
}

impl KernelMatrices {
    pub fn n_atoms(&self) -> usize {
        self.geom.n_atoms
    }
}

/// Assemble the kernel matrices for `geom`.
pub fn build_matrices(geom: &GeometryConfig) -> Result<KernelMatrices> {
    geom.validate()?;
    let n = geom.n_atoms;
    let kernel = DipoleKernel::new(geom.phi)?;
    let rate = geom.gamma;

    let mut gamma_mat = Array2::zeros((n, n));
    let mut v_mat = Array2::zeros((n, n));
    let mut gamma_dd = Array2::zeros((n, n));
    let mut v_dd = Array2::zeros((n, n));

    for j in 0..n {
        gamma_mat[[j, j]] = rate;
        for jp in (j + 1)..n {
            let k = geom.kappa(j, jp);
            let vals = [
                rate * kernel.gamma(k),
                rate * kernel.v(k),
                rate * kernel.gamma_dd(k),
                rate * kernel.v_dd(k),
            ];
            for (mat, val) in [&mut gamma_mat, &mut v_mat, &mut gamma_dd, &mut v_dd]
                .into_iter()
                .zip(vals)
            {
                mat[[j, jp]] = val;
                mat[[jp, j]] = val;
            }
        }
    }

    let m_mat = combine(&v_mat, &gamma_mat);
    let m_dd = combine(&v_dd, &gamma_dd);
    Ok(KernelMatrices {
        geom: *geom,
        gamma_mat,
        v_mat,
        gamma_dd,
        v_dd,
        m_mat,
        m_dd,
    })
}

fn combine(v: &Array2<f64>, gamma: &Array2<f64>) -> Array2<Complex64> {
    ndarray::Zip::from(v)
        .and(gamma)
        .map_collect(|&v, &g| Complex64::new(v, -0.5 * g))
}

/// First zero of `Gamma''` above the near field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagicDistance {
    pub phi: f64,
    pub kappa0: f64,
    /// `d0 / lambda0 = kappa0 / 2 pi`.
    pub d0: f64,
}

/// Smallest root of `kappa -> Gamma''(kappa, phi)` in the window (0.5, 12].
///
/// The window is scanned on a fine grid for the first sign change, which is
/// then refined by bisection.
pub fn find_kappa0(phi: f64) -> Result<MagicDistance> {
    let kernel = DipoleKernel::new(phi)?;
    let (lo, hi) = KAPPA0_WINDOW;
    let steps = ((hi - lo) / KAPPA0_SCAN_STEP).round() as usize;
    let at = |i: usize| lo + (hi - lo) * i as f64 / steps as f64;

    let mut a = at(1);
    let mut fa = kernel.gamma_dd(a);
    for i in 2..=steps {
        if fa == 0.0 {
            return Ok(magic(phi, a));
        }
        let b = at(i);
        let fb = kernel.gamma_dd(b);
        if fa.signum() != fb.signum() {
            return Ok(magic(phi, bisect(|k| kernel.gamma_dd(k), a, b, fa)));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        return Ok(magic(phi, a));
    }
    Err(Error::RootNotFound { phi, lo, hi })
}

fn magic(phi: f64, kappa0: f64) -> MagicDistance {
    MagicDistance {
        phi,
        kappa0,
        d0: kappa0 / std::f64::consts::TAU,
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    loop {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() < KAPPA0_TOL || mid <= a || mid >= b {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
}

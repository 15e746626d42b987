#![allow(dead_code)]

use hybrid_radiance::kernels::KernelKind;
use hybrid_radiance::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(1 + x)^-p + (1 - x)^-p - 2` and `(1 + x)^-p - (1 - x)^-p` by binomial
/// series, free of cancellation for small `x`.
fn binomial_pair(p: i32, x: f64) -> (f64, f64) {
    let (mut even, mut odd) = (0.0, 0.0);
    // coefficient of x^n in (1 + x)^-p is (-1)^n C(p + n - 1, n)
    let mut coeff = 1.0;
    let mut xn = 1.0;
    for n in 1..40 {
        coeff *= -((p + n - 1) as f64) / n as f64;
        xn *= x;
        let term = 2.0 * coeff * xn;
        if n % 2 == 0 {
            even += term;
        } else {
            odd += term;
        }
        if term.abs() < 1e-40 {
            break;
        }
    }
    (even, odd)
}

/// `(t(k + h) u(k + h) - 2 t(k) u(k) + t(k - h) u(k - h)) / h^2` for
/// `t = sin` or `cos` and `u = k^-p`, evaluated without cancellation.
fn term_difference(trig_is_sin: bool, p: i32, k: f64, h: f64) -> f64 {
    let (s, c) = k.sin_cos();
    let (t, dt) = if trig_is_sin { (s, c) } else { (c, -s) };
    let u = k.powi(-p);
    let (even, odd) = binomial_pair(p, h / k);
    let cos_h_minus_1 = -2.0 * (0.5 * h).sin().powi(2);
    let sum_pm = u * (2.0 + even); // u(k + h) + u(k - h)
    let second = u * even; // u(k + h) + u(k - h) - 2 u(k)
    let diff_pm = u * odd; // u(k + h) - u(k - h)
    (t * (cos_h_minus_1 * sum_pm + second) + dt * h.sin() * diff_pm) / (h * h)
}

/// Central second difference of a kernel with step `h`.
pub fn kernel_second_difference(which: KernelKind, k: f64, phi: f64, h: f64) -> f64 {
    let f = phi.sin().powi(2);
    let g = 1.0 - 3.0 * phi.cos().powi(2);
    let d = |is_sin, p| term_difference(is_sin, p, k, h);
    match which {
        KernelKind::Gamma => 1.5 * (f * d(true, 1) + g * (d(false, 2) - d(true, 3))),
        KernelKind::V => 0.75 * (f * d(false, 1) - g * (d(true, 2) + d(false, 3))),
    }
}

/// Largest distance from each expected value to its partner in `got`, after
/// pairing every expected value with the nearest unused computed one.
/// Deviations are relative to `max(|expected|, floor)`.
pub fn multiset_deviation(expected: &[Complex64], got: &[Complex64], floor: f64) -> f64 {
    assert_eq!(expected.len(), got.len(), "spectra differ in size");
    let mut used = vec![false; got.len()];
    let mut worst = 0.0f64;
    for e in expected {
        let (best, dist) = got
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, g)| (i, (g - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[best] = true;
        worst = worst.max(dist / e.norm().max(floor));
    }
    worst
}

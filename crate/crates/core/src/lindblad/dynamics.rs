use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use super::space::TruncatedSpace;
use super::JumpFamily;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, trace};

/// Largest tolerated deviation of the trace from 1 during integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Density matrix on a truncated space at time `time`.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub space: TruncatedSpace,
    pub matrix: Array2<Complex64>,
    pub time: f64,
}

impl DensityOperator {
    pub fn pure(space: TruncatedSpace, amplitudes: &[(usize, Complex64)]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::domain("pure state needs a nonzero amplitude"));
        }
        let scale = 1.0 / norm2;
        let mut m = Array2::zeros((space.dim(), space.dim()));
        for &(i, a) in amplitudes {
            for &(j, b) in amplitudes {
                m[[i, j]] += a * b.conj() * scale;
            }
        }
        Ok(DensityOperator {
            space,
            matrix: m,
            time: 0.0,
        })
    }

    pub fn basis_state(space: TruncatedSpace, index: usize) -> Result<Self> {
        Self::pure(space, &[(index, Complex64::new(1.0, 0.0))])
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.matrix)
    }

    /// Excited-state population of each site.
    pub fn site_populations(&self) -> Vec<f64> {
        let mut pops = vec![0.0; self.space.n_sites];
        for i in 0..self.space.dim() {
            let p = self.matrix[[i, i]].re;
            for (j, pop) in pops.iter_mut().enumerate() {
                if self.space.site(i, j).up {
                    *pop += p;
                }
            }
        }
        pops
    }

    /// Population outside the sectors with at most `k` spin excitations.
    pub fn population_above(&self, k: usize) -> f64 {
        (0..self.space.dim())
            .filter(|&i| self.space.excitations(i) > k)
            .map(|i| self.matrix[[i, i]].re)
            .sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.matrix + &self.matrix.t().mapv(|z| z.conj())) * Complex64::new(0.5, 0.0);
        Ok(hermitian_eigenvalues(&herm)?.first().copied().unwrap_or(0.0))
    }
}

/// Precomputed generator: `d rho/dt = K rho + rho K^dag + sum G_mm' J_m' rho J_m^dag`
/// with `K = -A/2 + i H`, `A = sum G_mm' J_m^dag J_m'`, `H = sum_{m != m'} W_mm' J_m^dag J_m'`.
#[derive(Debug, Clone)]
pub struct MasterGenerator {
    dim: usize,
    k: Array2<Complex64>,
    /// Dissipator coefficient, then the sparse entries of `J_m'` and `J_m`.
    recycling: Vec<(f64, usize, usize)>,
    ops: Vec<Vec<(usize, usize, f64)>>,
}

impl MasterGenerator {
    pub fn new(family: &JumpFamily) -> Self {
        let dim = family.space.dim();
        let n_ops = family.ops.len();
        let mut a = Array2::<f64>::zeros((dim, dim));
        let mut h = Array2::<f64>::zeros((dim, dim));
        let mut recycling = Vec::new();
        for m in 0..n_ops {
            for mp in 0..n_ops {
                let g = family.gamma_tilde[[m, mp]];
                let v = if m != mp { family.v_tilde[[m, mp]] } else { 0.0 };
                if (g == 0.0 && v == 0.0) || family.ops[m].is_zero() || family.ops[mp].is_zero() {
                    continue;
                }
                let prod = family.ops[m].adjoint_times(&family.ops[mp]);
                if g != 0.0 {
                    a.scaled_add(g, &prod);
                    recycling.push((g, mp, m));
                }
                if v != 0.0 {
                    h.scaled_add(v, &prod);
                }
            }
        }
        let k = ndarray::Zip::from(&a)
            .and(&h)
            .map_collect(|&a, &h| Complex64::new(-0.5 * a, h));
        MasterGenerator {
            dim,
            k,
            recycling,
            ops: family.ops.iter().map(|o| o.entries.clone()).collect(),
        }
    }

    /// `d rho / dt`.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let k_rho = self.k.dot(rho);
        // K rho + (K rho)^dag since rho is Hermitian is not assumed here
        let rho_kdag = rho.dot(&self.k.t().mapv(|z| z.conj()));
        let mut out = k_rho + rho_kdag;
        for &(g, mp, m) in &self.recycling {
            for &(r1, c1, v1) in &self.ops[mp] {
                for &(r2, c2, v2) in &self.ops[m] {
                    out[[r1, r2]] += rho[[c1, c2]] * (g * v1 * v2);
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The non-Hermitian no-jump operator `K`; `i K` is the conditional Hamiltonian.
    pub fn no_jump(&self) -> &Array2<Complex64> {
        &self.k
    }
}

/// Right-hand side of the master equation for `rho`.
pub fn master_rhs(rho: &DensityOperator, family: &JumpFamily) -> Result<DensityOperator> {
    if rho.space != family.space {
        return Err(Error::Consistency("density operator and jump family live on different spaces".into()));
    }
    Ok(DensityOperator {
        space: rho.space,
        matrix: MasterGenerator::new(family).apply(&rho.matrix),
        time: rho.time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Record a sample every this many steps.
    pub sample_every: usize,
    /// Minimum eigenvalues below `-positivity_floor` are flagged.
    pub positivity_floor: f64,
}

impl EvolveOptions {
    /// Samples at every step; positivity floor `10 eta0^4`.
    pub fn new(t_final: f64, dt: f64, eta0: f64) -> Self {
        EvolveOptions {
            t_final,
            dt,
            sample_every: 1,
            positivity_floor: 10.0 * eta0.powi(4) + 1e-10,
        }
    }

    pub fn sample_every(mut self, steps: usize) -> Self {
        self.sample_every = steps.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub trace: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub excited_population: f64,
    pub site_populations: Vec<f64>,
    pub positivity_warning: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: DensityOperator,
}

impl Trajectory {
    pub fn positivity_warnings(&self) -> usize {
        self.samples.iter().filter(|s| s.positivity_warning).count()
    }
}

fn sample(rho: &DensityOperator, floor: f64) -> Result<Sample> {
    let min_eigenvalue = rho.min_eigenvalue()?;
    let site_populations = rho.site_populations();
    let warn = min_eigenvalue < -floor;
    if warn {
        log::warn!(
            "density matrix eigenvalue {min_eigenvalue:.3e} at t = {} is below -{floor:.3e}",
            rho.time
        );
    }
    Ok(Sample {
        t: rho.time,
        trace: rho.trace().re,
        hermiticity_defect: hermiticity_defect(&rho.matrix),
        min_eigenvalue,
        excited_population: site_populations.iter().sum(),
        site_populations,
        positivity_warning: warn,
    })
}

/// Integrate the master equation with fixed-step classical Runge-Kutta.
pub fn evolve(rho0: &DensityOperator, family: &JumpFamily, opts: &EvolveOptions) -> Result<Trajectory> {
    if !(opts.dt > 0.0) || !(opts.t_final >= opts.dt) {
        return Err(Error::domain(format!(
            "need dt > 0 and t_final >= dt, got dt = {}, t_final = {}",
            opts.dt, opts.t_final
        )));
    }
    if rho0.space != family.space {
        return Err(Error::Consistency("initial state and jump family live on different spaces".into()));
    }
    let gen = MasterGenerator::new(family);
    let steps = (opts.t_final / opts.dt).round() as usize;
    let dt = opts.dt;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut rho = rho0.clone();
    let mut samples = vec![sample(&rho, opts.positivity_floor)?];
    for step in 1..=steps {
        let x = &rho.matrix;
        let k1 = gen.apply(x);
        let k2 = gen.apply(&(x + &(&k1 * half)));
        let k3 = gen.apply(&(x + &(&k2 * half)));
        let k4 = gen.apply(&(x + &(&k3 * full)));
        rho.matrix = x + &((k1 + &k2 * two + &k3 * two + k4) * sixth);
        rho.time = step as f64 * dt;

        let drift = (rho.trace() - 1.0).norm();
        if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
            return Err(Error::Integration { t: rho.time, drift });
        }
        if step % opts.sample_every == 0 || step == steps {
            samples.push(sample(&rho, opts.positivity_floor)?);
        }
    }
    Ok(Trajectory {
        samples,
        final_state: rho,
    })
}

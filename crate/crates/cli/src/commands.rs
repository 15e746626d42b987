//! Command dispatch: every command maps scan points to table rows.

use std::f64::consts::PI;

use hybrid_radiance::basis::HybridBasis;
use hybrid_radiance::heff::build_heff;
use hybrid_radiance::lindblad::{build_jump_family, evolve, EvolveOptions, SiteState};
use hybrid_radiance::{
    analyze_with, band_scan, brillouin_grid, build_matrices, entropy_scan, find_kappa0, two_atom_spectrum,
    Complex64, DensityOperator, GeometryConfig, TruncatedSpace,
};
use rayon::prelude::*;

use crate::config::{Command, RunConfig, ScanParameter};
use crate::error::{CliError, CliResult};
use crate::table::{format_float, Cell, Table};

/// Number of `phi` values swept by `find-d0` without a scan.
pub const FIND_D0_POINTS: usize = 17;

/// Relative offsets of the three default two-atom spacings around `d0`.
pub const TWO_ATOM_OFFSETS: [f64; 3] = [-0.15, 0.0, 0.15];

/// Extra file written next to the main table.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    /// Resolved geometry of every evaluated point, in row order.
    pub geometries: Vec<GeometryConfig>,
    pub attachments: Vec<Attachment>,
}

struct Part {
    table: Table,
    geometries: Vec<GeometryConfig>,
}

impl Part {
    fn single(table: Table, geom: GeometryConfig) -> Self {
        Part {
            table,
            geometries: vec![geom],
        }
    }
}

fn fallback() -> GeometryConfig {
    GeometryConfig {
        n_atoms: 1,
        spacing: 0.25,
        phi: PI / 2.0,
        eta0: 0.0,
        gamma: 1.0,
        n_phonons: 0,
    }
}

fn scan_cell(p: ScanParameter, v: f64) -> Cell {
    if p.is_integer() {
        Cell::Int(v as i64)
    } else {
        Cell::Float(v)
    }
}

/// Evaluate `f` at every scan point in parallel and concatenate the parts in
/// scan order. A scan column is prepended unless the table already has it,
/// possibly under its `d_over_lambda` name.
fn over_points(
    cfg: &RunConfig,
    base: GeometryConfig,
    f: impl Fn(GeometryConfig) -> CliResult<Part> + Sync,
) -> CliResult<RunOutput> {
    let parts = cfg
        .points()
        .into_par_iter()
        .map(|value| {
            let geom = cfg.geometry_at(value, base)?;
            geom.validate()?;
            let mut part = f(geom)?;
            if let (Some(scan), Some(v)) = (&cfg.scan, value) {
                let name = scan.parameter.name();
                let alias = (scan.parameter == ScanParameter::Spacing).then_some("d_over_lambda");
                if !part.table.columns.iter().any(|c| c == name || Some(c.as_str()) == alias) {
                    part.table = part.table.with_leading(name, scan_cell(scan.parameter, v));
                }
            }
            Ok(part)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = RunOutput {
        table: Table::default(),
        geometries: Vec::new(),
        attachments: Vec::new(),
    };
    for part in parts {
        out.table.extend(part.table);
        out.geometries.extend(part.geometries);
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> CliResult<RunOutput> {
    log::info!("running {}", cfg.command);
    match cfg.command {
        Command::Kernels => kernels(cfg),
        Command::TwoAtom => two_atom(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Band => band(cfg),
        Command::EntropyScan => entropy(cfg),
        Command::Evolve => evolve_cmd(cfg),
        Command::FindD0 => find_d0(cfg),
    }
}

fn kernels(cfg: &RunConfig) -> CliResult<RunOutput> {
    over_points(cfg, fallback(), |geom| {
        let k = build_matrices(&geom)?;
        let mut t = Table::new(["j", "jp", "kappa", "gamma", "v", "gamma_dd", "v_dd"]);
        for j in 0..geom.n_atoms {
            for jp in 0..geom.n_atoms {
                t.push(vec![
                    j.into(),
                    jp.into(),
                    geom.kappa(j, jp).into(),
                    k.gamma_mat[[j, jp]].into(),
                    k.v_mat[[j, jp]].into(),
                    k.gamma_dd[[j, jp]].into(),
                    k.v_dd[[j, jp]].into(),
                ]);
            }
        }
        Ok(Part::single(t, geom))
    })
}

/// Without an explicit spacing, each point is evaluated at `d0(phi)` and at
/// `d0 (1 -/+ 0.15)`.
fn two_atom(cfg: &RunConfig) -> CliResult<RunOutput> {
    let explicit = cfg.geometry.spacing.is_some()
        || cfg.scan.as_ref().is_some_and(|s| s.parameter == ScanParameter::Spacing);
    let base = GeometryConfig { n_atoms: 2, ..fallback() };
    over_points(cfg, base, |geom| {
        let spacings = if explicit {
            vec![geom.spacing]
        } else {
            let d0 = find_kappa0(geom.phi)?.d0;
            TWO_ATOM_OFFSETS.iter().map(|x| d0 * (1.0 + x)).collect()
        };
        let mut t = Table::new(["spacing", "eta0", "parity", "n_ph", "n_a", "re_e", "im_e", "rate"]);
        let mut geometries = Vec::new();
        for d in spacings {
            let g = geom.with_spacing(d);
            let spec = two_atom_spectrum(&g, &build_matrices(&g)?)?;
            for l in spec.levels {
                t.push(vec![
                    d.into(),
                    g.eta0.into(),
                    l.parity.label().into(),
                    l.n_ph.into(),
                    l.n_a.into(),
                    l.energy.re.into(),
                    l.energy.im.into(),
                    l.rate.into(),
                ]);
            }
            geometries.push(g);
        }
        Ok(Part { table: t, geometries })
    })
}

fn matrix_csv(m: &ndarray::Array2<Complex64>, part: impl Fn(Complex64) -> f64, digits: usize) -> String {
    let header: Vec<String> = (0..m.ncols()).map(|c| format!("c{c}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&z| format_float(part(z), digits)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn spectrum(cfg: &RunConfig) -> CliResult<RunOutput> {
    let mut out = over_points(cfg, fallback(), |geom| {
        let kernels = build_matrices(&geom)?;
        let basis = HybridBasis::with_cap(&geom, cfg.basis_cap)?;
        let report = analyze_with(&geom, &kernels, basis)?;
        let mut t = Table::new([
            "m",
            "re_e",
            "im_e",
            "rate",
            "shift",
            "entropy",
            "separable",
            "negative_rate",
        ]);
        for s in report.summaries() {
            if s.negative_rate {
                log::warn!("mode {} has negative rate {:.3e} at {:?}", s.index, s.rate, geom);
            }
            t.push(vec![
                s.index.into(),
                s.re_e.into(),
                s.im_e.into(),
                s.rate.into(),
                s.shift.into(),
                s.entropy.into(),
                s.separable.into(),
                s.negative_rate.into(),
            ]);
        }
        Ok(Part::single(t, geom))
    })?;

    if cfg.output.basis_dump || cfg.output.matrix_dump {
        // dumps are only allowed without a scan, so there is one geometry
        let geom = out.geometries[0];
        let basis = HybridBasis::with_cap(&geom, cfg.basis_cap)?;
        if cfg.output.basis_dump {
            let states: Vec<_> = basis.states().collect();
            out.attachments.push(Attachment {
                name: "basis.json".into(),
                contents: serde_json::to_string_pretty(&states).expect("basis serialises") + "\n",
            });
        }
        if cfg.output.matrix_dump {
            let h = build_heff(&geom, &build_matrices(&geom)?, &basis)?;
            let digits = cfg.output.precision;
            out.attachments.push(Attachment {
                name: "heff_re.csv".into(),
                contents: matrix_csv(&h.matrix, |z| z.re, digits),
            });
            out.attachments.push(Attachment {
                name: "heff_im.csv".into(),
                contents: matrix_csv(&h.matrix, |z| z.im, digits),
            });
        }
    }
    Ok(out)
}

fn band(cfg: &RunConfig) -> CliResult<RunOutput> {
    let opts = cfg.band;
    over_points(cfg, fallback(), |geom| {
        let grid = brillouin_grid(&geom, opts.points);
        let points = band_scan(&geom, &grid, opts.shells, opts.method)?;
        let mut t = Table::new([
            "q_d_over_pi",
            "re_e",
            "im_e",
            "rate",
            "rate_eta0_zero",
            "delta_rate",
            "tail_estimate",
        ]);
        for p in points {
            t.push(vec![
                p.q_d_over_pi.into(),
                p.e_q.re.into(),
                p.e_q.im.into(),
                p.rate.into(),
                p.rate_eta0_zero.into(),
                p.delta_rate.into(),
                p.tail_estimate.into(),
            ]);
        }
        Ok(Part::single(t, geom))
    })
}

fn entropy(cfg: &RunConfig) -> CliResult<RunOutput> {
    let n_list = &cfg.entropy_scan.n_atoms;
    over_points(cfg, fallback(), |geom| {
        let points = entropy_scan(&geom, n_list, geom.eta0, geom.n_phonons)?;
        let mut t = Table::new(["N", "ln_N", "max_S", "d_over_lambda"]);
        for p in &points {
            t.push(vec![p.n_atoms.into(), p.ln_n.into(), p.max_entropy.into(), p.spacing.into()]);
        }
        let geometries = n_list.iter().map(|&n| geom.with_n_atoms(n)).collect();
        Ok(Part { table: t, geometries })
    })
}

/// Initial pure state on `space` from the configured components.
fn initial_state(cfg: &RunConfig, space: TruncatedSpace) -> CliResult<DensityOperator> {
    let n = space.n_sites;
    let mut amplitudes = Vec::new();
    if cfg.evolve.initial.is_empty() {
        let mut sites = vec![SiteState { up: false, phonons: 0 }; n];
        sites[0].up = true;
        amplitudes.push((space.index_of(&sites), Complex64::new(1.0, 0.0)));
    }
    for (i, c) in cfg.evolve.initial.iter().enumerate() {
        let path = |key: &str| format!("evolve.initial[{i}].{key}");
        if let Some(&j) = c.up.iter().find(|&&j| j >= n) {
            return Err(CliError::config(path("up"), format!("site {j} outside a chain of {n} atoms")));
        }
        if !c.phonons.is_empty() && c.phonons.len() != n {
            return Err(CliError::config(
                path("phonons"),
                format!("expected {n} occupation numbers, got {}", c.phonons.len()),
            ));
        }
        if let Some(&p) = c.phonons.iter().find(|&&p| p > space.n_max) {
            return Err(CliError::config(
                path("phonons"),
                format!("occupation {p} exceeds the cutoff n_max = {}", space.n_max),
            ));
        }
        let sites: Vec<SiteState> = (0..n)
            .map(|j| SiteState {
                up: c.up.contains(&j),
                phonons: c.phonons.get(j).copied().unwrap_or(0),
            })
            .collect();
        amplitudes.push((space.index_of(&sites), Complex64::new(c.amplitude.0, c.amplitude.1)));
    }
    DensityOperator::pure(space, &amplitudes).map_err(|e| CliError::config("evolve.initial", e.to_string()))
}

fn evolve_cmd(cfg: &RunConfig) -> CliResult<RunOutput> {
    let spec = &cfg.evolve;
    over_points(cfg, fallback(), |geom| {
        let space = TruncatedSpace::with_cap(geom.n_atoms, spec.n_max, cfg.space_cap)?;
        let family = build_jump_family(&geom, &build_matrices(&geom)?, &space)?;
        let rho0 = initial_state(cfg, space)?;
        let opts = EvolveOptions::new(spec.t_final, spec.dt, geom.eta0).sample_every(spec.sample_every);
        let traj = evolve(&rho0, &family, &opts)?;

        let mut columns = vec!["t".to_string(), "trace".into(), "excited_population".into()];
        columns.extend((0..geom.n_atoms).map(|j| format!("pop_{j}")));
        columns.extend(["min_eig".into(), "positivity_warning".into()]);
        let mut t = Table::new(columns);
        for s in traj.samples {
            let mut row: Vec<Cell> = vec![s.t.into(), s.trace.into(), s.excited_population.into()];
            row.extend(s.site_populations.into_iter().map(Cell::from));
            row.extend([s.min_eigenvalue.into(), s.positivity_warning.into()]);
            t.push(row);
        }
        Ok(Part::single(t, geom))
    })
}

/// The default sweep: `phi` uniform on `[0.2 pi, 0.8 pi]`.
pub fn default_phi_sweep() -> Vec<f64> {
    let (lo, hi) = (0.2 * PI, 0.8 * PI);
    (0..FIND_D0_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (FIND_D0_POINTS - 1) as f64)
        .collect()
}

fn find_d0(cfg: &RunConfig) -> CliResult<RunOutput> {
    let phis = match (&cfg.scan, cfg.geometry.phi) {
        (Some(s), _) => s.values.clone(),
        (None, Some(phi)) => vec![phi],
        (None, None) => default_phi_sweep(),
    };
    let roots = phis
        .par_iter()
        .map(|&phi| find_kappa0(phi))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(["phi", "kappa0", "d0_over_lambda"]);
    for r in roots {
        t.push(vec![r.phi.into(), r.kappa0.into(), r.d0.into()]);
    }
    Ok(RunOutput {
        table: t,
        geometries: Vec::new(),
        attachments: Vec::new(),
    })
}

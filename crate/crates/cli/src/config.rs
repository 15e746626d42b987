//! Run configuration: a JSON document validated key by key, so every error
//! names the offending key path.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use hybrid_radiance::band::{DEFAULT_GRID_POINTS, DEFAULT_SHELLS, MIN_SHELLS};
use hybrid_radiance::basis::DEFAULT_DIMENSION_CAP;
use hybrid_radiance::lindblad::DEFAULT_SPACE_CAP;
use hybrid_radiance::{GeometryConfig, SumMethod};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Kernels,
    TwoAtom,
    Spectrum,
    Band,
    EntropyScan,
    Evolve,
    FindD0,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Kernels,
        Command::TwoAtom,
        Command::Spectrum,
        Command::Band,
        Command::EntropyScan,
        Command::Evolve,
        Command::FindD0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Kernels => "kernels",
            Command::TwoAtom => "two-atom",
            Command::Spectrum => "spectrum",
            Command::Band => "band",
            Command::EntropyScan => "entropy-scan",
            Command::Evolve => "evolve",
            Command::FindD0 => "find-d0",
        }
    }

    /// Geometry keys that must be set, either directly or by the scan.
    fn required(self) -> &'static [&'static str] {
        match self {
            Command::Kernels | Command::Spectrum | Command::Evolve => &["n_atoms", "spacing", "phi"],
            Command::TwoAtom => &["phi"],
            Command::Band | Command::EntropyScan => &["spacing", "phi"],
            Command::FindD0 => &[],
        }
    }

    /// Whether scanning `p` changes this command's output in a way its
    /// columns can represent.
    pub fn scannable(self, p: ScanParameter) -> bool {
        use ScanParameter as P;
        match self {
            Command::Kernels => matches!(p, P::NAtoms | P::Spacing | P::Phi),
            Command::TwoAtom => p != P::NAtoms,
            Command::Spectrum => true,
            Command::Band => matches!(p, P::Spacing | P::Phi | P::Eta0),
            Command::EntropyScan => p != P::NAtoms,
            Command::Evolve => matches!(p, P::Spacing | P::Phi | P::Eta0),
            Command::FindD0 => p == P::Phi,
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                format!("unknown command {s:?}, expected one of {}", names.join(", "))
            })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Geometry fields as given; unset fields are filled by the scan or by
/// command defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GeometrySpec {
    pub n_atoms: Option<usize>,
    pub spacing: Option<f64>,
    pub phi: Option<f64>,
    pub eta0: f64,
    pub n_phonons: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    NAtoms,
    Spacing,
    Phi,
    Eta0,
    NPhonons,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::NAtoms => "n_atoms",
            ScanParameter::Spacing => "spacing",
            ScanParameter::Phi => "phi",
            ScanParameter::Eta0 => "eta0",
            ScanParameter::NPhonons => "n_phonons",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, ScanParameter::NAtoms | ScanParameter::NPhonons)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scan {
    pub parameter: ScanParameter,
    /// Angles already converted to radians.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub path: String,
    pub format: Format,
    pub precision: usize,
    pub basis_dump: bool,
    pub matrix_dump: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandOptions {
    pub shells: usize,
    pub points: usize,
    pub method: SumMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyOptions {
    pub n_atoms: Vec<usize>,
}

/// One component of the initial pure state: excited sites, phonon
/// occupations and a complex amplitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialComponent {
    pub up: Vec<usize>,
    pub phonons: Vec<usize>,
    pub amplitude: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSpec {
    pub t_final: f64,
    pub dt: f64,
    pub n_max: usize,
    pub sample_every: usize,
    /// Empty means site 0 excited without phonons.
    pub initial: Vec<InitialComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: GeometrySpec,
    pub scan: Option<Scan>,
    pub output: OutputSpec,
    pub band: BandOptions,
    pub entropy_scan: EntropyOptions,
    pub evolve: EvolveSpec,
    pub basis_cap: usize,
    pub space_cap: usize,
}

impl RunConfig {
    /// Geometry at one scan value (or the base geometry without a scan), with
    /// `fallback` supplying fields the command does not require.
    pub fn geometry_at(&self, value: Option<f64>, fallback: GeometryConfig) -> CliResult<GeometryConfig> {
        let g = &self.geometry;
        let mut out = GeometryConfig {
            n_atoms: g.n_atoms.unwrap_or(fallback.n_atoms),
            spacing: g.spacing.unwrap_or(fallback.spacing),
            phi: g.phi.unwrap_or(fallback.phi),
            eta0: g.eta0,
            gamma: 1.0,
            n_phonons: g.n_phonons,
        };
        if let (Some(scan), Some(v)) = (&self.scan, value) {
            match scan.parameter {
                ScanParameter::NAtoms => out.n_atoms = v as usize,
                ScanParameter::Spacing => out.spacing = v,
                ScanParameter::Phi => out.phi = v,
                ScanParameter::Eta0 => out.eta0 = v,
                ScanParameter::NPhonons => out.n_phonons = v as usize,
            }
        }
        Ok(out)
    }

    /// Scan values, or a single `None` without a scan.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.scan {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }
}

/// Walks one JSON object, tracking which keys have been consumed.
struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
    seen: BTreeSet<&'a str>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_f64(v: &Value, path: &str) -> CliResult<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::config(path, format!("expected a number, got {v}")))
}

fn as_usize(v: &Value, path: &str) -> CliResult<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| CliError::config(path, format!("expected a non-negative integer, got {v}")))
}

impl<'a> Obj<'a> {
    fn new(value: &'a Value, path: &str) -> CliResult<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| CliError::config(path, format!("expected an object, got {value}")))?;
        Ok(Obj {
            path: path.to_string(),
            map,
            seen: BTreeSet::new(),
        })
    }

    fn key(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn get(&mut self, key: &'a str) -> Option<&'a Value> {
        let v = self.map.get(key)?;
        self.seen.insert(key);
        Some(v)
    }

    fn f64(&mut self, key: &'a str) -> CliResult<Option<f64>> {
        let path = self.key(key);
        self.get(key).map(|v| as_f64(v, &path)).transpose()
    }

    fn usize(&mut self, key: &'a str) -> CliResult<Option<usize>> {
        let path = self.key(key);
        self.get(key).map(|v| as_usize(v, &path)).transpose()
    }

    fn bool(&mut self, key: &'a str) -> CliResult<Option<bool>> {
        let path = self.key(key);
        self.get(key)
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| CliError::config(&path, format!("expected true or false, got {v}")))
            })
            .transpose()
    }

    fn str(&mut self, key: &'a str) -> CliResult<Option<&'a str>> {
        let path = self.key(key);
        self.get(key)
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| CliError::config(&path, format!("expected a string, got {v}")))
            })
            .transpose()
    }

    fn object(&mut self, key: &'a str) -> CliResult<Option<Obj<'a>>> {
        let path = self.key(key);
        self.get(key).map(|v| Obj::new(v, &path)).transpose()
    }

    fn array(&mut self, key: &'a str) -> CliResult<Option<&'a Vec<Value>>> {
        let path = self.key(key);
        self.get(key)
            .map(|v| {
                v.as_array()
                    .ok_or_else(|| CliError::config(&path, format!("expected a list, got {v}")))
            })
            .transpose()
    }

    /// An angle given either in radians under `key` or in degrees under `key_deg`.
    fn angle(&mut self, key: &'a str, key_deg: &'a str) -> CliResult<Option<f64>> {
        let rad = self.f64(key)?;
        let deg = self.f64(key_deg)?;
        match (rad, deg) {
            (Some(_), Some(_)) => Err(CliError::config(
                self.key(key_deg),
                format!("give either {key} or {key_deg}, not both"),
            )),
            (Some(r), None) => Ok(Some(r)),
            (None, Some(d)) => Ok(Some(d.to_radians())),
            (None, None) => Ok(None),
        }
    }

    fn finish(self) -> CliResult<()> {
        match self.map.keys().find(|k| !self.seen.contains(k.as_str())) {
            Some(k) => Err(CliError::config(join(&self.path, k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn check(ok: bool, path: String, message: impl Into<String>) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(path, message))
    }
}

fn check_phi(phi: f64, path: String) -> CliResult<()> {
    check((0.0..=PI).contains(&phi), path, format!("phi = {phi} rad lies outside [0, pi]"))
}

fn parse_geometry(mut o: Obj) -> CliResult<GeometrySpec> {
    let n_atoms = o.usize("n_atoms")?;
    if let Some(n) = n_atoms {
        check(n > 0, o.key("n_atoms"), "n_atoms must be positive")?;
    }
    let spacing = o.f64("spacing")?;
    if let Some(d) = spacing {
        check(d > 0.0, o.key("spacing"), format!("spacing must be > 0, got {d}"))?;
    }
    let phi = o.angle("phi", "phi_deg")?;
    if let Some(p) = phi {
        check_phi(p, o.key("phi"))?;
    }
    let eta0 = o.f64("eta0")?.unwrap_or(0.0);
    check(eta0 >= 0.0, o.key("eta0"), format!("eta0 must be >= 0, got {eta0}"))?;
    if let Some(g) = o.f64("gamma")? {
        check(g == 1.0, o.key("gamma"), "rates are reported in units of gamma, which must be 1")?;
    }
    let n_phonons = o.usize("n_phonons")?.unwrap_or(0);
    o.finish()?;
    Ok(GeometrySpec {
        n_atoms,
        spacing,
        phi,
        eta0,
        n_phonons,
    })
}

fn parse_scan(mut o: Obj) -> CliResult<Scan> {
    let name = o.str("parameter")?.ok_or_else(|| CliError::config(o.key("parameter"), "missing key"))?;
    let (parameter, degrees) = match name {
        "n_atoms" => (ScanParameter::NAtoms, false),
        "spacing" => (ScanParameter::Spacing, false),
        "phi" => (ScanParameter::Phi, false),
        "phi_deg" => (ScanParameter::Phi, true),
        "eta0" => (ScanParameter::Eta0, false),
        "n_phonons" => (ScanParameter::NPhonons, false),
        other => {
            return Err(CliError::config(
                o.key("parameter"),
                format!("{other:?} is not a scannable geometry field"),
            ))
        }
    };
    let list = o.array("values")?.ok_or_else(|| CliError::config(o.key("values"), "missing key"))?;
    check(!list.is_empty(), o.key("values"), "scan needs at least one value")?;
    let mut values = Vec::with_capacity(list.len());
    for (i, v) in list.iter().enumerate() {
        let path = format!("{}[{i}]", o.key("values"));
        let x = if parameter.is_integer() {
            let n = as_usize(v, &path)?;
            check(parameter != ScanParameter::NAtoms || n > 0, path.clone(), "n_atoms must be positive")?;
            n as f64
        } else {
            as_f64(v, &path)?
        };
        let x = if degrees { x.to_radians() } else { x };
        match parameter {
            ScanParameter::Spacing => check(x > 0.0, path, format!("spacing must be > 0, got {x}"))?,
            ScanParameter::Phi => check_phi(x, path)?,
            ScanParameter::Eta0 => check(x >= 0.0, path, format!("eta0 must be >= 0, got {x}"))?,
            _ => {}
        }
        values.push(x);
    }
    o.finish()?;
    Ok(Scan { parameter, values })
}

fn parse_output(o: Option<Obj>) -> CliResult<OutputSpec> {
    let mut spec = OutputSpec {
        path: ".".into(),
        format: Format::Csv,
        precision: 12,
        basis_dump: false,
        matrix_dump: false,
    };
    let Some(mut o) = o else { return Ok(spec) };
    if let Some(p) = o.str("path")? {
        spec.path = p.to_string();
    }
    if let Some(f) = o.str("format")? {
        spec.format = match f {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::config(o.key("format"), format!("expected csv or json, got {other:?}"))),
        };
    }
    if let Some(p) = o.usize("precision")? {
        check((6..=17).contains(&p), o.key("precision"), format!("precision must lie in [6, 17], got {p}"))?;
        spec.precision = p;
    }
    spec.basis_dump = o.bool("basis_dump")?.unwrap_or(false);
    spec.matrix_dump = o.bool("matrix_dump")?.unwrap_or(false);
    o.finish()?;
    Ok(spec)
}

fn parse_band(o: Option<Obj>) -> CliResult<BandOptions> {
    let mut b = BandOptions {
        shells: DEFAULT_SHELLS,
        points: DEFAULT_GRID_POINTS,
        method: SumMethod::Smoothed,
    };
    let Some(mut o) = o else { return Ok(b) };
    if let Some(s) = o.usize("shells")? {
        check(s >= MIN_SHELLS, o.key("shells"), format!("at least {MIN_SHELLS} shells required"))?;
        b.shells = s;
    }
    if let Some(p) = o.usize("points")? {
        check(p > 0, o.key("points"), "grid needs at least one point")?;
        b.points = p;
    }
    if let Some(m) = o.str("method")? {
        b.method = match m {
            "smoothed" => SumMethod::Smoothed,
            "raw" => SumMethod::Raw,
            other => {
                return Err(CliError::config(o.key("method"), format!("expected smoothed or raw, got {other:?}")))
            }
        };
    }
    o.finish()?;
    Ok(b)
}

fn parse_entropy(o: Option<Obj>) -> CliResult<EntropyOptions> {
    let mut e = EntropyOptions {
        n_atoms: (2..=8).collect(),
    };
    let Some(mut o) = o else { return Ok(e) };
    if let Some(list) = o.array("n_atoms")? {
        check(!list.is_empty(), o.key("n_atoms"), "list must not be empty")?;
        e.n_atoms = list
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let path = format!("{}[{i}]", o.key("n_atoms"));
                let n = as_usize(v, &path)?;
                check(n > 0, path, "n_atoms must be positive")?;
                Ok(n)
            })
            .collect::<CliResult<_>>()?;
    }
    o.finish()?;
    Ok(e)
}

fn parse_component(v: &Value, path: &str) -> CliResult<InitialComponent> {
    let mut o = Obj::new(v, path)?;
    let up = match o.array("up")? {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, v)| as_usize(v, &format!("{}[{i}]", o.key("up"))))
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    let phonons = match o.array("phonons")? {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, v)| as_usize(v, &format!("{}[{i}]", o.key("phonons"))))
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    let amp_path = o.key("amplitude");
    let amplitude = match o.get("amplitude") {
        None => (1.0, 0.0),
        Some(Value::Array(pair)) if pair.len() == 2 => {
            (as_f64(&pair[0], &format!("{amp_path}[0]"))?, as_f64(&pair[1], &format!("{amp_path}[1]"))?)
        }
        Some(v) => (as_f64(v, &amp_path)?, 0.0),
    };
    o.finish()?;
    Ok(InitialComponent { up, phonons, amplitude })
}

fn parse_evolve(o: Option<Obj>, n_phonons: usize) -> CliResult<EvolveSpec> {
    let mut e = EvolveSpec {
        t_final: 5.0,
        dt: 1e-3,
        n_max: n_phonons.max(1),
        sample_every: 10,
        initial: Vec::new(),
    };
    let Some(mut o) = o else { return Ok(e) };
    if let Some(t) = o.f64("t_final")? {
        check(t > 0.0, o.key("t_final"), "t_final must be > 0")?;
        e.t_final = t;
    }
    if let Some(dt) = o.f64("dt")? {
        check(dt > 0.0 && dt <= e.t_final, o.key("dt"), "need 0 < dt <= t_final")?;
        e.dt = dt;
    }
    if let Some(n) = o.usize("n_max")? {
        e.n_max = n;
    }
    if let Some(n) = o.usize("sample_every")? {
        check(n > 0, o.key("sample_every"), "sample_every must be positive")?;
        e.sample_every = n;
    }
    if let Some(list) = o.array("initial")? {
        e.initial = list
            .iter()
            .enumerate()
            .map(|(i, v)| parse_component(v, &format!("{}[{i}]", o.key("initial"))))
            .collect::<CliResult<_>>()?;
    }
    o.finish()?;
    Ok(e)
}

/// Parse and validate a configuration document. `command` from the command
/// line takes precedence; if the document also names one they must agree.
pub fn parse_config(text: &str, command: Option<Command>) -> CliResult<RunConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::config("", format!("malformed JSON: {e}")))?;
    let mut root = Obj::new(&doc, "")?;

    let in_file = root
        .str("command")?
        .map(|s| s.parse::<Command>().map_err(|m| CliError::config("command", m)))
        .transpose()?;
    let command = match (command, in_file) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::config("command", format!("file says {b}, command line says {a}")))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(CliError::config("command", "missing key")),
    };

    let geometry = match root.object("geometry")? {
        Some(o) => parse_geometry(o)?,
        None => GeometrySpec::default(),
    };
    let scan = root.object("scan")?.map(parse_scan).transpose()?;
    let output = parse_output(root.object("output")?)?;
    let band = parse_band(root.object("band")?)?;
    let entropy_scan = parse_entropy(root.object("entropy_scan")?)?;
    let evolve = parse_evolve(root.object("evolve")?, geometry.n_phonons)?;
    let basis_cap = root.usize("basis_cap")?.unwrap_or(DEFAULT_DIMENSION_CAP);
    let space_cap = root.usize("space_cap")?.unwrap_or(DEFAULT_SPACE_CAP);
    root.finish()?;

    if let Some(s) = &scan {
        if !command.scannable(s.parameter) {
            return Err(CliError::config(
                "scan.parameter",
                format!("{} cannot be scanned by {command}", s.parameter.name()),
            ));
        }
    }
    let scanned = scan.as_ref().map(|s| s.parameter.name());
    for key in command.required() {
        let set = match *key {
            "n_atoms" => geometry.n_atoms.is_some(),
            "spacing" => geometry.spacing.is_some(),
            _ => geometry.phi.is_some(),
        };
        if !set && scanned != Some(key) {
            return Err(CliError::config(format!("geometry.{key}"), format!("missing key, required by {command}")));
        }
    }
    if command == Command::TwoAtom {
        check(
            geometry.n_atoms.is_none_or(|n| n == 2) && scanned != Some("n_atoms"),
            "geometry.n_atoms".into(),
            "two-atom runs need n_atoms = 2",
        )?;
    }
    if (output.basis_dump || output.matrix_dump) && (command != Command::Spectrum || scan.is_some()) {
        return Err(CliError::config(
            "output",
            "basis and matrix dumps are only available for unscanned spectrum runs",
        ));
    }

    Ok(RunConfig {
        command,
        geometry,
        scan,
        output,
        band,
        entropy_scan,
        evolve,
        basis_cap,
        space_cap,
    })
}

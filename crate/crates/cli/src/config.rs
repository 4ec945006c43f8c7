//! Run configuration: command-line arguments, validation, and the resolved
//! record written next to every output file.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ringglow_core::{
    build_generalized_state, build_hpi_state, AtomArray, MultiphotonState, Polarization, Vec3,
};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Bad input; reported before any computation, exit code 2.
    Invalid(String),
    /// Failure during computation or output, exit code 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<ringglow_core::Error> for CliError {
    fn from(e: ringglow_core::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Single,
    Stacked,
    Concentric,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Single => "single",
            Kind::Stacked => "stacked",
            Kind::Concentric => "concentric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Pol {
    X,
    Y,
    Z,
}

impl Pol {
    pub fn as_str(self) -> &'static str {
        match self {
            Pol::X => "x",
            Pol::Y => "y",
            Pol::Z => "z",
        }
    }

    pub fn vector(self) -> Polarization {
        match self {
            Pol::X => Polarization::x(),
            Pol::Y => Polarization::y(),
            Pol::Z => Polarization::z(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pattern,
    Spectrum,
    Fluorescence,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Pattern => "pattern",
            Task::Spectrum => "spectrum",
            Task::Fluorescence => "fluorescence",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GeometryArgs {
    /// Ring layout; a comma-separated list is accepted by `sweep`.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "single")]
    pub kind: Vec<Kind>,
    /// Atoms per ring.
    #[arg(long)]
    pub n_phi: Option<usize>,
    /// Number of rings; a comma-separated list is accepted by `sweep`.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub n_rings: Vec<usize>,
    /// Ring radius in wavelengths (innermost ring for concentric layouts).
    #[arg(long)]
    pub r: Option<f64>,
    /// Axial ring spacing in wavelengths (stacked layouts).
    #[arg(long)]
    pub d_z: Option<f64>,
    /// Radial ring spacing in wavelengths (concentric layouts; defaults to r).
    #[arg(long)]
    pub d_r: Option<f64>,
    /// Uniform scale applied to all positions, e.g. 1000 for the noninteracting limit.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// Number of excitations.
    #[arg(long)]
    pub m: Option<usize>,
    /// OAM index (comma-separated list allowed for fluorescence and sweep).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub l: Vec<i64>,
    /// Generalized phase index, used instead of --l.
    #[arg(long, value_delimiter = ',')]
    pub n_index: Vec<u64>,
    /// Direction of the imprinting wavevector as "x,y,z"; its length is set to 2π/λ.
    #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
    pub k_dir: String,
    /// Dipole polarization.
    #[arg(long, value_enum, default_value = "x")]
    pub pol: Pol,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output path (a directory for sweep).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Recorded in the config sidecar; all computations are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct PatternArgs {
    /// Polar samples on [0, π], endpoints included.
    #[arg(long, default_value_t = 91)]
    pub n_theta: usize,
    /// Azimuthal samples on [0, 2π).
    #[arg(long, default_value_t = 181)]
    pub n_phi_grid: usize,
}

#[derive(Args, Debug, Clone)]
pub struct DynamicsArgs {
    /// End time in units of 1/Γ.
    #[arg(long, default_value_t = 4.0)]
    pub t_max: f64,
    /// Number of time samples (ignored when t_max is 0).
    #[arg(long, default_value_t = 401)]
    pub n_t: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryConfig {
    pub kind: Kind,
    pub n_phi: usize,
    pub n_rings: usize,
    pub r: f64,
    pub d_z: Option<f64>,
    pub d_r: Option<f64>,
    pub scale: f64,
}

impl GeometryConfig {
    pub fn build(&self) -> CliResult<AtomArray> {
        let array = match self.kind {
            Kind::Single => AtomArray::single_ring(self.n_phi, self.r),
            Kind::Stacked => {
                AtomArray::stacked_rings(self.n_phi, self.n_rings, self.r, self.d_z.unwrap_or(0.0))
            }
            Kind::Concentric => AtomArray::concentric_rings(
                self.n_phi,
                self.n_rings,
                self.r,
                self.d_r.unwrap_or(self.r),
            ),
        };
        let array = array.map_err(|e| invalid(format!("geometry: {e}")))?;
        if self.scale == 1.0 {
            Ok(array)
        } else {
            array
                .scaled(self.scale)
                .map_err(|e| invalid(format!("scale: {e}")))
        }
    }

    fn push_args(&self, args: &mut Vec<String>) {
        args.extend(["--kind".into(), self.kind.as_str().into()]);
        args.extend(["--n-phi".into(), self.n_phi.to_string()]);
        args.extend(["--n-rings".into(), self.n_rings.to_string()]);
        args.extend(["--r".into(), format!("{:?}", self.r)]);
        if let Some(d) = self.d_z {
            args.extend(["--d-z".into(), format!("{d:?}")]);
        }
        if let Some(d) = self.d_r {
            args.extend(["--d-r".into(), format!("{d:?}")]);
        }
        if self.scale != 1.0 {
            args.extend(["--scale".into(), format!("{:?}", self.scale)]);
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!(
            "{name} must be a positive finite number, got {v}"
        )))
    }
}

impl GeometryArgs {
    /// Every (kind, n_rings) combination; single rings ignore the ring count.
    pub fn resolve_all(&self) -> CliResult<Vec<GeometryConfig>> {
        let n_phi = self.n_phi.ok_or_else(|| invalid("n_phi is required"))?;
        let r = positive("r", self.r.ok_or_else(|| invalid("r is required"))?)?;
        let scale = positive("scale", self.scale)?;
        if self.kind.is_empty() {
            return Err(invalid("kind needs at least one value"));
        }
        if self.n_rings.is_empty() {
            return Err(invalid("n_rings needs at least one value"));
        }
        let mut out = Vec::new();
        for &kind in &self.kind {
            let counts: Vec<usize> = if kind == Kind::Single {
                vec![1]
            } else {
                self.n_rings.clone()
            };
            for n_rings in counts {
                let (d_z, d_r) = match kind {
                    Kind::Single => (None, None),
                    Kind::Stacked => {
                        let d = self
                            .d_z
                            .ok_or_else(|| invalid("d_z is required for stacked rings"))?;
                        (Some(positive("d_z", d)?), None)
                    }
                    Kind::Concentric => (None, Some(positive("d_r", self.d_r.unwrap_or(r))?)),
                };
                let cfg = GeometryConfig {
                    kind,
                    n_phi,
                    n_rings,
                    r,
                    d_z,
                    d_r,
                    scale,
                };
                if !out.contains(&cfg) {
                    cfg.build()?;
                    out.push(cfg);
                }
            }
        }
        Ok(out)
    }

    pub fn resolve_one(&self) -> CliResult<GeometryConfig> {
        if self.kind.len() > 1 {
            return Err(invalid("kind takes a single value outside sweep"));
        }
        if self.n_rings.len() > 1 {
            return Err(invalid("n_rings takes a single value outside sweep"));
        }
        if self.kind.first() == Some(&Kind::Single) && self.n_rings.first().is_some_and(|&n| n != 1)
        {
            return Err(invalid("n_rings must be 1 for kind single"));
        }
        let mut all = self.resolve_all()?;
        Ok(all.remove(0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    L(i64),
    NIndex(u64),
}

impl StateSpec {
    pub fn tag(self) -> String {
        match self {
            StateSpec::L(l) => format!("l{l}"),
            StateSpec::NIndex(n) => format!("n{n}"),
        }
    }

    pub fn build(self, array: &AtomArray, m: usize, k_l: Vec3) -> CliResult<MultiphotonState> {
        let state = match self {
            StateSpec::L(l) => build_hpi_state(array, m, l, k_l),
            StateSpec::NIndex(n) => build_generalized_state(array, m, n, k_l),
        };
        state.map_err(|e| invalid(format!("state: {e}")))
    }
}

impl StateArgs {
    pub fn m(&self) -> CliResult<usize> {
        self.m.ok_or_else(|| invalid("m is required"))
    }

    pub fn states(&self) -> CliResult<Vec<StateSpec>> {
        if !self.l.is_empty() && !self.n_index.is_empty() {
            return Err(invalid("l and n_index are mutually exclusive"));
        }
        let mut out: Vec<StateSpec> = Vec::new();
        let specs = self
            .l
            .iter()
            .map(|&l| StateSpec::L(l))
            .chain(self.n_index.iter().map(|&n| StateSpec::NIndex(n)));
        for s in specs {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Ok(out)
    }

    pub fn k_dir(&self) -> CliResult<[f64; 3]> {
        let parts: Vec<f64> = self
            .k_dir
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                invalid(format!(
                    "k_dir must be three comma-separated numbers, got `{}`",
                    self.k_dir
                ))
            })?;
        let v: [f64; 3] = parts.try_into().map_err(|_| {
            invalid(format!(
                "k_dir must be three comma-separated numbers, got `{}`",
                self.k_dir
            ))
        })?;
        let norm = Vec3::new(v[0], v[1], v[2]).norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(invalid("k_dir must be a nonzero finite vector"));
        }
        Ok(v)
    }
}

impl DynamicsArgs {
    pub fn validate(&self) -> CliResult<()> {
        if !self.t_max.is_finite() || self.t_max < 0.0 {
            return Err(invalid(format!(
                "t_max must be finite and non-negative, got {}",
                self.t_max
            )));
        }
        if self.t_max > 0.0 && self.n_t < 2 {
            return Err(invalid("n_t must be at least 2 when t_max > 0"));
        }
        Ok(())
    }
}

pub fn sample_times(t_max: f64, n_t: usize) -> Vec<f64> {
    if t_max == 0.0 {
        return vec![0.0];
    }
    let last = (n_t - 1) as f64;
    (0..n_t).map(|i| t_max * i as f64 / last).collect()
}

/// Everything needed to regenerate one output file.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Task,
    pub version: &'static str,
    pub geometry: GeometryConfig,
    pub m: usize,
    pub state: Option<StateSpec>,
    pub k_dir: [f64; 3],
    pub pol: Pol,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_phi_grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub command_line: Vec<String>,
}

impl RunConfig {
    pub fn k_l(&self) -> Vec3 {
        let [x, y, z] = self.k_dir;
        let norm = Vec3::new(x, y, z).norm();
        Vec3::new(x, y, z) * (TAU / norm)
    }

    /// Fills `out` and the equivalent command line.
    pub fn at(mut self, out: &Path) -> Self {
        self.out = out.to_path_buf();
        let mut args = vec!["ringglow".to_string(), self.command.as_str().to_string()];
        self.geometry.push_args(&mut args);
        args.extend(["--m".into(), self.m.to_string()]);
        match self.state {
            Some(StateSpec::L(l)) => args.push(format!("--l={l}")),
            Some(StateSpec::NIndex(n)) => args.extend(["--n-index".into(), n.to_string()]),
            None => {}
        }
        let [x, y, z] = self.k_dir;
        args.push(format!("--k-dir={x:?},{y:?},{z:?}"));
        args.extend(["--pol".into(), self.pol.as_str().into()]);
        if let (Some(a), Some(b)) = (self.n_theta, self.n_phi_grid) {
            args.extend([
                "--n-theta".into(),
                a.to_string(),
                "--n-phi-grid".into(),
                b.to_string(),
            ]);
        }
        if let (Some(t), Some(n)) = (self.t_max, self.n_t) {
            args.extend([
                "--t-max".into(),
                format!("{t:?}"),
                "--n-t".into(),
                n.to_string(),
            ]);
        }
        args.extend(["--out".into(), out.display().to_string()]);
        args.extend(["--format".into(), self.format.as_str().into()]);
        if let Some(s) = self.seed {
            args.extend(["--seed".into(), s.to_string()]);
        }
        self.command_line = args;
        self
    }
}

/// `<file>.config.json` next to `file`.
pub fn sidecar_path(file: &Path) -> PathBuf {
    let mut name = file.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

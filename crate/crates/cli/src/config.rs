use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, ValueEnum};
use pdm_core::{Complex64, MassFamily, PdmError, PotentialSpec, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// (k, E) levels of the PDM problem whose y-image is `--potential`
    Spectrum,
    /// One numerical eigenfunction, in y or pulled back to x
    Eigenfunction,
    /// WKB against Numerov for a y-space potential
    WkbCompare,
    /// Repeated raise/lower on an oscillator level
    Ladder,
    /// PDM coherent state: density, Poisson weights, moments
    Coherent,
    /// Mass families with domains, orderings and Jacobian checks
    Catalog,
    /// Oscillator whose x-potential is the pull-back of y^2/2
    FirstKind,
    /// Harmonic or squeezed x-potential carried to y
    SecondKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Singular0,
    SingularN,
    Regular,
    RationalW,
    QuadraticC,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialArg {
    Harmonic,
    Squeezed,
    Sinh2,
    PowerLaw,
    Log2,
    OddRoot,
    ArcsinhSq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Raise,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceArg {
    X,
    Y,
}

/// Position-dependent-mass Schrödinger spectra, eigenfunctions and coherent states.
#[derive(Debug, Parser)]
#[command(name = "pdm", version)]
pub struct Cli {
    /// Command to run; may come from --config instead.
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON file with the same keys as the flags; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub emit_config: bool,

    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Exponent index of singular-n masses and power-law / odd-root potentials.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Reference mass of the constant family.
    #[arg(long)]
    pub m0: Option<f64>,
    /// Ordering parameter `a`; defaults to the family's natural ordering.
    #[arg(long, allow_hyphen_values = true)]
    pub ordering: Option<f64>,
    #[arg(long, value_enum)]
    pub potential: Option<PotentialArg>,
    /// Number of levels, k = 0 .. levels-1.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub ymax_margin: Option<f64>,
    /// Coherent-state label as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub space: Option<SpaceArg>,
    /// Points in emitted wavefunction samples.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn default_levels() -> usize {
    10
}

fn default_grid_points() -> usize {
    SolverConfig::default().grid_points
}

fn default_ymax_margin() -> f64 {
    SolverConfig::default().ymax_margin
}

fn default_steps() -> usize {
    1
}

fn default_points() -> usize {
    401
}

fn default_family() -> FamilyArg {
    FamilyArg::Regular
}

fn default_direction() -> Direction {
    Direction::Lower
}

fn default_space() -> SpaceArg {
    SpaceArg::Y
}

fn default_format() -> Format {
    Format::Csv
}

/// A fully resolved run. The JSON form uses the flag names as keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_family")]
    pub family: FamilyArg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "one")]
    pub m0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialArg>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_ymax_margin")]
    pub ymax_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_space")]
    pub space: SpaceArg,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            family: default_family(),
            n: None,
            x0: 0.0,
            lambda: 1.0,
            w: None,
            c: None,
            m0: 1.0,
            ordering: None,
            potential: None,
            levels: default_levels(),
            k: 0,
            grid_points: default_grid_points(),
            ymax_margin: default_ymax_margin(),
            z: None,
            direction: default_direction(),
            steps: default_steps(),
            space: default_space(),
            points: default_points(),
            format: default_format(),
            out: None,
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Config file (if any) overlaid with the flags that were given.
    pub fn from_cli(cli: &Cli) -> anyhow::Result<Self> {
        let mut cfg = match (&cli.config, cli.command) {
            (Some(p), _) => Self::load(p)?,
            (None, Some(c)) => Self::new(c),
            (None, None) => anyhow::bail!("no command given; pass one or use --config"),
        };
        if let Some(c) = cli.command {
            cfg.command = c;
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = cli.$f { cfg.$f = v; })* };
        }
        macro_rules! take_opt {
            ($($f:ident),*) => { $(if cli.$f.is_some() { cfg.$f = cli.$f; })* };
        }
        take!(family, x0, lambda, m0, levels, k, grid_points, ymax_margin, direction, steps, space, points, format);
        take_opt!(n, w, c, ordering, potential);
        if let Some(z) = &cli.z {
            cfg.z = Some(parse_z(z)?);
        }
        if cli.out.is_some() {
            cfg.out = cli.out.clone();
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), PdmError> {
        if self.levels == 0 {
            return Err(PdmError::InvalidParameter("--levels must be at least 1".into()));
        }
        if self.points < 3 {
            return Err(PdmError::InvalidParameter("--points must be at least 3".into()));
        }
        self.solver().validate()?;
        if let Some([re, im]) = self.z {
            if !(re.is_finite() && im.is_finite()) {
                return Err(PdmError::InvalidParameter("--z must be finite".into()));
            }
        }
        self.mass_family()?;
        Ok(())
    }

    fn need_n(&self, what: &str) -> Result<u32, PdmError> {
        self.n
            .ok_or_else(|| PdmError::InvalidParameter(format!("{what} needs --n")))
    }

    pub fn mass_family(&self) -> Result<MassFamily, PdmError> {
        match self.family {
            FamilyArg::Singular0 => MassFamily::singular0(self.x0, self.lambda),
            FamilyArg::SingularN => MassFamily::singular_n(self.need_n("singular-n")?, self.x0, self.lambda),
            FamilyArg::Regular => MassFamily::regular(self.lambda),
            FamilyArg::RationalW => MassFamily::rational_w(
                self.w
                    .ok_or_else(|| PdmError::InvalidParameter("rational-w needs --w".into()))?,
            ),
            FamilyArg::QuadraticC => MassFamily::quadratic_c(
                self.c
                    .ok_or_else(|| PdmError::InvalidParameter("quadratic-c needs --c".into()))?,
            ),
            FamilyArg::Constant => MassFamily::constant(self.m0),
        }
    }

    pub fn potential_arg(&self) -> PotentialArg {
        self.potential.unwrap_or(match self.command {
            Command::WkbCompare => PotentialArg::Sinh2,
            _ => PotentialArg::Harmonic,
        })
    }

    /// The potential named by `--potential`, with `--x0`, `--lambda`, `--n`.
    pub fn potential_spec(&self) -> Result<PotentialSpec, PdmError> {
        let (x0, l) = (self.x0, self.lambda);
        match self.potential_arg() {
            PotentialArg::Harmonic => Ok(PotentialSpec::harmonic()),
            PotentialArg::Squeezed => PotentialSpec::squeezed(x0, l),
            PotentialArg::Sinh2 => PotentialSpec::sinh2(l),
            PotentialArg::PowerLaw => PotentialSpec::power_law(self.need_n("power-law")?, x0, l),
            PotentialArg::Log2 => PotentialSpec::log2(x0, l),
            PotentialArg::OddRoot => PotentialSpec::odd_root(self.need_n("odd-root")?, x0, l),
            PotentialArg::ArcsinhSq => PotentialSpec::arcsinh_sq(l),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            grid_points: self.grid_points,
            ymax_margin: self.ymax_margin,
            ..SolverConfig::default()
        }
    }

    pub fn z_value(&self) -> Result<Complex64, PdmError> {
        let [re, im] = self
            .z
            .ok_or_else(|| PdmError::InvalidParameter("coherent needs --z re,im".into()))?;
        Ok(Complex64::new(re, im))
    }
}

pub fn parse_z(s: &str) -> anyhow::Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Ok([re.parse()?, 0.0]),
        [re, im] => Ok([re.parse()?, im.parse()?]),
        _ => anyhow::bail!("--z expects re,im, got {s:?}"),
    }
}

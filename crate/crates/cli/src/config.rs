//! Run configuration: a TOML file merged with command-line flags.

use std::fmt;
use std::path::PathBuf;

use eks_core::hypothesis::SampleSpec;
use eks_core::pair::PairConfig;
use eks_core::radial::{GridSpec, Spacing};
use eks_core::scf::{Mixing, ScfConfig};
use eks_core::xc::{Functional, FUNCTIONAL_IDS};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    CheckXc,
    SolveAtom,
    SolveInfinity,
    ScanLambda,
    SolveTwoElectron,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::CheckXc => "check-xc",
            Subcommand::SolveAtom => "solve-atom",
            Subcommand::SolveInfinity => "solve-infinity",
            Subcommand::ScanLambda => "scan-lambda",
            Subcommand::SolveTwoElectron => "solve-two-electron",
            Subcommand::Verify => "verify",
        }
    }
}

/// A configuration problem, optionally located in the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Self { key: Some(key.into()), line, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, self.line) {
            (Some(k), Some(l)) => write!(f, "config error at line {l}, key `{k}`: {}", self.message),
            (Some(k), None) => write!(f, "config error, key `{k}`: {}", self.message),
            _ => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    functional: Option<Spanned<String>>,
    #[serde(rename = "Z", alias = "z")]
    z: Option<Spanned<i64>>,
    lambda: Option<Spanned<f64>>,
    lambdas: Option<Spanned<Vec<f64>>>,
    grid: Option<GridSection>,
    scf: Option<ScfSection>,
    pair: Option<PairSection>,
    sample: Option<SampleSection>,
    output: Option<OutputSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    r_min: Option<Spanned<f64>>,
    r_max: Option<Spanned<f64>>,
    n: Option<Spanned<i64>>,
    spacing: Option<Spanned<Spacing>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScfSection {
    l_max: Option<Spanned<i64>>,
    shells_per_channel: Option<Spanned<i64>>,
    tol_density: Option<Spanned<f64>>,
    tol_energy: Option<Spanned<f64>>,
    tol_deg: Option<Spanned<f64>>,
    max_iter: Option<Spanned<i64>>,
    mixing: Option<Spanned<String>>,
    beta: Option<Spanned<f64>>,
    depth: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairSection {
    beta: Option<Spanned<f64>>,
    tol_residual: Option<Spanned<f64>>,
    tol_energy: Option<Spanned<f64>>,
    max_iter: Option<Spanned<i64>>,
    include_hartree: Option<Spanned<bool>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSection {
    rho_min: Option<Spanned<f64>>,
    rho_max: Option<Spanned<f64>>,
    n_rho: Option<Spanned<i64>>,
    kappa_min: Option<Spanned<f64>>,
    kappa_max: Option<Spanned<f64>>,
    n_kappa: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    out: Option<Spanned<String>>,
    dump_orbitals: Option<Spanned<bool>>,
}

/// Values given on the command line; each one overrides the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub functional: Option<String>,
    pub z: Option<i64>,
    pub lambda: Option<f64>,
    pub grid_n: Option<usize>,
    pub rmax: Option<f64>,
    pub tol_density: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub dump_orbitals: bool,
}

/// Fully resolved and validated settings, echoed into every output document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub functional: String,
    #[serde(rename = "Z")]
    pub z: u32,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub grid: GridSpec,
    pub scf: ScfConfig,
    pub pair: PairConfig,
    pub sample: SampleSpec,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub out: PathBuf,
    pub dump_orbitals: bool,
}

pub const MAX_LAMBDA: f64 = 8.0;

pub fn default_lambdas() -> Vec<f64> {
    (1..=8).map(|k| 0.25 * k as f64).collect()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Turns a TOML error into a located diagnostic.
fn toml_error(text: &str, e: toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| line_of(text, s.start));
    let message = e.message().to_string();
    let key = message
        .split('`')
        .nth(1)
        .filter(|_| message.starts_with("unknown field"))
        .map(str::to_string)
        .or_else(|| e.span().map(|s| key_at(text, s.start)))
        .filter(|k| !k.is_empty());
    ConfigError { key, line, message }
}

/// The bare key on the line containing `offset`, if it is a `key = value` line.
fn key_at(text: &str, offset: usize) -> String {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next().unwrap_or("");
    line.split_once('=').map(|(k, _)| k.trim().to_string()).unwrap_or_default()
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err<T>(&self, key: &str, v: &Spanned<T>, msg: impl Into<String>) -> ConfigError {
        ConfigError::new(key, Some(line_of(self.text, v.span().start)), msg)
    }

    fn positive(&self, key: &str, v: &Option<Spanned<f64>>) -> Result<Option<f64>, ConfigError> {
        match v {
            Some(s) if !(*s.get_ref() > 0.0 && s.get_ref().is_finite()) => {
                Err(self.err(key, s, format!("must be positive and finite, got {}", s.get_ref())))
            }
            Some(s) => Ok(Some(*s.get_ref())),
            None => Ok(None),
        }
    }

    fn count(&self, key: &str, v: &Option<Spanned<i64>>, min: i64) -> Result<Option<usize>, ConfigError> {
        match v {
            Some(s) if *s.get_ref() < min => {
                Err(self.err(key, s, format!("must be at least {min}, got {}", s.get_ref())))
            }
            Some(s) => Ok(Some(*s.get_ref() as usize)),
            None => Ok(None),
        }
    }
}

fn check_functional(id: &str) -> Result<Functional, String> {
    Functional::from_id(id).map_err(|_| format!("unknown functional `{id}`; known: {}", FUNCTIONAL_IDS.join(", ")))
}

fn check_lambda(lambda: f64) -> Result<(), String> {
    if lambda > 0.0 && lambda <= MAX_LAMBDA {
        Ok(())
    } else {
        Err(format!("must satisfy 0 < lambda <= {MAX_LAMBDA}, got {lambda}"))
    }
}

/// Parses `text` (possibly empty), applies `flags`, and validates the result.
pub fn parse_config(subcommand: Subcommand, text: &str, flags: &Overrides) -> Result<RunConfig, ConfigError> {
    let file: FileConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let cx = Ctx { text };
    let grid_s = file.grid.unwrap_or_default();
    let scf_s = file.scf.unwrap_or_default();
    let pair_s = file.pair.unwrap_or_default();
    let sample_s = file.sample.unwrap_or_default();
    let out_s = file.output.unwrap_or_default();

    let default_functional = match subcommand {
        Subcommand::SolveTwoElectron => "pbe",
        _ => "lda-x+pz81",
    };
    let functional_id = match (&flags.functional, &file.functional) {
        (Some(f), _) => {
            check_functional(f).map_err(|m| ConfigError::new("functional", None, m))?;
            f.clone()
        }
        (None, Some(s)) => {
            check_functional(s.get_ref()).map_err(|m| cx.err("functional", s, m))?;
            s.get_ref().clone()
        }
        (None, None) => default_functional.to_string(),
    };
    let functional = Functional::from_id(&functional_id).expect("checked above");

    let z = match (flags.z, &file.z) {
        (Some(z), _) if z < 1 => {
            return Err(ConfigError::new("Z", None, format!("must be a positive integer, got {z}")))
        }
        (Some(z), _) => z,
        (None, Some(s)) if *s.get_ref() < 1 => {
            return Err(cx.err("Z", s, format!("must be a positive integer, got {}", s.get_ref())))
        }
        (None, Some(s)) => *s.get_ref(),
        (None, None) => 2,
    };
    let z = u32::try_from(z).map_err(|_| ConfigError::new("Z", None, format!("too large: {z}")))?;

    let lambda = match (flags.lambda, &file.lambda) {
        (Some(l), _) => {
            check_lambda(l).map_err(|m| ConfigError::new("lambda", None, m))?;
            l
        }
        (None, Some(s)) => {
            check_lambda(*s.get_ref()).map_err(|m| cx.err("lambda", s, m))?;
            *s.get_ref()
        }
        (None, None) => 1.0,
    };
    let lambdas = match &file.lambdas {
        Some(s) => {
            if s.get_ref().is_empty() {
                return Err(cx.err("lambdas", s, "must not be empty"));
            }
            for &l in s.get_ref() {
                check_lambda(l).map_err(|m| cx.err("lambdas", s, m))?;
            }
            s.get_ref().clone()
        }
        None => default_lambdas(),
    };

    let mut grid = GridSpec::default();
    if let Some(v) = cx.positive("grid.r_min", &grid_s.r_min)? {
        grid.r_min = v;
    }
    if let Some(v) = cx.positive("grid.r_max", &grid_s.r_max)? {
        grid.r_max = v;
    }
    if let Some(v) = cx.count("grid.n", &grid_s.n, 16)? {
        grid.n = v;
    }
    if let Some(s) = grid_s.spacing {
        grid.spacing = s.into_inner();
    }
    if let Some(v) = flags.rmax {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::new("rmax", None, format!("must be positive, got {v}")));
        }
        grid.r_max = v;
    }
    if let Some(n) = flags.grid_n {
        if n < 16 {
            return Err(ConfigError::new("grid-n", None, format!("must be at least 16, got {n}")));
        }
        grid.n = n;
    }
    grid.build().map_err(|e| ConfigError::new("grid", None, e.to_string()))?;

    let mut scf = ScfConfig { functional, z: z as f64, lambda, ..ScfConfig::default() };
    if let Some(v) = cx.count("scf.l_max", &scf_s.l_max, 0)? {
        scf.l_max = v;
    }
    if let Some(v) = cx.count("scf.shells_per_channel", &scf_s.shells_per_channel, 1)? {
        scf.shells_per_channel = v;
    }
    if let Some(v) = cx.positive("scf.tol_density", &scf_s.tol_density)? {
        scf.tol_density = v;
    }
    if let Some(v) = cx.positive("scf.tol_energy", &scf_s.tol_energy)? {
        scf.tol_energy = v;
    }
    if let Some(v) = cx.positive("scf.tol_deg", &scf_s.tol_deg)? {
        scf.tol_deg = v;
    }
    if let Some(v) = cx.count("scf.max_iter", &scf_s.max_iter, 1)? {
        scf.max_iter = v;
    }
    let beta = match &scf_s.beta {
        Some(s) if !(*s.get_ref() > 0.0 && *s.get_ref() <= 1.0) => {
            return Err(cx.err("scf.beta", s, format!("must satisfy 0 < beta <= 1, got {}", s.get_ref())))
        }
        Some(s) => *s.get_ref(),
        None => scf.mixing.beta(),
    };
    let depth = cx.count("scf.depth", &scf_s.depth, 1)?.unwrap_or(6);
    scf.mixing = match scf_s.mixing.as_ref().map(|s| (s.get_ref().as_str(), s)) {
        None | Some(("simple", _)) if scf_s.depth.is_none() => Mixing::Simple { beta },
        None | Some(("anderson", _)) => Mixing::Anderson { beta, depth },
        Some(("simple", s)) => return Err(cx.err("scf.mixing", s, "`depth` only applies to anderson mixing")),
        Some((other, s)) => {
            return Err(cx.err("scf.mixing", s, format!("expected \"simple\" or \"anderson\", got \"{other}\"")))
        }
    };
    if let Some(v) = flags.tol_density {
        if v.is_nan() || v <= 0.0 {
            return Err(ConfigError::new("tol-density", None, format!("must be positive, got {v}")));
        }
        scf.tol_density = v;
    }

    let mut pair = PairConfig { functional, z: z as f64, ..PairConfig::default() };
    if let Some(s) = &pair_s.beta {
        if !(*s.get_ref() > 0.0 && *s.get_ref() <= 1.0) {
            return Err(cx.err("pair.beta", s, format!("must satisfy 0 < beta <= 1, got {}", s.get_ref())));
        }
        pair.beta = *s.get_ref();
    }
    if let Some(v) = cx.positive("pair.tol_residual", &pair_s.tol_residual)? {
        pair.tol_residual = v;
    }
    if let Some(v) = cx.positive("pair.tol_energy", &pair_s.tol_energy)? {
        pair.tol_energy = v;
    }
    if let Some(v) = cx.count("pair.max_iter", &pair_s.max_iter, 1)? {
        pair.max_iter = v;
    }
    if let Some(s) = pair_s.include_hartree {
        pair.include_hartree = s.into_inner();
    }

    let mut sample = SampleSpec::default();
    if let Some(v) = cx.positive("sample.rho_min", &sample_s.rho_min)? {
        sample.rho_min = v;
    }
    if let Some(v) = cx.positive("sample.rho_max", &sample_s.rho_max)? {
        sample.rho_max = v;
    }
    if let Some(v) = cx.count("sample.n_rho", &sample_s.n_rho, 64)? {
        sample.n_rho = v;
    }
    if let Some(v) = cx.positive("sample.kappa_min", &sample_s.kappa_min)? {
        sample.kappa_min = v;
    }
    if let Some(v) = cx.positive("sample.kappa_max", &sample_s.kappa_max)? {
        sample.kappa_max = v;
    }
    if let Some(v) = cx.count("sample.n_kappa", &sample_s.n_kappa, 64)? {
        sample.n_kappa = v;
    }
    sample.validate().map_err(|e| ConfigError::new("sample", None, e.to_string()))?;

    match subcommand {
        Subcommand::SolveAtom | Subcommand::SolveInfinity | Subcommand::ScanLambda => {
            if functional.is_gga() {
                return Err(ConfigError::new(
                    "functional",
                    None,
                    format!("`{functional_id}` is a gradient functional; {} needs a local one", subcommand.name()),
                ));
            }
            scf.validate().map_err(|e| ConfigError::new("scf", None, e.to_string()))?;
        }
        Subcommand::SolveTwoElectron => {
            pair.validate().map_err(|e| ConfigError::new("pair", None, e.to_string()))?;
        }
        Subcommand::CheckXc | Subcommand::Verify => {}
    }

    let out = match (&flags.out, &out_s.out) {
        (Some(p), _) => p.clone(),
        (None, Some(s)) => PathBuf::from(s.get_ref()),
        (None, None) => PathBuf::from(format!("{}.json", subcommand.name())),
    };
    let dump_orbitals = flags.dump_orbitals || out_s.dump_orbitals.is_some_and(|s| *s.get_ref());

    Ok(RunConfig {
        subcommand,
        functional: functional_id,
        z,
        lambda,
        lambdas,
        grid,
        scf,
        pair,
        sample,
        jobs: flags.jobs.unwrap_or(0),
        out,
        dump_orbitals,
    })
}

//! Result documents, dumps and the printed summary.

use std::path::{Path, PathBuf};

use eks_core::diagnostics::{DecayFit, EstimateReport, LambdaTableReport};
use eks_core::hypothesis::ConditionReport;
use eks_core::pair::PairState;
use eks_core::radial::io::{write_atomic, write_two_column};
use eks_core::radial::RadialGrid;
use eks_core::scf::{density_from_state, DensityOperatorState, LambdaPoint, LambdaRow, ScfResult};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    #[serde(rename = "eks-core")]
    pub core: String,
    #[serde(rename = "eks-cli")]
    pub cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Self { core: eks_core::VERSION.into(), cli: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub schema_version: u32,
    pub versions: Versions,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub result: ResultBody,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum ResultBody {
    CheckXc(Box<ConditionReport>),
    SolveAtom(Box<ScfResult>),
    SolveInfinity(Box<ScfResult>),
    ScanLambda(ScanOutput),
    SolveTwoElectron(Box<PairOutput>),
    Verify(VerifyOutput),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutput {
    pub rows: Vec<LambdaRow>,
    /// Both runs per trace, keeping only the occupied shells.
    pub points: Vec<LambdaPoint>,
    pub table: Option<LambdaTableReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutput {
    pub state: PairState,
    pub decay: Option<DecayFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEstimate {
    pub label: String,
    pub report: EstimateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub source: PathBuf,
    pub source_kind: String,
    pub grid_mismatch: bool,
    pub estimates: Vec<NamedEstimate>,
    pub lambda_table: Option<LambdaTableReport>,
    pub decay: Option<DecayFit>,
    /// Replayed verdict of a stored hypothesis report.
    pub conditions_pass: Option<bool>,
    pub all_pass: bool,
}

/// Drops unoccupied shells.
pub fn compact(state: &DensityOperatorState) -> DensityOperatorState {
    DensityOperatorState { shells: state.occupied().cloned().collect(), ..state.clone() }
}

/// Serialises to pretty JSON and writes atomically.
pub fn write_document(path: &Path, doc: &Document) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(doc).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "eks".into());
    out.with_file_name(format!("{stem}.{suffix}.dat"))
}

fn header(config: &RunConfig, grid: &RadialGrid, what: &str) -> Vec<String> {
    let g = grid.spec();
    vec![
        format!("{what}"),
        format!(
            "functional = {}, Z = {}, lambda = {}, grid = {:?} [{:e}, {}] n = {}",
            config.functional, config.z, config.lambda, g.spacing, g.r_min, g.r_max, g.n
        ),
        "columns: r value".into(),
    ]
}

const L_NAMES: &[u8] = b"spdfghik";

fn shell_label(n: usize, l: usize) -> String {
    let c = L_NAMES.get(l).map_or_else(|| format!("l{l}"), |&b| (b as char).to_string());
    format!("{n}{c}")
}

/// Writes the density and every occupied reduced orbital `u = r phi`.
pub fn dump_state(
    config: &RunConfig,
    grid: &RadialGrid,
    state: &DensityOperatorState,
) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let rho = density_from_state(grid, state).rho;
    let p = sibling(&config.out, "density");
    write_two_column(&p, &header(config, grid, "electron density rho(r)"), grid.r(), &rho)?;
    written.push(p);
    for s in state.occupied() {
        let label = shell_label(s.n, s.l);
        let p = sibling(&config.out, &format!("orbital-{label}"));
        let what = format!("reduced orbital u = r phi, shell {label}, occupation {}", s.occupation);
        write_two_column(&p, &header(config, grid, &what), grid.r(), &s.u)?;
        written.push(p);
    }
    Ok(written)
}

/// `x` to ten significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..10).contains(&mag) {
        format!("{x:.*}", (9 - mag).max(0) as usize)
    } else {
        format!("{x:.9e}")
    }
}

pub fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

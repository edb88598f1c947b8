//! Executable checks of the structural estimates on solver output: the
//! kinetic and nuclear bounds, the shape of `lambda -> I_lambda`, decay
//! rates, and the charge regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::{orbital_fields, PairState};
use crate::radial::{dirichlet_form, hartree_energy, hartree_potential, radial_derivative, RadialGrid};
use crate::scf::{density_from_state, state_energies, DensityOperatorState, LambdaRow, ScfResult};
use crate::xc::{kappa_from_gradient, Functional};

/// Whether `(Z, lambda)` lies in the neutral-or-cationic regime `Z >= 2 lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub inside_theorem_regime: bool,
    pub anion_warning: bool,
}

pub fn regime_flags(z: f64, lambda: f64) -> RegimeFlags {
    let inside = z >= 2.0 * lambda;
    RegimeFlags { inside_theorem_regime: inside, anion_warning: !inside }
}

/// Absolute slack on inequality margins.
pub const TOL_INEQ: f64 = 1e-8;
/// Relative tolerance on the rank-one kinetic equality.
pub const TOL_RANK_ONE: f64 = 1e-10;

/// `lhs <= rhs` up to [`TOL_INEQ`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub pass: bool,
}

impl Inequality {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, margin: rhs - lhs, pass: lhs <= rhs + TOL_INEQ }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equality {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub inequalities: Vec<Inequality>,
    /// Present for rank-one states, where the kinetic bound is an equality.
    pub rank_one_equality: Option<Equality>,
    pub z: f64,
    pub trace: f64,
    pub kinetic: f64,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.inequalities.iter().all(|c| c.pass) && self.rank_one_equality.as_ref().is_none_or(|e| e.pass)
    }
}

/// Checks, for the state of an atom with charge `Z`,
/// * `1/2 ||grad sqrt(rho)||^2 <= Tr(-Laplacian gamma)`, with `sqrt(rho)`
///   differentiated directly rather than through the orbitals,
/// * `-4 Z (Tr gamma)^{1/2} (Tr(-Laplacian gamma))^{1/2} <= int rho V <= 0`,
/// * `J(rho) >= 0` and `E_xc(rho) <= 0`.
pub fn verify_estimates(
    grid: &RadialGrid,
    state: &DensityOperatorState,
    functional: &Functional,
    z: f64,
) -> Result<EstimateReport> {
    let rho = density_from_state(grid, state).rho;
    let lda = Functional::Lda(crate::xc::LdaFunctional::zero());
    let e = state_energies(grid, state, &lda, z, true)?;
    let exc = exchange_correlation(grid, state, &rho, functional)?;
    let trace = state.trace();
    let kinetic = e.kinetic;

    let sqrt_rho: Vec<f64> = rho.iter().map(|p| p.sqrt()).collect();
    let tvw = 0.5 * 4.0 * std::f64::consts::PI * dirichlet_form(grid, &sqrt_rho);
    let bound = -4.0 * z * (trace * kinetic).sqrt();
    let v_h = hartree_potential(grid, &rho);
    let j = hartree_energy(grid, &rho, &v_h);

    let inequalities = vec![
        Inequality::new("von_weizsacker", tvw, kinetic),
        Inequality::new("nuclear_lower_bound", bound, e.nuclear),
        Inequality::new("nuclear_nonpositive", e.nuclear, 0.0),
        Inequality::new("hartree_nonnegative", -j, 0.0),
        Inequality::new("exc_nonpositive", exc, 0.0),
    ];
    let rank_one_equality = state.is_rank_one().then(|| {
        let rel = if kinetic == 0.0 { (tvw - kinetic).abs() } else { (tvw - kinetic).abs() / kinetic.abs() };
        Equality { lhs: tvw, rhs: kinetic, relative_difference: rel, pass: rel < TOL_RANK_ONE }
    });
    Ok(EstimateReport { inequalities, rank_one_equality, z, trace, kinetic })
}

fn exchange_correlation(
    grid: &RadialGrid,
    state: &DensityOperatorState,
    rho: &[f64],
    functional: &Functional,
) -> Result<f64> {
    if functional.as_lda().is_some() {
        return crate::xc::exc_integral(functional, grid, rho, None);
    }
    // Gradient functionals use |grad phi|^2 for a single orbital and
    // 1/2 |grad sqrt(rho)|^2 otherwise; the two agree at rank one.
    let kappa: Vec<f64> = match state.occupied().collect::<Vec<_>>().as_slice() {
        [s] if state.is_rank_one() => orbital_fields(grid, &s.u).1,
        _ => {
            let d = radial_derivative(grid, rho);
            rho.iter()
                .zip(&d)
                .map(|(&p, &g)| kappa_from_gradient(p.max(0.0), g * g).map(|k| k.value))
                .collect::<Result<_>>()?
        }
    };
    crate::xc::exc_integral(functional, grid, rho, Some(&kappa))
}

pub fn verify_scf(grid: &RadialGrid, result: &ScfResult) -> Result<EstimateReport> {
    let z = if result.config.include_nuclear { result.config.z } else { 0.0 };
    verify_estimates(grid, &result.state, &result.config.functional, z)
}

pub fn verify_pair(grid: &RadialGrid, pair: &PairState) -> Result<EstimateReport> {
    verify_estimates(grid, &pair.as_state(), &pair.config.functional, pair.config.z)
}

pub const TOL_MONO: f64 = 1e-6;
pub const TOL_SUB: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    /// The smaller and the larger trace of the offending pair.
    pub mu: f64,
    pub lambda: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTrend {
    /// `p` in `|I| ~ c lambda^p` over the smallest traces.
    pub exponent: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaTableReport {
    pub rows_used: usize,
    pub warnings: Vec<String>,
    pub decreasing: bool,
    pub decreasing_infinity: bool,
    pub monotonicity_violations: Vec<PairViolation>,
    pub binding: bool,
    pub binding_violations: Vec<PairViolation>,
    pub subadditive: bool,
    pub subadditivity_violations: Vec<PairViolation>,
    pub vanishing_trend: Option<PowerTrend>,
    /// `max |I_{i+1} - I_i| / (lambda_{i+1} - lambda_i)`.
    pub lipschitz_estimate: f64,
}

impl LambdaTableReport {
    pub fn all_pass(&self) -> bool {
        self.decreasing
            && self.decreasing_infinity
            && self.binding
            && self.subadditive
            && self.vanishing_trend.as_ref().is_some_and(|t| t.pass)
    }
}

/// Structure of the table `lambda -> (I_lambda, I^inf_lambda)`:
/// (a) both columns strictly decrease, by more than [`TOL_MONO`] per step;
/// (b) `I_lambda < I^inf_lambda < 0`;
/// (c) `I_lambda <= I_mu + I^inf_{lambda - mu} + TOL_SUB` whenever
///     `mu`, `lambda` and `lambda - mu` are all in the table;
/// (d) `|I_lambda|` follows a positive power of `lambda` at the small end.
///
/// Unconverged rows are dropped with a warning.
pub fn check_lambda_table(rows: &[LambdaRow]) -> Result<LambdaTableReport> {
    if rows.len() < 4 {
        return Err(Error::Contract(format!("need at least 4 rows, got {}", rows.len())));
    }
    let mut warnings = Vec::new();
    let mut used: Vec<LambdaRow> = rows
        .iter()
        .filter(|r| {
            let ok = r.converged && r.converged_infinity;
            if !ok {
                warnings.push(format!("lambda = {} skipped: not converged", r.lambda));
            }
            ok
        })
        .copied()
        .collect();
    used.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    if used.len() < 4 {
        warnings.push(format!("only {} converged rows; checks are vacuous", used.len()));
    }

    let mut mono = Vec::new();
    let mut decreasing = used.len() >= 4;
    let mut decreasing_infinity = used.len() >= 4;
    let mut lipschitz: f64 = 0.0;
    for w in used.windows(2) {
        let (a, b) = (w[0], w[1]);
        lipschitz = lipschitz.max((b.i_lambda - a.i_lambda).abs() / (b.lambda - a.lambda));
        if b.i_lambda - a.i_lambda > -TOL_MONO {
            decreasing = false;
            mono.push(PairViolation {
                mu: a.lambda,
                lambda: b.lambda,
                detail: format!("I: {:.10} -> {:.10}", a.i_lambda, b.i_lambda),
            });
        }
        if b.i_infinity - a.i_infinity > -TOL_MONO {
            decreasing_infinity = false;
            mono.push(PairViolation {
                mu: a.lambda,
                lambda: b.lambda,
                detail: format!("I_inf: {:.10} -> {:.10}", a.i_infinity, b.i_infinity),
            });
        }
    }

    let binding_violations: Vec<PairViolation> = used
        .iter()
        .filter(|r| !(r.i_lambda < r.i_infinity && r.i_infinity < 0.0))
        .map(|r| PairViolation {
            mu: r.lambda,
            lambda: r.lambda,
            detail: format!("I = {:.10}, I_inf = {:.10}", r.i_lambda, r.i_infinity),
        })
        .collect();

    let find = |l: f64| used.iter().find(|r| (r.lambda - l).abs() <= 1e-9 * l.max(1.0));
    let mut sub = Vec::new();
    for big in &used {
        for small in used.iter().filter(|r| r.lambda < big.lambda) {
            if let Some(rest) = find(big.lambda - small.lambda) {
                let rhs = small.i_lambda + rest.i_infinity;
                if big.i_lambda > rhs + TOL_SUB {
                    sub.push(PairViolation {
                        mu: small.lambda,
                        lambda: big.lambda,
                        detail: format!("I = {:.10} > I_mu + I_inf = {:.10}", big.i_lambda, rhs),
                    });
                }
            }
        }
    }

    let vanishing_trend = power_trend(&used);
    Ok(LambdaTableReport {
        rows_used: used.len(),
        warnings,
        decreasing,
        decreasing_infinity,
        monotonicity_violations: mono,
        binding: used.len() >= 4 && binding_violations.is_empty(),
        binding_violations,
        subadditive: used.len() >= 4 && sub.is_empty(),
        subadditivity_violations: sub,
        vanishing_trend,
        lipschitz_estimate: lipschitz,
    })
}

/// Log-log slope of `|I|` over the three smallest traces.
fn power_trend(rows: &[LambdaRow]) -> Option<PowerTrend> {
    let pts: Vec<(f64, f64)> =
        rows.iter().take(3).filter(|r| r.i_lambda < 0.0).map(|r| (r.lambda.ln(), (-r.i_lambda).ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    Some(PowerTrend { exponent, pass: exponent > 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// An orbital amplitude `phi`; nodes count when `2 phi^2 / (4 pi)` is significant.
    Orbital,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma: f64,
    /// Radii of the first and last node used.
    pub fit_window: [f64; 2],
    pub n_points: usize,
    pub regression_r2: f64,
}

/// Smallest density value a decay fit will use.
pub const DECAY_FLOOR: f64 = 1e-20;

/// Fits `ln |f| = c - gamma r` on `[0.4 R, 0.8 R]`, restricted to nodes
/// where the (proxy) density exceeds [`DECAY_FLOOR`].
pub fn fit_decay(grid: &RadialGrid, values: &[f64], kind: DecayKind) -> Result<DecayFit> {
    fit_decay_in(grid, values, kind, 0.4, 0.8)
}

pub fn fit_decay_in(grid: &RadialGrid, values: &[f64], kind: DecayKind, lo: f64, hi: f64) -> Result<DecayFit> {
    if values.len() != grid.len() {
        return Err(Error::Contract(format!("{} values on a grid of {}", values.len(), grid.len())));
    }
    let (r_lo, r_hi) = (lo * grid.r_max(), hi * grid.r_max());
    let pts: Vec<(f64, f64)> = grid
        .r()
        .iter()
        .zip(values)
        .filter(|(&r, &v)| {
            let proxy = match kind {
                DecayKind::Orbital => 2.0 * v * v / (4.0 * std::f64::consts::PI),
                DecayKind::Density => v,
            };
            r >= r_lo && r <= r_hi && proxy > DECAY_FLOOR
        })
        .map(|(&r, &v)| (r, v.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::EmptyWindow(format!(
            "{} usable nodes in [{r_lo:.3}, {r_hi:.3}] above {DECAY_FLOOR:e}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayFit { gamma: -slope, fit_window: [pts[0].0, pts[pts.len() - 1].0], n_points: pts.len(), regression_r2: r2 })
}

//! Two-electron (one doubly occupied orbital) GGA ground state.
//!
//! The orbital is spherical, `phi(x) = u(r) / (r sqrt(4 pi))` with
//! `int u^2 dr = 1`, and `rho = 2 phi^2`. Since `1/2 |grad sqrt(rho)|^2 =
//! |grad phi|^2`, the gradient slot of `h` is fed `|grad phi|^2` directly.
//! The Euler equation is
//!
//! ```text
//! -1/2 div((1 + dh/dkappa) grad phi) + (V + v_H + dh/drho) phi = eps phi
//! ```
//!
//! and is solved by freezing the coefficients at the current orbital,
//! taking the lowest eigenpair, and mixing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{regime_flags, RegimeFlags};
use crate::error::{Error, Result};
use crate::radial::{
    divergence_form_operator, hartree_energy, hartree_potential, kinetic_operator, ChannelOperator, RadialGrid,
};
use crate::scf::{density_from_state, DensityOperatorState, ScfResult};
use crate::xc::{Functional, GgaFunctional, GgaPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    #[serde(with = "crate::xc::functional_id")]
    pub functional: Functional,
    pub z: f64,
    pub include_hartree: bool,
    /// Weight of the new orbital in each update.
    pub beta: f64,
    pub tol_residual: f64,
    pub tol_energy: f64,
    pub max_iter: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            functional: Functional::Gga(GgaFunctional::pbe()),
            z: 2.0,
            include_hartree: true,
            beta: 0.3,
            tol_residual: 1e-7,
            tol_energy: 1e-10,
            max_iter: 1000,
        }
    }
}

impl PairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Domain(format!("mixing beta out of range: {}", self.beta)));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::Domain(format!("Z out of range: {}", self.z)));
        }
        if !(self.tol_residual > 0.0 && self.tol_energy > 0.0) || self.max_iter == 0 {
            return Err(Error::Domain("tolerances and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PairEnergies {
    /// `int |grad phi|^2`.
    pub kinetic: f64,
    pub nuclear: f64,
    pub hartree: f64,
    pub exc: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub config: PairConfig,
    /// Reduced orbital `u = r phi_rad`, nonnegative, `int u^2 dr = 1`.
    pub u: Vec<f64>,
    /// Rayleigh quotient of the frozen operator at the final orbital.
    pub epsilon: f64,
    /// Lowest eigenvalue of the frozen operator at the final orbital.
    pub lowest_eigenvalue: f64,
    pub energies: PairEnergies,
    pub residual: f64,
    /// `1 + dh/dkappa` on the grid nodes.
    pub a_coeff: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub flags: RegimeFlags,
}

impl PairState {
    /// The equivalent density operator: one s shell with unit occupation.
    pub fn as_state(&self) -> DensityOperatorState {
        DensityOperatorState {
            shells: vec![crate::scf::Shell {
                l: 0,
                n: 1,
                eigenvalue: self.epsilon,
                occupation: 1.0,
                u: self.u.clone(),
            }],
            lambda: 1.0,
            fermi_level: self.epsilon,
        }
    }

    pub fn density(&self, grid: &RadialGrid) -> Vec<f64> {
        density_from_state(grid, &self.as_state()).rho
    }
}

/// `rho = 2 phi^2` and `kappa = |grad phi|^2` at the nodes, from centered
/// differences of `u` with `phi_rad' = (u' r - u) / r^2`.
pub fn orbital_fields(grid: &RadialGrid, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let r = grid.r();
    let n = grid.len();
    let phi: Vec<f64> = u.iter().zip(r).map(|(u, r)| u / r).collect();
    let dphi = crate::radial::radial_derivative(grid, &phi);
    let mut rho = vec![0.0; n];
    let mut kappa = vec![0.0; n];
    for i in 0..n {
        rho[i] = 2.0 * phi[i] * phi[i] / (4.0 * PI);
        kappa[i] = dphi[i] * dphi[i] / (4.0 * PI);
    }
    (rho, kappa)
}

fn check_normalised(grid: &RadialGrid, u: &[f64]) -> Result<()> {
    if u.len() != grid.len() {
        return Err(Error::Contract(format!("orbital has {} values, grid has {}", u.len(), grid.len())));
    }
    let norm = grid.integrate_dr(&u.iter().map(|x| x * x).collect::<Vec<_>>());
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Contract(format!("orbital is not normalised: int u^2 dr = {norm}")));
    }
    Ok(())
}

/// `E(phi) = int |grad phi|^2 + int rho V + J(rho) + int h(rho, |grad phi|^2)`.
pub fn pair_energy(grid: &RadialGrid, u: &[f64], config: &PairConfig) -> Result<PairEnergies> {
    check_normalised(grid, u)?;
    let h = config.functional.as_gga();
    let kin_op = kinetic_operator(grid, 0);
    Ok(energy_parts(grid, &kin_op, u, &h, config))
}

fn energy_parts(
    grid: &RadialGrid,
    kin_op: &ChannelOperator,
    u: &[f64],
    h: &GgaFunctional,
    config: &PairConfig,
) -> PairEnergies {
    let (rho, kappa) = orbital_fields(grid, u);
    let w = grid.weights();
    let kinetic = 2.0 * kin_op.expectation(u);
    let nuclear = -config.z * rho.iter().zip(grid.r()).zip(w).map(|((p, r), wi)| p / r * wi).sum::<f64>();
    let hartree = if config.include_hartree { hartree_energy(grid, &rho, &hartree_potential(grid, &rho)) } else { 0.0 };
    let exc: f64 = rho.iter().zip(&kappa).zip(w).map(|((&p, &k), wi)| wi * h.eval_raw(p, k).h).sum();
    PairEnergies { kinetic, nuclear, hartree, exc, total: kinetic + nuclear + hartree + exc }
}

/// The operator `-1/2 div(a grad) + W` with coefficients frozen at `u`.
fn frozen_operator(
    grid: &RadialGrid,
    u: &[f64],
    h: &GgaFunctional,
    config: &PairConfig,
) -> Result<(ChannelOperator, Vec<f64>)> {
    let (rho, kappa) = orbital_fields(grid, u);
    let pts: Vec<GgaPoint> = rho.iter().zip(&kappa).map(|(&p, &k)| h.eval_raw(p, k)).collect();
    let a: Vec<f64> = pts.iter().map(|p| 1.0 + p.dh_dkappa).collect();
    let v_h = if config.include_hartree { hartree_potential(grid, &rho) } else { vec![0.0; grid.len()] };
    let w: Vec<f64> =
        grid.r().iter().zip(&v_h).zip(&pts).map(|((&r, &vh), p)| -config.z / r + vh + p.dh_drho).collect();
    let op = divergence_form_operator(grid, &a, 0)?.with_potential(&w)?;
    Ok((op, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerResidual {
    pub epsilon: f64,
    pub residual: f64,
}

/// `||(A_phi - eps) phi||` with `A_phi` the operator frozen at `phi` and
/// `eps` its Rayleigh quotient.
pub fn euler_residual(grid: &RadialGrid, u: &[f64], config: &PairConfig) -> Result<EulerResidual> {
    check_normalised(grid, u)?;
    let (op, _) = frozen_operator(grid, u, &config.functional.as_gga(), config)?;
    let (epsilon, residual) = op.residual(u);
    Ok(EulerResidual { epsilon, residual })
}

fn normalise(grid: &RadialGrid, u: &mut [f64]) {
    let norm = grid.integrate_dr(&u.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
}

pub fn solve_pair(grid: &RadialGrid, config: &PairConfig) -> Result<PairState> {
    config.validate()?;
    let h = config.functional.as_gga();
    let kin_op = kinetic_operator(grid, 0);
    let zeta = (config.z - 5.0 / 16.0).max(0.5);
    let mut u: Vec<f64> = grid.r().iter().map(|&r| r * (-zeta * r).exp()).collect();
    *u.last_mut().expect("grid is nonempty") = 0.0;
    normalise(grid, &mut u);

    let mut energy_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=config.max_iter {
        iterations = iter;
        let (op, _) = frozen_operator(grid, &u, &h, config)?;
        let (_, residual) = op.residual(&u);
        let energy = energy_parts(grid, &kin_op, &u, &h, config).total;
        let delta_e = energy_history.last().map_or(f64::INFINITY, |e: &f64| (energy - e).abs());
        energy_history.push(energy);
        residual_history.push(residual);
        if residual < config.tol_residual && delta_e < config.tol_energy {
            converged = true;
            break;
        }
        if iter == config.max_iter {
            break;
        }
        let lowest = op.lowest_eigenpairs(1)?.remove(0);
        let beta = config.beta;
        for (x, y) in u.iter_mut().zip(&lowest.u) {
            *x = (1.0 - beta) * *x + beta * y.abs();
        }
        normalise(grid, &mut u);
    }

    let (op, a_coeff) = frozen_operator(grid, &u, &h, config)?;
    let (epsilon, residual) = op.residual(&u);
    let lowest_eigenvalue = op.lowest_eigenpairs(1)?[0].value;
    let energies = energy_parts(grid, &kin_op, &u, &h, config);
    Ok(PairState {
        config: *config,
        u,
        epsilon,
        lowest_eigenvalue,
        energies,
        residual,
        a_coeff,
        iterations,
        converged,
        energy_history,
        residual_history,
        flags: regime_flags(config.z, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneReport {
    /// `E_eks - E_pair`.
    pub energy_gap: f64,
    /// `||rho_pair - rho_eks||_1`.
    pub density_gap: f64,
    /// `(l, n, f)` of every occupied shell of the extended state.
    pub occupations: Vec<(usize, usize, f64)>,
    pub eks_is_rank_one: bool,
}

/// Compares a two-electron state with an extended Kohn-Sham state at unit trace.
pub fn rank_one_check(grid: &RadialGrid, pair: &PairState, eks: &ScfResult) -> Result<RankOneReport> {
    if eks.state.lambda != 1.0 {
        return Err(Error::Contract(format!("extended state has trace {}, need 1", eks.state.lambda)));
    }
    let rho_pair = pair.density(grid);
    let rho_eks = density_from_state(grid, &eks.state).rho;
    let diff: Vec<f64> = rho_pair.iter().zip(&rho_eks).map(|(a, b)| a - b).collect();
    Ok(RankOneReport {
        energy_gap: eks.energies.total - pair.energies.total,
        density_gap: grid.l1_norm(&diff),
        occupations: eks.state.occupied().map(|s| (s.l, s.n, s.occupation)).collect(),
        eks_is_rank_one: eks.state.is_rank_one(),
    })
}

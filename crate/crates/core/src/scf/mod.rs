//! Extended Kohn-Sham LDA solver on the radial grid.
//!
//! The density operator is `gamma = sum f_nl |phi_nlm><phi_nlm|` with
//! `0 <= f <= 1` and `Tr gamma = sum (2l+1) f_nl = lambda`; each spatial
//! orbital carries two electrons, so `rho = 2 sum f (2l+1)/(4 pi) (u/r)^2`.

mod aufbau;
mod mixing;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use aufbau::{aufbau_fill, Filling};
pub use mixing::Mixing;

use crate::diagnostics::{regime_flags, RegimeFlags};
use crate::error::{Error, Result};
use crate::radial::{
    hartree_energy, hartree_potential, kinetic_operator, radial_derivative, ChannelOperator, RadialGrid,
};
use crate::xc::{exc_integral, Functional, LdaFunctional};
use mixing::Mixer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub l: usize,
    /// Principal quantum number `n = l + 1 + (radial index)`.
    pub n: usize,
    pub eigenvalue: f64,
    pub occupation: f64,
    /// Reduced radial function `u = r phi` with `int u^2 dr = 1`.
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperatorState {
    pub shells: Vec<Shell>,
    pub lambda: f64,
    pub fermi_level: f64,
}

impl DensityOperatorState {
    pub fn empty(lambda: f64) -> Self {
        Self { shells: Vec::new(), lambda, fermi_level: 0.0 }
    }

    /// `sum (2l+1) f`.
    pub fn trace(&self) -> f64 {
        self.shells.iter().map(|s| (2 * s.l + 1) as f64 * s.occupation).sum()
    }

    pub fn occupied(&self) -> impl Iterator<Item = &Shell> {
        self.shells.iter().filter(|s| s.occupation > 0.0)
    }

    /// Whether one shell of weight one holds the whole (unit) trace.
    pub fn is_rank_one(&self) -> bool {
        let occ: Vec<&Shell> = self.occupied().collect();
        occ.len() == 1 && occ[0].l == 0 && occ[0].occupation == 1.0
    }
}

/// Density and its radial derivative on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub rho: Vec<f64>,
    pub grad: Vec<f64>,
}

pub fn density_from_state(grid: &RadialGrid, state: &DensityOperatorState) -> DensityField {
    let r = grid.r();
    let mut rho = vec![0.0; grid.len()];
    for s in state.occupied() {
        let c = 2.0 * s.occupation * (2 * s.l + 1) as f64 / (4.0 * PI);
        for (i, x) in rho.iter_mut().enumerate() {
            let phi = s.u[i] / r[i];
            *x += c * phi * phi;
        }
    }
    let grad = radial_derivative(grid, &rho);
    DensityField { rho, grad }
}

/// `-Z/r [include_nuclear] + v_H + g'(rho)` for a local functional.
pub fn mean_field_potential(
    grid: &RadialGrid,
    rho: &[f64],
    functional: &Functional,
    z: f64,
    include_nuclear: bool,
) -> Result<Vec<f64>> {
    let lda = local_functional(functional)?;
    if rho.len() != grid.len() {
        return Err(Error::Contract(format!("density has {} values, grid has {}", rho.len(), grid.len())));
    }
    let v_h = hartree_potential(grid, rho);
    Ok(grid
        .r()
        .iter()
        .zip(rho)
        .zip(&v_h)
        .map(|((&r, &p), &h)| {
            let nuc = if include_nuclear { -z / r } else { 0.0 };
            nuc + h + lda.eval_unchecked(p).g_prime
        })
        .collect())
}

fn local_functional(f: &Functional) -> Result<LdaFunctional> {
    f.as_lda().ok_or_else(|| {
        Error::Contract(format!("`{}` depends on the density gradient; use the two-electron solver", f.id()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Energies {
    /// `Tr(-Laplacian gamma)`.
    pub kinetic: f64,
    pub nuclear: f64,
    pub hartree: f64,
    pub exc: f64,
    pub total: f64,
}

/// Every energy term of `state`, computed from its own density.
pub fn state_energies(
    grid: &RadialGrid,
    state: &DensityOperatorState,
    functional: &Functional,
    z: f64,
    include_nuclear: bool,
) -> Result<Energies> {
    let lmax = state.shells.iter().map(|s| s.l).max().unwrap_or(0);
    let ops: Vec<ChannelOperator> = (0..=lmax).map(|l| kinetic_operator(grid, l)).collect();
    energies_with(grid, &ops, state, functional, z, include_nuclear)
}

fn energies_with(
    grid: &RadialGrid,
    ops: &[ChannelOperator],
    state: &DensityOperatorState,
    functional: &Functional,
    z: f64,
    include_nuclear: bool,
) -> Result<Energies> {
    // The kinetic operator is -Laplacian / 2 and each orbital holds two electrons.
    let kinetic: f64 =
        state.occupied().map(|s| 2.0 * (2 * s.l + 1) as f64 * s.occupation * ops[s.l].expectation(&s.u)).sum();
    let rho = density_from_state(grid, state).rho;
    let nuclear = if include_nuclear {
        -z * rho.iter().zip(grid.r()).zip(grid.weights()).map(|((p, r), w)| p / r * w).sum::<f64>()
    } else {
        0.0
    };
    let v_h = hartree_potential(grid, &rho);
    let hartree = hartree_energy(grid, &rho, &v_h);
    let exc = exc_integral(&Functional::Lda(local_functional(functional)?), grid, &rho, None)?;
    Ok(Energies { kinetic, nuclear, hartree, exc, total: kinetic + nuclear + hartree + exc })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScfConfig {
    #[serde(with = "crate::xc::functional_id")]
    pub functional: Functional,
    pub z: f64,
    pub lambda: f64,
    pub l_max: usize,
    pub shells_per_channel: usize,
    pub mixing: Mixing,
    pub tol_density: f64,
    pub tol_energy: f64,
    pub max_iter: usize,
    /// `false` selects the problem at infinity.
    pub include_nuclear: bool,
    pub tol_deg: f64,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            functional: Functional::Lda(LdaFunctional::dirac_pz81()),
            z: 2.0,
            lambda: 1.0,
            l_max: 2,
            shells_per_channel: 5,
            mixing: Mixing::default(),
            tol_density: 1e-8,
            tol_energy: 1e-10,
            max_iter: 500,
            include_nuclear: true,
            tol_deg: 1e-6,
        }
    }
}

impl ScfConfig {
    pub fn validate(&self) -> Result<()> {
        local_functional(&self.functional)?;
        let beta = self.mixing.beta();
        let bad = |what: &str, v: f64| Err(Error::Domain(format!("{what} out of range: {v}")));
        if !(beta > 0.0 && beta <= 1.0) {
            return bad("mixing beta (need 0 < beta <= 1)", beta);
        }
        if let Mixing::Anderson { depth: 0, .. } = self.mixing {
            return bad("anderson depth", 0.0);
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda);
        }
        if !(self.z >= 0.0 && self.z.is_finite()) {
            return bad("Z", self.z);
        }
        for (name, v) in [("tol_density", self.tol_density), ("tol_energy", self.tol_energy), ("tol_deg", self.tol_deg)]
        {
            if !(v > 0.0) {
                return bad(name, v);
            }
        }
        if self.shells_per_channel == 0 || self.max_iter == 0 {
            return Err(Error::Domain("shells_per_channel and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScfFlags {
    #[serde(flatten)]
    pub regime: RegimeFlags,
    /// Problem at infinity with `E_xc = 0`: nothing binds the density, which
    /// spreads to the box edge.
    pub no_binding_without_xc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfResult {
    pub config: ScfConfig,
    pub state: DensityOperatorState,
    pub energies: Energies,
    pub iterations: usize,
    pub converged: bool,
    /// `||rho_out - rho_in||_1` per iteration.
    pub residual_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub flags: ScfFlags,
}

impl ScfResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Normalised exponential `2 lambda zeta^3 / pi e^{-2 zeta r}` as a starting density.
fn initial_density(grid: &RadialGrid, config: &ScfConfig) -> Vec<f64> {
    let zeta = if config.include_nuclear { config.z.max(0.5) } else { 0.5 };
    let raw: Vec<f64> = grid.r().iter().map(|&r| (-2.0 * zeta * r).exp()).collect();
    let norm = grid.integrate(&raw);
    raw.iter().map(|x| x * 2.0 * config.lambda / norm).collect()
}

/// Builds the Aufbau state of the mean field generated by `rho`.
fn aufbau_state(
    grid: &RadialGrid,
    ops: &[ChannelOperator],
    rho: &[f64],
    config: &ScfConfig,
) -> Result<DensityOperatorState> {
    let v = mean_field_potential(grid, rho, &config.functional, config.z, config.include_nuclear)?;
    let k = config.shells_per_channel;
    let pairs: Vec<_> =
        ops.par_iter().map(|op| op.with_potential(&v)?.lowest_eigenpairs(k)).collect::<Result<Vec<_>>>()?;
    let eigvals: Vec<Vec<f64>> = pairs.iter().map(|p| p.iter().map(|e| e.value).collect()).collect();
    let filling = aufbau_fill(&eigvals, config.lambda, config.tol_deg).map_err(|e| match e {
        Error::InsufficientShells { .. } => Error::Contract(format!("{e}; increase l_max or shells_per_channel")),
        other => other,
    })?;
    let mut shells = Vec::new();
    for (l, channel) in pairs.into_iter().enumerate() {
        for (k, pair) in channel.into_iter().enumerate() {
            shells.push(Shell {
                l,
                n: l + 1 + k,
                eigenvalue: pair.value,
                occupation: filling.occupations[l][k],
                u: pair.u,
            });
        }
    }
    Ok(DensityOperatorState { shells, lambda: config.lambda, fermi_level: filling.fermi_level })
}

/// Self-consistent field iteration for the Aufbau fixed point.
pub fn run_scf(grid: &RadialGrid, config: &ScfConfig) -> Result<ScfResult> {
    config.validate()?;
    let ops: Vec<ChannelOperator> = (0..=config.l_max).map(|l| kinetic_operator(grid, l)).collect();
    let mut mixer = Mixer::new(config.mixing, grid.weights());
    let mut rho_in = initial_density(grid, config);
    let mut residual_history = Vec::new();
    let mut energy_history = Vec::new();
    let mut converged = false;
    let mut last = None;

    for iter in 1..=config.max_iter {
        let state = aufbau_state(grid, &ops, &rho_in, config)?;
        let rho_out = density_from_state(grid, &state).rho;
        let energies = energies_with(grid, &ops, &state, &config.functional, config.z, config.include_nuclear)?;
        let residual: f64 = rho_out.iter().zip(&rho_in).zip(grid.weights()).map(|((a, b), w)| (a - b).abs() * w).sum();
        let delta_e = energy_history.last().map_or(f64::INFINITY, |e: &f64| (energies.total - e).abs());
        residual_history.push(residual);
        energy_history.push(energies.total);
        last = Some((state, energies, iter));
        if residual < config.tol_density && delta_e < config.tol_energy {
            converged = true;
            break;
        }
        rho_in = mixer.next(&rho_in, &rho_out);
    }

    let (state, energies, iterations) = last.expect("max_iter >= 1");
    let no_xc = match config.functional.as_lda() {
        Some(l) => l.is_zero(),
        None => false,
    };
    Ok(ScfResult {
        config: *config,
        state,
        energies,
        iterations,
        converged,
        residual_history,
        energy_history,
        flags: ScfFlags {
            regime: regime_flags(config.z, config.lambda),
            no_binding_without_xc: no_xc && !config.include_nuclear,
        },
    })
}

/// The same minimisation without the nuclear attraction.
pub fn solve_at_infinity(grid: &RadialGrid, config: &ScfConfig) -> Result<ScfResult> {
    run_scf(grid, &ScfConfig { include_nuclear: false, ..*config })
}

/// One row of a lambda scan with both underlying runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub atom: ScfResult,
    pub infinity: ScfResult,
}

impl LambdaPoint {
    pub fn row(&self) -> LambdaRow {
        LambdaRow {
            lambda: self.lambda,
            i_lambda: self.atom.energies.total,
            i_infinity: self.infinity.energies.total,
            converged: self.atom.converged,
            converged_infinity: self.infinity.converged,
        }
    }
}

/// `(lambda, I_lambda, I^inf_lambda)` with convergence flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub i_lambda: f64,
    pub i_infinity: f64,
    pub converged: bool,
    pub converged_infinity: bool,
}

/// Runs the atom and the problem at infinity for every `lambda`, in parallel
/// on the current rayon pool. Rows keep the input order.
pub fn scan_lambda(grid: &RadialGrid, base: &ScfConfig, lambdas: &[f64]) -> Result<Vec<LambdaPoint>> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let config = ScfConfig { lambda, ..*base };
            let (atom, infinity) = rayon::join(|| run_scf(grid, &config), || solve_at_infinity(grid, &config));
            Ok(LambdaPoint { lambda, atom: atom?, infinity: infinity? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{build_grid, GridSpec, Spacing};

    fn hydrogen_1s(grid: &RadialGrid, z: f64) -> Vec<f64> {
        grid.r().iter().map(|&r| 2.0 * z.powf(1.5) * r * (-z * r).exp()).collect()
    }

    fn shell(l: usize, f: f64, u: Vec<f64>) -> Shell {
        Shell { l, n: l + 1, eigenvalue: -1.0, occupation: f, u }
    }

    #[test]
    fn density_counts_two_electrons_per_orbital() {
        let g = GridSpec::default().build().unwrap();
        let mut st = DensityOperatorState::empty(1.0);
        st.shells.push(shell(0, 1.0, hydrogen_1s(&g, 1.0)));
        let rho = density_from_state(&g, &st).rho;
        assert!((g.integrate(&rho) - 2.0).abs() < 1e-8);

        let u2s: Vec<f64> = g.r().iter().map(|&r| r * (2.0 - r) * (-r / 2.0).exp() / (2.0 * 2f64.sqrt())).collect();
        st.shells.push(Shell { n: 2, ..shell(0, 0.5, u2s) });
        let rho = density_from_state(&g, &st).rho;
        assert!((g.integrate(&rho) - 3.0).abs() < 1e-7);
    }

    #[test]
    fn empty_state_has_no_density() {
        let g = build_grid(1e-5, 20.0, 200, Spacing::Log).unwrap();
        let d = density_from_state(&g, &DensityOperatorState::empty(0.0));
        assert!(d.rho.iter().chain(&d.grad).all(|&x| x == 0.0));
    }

    #[test]
    fn bare_nucleus_potential() {
        let g = build_grid(1e-5, 20.0, 200, Spacing::Log).unwrap();
        let f = Functional::from_id("lda-x").unwrap();
        let v = mean_field_potential(&g, &vec![0.0; g.len()], &f, 2.0, true).unwrap();
        for (vi, r) in v.iter().zip(g.r()) {
            assert!((vi + 2.0 / r).abs() < 1e-12 * (2.0 / r));
        }
    }

    #[test]
    fn potential_without_nucleus() {
        let g = GridSpec::default().build().unwrap();
        let rho: Vec<f64> = g.r().iter().map(|&r| 2.0 * (-2.0 * r).exp() / PI).collect();
        let f = Functional::from_id("none").unwrap();
        let v = mean_field_potential(&g, &rho, &f, 0.0, false).unwrap();
        let vh = hartree_potential(&g, &rho);
        assert_eq!(v, vh);
        let x = Functional::from_id("lda-x").unwrap();
        let one = build_grid(0.5, 2.0, 64, Spacing::Linear).unwrap();
        let flat = vec![1.0; one.len()];
        let with = mean_field_potential(&one, &flat, &x, 0.0, false).unwrap();
        let without = mean_field_potential(&one, &flat, &Functional::from_id("none").unwrap(), 0.0, false).unwrap();
        for (a, b) in with.iter().zip(&without) {
            assert!((a - b + 0.984745).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_functionals_are_rejected() {
        let g = build_grid(1e-5, 20.0, 200, Spacing::Log).unwrap();
        let f = Functional::from_id("pbe").unwrap();
        assert!(matches!(mean_field_potential(&g, &vec![0.0; g.len()], &f, 2.0, true), Err(Error::Contract(_))));
        let cfg = ScfConfig { functional: f, ..Default::default() };
        assert!(run_scf(&g, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ScfConfig::default().validate().is_ok());
        let bad = [
            ScfConfig { lambda: -1.0, ..Default::default() },
            ScfConfig { mixing: Mixing::Simple { beta: 0.0 }, ..Default::default() },
            ScfConfig { mixing: Mixing::Simple { beta: 1.5 }, ..Default::default() },
            ScfConfig { tol_density: 0.0, ..Default::default() },
            ScfConfig { max_iter: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn reduced_hartree_energy_identity() {
        // One doubly occupied orbital with E_xc = 0: E = 2 eps - J.
        let g = GridSpec::default().build().unwrap();
        let cfg =
            ScfConfig { functional: Functional::from_id("none").unwrap(), z: 2.0, lambda: 1.0, ..Default::default() };
        let res = run_scf(&g, &cfg).unwrap();
        assert!(res.converged);
        let e = &res.energies;
        let eps = res.state.fermi_level;
        assert!((e.total - (2.0 * eps - e.hartree)).abs() < 1e-7, "{e:?} eps = {eps}");
        assert!(res.state.is_rank_one());
    }

    #[test]
    fn z1_half_trace_is_bound() {
        let g = GridSpec::default().build().unwrap();
        let cfg = ScfConfig { z: 1.0, lambda: 0.5, ..Default::default() };
        let res = run_scf(&g, &cfg).unwrap();
        assert!(res.converged);
        assert!(res.state.fermi_level < 0.0);
        assert!(res.energies.total < 0.0);
        assert!((res.state.trace() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn unconverged_runs_are_flagged() {
        let g = GridSpec::default().build().unwrap();
        let cfg = ScfConfig { max_iter: 3, ..Default::default() };
        let res = run_scf(&g, &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 3);
        assert_eq!(res.residual_history.len(), 3);
    }
}

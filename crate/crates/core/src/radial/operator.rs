//! Flux-form finite-difference operators for one angular momentum channel.
//!
//! For a radial orbital `phi` (the 3D function is `phi(r) Y_lm`) the
//! quadratic form
//!
//! ```text
//! 1/2 int a(r) (phi'^2 + l(l+1) phi^2 / r^2) r^2 dr + int v phi^2 r^2 dr
//! ```
//!
//! is discretised with midpoint fluxes on the uniform `t` mesh and the
//! trapezoidal mass `m_i = r_i^2 (dr/dt)_i dt`. The last node carries the
//! Dirichlet condition and is not an unknown. Scaling the unknowns by
//! `sqrt(m_i)` gives a symmetric tridiagonal matrix whose Euclidean
//! normalisation is `int u^2 dr = 1` for `u = r phi`.

use std::f64::consts::PI;

use super::eigen::SymTridiagonal;
use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// Smallest admissible divergence-form coefficient.
pub const ELLIPTICITY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ChannelOperator {
    l: usize,
    r: Vec<f64>,
    mass: Vec<f64>,
    flux: Vec<f64>,
    diagonal: Vec<f64>,
    matrix: SymTridiagonal,
}

/// One eigenpair; `u = r phi` on every grid node with `int u^2 dr = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub u: Vec<f64>,
}

/// `-1/2 Laplacian` restricted to angular momentum `l`.
pub fn kinetic_operator(grid: &RadialGrid, l: usize) -> ChannelOperator {
    let ones = vec![1.0; grid.len()];
    divergence_form_operator(grid, &ones, l).expect("unit coefficient is elliptic")
}

/// `-1/2 div(a grad .)` restricted to angular momentum `l`; `a` is sampled at
/// the nodes and averaged onto the interval midpoints.
pub fn divergence_form_operator(grid: &RadialGrid, a: &[f64], l: usize) -> Result<ChannelOperator> {
    let n = grid.len();
    if a.len() != n {
        return Err(Error::Contract(format!("coefficient has {} values, grid has {n}", a.len())));
    }
    if let Some(i) = a.iter().position(|&v| !(v >= ELLIPTICITY_FLOOR)) {
        return Err(Error::Ellipticity { r: grid.r()[i], value: a[i], floor: ELLIPTICITY_FLOOR });
    }
    let r = grid.r();
    let dt = grid.step();
    let m = n - 1;
    let mass: Vec<f64> = grid.weights()[..m].iter().map(|w| w / (4.0 * PI)).collect();
    let flux: Vec<f64> = (0..m)
        .map(|i| {
            let rm = grid.r_mid()[i];
            0.5 * 0.5 * (a[i] + a[i + 1]) * rm * rm / (grid.jacobian_mid()[i] * dt)
        })
        .collect();
    let ll = (l * (l + 1)) as f64;
    let diagonal: Vec<f64> = (0..m).map(|i| 0.5 * a[i] * ll / (r[i] * r[i])).collect();
    let matrix = assemble(&mass, &flux, &diagonal);
    Ok(ChannelOperator { l, r: r[..m].to_vec(), mass, flux, diagonal, matrix })
}

fn assemble(mass: &[f64], flux: &[f64], diagonal: &[f64]) -> SymTridiagonal {
    let m = mass.len();
    let diag: Vec<f64> = (0..m)
        .map(|i| {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            (left + flux[i]) / mass[i] + diagonal[i]
        })
        .collect();
    let off: Vec<f64> = (0..m - 1).map(|i| -flux[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    SymTridiagonal { diag, off }
}

impl ChannelOperator {
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of unknowns (grid nodes minus the Dirichlet node).
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    /// Adds a local potential (one value per grid node; the Dirichlet node is
    /// ignored).
    pub fn with_potential(&self, v: &[f64]) -> Result<ChannelOperator> {
        if v.len() != self.dim() + 1 {
            return Err(Error::Contract(format!("potential has {} values, expected {}", v.len(), self.dim() + 1)));
        }
        let diagonal: Vec<f64> = self.diagonal.iter().zip(v).map(|(d, p)| d + p).collect();
        let matrix = assemble(&self.mass, &self.flux, &diagonal);
        Ok(ChannelOperator { diagonal, matrix, ..self.clone() })
    }

    /// Converts a reduced function `u` on all grid nodes to scaled unknowns.
    fn scaled(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mass[i].sqrt() * u[i] / self.r[i]).collect()
    }

    fn unscaled(&self, psi: &[f64]) -> Vec<f64> {
        let mut u: Vec<f64> = (0..self.dim()).map(|i| psi[i] * self.r[i] / self.mass[i].sqrt()).collect();
        u.push(0.0);
        u
    }

    /// `int u^2 dr` in the operator's own quadrature.
    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.scaled(u).iter().map(|x| x * x).sum()
    }

    /// `<phi| A |phi>` evaluated in gradient form (no cancellation).
    pub fn expectation(&self, u: &[f64]) -> f64 {
        let phi: Vec<f64> = (0..self.dim()).map(|i| u[i] / self.r[i]).collect();
        let mut s = 0.0;
        for i in 0..self.dim() {
            let next = if i + 1 < self.dim() { phi[i + 1] } else { 0.0 };
            s += self.flux[i] * (next - phi[i]).powi(2);
            s += self.mass[i] * self.diagonal[i] * phi[i] * phi[i];
        }
        s
    }

    /// `A phi` as radial values, returned in reduced form `r (A phi)(r)`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let psi = self.scaled(u);
        self.unscaled(&self.matrix.matvec(&psi))
    }

    /// Rayleigh quotient `eps` of `u` and the norm `||(A - eps) phi||` in
    /// `L^2(r^2 dr)`, both in the operator's own quadrature.
    pub fn residual(&self, u: &[f64]) -> (f64, f64) {
        let psi = self.scaled(u);
        let norm_sq: f64 = psi.iter().map(|x| x * x).sum();
        let eps = self.expectation(u) / norm_sq;
        let a_psi = self.matrix.matvec(&psi);
        let res: f64 = a_psi.iter().zip(&psi).map(|(a, p)| (a - eps * p).powi(2)).sum();
        (eps, (res / norm_sq).sqrt())
    }

    /// The `k` lowest eigenpairs.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Vec<Eigenpair>> {
        if k == 0 || k > self.dim() / 4 {
            return Err(Error::Contract(format!("need 1 <= k <= n/4 eigenpairs, asked for {k} of {}", self.dim())));
        }
        Ok(self
            .matrix
            .lowest_eigenpairs(k)?
            .into_iter()
            .map(|(value, psi)| Eigenpair { value, u: self.unscaled(&psi) })
            .collect())
    }
}

/// Eigenpairs of `op + diag(potential)`.
pub fn lowest_eigenpairs(op: &ChannelOperator, potential: &[f64], k: usize) -> Result<Vec<Eigenpair>> {
    op.with_potential(potential)?.lowest_eigenpairs(k)
}

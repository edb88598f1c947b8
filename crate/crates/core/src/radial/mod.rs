//! Radial discretisation for single-center, spherically symmetric problems.

mod eigen;
mod grid;
mod hartree;
pub mod io;
mod operator;

pub use eigen::SymTridiagonal;
pub use grid::{build_grid, GridSpec, RadialGrid, Spacing};
pub use hartree::{hartree_energy, hartree_potential};
pub use operator::{
    divergence_form_operator, kinetic_operator, lowest_eigenpairs, ChannelOperator, Eigenpair, ELLIPTICITY_FLOOR,
};

/// Centered derivative `df/dr` on the grid, one-sided second order at both ends.
pub fn radial_derivative(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = grid.step();
    let jac = grid.jacobian();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h * jac[0]);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h * jac[i]);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h * jac[n - 1]);
    d
}

/// The discrete Dirichlet form `sum_i c_i (f_{i+1} - f_i)^2 ~ int f'^2 r^2 dr`
/// that the kinetic operator uses; `f` is a radial function on all nodes.
pub fn dirichlet_form(grid: &RadialGrid, f: &[f64]) -> f64 {
    let h = grid.step();
    (0..grid.len() - 1)
        .map(|i| {
            let rm = grid.r_mid()[i];
            rm * rm / (grid.jacobian_mid()[i] * h) * (f[i + 1] - f[i]).powi(2)
        })
        .sum()
}

use std::f64::consts::PI;

use super::grid::RadialGrid;

/// Electrostatic potential of a spherical density,
///
/// `v(r) = (1/r) int_0^r rho 4 pi s^2 ds + int_r^R rho 4 pi s ds`,
///
/// by fourth-order cumulative quadrature.
pub fn hartree_potential(grid: &RadialGrid, rho: &[f64]) -> Vec<f64> {
    let r = grid.r();
    let n = grid.len();
    let inner_integrand: Vec<f64> = (0..n).map(|i| 4.0 * PI * r[i] * r[i] * rho[i]).collect();
    let outer_integrand: Vec<f64> = (0..n).map(|i| 4.0 * PI * r[i] * rho[i]).collect();
    let inner = grid.cumulative_dr(&inner_integrand);
    let outer = grid.cumulative_dr(&outer_integrand);
    let core = 4.0 * PI * r[0].powi(3) / 3.0 * rho[0];
    let outer_total = outer[n - 1];
    (0..n).map(|i| (core + inner[i]) / r[i] + (outer_total - outer[i])).collect()
}

/// `J(rho) = 1/2 int rho v_H`.
pub fn hartree_energy(grid: &RadialGrid, rho: &[f64], v_h: &[f64]) -> f64 {
    0.5 * rho.iter().zip(v_h).zip(grid.weights()).map(|((a, b), w)| a * b * w).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::GridSpec;

    #[test]
    fn hydrogen_density_potential() {
        let g = GridSpec::default().build().unwrap();
        let rho: Vec<f64> = g.r().iter().map(|&r| (-2.0 * r).exp() / PI).collect();
        let v = hartree_potential(&g, &rho);
        for (i, &r) in g.r().iter().enumerate() {
            let exact = 1.0 / r - (-2.0 * r).exp() * (1.0 + 1.0 / r);
            assert!((v[i] - exact).abs() < 1e-6, "r = {r}: {} vs {exact}", v[i]);
        }
        // J = 5/16 for the hydrogen 1s density.
        assert!((hartree_energy(&g, &rho, &v) - 5.0 / 16.0).abs() < 1e-8);
    }

    #[test]
    fn far_field_is_total_charge() {
        let g = GridSpec::default().build().unwrap();
        let rho: Vec<f64> = g.r().iter().map(|&r| 3.0 * (-(r - 2.0).powi(2)).exp()).collect();
        let q = g.integrate(&rho);
        let v = hartree_potential(&g, &rho);
        let n = g.len();
        assert!((g.r()[n - 1] * v[n - 1] - q).abs() < 1e-6 * q);
    }

    #[test]
    fn zero_density_gives_zero_potential() {
        let g = GridSpec::default().build().unwrap();
        let v = hartree_potential(&g, &vec![0.0; g.len()]);
        assert!(v.iter().all(|&x| x == 0.0));
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

/// Parameters that fully determine a [`RadialGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_min: 1e-6, r_max: 40.0, n: 4000, spacing: Spacing::Log }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        build_grid(self.r_min, self.r_max, self.n, self.spacing)
    }
}

/// Nodes `r_i = map(t_i)` with `t` uniformly spaced; `t = ln r` for
/// logarithmic grids and `t = r` for linear ones.
///
/// Quadrature is the trapezoidal rule in `t`, which is spectrally accurate
/// for integrands that vanish smoothly at both ends.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    step: f64,
    r: Vec<f64>,
    jac: Vec<f64>,
    w: Vec<f64>,
    r_mid: Vec<f64>,
    jac_mid: Vec<f64>,
}

pub fn build_grid(r_min: f64, r_max: f64, n: usize, spacing: Spacing) -> Result<RadialGrid> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("need 0 < r_min < r_max, got r_min = {r_min}, r_max = {r_max}")));
    }
    if n < 64 {
        return Err(Error::InvalidGrid(format!("need at least 64 nodes, got {n}")));
    }
    let spec = GridSpec { r_min, r_max, n, spacing };
    let (t0, step) = match spacing {
        Spacing::Log => (r_min.ln(), (r_max / r_min).ln() / (n - 1) as f64),
        Spacing::Linear => (r_min, (r_max - r_min) / (n - 1) as f64),
    };
    let map = |t: f64| match spacing {
        Spacing::Log => (t.exp(), t.exp()),
        Spacing::Linear => (t, 1.0),
    };
    let mut r = Vec::with_capacity(n);
    let mut jac = Vec::with_capacity(n);
    for i in 0..n {
        let (ri, ji) = map(t0 + step * i as f64);
        r.push(ri);
        jac.push(ji);
    }
    r[0] = r_min;
    r[n - 1] = r_max;
    if spacing == Spacing::Log {
        jac[0] = r_min;
        jac[n - 1] = r_max;
    }
    let (r_mid, jac_mid): (Vec<f64>, Vec<f64>) = (0..n - 1).map(|i| map(t0 + step * (i as f64 + 0.5))).unzip();

    let mut w: Vec<f64> = (0..n).map(|i| 4.0 * PI * r[i] * r[i] * jac[i] * step).collect();
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    // The ball of radius r_min is attributed to the first node.
    w[0] += 4.0 * PI * r_min.powi(3) / 3.0;

    Ok(RadialGrid { spec, step, r, jac, w, r_mid, jac_mid })
}

impl RadialGrid {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// `dr/dt` at the nodes.
    pub fn jacobian(&self) -> &[f64] {
        &self.jac
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Weights for `int f(r) 4 pi r^2 dr`.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Node midpoints in `t`, one per interval.
    pub fn r_mid(&self) -> &[f64] {
        &self.r_mid
    }

    pub fn jacobian_mid(&self) -> &[f64] {
        &self.jac_mid
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    /// `int f 4 pi r^2 dr` over the whole grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(&self.w).map(|(a, b)| a * b).sum()
    }

    /// `int |f| 4 pi r^2 dr`.
    pub fn l1_norm(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.w).map(|(a, b)| a.abs() * b).sum()
    }

    /// `int f dr` (no volume element) with the trapezoidal rule in `t`.
    pub fn integrate_dr(&self, f: &[f64]) -> f64 {
        let n = self.len();
        let mut s: f64 = (1..n - 1).map(|i| f[i] * self.jac[i]).sum();
        s += 0.5 * (f[0] * self.jac[0] + f[n - 1] * self.jac[n - 1]);
        s * self.step
    }

    /// Running integral `F_i = int_{r_0}^{r_i} f dr` with fourth-order
    /// accurate piecewise-cubic panels.
    pub fn cumulative_dr(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let g: Vec<f64> = f.iter().zip(&self.jac).map(|(a, j)| a * j).collect();
        let h = self.step / 24.0;
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let panel = if i == 0 {
                9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]
            } else if i == n - 2 {
                g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]
            } else {
                -g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]
            };
            out[i + 1] = out[i] + h * panel;
        }
        out
    }

    /// `int_0^R f 4 pi r^2 dr` for any `R` inside the grid, using cubic
    /// interpolation of the integrand in `t` on the partial panel.
    pub fn ball_integral(&self, f: &[f64], radius: f64) -> Result<f64> {
        let n = self.len();
        if !(radius >= self.r[0] && radius <= self.r[n - 1]) {
            return Err(Error::Domain(format!("ball radius {radius} outside [{}, {}]", self.r[0], self.r[n - 1])));
        }
        let vol: Vec<f64> = (0..n).map(|i| 4.0 * PI * self.r[i] * self.r[i] * f[i]).collect();
        let cum = self.cumulative_dr(&vol);
        let inner = 4.0 * PI * self.r[0].powi(3) / 3.0 * f[0];
        let t = match self.spec.spacing {
            Spacing::Log => (radius / self.r[0]).ln() / self.step,
            Spacing::Linear => (radius - self.r[0]) / self.step,
        };
        let j = (t.floor() as usize).min(n - 2);
        let sigma = t - j as f64;
        if sigma <= 0.0 {
            return Ok(inner + cum[j]);
        }
        // Four consecutive nodes containing panel j.
        let start = j.saturating_sub(1).min(n - 4);
        let g: Vec<f64> = (start..start + 4).map(|k| vol[k] * self.jac[k]).collect();
        let a = (j - start) as f64;
        let partial = self.step * cubic_integral(&g, a, a + sigma);
        Ok(inner + cum[j] + partial)
    }
}

/// Integral over `[lo, hi]` of the cubic through `(0, g0) .. (3, g3)`.
fn cubic_integral(g: &[f64], lo: f64, hi: f64) -> f64 {
    let nodes = [0.0, 1.0, 2.0, 3.0];
    let mut total = 0.0;
    for k in 0..4 {
        // Lagrange basis l_k expanded into monomial coefficients.
        let others: Vec<f64> = nodes.iter().copied().filter(|&x| x != nodes[k]).collect();
        let denom: f64 = others.iter().map(|&x| nodes[k] - x).product();
        let (p, q, s) = (others[0], others[1], others[2]);
        let c3 = 1.0;
        let c2 = -(p + q + s);
        let c1 = p * q + p * s + q * s;
        let c0 = -p * q * s;
        let anti = |x: f64| c3 * x.powi(4) / 4.0 + c2 * x.powi(3) / 3.0 + c1 * x * x / 2.0 + c0 * x;
        total += g[k] * (anti(hi) - anti(lo)) / denom;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hydrogen_density(r: f64) -> f64 {
        (-2.0 * r).exp() / PI
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(build_grid(0.0, 10.0, 100, Spacing::Log).is_err());
        assert!(build_grid(2.0, 1.0, 100, Spacing::Log).is_err());
        assert!(build_grid(1e-6, 10.0, 63, Spacing::Linear).is_err());
    }

    #[test]
    fn nodes_increase_and_weights_are_positive() {
        for spacing in [Spacing::Log, Spacing::Linear] {
            let g = build_grid(1e-5, 20.0, 300, spacing).unwrap();
            assert!(g.r().windows(2).all(|w| w[1] > w[0]));
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert_eq!(g.r()[0], 1e-5);
            assert_eq!(g.r()[299], 20.0);
        }
    }

    #[test]
    fn hydrogen_density_normalisation() {
        let g = GridSpec::default().build().unwrap();
        let rho: Vec<f64> = g.r().iter().map(|&r| hydrogen_density(r)).collect();
        assert!((g.integrate(&rho) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unit_ball_volume() {
        let g = GridSpec::default().build().unwrap();
        let one = vec![1.0; g.len()];
        let v = g.ball_integral(&one, 1.0).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 3.0, max_relative = 1e-8);
        let v = g.ball_integral(&one, 7.3).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 3.0 * 7.3f64.powi(3), max_relative = 1e-8);
    }

    #[test]
    fn coarse_grids_are_within_a_thousandth() {
        let g = build_grid(1e-6, 40.0, 64, Spacing::Log).unwrap();
        let rho: Vec<f64> = g.r().iter().map(|&r| hydrogen_density(r)).collect();
        assert!((g.integrate(&rho) - 1.0).abs() < 1e-3);

        let g = build_grid(1e-6, 40.0, 64, Spacing::Linear).unwrap();
        let one = vec![1.0; g.len()];
        let v = g.ball_integral(&one, 1.0).unwrap();
        assert!((v / (4.0 * PI / 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn refinement_reduces_ball_error() {
        let err = |n| {
            let g = build_grid(1e-6, 40.0, n, Spacing::Log).unwrap();
            let v = g.ball_integral(&vec![1.0; n], 1.0).unwrap();
            (v / (4.0 * PI / 3.0) - 1.0).abs()
        };
        let (e1, e2, e3) = (err(250), err(500), err(1000));
        assert!(e2 < e1 && e3 < e2);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let g = GridSpec::default().build().unwrap();
        let f: Vec<f64> = g.r().iter().map(|&r| (-r).exp()).collect();
        let c = g.cumulative_dr(&f);
        let r0 = g.r()[0];
        for (i, &r) in g.r().iter().enumerate().step_by(97) {
            assert!((c[i] - ((-r0).exp() - (-r).exp())).abs() < 1e-10);
        }
    }
}

//! Independent reference solver for a doubly occupied 1s orbital.
//!
//! Linear grid, Numerov outward shooting with bisection on the node count,
//! Hartree potential by cumulative quadrature. Shares no code with the
//! library, only the physics.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleXc {
    None,
    Dirac,
    DiracPz81,
}

impl OracleXc {
    /// Energy density per volume and its density derivative.
    fn eval(self, rho: f64) -> (f64, f64) {
        if rho <= 0.0 {
            return (0.0, 0.0);
        }
        let (mut e, mut v) = (0.0, 0.0);
        if self != OracleXc::None {
            let cx = 0.75 * (3.0 / PI).powf(1.0 / 3.0);
            e -= cx * rho.powf(4.0 / 3.0);
            v -= (3.0 * rho / PI).powf(1.0 / 3.0);
        }
        if self == OracleXc::DiracPz81 {
            let rs = (3.0 / (4.0 * PI * rho)).powf(1.0 / 3.0);
            let (ec, dec) = if rs >= 1.0 {
                let (g, b1, b2) = (-0.1423, 1.0529, 0.3334);
                let den = 1.0 + b1 * rs.sqrt() + b2 * rs;
                (g / den, -g * (0.5 * b1 / rs.sqrt() + b2) / (den * den))
            } else {
                let (a, b, c, d) = (0.0311, -0.048, 0.0020, -0.0116);
                (a * rs.ln() + b + c * rs * rs.ln() + d * rs, a / rs + c * (rs.ln() + 1.0) + d)
            };
            e += rho * ec;
            v += ec - rs / 3.0 * dec;
        }
        (e, v)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub energy: f64,
    pub eigenvalue: f64,
    pub iterations: usize,
}

struct Line {
    h: f64,
    r: Vec<f64>,
}

impl Line {
    fn new(r_max: f64, h: f64) -> Self {
        let n = (r_max / h).round() as usize;
        Line { h, r: (0..=n).map(|i| i as f64 * h).collect() }
    }

    /// Simpson's rule over the whole grid.
    fn simpson(&self, f: &[f64]) -> f64 {
        let n = f.len() - 1;
        let mut s = f[0] + f[n];
        for (i, v) in f.iter().enumerate().take(n).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * self.h / 3.0
    }

    /// `int_0^{r_i} f` by the trapezoidal rule.
    fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for i in 1..f.len() {
            out[i] = out[i - 1] + 0.5 * self.h * (f[i - 1] + f[i]);
        }
        out
    }
}

/// Outward Numerov solution of `u'' = 2 (V - e) u`, `u(0) = 0`, `u'(0) = 1`,
/// for a potential `-z/r + w(r)` with bounded `w`. Returns the node count and `u`.
fn shoot(line: &Line, z: f64, w: &[f64], e: f64) -> (usize, Vec<f64>) {
    let h2 = line.h * line.h / 12.0;
    let n = line.r.len();
    let f = |i: usize| 2.0 * (-z / line.r[i] + w[i] - e);
    let mut u = vec![0.0; n];
    u[1] = line.h - z * line.h * line.h;
    // At r = 0, F u tends to -2 z u'(0).
    let f0u0 = -2.0 * z;
    u[2] = (2.0 * u[1] * (1.0 + 5.0 * h2 * f(1)) + h2 * f0u0) / (1.0 - h2 * f(2));
    let mut nodes = 0;
    for i in 2..n - 1 {
        u[i + 1] = (2.0 * u[i] * (1.0 + 5.0 * h2 * f(i)) - u[i - 1] * (1.0 - h2 * f(i - 1))) / (1.0 - h2 * f(i + 1));
        if u[i + 1].signum() != u[i].signum() {
            nodes += 1;
        }
        if u[i + 1].abs() > 1e200 {
            let v = u[i + 1];
            u[i + 1..].fill(v);
            break;
        }
    }
    (nodes, u)
}

/// Lowest l = 0 eigenpair by bisection: above the eigenvalue the solution has a node.
fn ground_state(line: &Line, z: f64, w: &[f64]) -> (f64, Vec<f64>) {
    let (mut lo, mut hi) = (-z * z - 10.0, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shoot(line, z, w, mid).0 > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let e = 0.5 * (lo + hi);
    let (_, mut u) = shoot(line, z, w, lo);
    // Past the turning into exponential growth the outward solution is noise;
    // cut it at the first minimum of |u| after the first maximum.
    let n = u.len();
    let peak = (1..n - 1).find(|&i| u[i].abs() >= u[i + 1].abs()).unwrap_or(n - 1);
    let cut = (peak..n - 1).find(|&i| u[i].abs() <= u[i + 1].abs()).unwrap_or(n - 1);
    u[cut..].fill(0.0);
    let norm = line.simpson(&u.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    (e, u)
}

/// Self-consistent closed-shell two-electron atom with nuclear charge `z`.
pub fn helium_like(z: f64, xc: OracleXc, r_max: f64, h: f64) -> OracleResult {
    let line = Line::new(r_max, h);
    assert!(line.r.len() % 2 == 1, "Simpson needs an even number of intervals");
    let n = line.r.len();
    // rho as 4 pi r^2 rho, i.e. 2 u^2.
    let shell = |u: &[f64]| u.iter().map(|x| 2.0 * x * x).collect::<Vec<f64>>();
    let mut w = vec![0.0; n];
    let mut radial = shell(&ground_state(&line, z, &w).1);
    let mut last_e = f64::INFINITY;
    for iter in 1..=500 {
        // Hartree: Q(r)/r + int_r^inf 4 pi r' rho dr'.
        let q = line.cumulative(&radial);
        let outer_f: Vec<f64> = radial.iter().zip(&line.r).map(|(p, r)| if *r > 0.0 { p / r } else { 0.0 }).collect();
        let outer_c = line.cumulative(&outer_f);
        let total_outer = outer_c[n - 1];
        let v_h: Vec<f64> =
            (0..n).map(|i| if i == 0 { total_outer } else { q[i] / line.r[i] + total_outer - outer_c[i] }).collect();
        let rho: Vec<f64> =
            (0..n).map(|i| if i == 0 { 0.0 } else { radial[i] / (4.0 * PI * line.r[i] * line.r[i]) }).collect();
        let xc_pts: Vec<(f64, f64)> = rho.iter().map(|&p| xc.eval(p)).collect();
        for i in 0..n {
            w[i] = v_h[i] + xc_pts[i].1;
        }
        let (e, u) = ground_state(&line, z, &w);
        let new_radial = shell(&u);

        let j = 0.5 * line.simpson(&radial.iter().zip(&v_h).map(|(p, v)| p * v).collect::<Vec<_>>());
        let exc = line.simpson(&(0..n).map(|i| 4.0 * PI * line.r[i] * line.r[i] * xc_pts[i].0).collect::<Vec<_>>());
        let int_v_xc = line.simpson(&radial.iter().zip(&xc_pts).map(|(p, x)| p * x.1).collect::<Vec<_>>());
        // Band energy 2e counts the Hartree energy twice and the xc potential instead of the xc energy.
        let energy = 2.0 * e - j - int_v_xc + exc;
        let change: f64 = line.simpson(&new_radial.iter().zip(&radial).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>());
        if change < 1e-10 && (energy - last_e).abs() < 1e-10 {
            return OracleResult { energy, eigenvalue: e, iterations: iter };
        }
        last_e = energy;
        radial = radial.iter().zip(&new_radial).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
    }
    panic!("oracle did not converge");
}

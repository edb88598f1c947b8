//! Finite-difference check of the analytic partials of every functional.

use std::f64::consts::PI;

use eks_core::xc::{Functional, FUNCTIONAL_IDS};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const N_POINTS: usize = 1000;
pub const REL_TOL: f64 = 1e-6;
/// Stencil spacing relative to the length scale of the variable.
const STEP: f64 = 1e-3;
/// Density at which PZ81 switches branches (`r_s = 1`); its derivative jumps there.
const PZ_SWITCH: f64 = 3.0 / (4.0 * PI);

pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Keeps the stencil `rho (1 +- 2 STEP)` on one side of the PZ81 switch.
fn off_switch(rho: f64) -> f64 {
    if (rho / PZ_SWITCH - 1.0).abs() < 3.0 * STEP {
        rho * (1.0 + 10.0 * STEP)
    } else {
        rho
    }
}

/// Ulps lost inside one functional evaluation (roots, logs, exponentials).
const EVAL_ULPS: f64 = 16.0;

/// A difference quotient and a bound on its rounding error.
pub struct Fd {
    pub value: f64,
    pub rounding: f64,
}

/// Fourth-order central difference with spacing `h`. Symmetric pairs are
/// subtracted first so a constant differentiates to exactly zero.
fn central(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> Fd {
    let (a, b, c, d) = (f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h));
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    Fd { value: (8.0 * (c - b) - (d - a)) / (12.0 * h), rounding: EVAL_ULPS * f64::EPSILON * scale * 18.0 / (12.0 * h) }
}

/// Fifth-order forward difference, for points too close to `x = 0`.
fn forward(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> Fd {
    const C: [f64; 6] = [-137.0 / 60.0, 5.0, -5.0, 10.0 / 3.0, -5.0 / 4.0, 1.0 / 5.0];
    let f0 = f(x);
    let vals: Vec<f64> = (1..6).map(|k| f(x + k as f64 * h)).collect();
    let scale = vals.iter().fold(f0.abs(), |m, v| m.max(v.abs()));
    Fd {
        value: C[1..].iter().zip(&vals).map(|(c, v)| c * (v - f0)).sum::<f64>() / h,
        rounding: EVAL_ULPS * f64::EPSILON * scale * 2.0 * C.iter().map(|c| c.abs()).sum::<f64>() / h,
    }
}

/// Derivative of `f` at `x >= 0`, where `f` varies on the length scale `scale`.
/// The error estimate also includes the disagreement with a half-size step,
/// which exposes rounding noise from cancellation inside `f`.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, scale: f64) -> Fd {
    let at = |h: f64| if x > 2.5 * h { central(&f, x, h) } else { forward(&f, x, h) };
    let h = STEP * scale;
    let (a, b) = (at(h), at(0.5 * h));
    Fd { value: a.value, rounding: a.rounding.max((a.value - b.value).abs()) }
}

fn close(analytic: f64, fd: f64) -> bool {
    (analytic - fd).abs() <= REL_TOL * analytic.abs().max(fd.abs())
}

/// A comparison is decidable when the stencil's own error cannot by itself
/// exceed a tenth of the tolerance.
fn decidable(analytic: f64, fd: &Fd) -> bool {
    analytic == 0.0 && fd.value == 0.0 || fd.rounding <= 0.1 * REL_TOL * analytic.abs().max(fd.value.abs())
}

#[derive(Debug, Clone)]
pub struct PartialsCheck {
    pub id: &'static str,
    pub checked: usize,
    /// Draws skipped because no double-precision stencil can resolve the tolerance there.
    pub redrawn: usize,
    pub failures: Vec<String>,
}

/// Compares `dh/drho`, `dh/dkappa`, `d2h/dkappa2` (and `g'` for local
/// functionals) with finite differences at [`N_POINTS`] points of
/// `rho in [1e-8, 1e4]`, `kappa in [1e-10, 1e4]`, log-uniform.
pub fn check_partials(seed: u64) -> Vec<PartialsCheck> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for id in FUNCTIONAL_IDS {
        let f = Functional::from_id(id).unwrap().as_gga();
        let lda = Functional::from_id(id).unwrap().as_lda();
        let mut c = PartialsCheck { id, checked: 0, redrawn: 0, failures: Vec::new() };
        while c.checked < N_POINTS {
            let rho = off_switch(log_uniform(&mut rng, 1e-8, 1e4));
            let kappa = log_uniform(&mut rng, 1e-10, 1e4);
            let p = f.eval_raw(rho, kappa);
            // h_kappa changes on the scale h_kappa / h_kappa_kappa, which can be far
            // from kappa itself.
            let k_scale = if p.d2h_dkappa2 != 0.0 { (p.dh_dkappa / p.d2h_dkappa2).abs() } else { kappa };
            let k_scale = k_scale.max(kappa * 1e-2);
            let mut checks = vec![
                ("dh/drho", p.dh_drho, derivative(|x| f.eval_raw(x, kappa).h, rho, rho)),
                ("dh/dkappa", p.dh_dkappa, derivative(|k| f.eval_raw(rho, k).h, kappa, k_scale)),
                ("d2h/dkappa2", p.d2h_dkappa2, derivative(|k| f.eval_raw(rho, k).dh_dkappa, kappa, k_scale)),
            ];
            if let Some(l) = lda {
                let g = l.eval_unchecked(rho);
                checks.push(("g'", g.g_prime, derivative(|x| l.eval_unchecked(x).g, rho, rho)));
            }
            if !checks.iter().all(|(_, a, fd)| decidable(*a, fd)) {
                c.redrawn += 1;
                continue;
            }
            c.checked += 1;
            for (what, a, fd) in checks {
                if !(a == 0.0 && fd.value == 0.0) && !close(a, fd.value) {
                    c.failures.push(format!("{id} {what} at ({rho:e}, {kappa:e}): {a:e} vs {:e}", fd.value));
                }
            }
        }
        out.push(c);
    }
    out
}

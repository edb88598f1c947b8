//! Gradient-corrected functionals written as `h(rho, kappa)` with
//! `kappa = |grad sqrt(rho)|^2 / 2`.
//!
//! PBE is usually stated in terms of the reduced gradients `s` and `t`.
//! Both are functions of `(rho, kappa)` through `|grad rho|^2 = 8 rho kappa`:
//!
//! ```text
//! s^2 = 2 kappa / ((3 pi^2)^{2/3} rho^{5/3})
//! t^2 = kappa / (2 (3/pi)^{1/3} rho^{4/3})
//! ```
//!
//! so the enhancement factor and the gradient correction `H` are evaluated in
//! the squared variables and differentiated with the chain rule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lda::{pz81_eps, wigner_seitz_radius, LdaFunctional, DIRAC_CX};
use super::{DensityPoint, RHO_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PbeParams {
    pub mu: f64,
    pub nu: f64,
    pub theta: f64,
    pub upsilon: f64,
}

impl Default for PbeParams {
    fn default() -> Self {
        let mu = 0.219_514_972_764_517_1;
        Self { mu, nu: 0.804, theta: (1.0 - std::f64::consts::LN_2) / (PI * PI), upsilon: 3.0 * mu / (PI * PI) }
    }
}

impl PbeParams {
    /// Exchange enhancement factor `F_x(s)`.
    pub fn enhancement(&self, s: f64) -> f64 {
        let p = s * s;
        1.0 + self.mu * p / (1.0 + self.mu * p / self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GgaKind {
    PbeExchange,
    PbeCorrelation,
    PbeFull,
    LdaAsGga(LdaFunctional),
}

/// `h` and the partial derivatives the solvers and checker need.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GgaPoint {
    pub h: f64,
    pub dh_drho: f64,
    pub dh_dkappa: f64,
    pub d2h_dkappa2: f64,
}

impl std::ops::Add for GgaPoint {
    type Output = GgaPoint;

    fn add(self, o: GgaPoint) -> GgaPoint {
        GgaPoint {
            h: self.h + o.h,
            dh_drho: self.dh_drho + o.dh_drho,
            dh_dkappa: self.dh_dkappa + o.dh_dkappa,
            d2h_dkappa2: self.d2h_dkappa2 + o.d2h_dkappa2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgaFunctional {
    pub kind: GgaKind,
    pub params: PbeParams,
}

impl GgaFunctional {
    pub fn new(kind: GgaKind) -> Self {
        Self { kind, params: PbeParams::default() }
    }

    pub fn pbe() -> Self {
        Self::new(GgaKind::PbeFull)
    }

    pub fn lda(f: LdaFunctional) -> Self {
        Self::new(GgaKind::LdaAsGga(f))
    }

    /// Bounds `[a, b]` on `1 + dh/dkappa` known in closed form, if any.
    pub fn declared_ellipticity(&self) -> Option<(f64, f64)> {
        match self.kind {
            GgaKind::LdaAsGga(_) => Some((1.0, 1.0)),
            _ => None,
        }
    }

    pub fn eval(&self, p: DensityPoint) -> GgaPoint {
        self.eval_raw(p.rho(), p.kappa())
    }

    /// Evaluation on raw numbers; negative inputs are clamped to zero.
    pub fn eval_raw(&self, rho: f64, kappa: f64) -> GgaPoint {
        let kappa = kappa.max(0.0);
        if let GgaKind::LdaAsGga(f) = self.kind {
            let l = f.eval_unchecked(rho);
            return GgaPoint { h: l.g, dh_drho: l.g_prime, ..GgaPoint::default() };
        }
        if rho <= RHO_FLOOR {
            return GgaPoint::default();
        }
        match self.kind {
            GgaKind::PbeExchange => pbe_exchange(&self.params, rho, kappa),
            GgaKind::PbeCorrelation => pbe_correlation(&self.params, rho, kappa),
            GgaKind::PbeFull => pbe_exchange(&self.params, rho, kappa) + pbe_correlation(&self.params, rho, kappa),
            GgaKind::LdaAsGga(_) => unreachable!(),
        }
    }
}

/// Free-function form of [`GgaFunctional::eval`].
pub fn gga_h(f: &GgaFunctional, p: DensityPoint) -> GgaPoint {
    f.eval(p)
}

fn pbe_exchange(par: &PbeParams, rho: f64, kappa: f64) -> GgaPoint {
    let k2 = (3.0 * PI * PI).powf(2.0 / 3.0);
    let cbrt = rho.cbrt();
    let ex = -DIRAC_CX * rho * cbrt;
    // p = s^2 is linear in kappa.
    let dp_dk = 2.0 / (k2 * rho * cbrt * cbrt);
    let p = dp_dk * kappa;

    let den = 1.0 + par.mu * p / par.nu;
    let f = 1.0 + par.mu * p / den;
    let fp = par.mu / (den * den);
    let fpp = -2.0 * par.mu * par.mu / (par.nu * den * den * den);

    let ex_over_rho = ex / rho;
    GgaPoint {
        h: ex * f,
        dh_drho: ex_over_rho * (4.0 / 3.0 * f - 5.0 / 3.0 * p * fp),
        dh_dkappa: ex * fp * dp_dk,
        d2h_dkappa2: ex * fpp * dp_dk * dp_dk,
    }
}

fn pbe_correlation(par: &PbeParams, rho: f64, kappa: f64) -> GgaPoint {
    let (theta, ups) = (par.theta, par.upsilon);
    let rs = wigner_seitz_radius(rho);
    let (eps, deps_drs) = pz81_eps(rs);
    let deps_drho = -deps_drs * rs / (3.0 * rho);

    // T = t^2 is linear in kappa.
    let c = (3.0 / PI).cbrt();
    let dt_dk = 1.0 / (2.0 * c * rho * rho.cbrt());
    let t2 = dt_dk * kappa;

    let em1 = (-eps / theta).exp_m1();
    if em1 <= 1e-14 / theta {
        // eps -> 0^-: A -> infinity and H -> 0 except for the linear response at T = 0.
        let (dk, dkk) = if t2 == 0.0 { (ups, -ups * ups / theta) } else { (0.0, 0.0) };
        return GgaPoint {
            h: rho * eps,
            dh_drho: eps + rho * deps_drho,
            dh_dkappa: rho * dk * dt_dk,
            d2h_dkappa2: rho * dkk * dt_dk * dt_dk,
        };
    }
    let a = ups / theta / em1;
    let da_deps = ups / (theta * theta) * (1.0 + em1) / (em1 * em1);

    let y = a * t2;
    let d = 1.0 + y + y * y;
    let q = (1.0 + y) / d;
    let qp = -(y / d) * ((2.0 + y) / d);
    let n = -(2.0 * y + y * y);
    let qpp = -(2.0 + 2.0 * y) / d / d - 2.0 * (n / d) * ((1.0 + 2.0 * y) / d) / d;

    let r = ups / theta;
    let g = r * t2 * q;
    let g_t = r * (q + y * qp);
    let g_tt = r * a * (2.0 * qp + y * qpp);
    let g_a = r * t2 * t2 * qp;
    let x = 1.0 + g;

    let hh = theta * g.ln_1p();
    let h_t = theta * g_t / x;
    let h_tt = theta * (g_tt / x - g_t * g_t / (x * x));
    let h_a = theta * g_a / x;

    GgaPoint {
        h: rho * (eps + hh),
        dh_drho: eps + hh + rho * deps_drho * (1.0 + h_a * da_deps) - 4.0 / 3.0 * t2 * h_t,
        dh_dkappa: rho * h_t * dt_dk,
        d2h_dkappa2: rho * h_tt * dt_dk * dt_dk,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_values() {
        let p = PbeParams::default();
        assert_relative_eq!(p.mu, 0.21951, epsilon = 1e-5);
        assert_relative_eq!(p.nu, 0.804);
        assert_relative_eq!(p.theta, (1.0 - 2f64.ln()) / PI.powi(2), max_relative = 1e-15);
        assert_relative_eq!(p.upsilon, 3.0 * p.mu / PI.powi(2), max_relative = 1e-15);
    }

    #[test]
    fn enhancement_factor_values() {
        let p = PbeParams { mu: 0.21951, ..PbeParams::default() };
        assert_eq!(p.enhancement(0.0), 1.0);
        assert_relative_eq!(p.enhancement(1.0), 1.172_432, epsilon = 1e-6);
        assert_relative_eq!(p.enhancement(1e9), 1.804, epsilon = 1e-9);
    }

    #[test]
    fn exchange_at_zero_gradient_is_lda_exchange() {
        let f = GgaFunctional::new(GgaKind::PbeExchange);
        let lda = LdaFunctional::dirac();
        for rho in [1e-6, 0.03, 1.0, 250.0] {
            let h = f.eval_raw(rho, 0.0);
            let g = lda.eval(rho).unwrap();
            assert_relative_eq!(h.h, g.g, max_relative = 1e-14);
            assert_relative_eq!(h.dh_drho, g.g_prime, max_relative = 1e-14);
        }
    }

    #[test]
    fn correlation_at_zero_gradient_is_pz81() {
        let f = GgaFunctional::new(GgaKind::PbeCorrelation);
        let lda = LdaFunctional::pz81();
        for rho in [1e-6, 0.03, 1.0, 250.0] {
            let h = f.eval_raw(rho, 0.0);
            let g = lda.eval(rho).unwrap();
            assert_relative_eq!(h.h, g.g, max_relative = 1e-13);
            assert_relative_eq!(h.dh_drho, g.g_prime, max_relative = 1e-13);
        }
    }

    #[test]
    fn vanishes_at_zero_density() {
        for kind in [GgaKind::PbeExchange, GgaKind::PbeCorrelation, GgaKind::PbeFull] {
            let f = GgaFunctional::new(kind);
            for kappa in [0.0, 1e-8, 1.0, 1e4] {
                assert_eq!(f.eval_raw(0.0, kappa).h, 0.0);
            }
        }
    }

    #[test]
    fn lda_as_gga_has_no_gradient_dependence() {
        let f = GgaFunctional::lda(LdaFunctional::dirac_pz81());
        let p = f.eval_raw(0.2, 3.0);
        assert_eq!(p.dh_dkappa, 0.0);
        assert_eq!(p.d2h_dkappa2, 0.0);
        assert_eq!(f.declared_ellipticity(), Some((1.0, 1.0)));
    }

    #[test]
    fn gradient_coefficients_of_full_pbe_cancel_at_low_density() {
        // mu = upsilon pi^2 / 3 makes the second-order gradient terms of
        // exchange and correlation cancel in the low-density limit.
        let f = GgaFunctional::pbe();
        let p = f.eval_raw(1e-12, 0.0);
        let x = GgaFunctional::new(GgaKind::PbeExchange).eval_raw(1e-12, 0.0);
        assert!(p.dh_dkappa.abs() < 1e-6 * x.dh_dkappa.abs());
    }
}

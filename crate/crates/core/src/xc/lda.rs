//! Local density functionals: Slater/Dirac exchange and the Perdew-Zunger
//! 1981 parametrisation of the unpolarised correlation energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(3/4) (3/pi)^{1/3}`, so that `g_x(rho) = -DIRAC_CX rho^{4/3}`.
pub const DIRAC_CX: f64 = 0.738_558_766_382_022_4;

// Perdew-Zunger unpolarised parameters.
const PZ_GAMMA: f64 = -0.1423;
const PZ_BETA1: f64 = 1.0529;
const PZ_BETA2: f64 = 0.3334;
const PZ_A: f64 = 0.0311;
const PZ_B: f64 = -0.048;
const PZ_C: f64 = 0.0020;
const PZ_D: f64 = -0.0116;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LdaKind {
    DiracExchange,
    Pz81Correlation,
    DiracPlusPz81,
    /// `g = 0`; switches exchange-correlation off entirely.
    Zero,
}

/// Value of a local functional and its derivative at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaPoint {
    pub g: f64,
    pub g_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaFunctional {
    pub kind: LdaKind,
    pub declared_alpha: f64,
    pub declared_beta_minus: f64,
    pub declared_beta_plus: f64,
}

impl LdaFunctional {
    pub fn new(kind: LdaKind) -> Self {
        // Every registered functional behaves as rho^{4/3} at low density and
        // its potential grows at most like rho^{1/3}.
        Self { kind, declared_alpha: 4.0 / 3.0, declared_beta_minus: 1.0 / 3.0, declared_beta_plus: 1.0 / 3.0 }
    }

    pub fn dirac() -> Self {
        Self::new(LdaKind::DiracExchange)
    }

    pub fn pz81() -> Self {
        Self::new(LdaKind::Pz81Correlation)
    }

    pub fn dirac_pz81() -> Self {
        Self::new(LdaKind::DiracPlusPz81)
    }

    pub fn zero() -> Self {
        Self::new(LdaKind::Zero)
    }

    pub fn is_zero(&self) -> bool {
        self.kind == LdaKind::Zero
    }

    /// `g(rho)` and `g'(rho)`; rejects negative densities.
    pub fn eval(&self, rho: f64) -> Result<LdaPoint> {
        if !(rho >= 0.0) {
            return Err(Error::Domain(format!("density must be nonnegative, got {rho}")));
        }
        Ok(self.eval_unchecked(rho))
    }

    /// Same as [`eval`](Self::eval) without the domain check. Negative input
    /// is clamped to zero.
    pub fn eval_unchecked(&self, rho: f64) -> LdaPoint {
        if rho <= 0.0 {
            return LdaPoint { g: 0.0, g_prime: 0.0 };
        }
        match self.kind {
            LdaKind::DiracExchange => dirac(rho),
            LdaKind::Pz81Correlation => pz81(rho),
            LdaKind::DiracPlusPz81 => {
                let x = dirac(rho);
                let c = pz81(rho);
                LdaPoint { g: x.g + c.g, g_prime: x.g_prime + c.g_prime }
            }
            LdaKind::Zero => LdaPoint { g: 0.0, g_prime: 0.0 },
        }
    }
}

/// Free-function form of [`LdaFunctional::eval`].
pub fn lda_g(f: &LdaFunctional, rho: f64) -> Result<LdaPoint> {
    f.eval(rho)
}

fn dirac(rho: f64) -> LdaPoint {
    let cbrt = rho.cbrt();
    LdaPoint { g: -DIRAC_CX * rho * cbrt, g_prime: -4.0 / 3.0 * DIRAC_CX * cbrt }
}

fn pz81(rho: f64) -> LdaPoint {
    let rs = wigner_seitz_radius(rho);
    let (eps, deps) = pz81_eps(rs);
    LdaPoint { g: rho * eps, g_prime: eps - rs / 3.0 * deps }
}

/// `(4 pi rho / 3)^{-1/3}`.
pub fn wigner_seitz_radius(rho: f64) -> f64 {
    (3.0 / (4.0 * PI * rho)).cbrt()
}

/// Correlation energy per electron of the uniform gas and its derivative
/// with respect to `r_s`.
pub fn pz81_eps(rs: f64) -> (f64, f64) {
    if rs >= 1.0 {
        let sq = rs.sqrt();
        let den = 1.0 + PZ_BETA1 * sq + PZ_BETA2 * rs;
        let eps = PZ_GAMMA / den;
        let deps = -PZ_GAMMA * (0.5 * PZ_BETA1 / sq + PZ_BETA2) / (den * den);
        (eps, deps)
    } else {
        let ln = rs.ln();
        let eps = PZ_A * ln + PZ_B + PZ_C * rs * ln + PZ_D * rs;
        let deps = PZ_A / rs + PZ_C * (ln + 1.0) + PZ_D;
        (eps, deps)
    }
}

//! Exchange-correlation models.
//!
//! Local functionals are `g(rho)`; gradient-corrected ones are
//! `h(rho, kappa)` with `kappa = |grad sqrt(rho)|^2 / 2`. All quantities are
//! in Hartree atomic units.

mod gga;
mod lda;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gga::{gga_h, GgaFunctional, GgaKind, GgaPoint, PbeParams};
pub use lda::{lda_g, pz81_eps, wigner_seitz_radius, LdaFunctional, LdaKind, LdaPoint, DIRAC_CX};

use crate::error::{Error, Result};
use crate::radial::RadialGrid;

/// Densities at or below this value are treated as zero.
pub const RHO_FLOOR: f64 = 1e-30;
/// Squared gradients at or below this value are treated as zero.
pub const GRAD_FLOOR: f64 = 1e-30;

/// A validated `(rho, kappa)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    rho: f64,
    kappa: f64,
}

impl DensityPoint {
    pub fn new(rho: f64, kappa: f64) -> Result<Self> {
        if !(rho >= 0.0) || !(kappa >= 0.0) {
            return Err(Error::Domain(format!("density point needs rho >= 0 and kappa >= 0, got ({rho}, {kappa})")));
        }
        Ok(Self { rho, kappa })
    }

    /// Builds the point from `rho` and `|grad rho|^2`.
    pub fn from_gradient(rho: f64, grad_rho_sq: f64) -> Result<Self> {
        let k = kappa_from_gradient(rho, grad_rho_sq)?;
        Self::new(rho, k.value)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Result of [`kappa_from_gradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub value: f64,
    /// Set when the density vanished under a nonzero gradient; `value` was
    /// then computed with `RHO_FLOOR` in place of the density.
    pub cusp: bool,
}

/// `kappa = |grad rho|^2 / (8 rho)`, the same as `|grad sqrt(rho)|^2 / 2`.
pub fn kappa_from_gradient(rho: f64, grad_rho_sq: f64) -> Result<Kappa> {
    if !(rho >= 0.0) || !(grad_rho_sq >= 0.0) {
        return Err(Error::Domain(format!("kappa needs rho >= 0 and |grad rho|^2 >= 0, got ({rho}, {grad_rho_sq})")));
    }
    if rho <= RHO_FLOOR {
        if grad_rho_sq <= GRAD_FLOOR {
            return Ok(Kappa { value: 0.0, cusp: false });
        }
        return Ok(Kappa { value: grad_rho_sq / (8.0 * RHO_FLOOR), cusp: true });
    }
    Ok(Kappa { value: grad_rho_sq / (8.0 * rho), cusp: false })
}

/// Physics-convention reduced variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedVariables {
    pub s: f64,
    pub t: f64,
    pub rs: f64,
}

pub fn reduced_variables(rho: f64, grad_rho_norm: f64) -> Result<ReducedVariables> {
    if !(rho > 0.0) || !(grad_rho_norm >= 0.0) {
        return Err(Error::Domain(format!(
            "reduced variables need rho > 0 and |grad rho| >= 0, got ({rho}, {grad_rho_norm})"
        )));
    }
    let s = grad_rho_norm / (2.0 * (3.0 * PI * PI).cbrt() * rho.powf(4.0 / 3.0));
    let t = grad_rho_norm / (4.0 * (3.0 / PI).powf(1.0 / 6.0) * rho.powf(7.0 / 6.0));
    Ok(ReducedVariables { s, t, rs: wigner_seitz_radius(rho) })
}

/// Any registered functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Lda(LdaFunctional),
    Gga(GgaFunctional),
}

/// Registry of string identifiers.
pub const FUNCTIONAL_IDS: [&str; 7] = ["none", "lda-x", "pz81", "lda-x+pz81", "pbe-x", "pbe-c", "pbe"];

impl Functional {
    pub fn from_id(id: &str) -> Result<Self> {
        let f = match id {
            "none" => Functional::Lda(LdaFunctional::zero()),
            "lda-x" => Functional::Lda(LdaFunctional::dirac()),
            "pz81" => Functional::Lda(LdaFunctional::pz81()),
            "lda-x+pz81" => Functional::Lda(LdaFunctional::dirac_pz81()),
            "pbe-x" => Functional::Gga(GgaFunctional::new(GgaKind::PbeExchange)),
            "pbe-c" => Functional::Gga(GgaFunctional::new(GgaKind::PbeCorrelation)),
            "pbe" => Functional::Gga(GgaFunctional::pbe()),
            other => return Err(Error::UnknownFunctional(other.to_string())),
        };
        Ok(f)
    }

    pub fn id(&self) -> &'static str {
        match self {
            Functional::Lda(l) => lda_id(l.kind),
            Functional::Gga(g) => match g.kind {
                GgaKind::PbeExchange => "pbe-x",
                GgaKind::PbeCorrelation => "pbe-c",
                GgaKind::PbeFull => "pbe",
                GgaKind::LdaAsGga(l) => lda_id(l.kind),
            },
        }
    }

    pub fn is_gga(&self) -> bool {
        matches!(self, Functional::Gga(g) if !matches!(g.kind, GgaKind::LdaAsGga(_)))
    }

    /// The functional viewed as `h(rho, kappa)`; local functionals ignore kappa.
    pub fn as_gga(&self) -> GgaFunctional {
        match *self {
            Functional::Lda(l) => GgaFunctional::lda(l),
            Functional::Gga(g) => g,
        }
    }

    /// The local functional, if this is one (including an LDA wrapped as GGA).
    pub fn as_lda(&self) -> Option<LdaFunctional> {
        match *self {
            Functional::Lda(l) => Some(l),
            Functional::Gga(GgaFunctional { kind: GgaKind::LdaAsGga(l), .. }) => Some(l),
            Functional::Gga(_) => None,
        }
    }
}

fn lda_id(kind: LdaKind) -> &'static str {
    match kind {
        LdaKind::DiracExchange => "lda-x",
        LdaKind::Pz81Correlation => "pz81",
        LdaKind::DiracPlusPz81 => "lda-x+pz81",
        LdaKind::Zero => "none",
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Functional::from_id(s)
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// `E_xc = sum_i w_i g(rho_i)` or `sum_i w_i h(rho_i, kappa_i)` on the grid.
///
/// `kappa` is required for gradient-corrected functionals.
pub fn exc_integral(f: &Functional, grid: &RadialGrid, rho: &[f64], kappa: Option<&[f64]>) -> Result<f64> {
    if rho.len() != grid.len() {
        return Err(Error::Contract(format!("density has {} values, grid has {} nodes", rho.len(), grid.len())));
    }
    if let Some(&bad) = rho.iter().find(|&&x| !(x >= 0.0)) {
        return Err(Error::Domain(format!("negative or NaN density value {bad}")));
    }
    let w = grid.weights();
    if let Some(l) = f.as_lda() {
        return Ok(rho.iter().zip(w).map(|(&r, &wi)| wi * l.eval_unchecked(r).g).sum());
    }
    let g = f.as_gga();
    let kappa =
        kappa.ok_or_else(|| Error::Contract(format!("functional `{}` needs a kappa (gradient) field", f.id())))?;
    if kappa.len() != rho.len() {
        return Err(Error::Contract("kappa and density lengths differ".into()));
    }
    Ok(rho.iter().zip(kappa).zip(w).map(|((&r, &k), &wi)| wi * g.eval_raw(r, k).h).sum())
}

/// Serde adapter storing a [`Functional`] as its registry identifier.
pub mod functional_id {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Functional;

    pub fn serialize<S: Serializer>(f: &Functional, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(f.id())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Functional, D::Error> {
        let id = String::deserialize(d)?;
        Functional::from_id(&id).map_err(serde::de::Error::custom)
    }
}

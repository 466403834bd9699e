//! The right-hand sides `f(u)` handled by the solver.
//!
//! Every family is evaluated through one mechanism: the formula is lifted to
//! truncated power series, so `f(u0 + t)` expanded in `t` yields all the
//! derivatives `f^(k)(u0) = k!·c[k]` the Adomian recurrence needs. The scalar
//! value is the order-0 lift, which keeps `eval` and `taylor(..)[0]` identical.

use std::fmt;

use crate::error::{Error, Result};
use crate::powerseries::TruncatedSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
#[non_exhaustive]
pub enum Nonlinearity {
    /// `δu / (u + μ)`: oxygen uptake with Michaelis-Menten kinetics.
    MichaelisMenten { delta: f64, mu: f64 },
    /// `−l·exp(−l·κ·u)`: heat sources in the human head.
    HeatSource { l: f64, kappa: f64 },
    /// `ν·exp(u)`: thermal explosion.
    ThermalExplosion { nu: f64 },
    /// `−u^γ`: thermal gas equilibrium (Emden-Fowler for γ = 5).
    PowerLaw { gamma: f64 },
    /// `1/2 − 1/(8u²)`: radial stress on a shallow membrane cap.
    MembraneCap,
}

impl Nonlinearity {
    pub fn michaelis_menten(delta: f64, mu: f64) -> Result<Self> {
        Self::MichaelisMenten { delta, mu }.validated()
    }

    pub fn heat_source(l: f64, kappa: f64) -> Result<Self> {
        Self::HeatSource { l, kappa }.validated()
    }

    pub fn thermal_explosion(nu: f64) -> Result<Self> {
        Self::ThermalExplosion { nu }.validated()
    }

    pub fn power_law(gamma: f64) -> Result<Self> {
        Self::PowerLaw { gamma }.validated()
    }

    /// Checks the parameter invariants of the family.
    pub fn validated(self) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Usage(format!("{}: {msg}", self.family_name())));
        match self {
            Self::MichaelisMenten { delta, mu } => {
                if !(delta > 0.0 && delta.is_finite()) || !(mu > 0.0 && mu.is_finite()) {
                    return bad("delta and mu must be positive and finite");
                }
            }
            Self::HeatSource { l, kappa } => {
                if !(l > 0.0 && l.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) {
                    return bad("l and kappa must be positive and finite");
                }
            }
            Self::ThermalExplosion { nu } => {
                if !nu.is_finite() {
                    return bad("nu must be finite");
                }
            }
            Self::PowerLaw { gamma } => {
                if !gamma.is_finite() {
                    return bad("gamma must be finite");
                }
            }
            Self::MembraneCap => {}
        }
        Ok(self)
    }

    /// Name used in configuration files and on the command line.
    pub fn family_name(&self) -> &'static str {
        match self {
            Self::MichaelisMenten { .. } => "michaelis_menten",
            Self::HeatSource { .. } => "heat_source",
            Self::ThermalExplosion { .. } => "thermal_explosion",
            Self::PowerLaw { .. } => "power_law",
            Self::MembraneCap => "membrane_cap",
        }
    }

    /// Parameter keys of the family, in display order.
    pub fn param_names(family: &str) -> Option<&'static [&'static str]> {
        Some(match family {
            "michaelis_menten" => &["delta", "mu"],
            "heat_source" => &["l", "kappa"],
            "thermal_explosion" => &["nu"],
            "power_law" => &["gamma"],
            "membrane_cap" => &[],
            _ => return None,
        })
    }

    /// Builds a family from its name and a parameter lookup.
    pub fn from_params<F>(family: &str, mut param: F) -> Result<Self>
    where
        F: FnMut(&str) -> Option<f64>,
    {
        let mut need = |key: &str| {
            param(key).ok_or_else(|| Error::Usage(format!("{family}: missing parameter `{key}`")))
        };
        match family {
            "michaelis_menten" => Self::michaelis_menten(need("delta")?, need("mu")?),
            "heat_source" => Self::heat_source(need("l")?, need("kappa")?),
            "thermal_explosion" => Self::thermal_explosion(need("nu")?),
            "power_law" => Self::power_law(need("gamma")?),
            "membrane_cap" => Ok(Self::MembraneCap),
            other => Err(Error::Usage(format!("unknown nonlinearity family `{other}`"))),
        }
    }

    /// Parameter values in the order of [`param_names`](Self::param_names).
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::MichaelisMenten { delta, mu } => vec![("delta", delta), ("mu", mu)],
            Self::HeatSource { l, kappa } => vec![("l", l), ("kappa", kappa)],
            Self::ThermalExplosion { nu } => vec![("nu", nu)],
            Self::PowerLaw { gamma } => vec![("gamma", gamma)],
            Self::MembraneCap => vec![],
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        Ok(self.lift(&TruncatedSeries::constant(u, 0))?[0])
    }

    /// Series of `f(u0 + t)` in `t`, truncated at `order`.
    pub fn taylor(&self, u0: f64, order: usize) -> Result<TruncatedSeries> {
        self.lift(&TruncatedSeries::variable(u0, order))
    }

    /// The derivatives `f^(k)(u0)` for `k = 0..=order`.
    pub fn derivatives(&self, u0: f64, order: usize) -> Result<Vec<f64>> {
        let t = self.taylor(u0, order)?;
        let mut factorial = 1.0;
        Ok(t.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    factorial *= k as f64;
                }
                c * factorial
            })
            .collect())
    }

    /// Composes the family formula with an arbitrary series argument.
    pub fn lift(&self, s: &TruncatedSeries) -> Result<TruncatedSeries> {
        let u0 = s[0];
        let domain = |what: &str| Error::Domain(format!("{} at u = {u0}: {what}", self.family_name()));
        match *self {
            Self::MichaelisMenten { delta, mu } => {
                let denom = s.offset(mu)?;
                let inv = denom.recip().map_err(|e| match e {
                    Error::Singular { .. } => domain("u + mu vanishes"),
                    e => e,
                })?;
                s.checked_mul(&inv)?.scale(delta)
            }
            Self::HeatSource { l, kappa } => s.scale(-l * kappa)?.exp()?.scale(-l),
            Self::ThermalExplosion { nu } => s.exp()?.scale(nu),
            Self::PowerLaw { gamma } => {
                let is_integer = gamma.fract() == 0.0 && gamma.abs() <= u32::MAX as f64;
                let p = if is_integer && gamma >= 0.0 {
                    s.powi(gamma as u32)?
                } else if is_integer {
                    s.powi((-gamma) as u32)?.recip().map_err(|e| match e {
                        Error::Singular { .. } => domain("negative power of zero"),
                        e => e,
                    })?
                } else {
                    if !(u0 > 0.0) {
                        return Err(domain("non-integer power needs u > 0"));
                    }
                    s.powf(gamma)?
                };
                p.scale(-1.0)
            }
            Self::MembraneCap => {
                let inv = s.checked_mul(s)?.recip().map_err(|e| match e {
                    Error::Singular { .. } => domain("u vanishes"),
                    e => e,
                })?;
                inv.scale(-0.125)?.offset(0.5)
            }
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family_name())?;
        let params = self.params();
        if !params.is_empty() {
            let parts: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "{{{}}}", parts.join(","))?;
        }
        Ok(())
    }
}

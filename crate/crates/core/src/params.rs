//! Physical parameters and the constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants derived from the adiabatic index and background density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub c2: f64,
    pub alpha: f64,
    pub c1: f64,
    pub varsigma: f64,
}

/// Computes `c²`, `α`, `c₁` and the acoustic speed `ς = c√(γ−1)`.
pub fn derive_constants(gamma: f64, rho_bar: f64) -> Result<DerivedConstants> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(rho_bar > 0.0) || !rho_bar.is_finite() {
        return Err(Error::Domain(format!(
            "rho_bar must be positive, got {rho_bar}"
        )));
    }
    let alpha = 1.0 / (gamma - 1.0);
    let c2 = gamma / (gamma - 1.0) * rho_bar.powf(gamma - 1.0);
    // (gamma/((gamma-1) c2)) is exactly rho_bar^(1-gamma); use that form so rho_bar = 1 gives 1.
    let c1 = if rho_bar == 1.0 {
        1.0
    } else {
        (gamma / ((gamma - 1.0) * c2)).powf(alpha)
    };
    let varsigma = (c2 * (gamma - 1.0)).sqrt();
    Ok(DerivedConstants {
        c2,
        alpha,
        c1,
        varsigma,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    gamma: f64,
    mu: f64,
    #[serde(rename = "lambda")]
    lambda_: f64,
    #[serde(default = "one")]
    rho_bar: f64,
    eps: f64,
}

fn one() -> f64 {
    1.0
}

/// Adiabatic index, viscosities, background density and Mach number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PhysicalParams {
    gamma: f64,
    mu: f64,
    lambda_: f64,
    rho_bar: f64,
    eps: f64,
    derived: DerivedConstants,
}

impl TryFrom<RawParams> for PhysicalParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        PhysicalParams::new(r.gamma, r.mu, r.lambda_, r.rho_bar, r.eps)
    }
}

impl From<PhysicalParams> for RawParams {
    fn from(p: PhysicalParams) -> Self {
        RawParams {
            gamma: p.gamma,
            mu: p.mu,
            lambda_: p.lambda_,
            rho_bar: p.rho_bar,
            eps: p.eps,
        }
    }
}

impl PhysicalParams {
    pub fn new(gamma: f64, mu: f64, lambda_: f64, rho_bar: f64, eps: f64) -> Result<Self> {
        let derived = derive_constants(gamma, rho_bar)?;
        if !(mu > 0.0) || !(lambda_ > 0.0) {
            return Err(Error::Domain(format!(
                "viscosities must be positive, got mu = {mu}, lambda = {lambda_}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
        }
        Ok(PhysicalParams {
            gamma,
            mu,
            lambda_,
            rho_bar,
            eps,
            derived,
        })
    }

    /// γ = 2, μ = λ = 1, ρ̄ = 1.
    pub fn standard(eps: f64) -> Result<Self> {
        Self::new(2.0, 1.0, 1.0, 1.0, eps)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.gamma, self.mu, self.lambda_, self.rho_bar, eps)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn lambda(&self) -> f64 {
        self.lambda_
    }
    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn c2(&self) -> f64 {
        self.derived.c2
    }
    /// Square root of `c2`.
    pub fn c(&self) -> f64 {
        self.derived.c2.sqrt()
    }
    pub fn alpha(&self) -> f64 {
        self.derived.alpha
    }
    pub fn c1(&self) -> f64 {
        self.derived.c1
    }
    pub fn varsigma(&self) -> f64 {
        self.derived.varsigma
    }
    pub fn derived(&self) -> DerivedConstants {
        self.derived
    }
}

//! The two delayed employment/wage-share subsystems.
//!
//! Both share the shape
//!
//! ```text
//! β' = [β0 + γ·β − δ0·λ] β
//! λ' = [λ0 − ν·λ + γ·β + ρ1·β(t − τ)] λ
//! ```
//!
//! System A (variable work intensity) has γ = γ2 and ν = ν2; System B
//! (non-neutral technical progress) has γ = 0 and ν = μ2ν2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParameters;

/// Absolute tolerance for λ̃e* = λ̃e in System B. The published example
/// parameters are rounded to six significant digits, which leaves a gap of
/// about 3e-6 between the two closed forms.
pub const PSI_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::B => "B",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// Employment ratio and wage share.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub beta: f64,
    pub lambda: f64,
}

impl State {
    pub const fn new(beta: f64, lambda: f64) -> Self {
        State { beta, lambda }
    }

    pub fn norm(&self) -> f64 {
        self.beta.hypot(self.lambda)
    }

    pub fn is_finite(&self) -> bool {
        self.beta.is_finite() && self.lambda.is_finite()
    }
}

impl std::ops::Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.beta + o.beta, self.lambda + o.lambda)
    }
}

impl std::ops::Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.beta - o.beta, self.lambda - o.lambda)
    }
}

impl std::ops::Mul<State> for f64 {
    type Output = State;
    fn mul(self, s: State) -> State {
        State::new(self * s.beta, self * s.lambda)
    }
}

/// Reduced coefficients of one subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsystemCoefficients {
    pub variant: Variant,
    pub beta0: f64,
    pub lambda0: f64,
    pub delta0: f64,
    /// γ2 for System A, 0 for System B.
    pub growth_coupling: f64,
    /// ν2 for System A, μ2ν2 for System B.
    pub wage_damping: f64,
    pub rho1: f64,
}

impl SubsystemCoefficients {
    /// Evaluates the coefficient formulas without the variant's parameter
    /// restriction (μ2 < 1 for System B).
    pub fn from_formulas(p: &ModelParameters, variant: Variant) -> Self {
        let d = p.derived();
        let drive = (d.g - p.s_w) * p.delta;
        match variant {
            Variant::A => SubsystemCoefficients {
                variant,
                beta0: drive - p.gamma1 - p.nu1 - p.n,
                lambda0: -p.gamma1 - d.rho0 - p.nu1,
                delta0: p.nu2 + d.g * p.delta,
                growth_coupling: p.gamma2,
                wage_damping: p.nu2,
                rho1: d.rho1,
            },
            Variant::B => SubsystemCoefficients {
                variant,
                beta0: drive - p.mu1 - p.mu2 * p.nu1 - p.n,
                lambda0: -d.rho0 - p.mu1 - p.mu2 * p.nu1,
                delta0: d.g * p.delta + p.mu2 * p.nu2,
                growth_coupling: 0.0,
                wage_damping: p.mu2 * p.nu2,
                rho1: d.rho1,
            },
        }
    }
}

/// Coefficient bundle for the requested subsystem.
pub fn subsystem_coefficients(p: &ModelParameters, variant: Variant) -> Result<SubsystemCoefficients> {
    if variant == Variant::B && p.mu2 >= 1.0 {
        return Err(Error::VariantConstraint(format!(
            "System B requires 0 < mu2 < 1 (got mu2 = {})",
            p.mu2
        )));
    }
    Ok(SubsystemCoefficients::from_formulas(p, variant))
}

/// Positive fixed point of a subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub beta_e: f64,
    pub lambda_e: f64,
    /// Whether (β_e, λ_e) lies in the open unit square.
    pub interior: bool,
    /// System B only: the wage share forced by ψ(λ) = 0.
    pub lambda_star: Option<f64>,
}

impl Equilibrium {
    pub fn state(&self) -> State {
        State::new(self.beta_e, self.lambda_e)
    }

    /// Human-readable warnings. Non-interior equilibria are analysed anyway.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.interior {
            w.push(format!(
                "NotInterior: equilibrium ({}, {}) lies outside (0,1)^2",
                self.beta_e, self.lambda_e
            ));
        }
        w
    }
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Closed-form equilibrium.
///
/// For System B the wage share must also equal the ψ-root
/// λ̃e* = (μ1 − ν1(1 − μ2)) / (ν2(1 − μ2)); a mismatch beyond
/// [`PSI_TOLERANCE`] is an error.
pub fn equilibrium(coeffs: &SubsystemCoefficients, p: &ModelParameters) -> Result<Equilibrium> {
    let d = p.derived();
    let (beta_e, lambda_e, lambda_star) = match coeffs.variant {
        Variant::A => {
            let (g, rho0, rho1) = (d.g, d.rho0, d.rho1);
            let gd = g * p.delta;
            let denom = rho1 * p.nu2 + gd * (rho1 + p.gamma2);
            if denom == 0.0 {
                return Err(Error::SingularEquilibrium(denom));
            }
            let beta_e = (gd * (p.gamma1 + p.nu1 + p.nu2 + rho0)
                - p.nu2 * (p.n + p.s_w * p.delta - rho0))
                / denom;
            let lambda_e = (p.gamma2 * (gd + rho0 - p.n - p.s_w * p.delta)
                - rho1 * (p.n + p.gamma1 + p.s_w * p.delta + p.nu1 - gd))
                / denom;
            (beta_e, lambda_e, None)
        }
        Variant::B => {
            let denom = coeffs.rho1 * coeffs.delta0;
            if denom == 0.0 {
                return Err(Error::SingularEquilibrium(denom));
            }
            let lambda_e = coeffs.beta0 / coeffs.delta0;
            let beta_e =
                (coeffs.wage_damping * coeffs.beta0 - coeffs.lambda0 * coeffs.delta0) / denom;
            let one_minus = 1.0 - p.mu2;
            if one_minus <= 0.0 {
                return Err(Error::VariantConstraint(format!(
                    "System B requires 0 < mu2 < 1 (got mu2 = {})",
                    p.mu2
                )));
            }
            let lambda_star = (p.mu1 - p.nu1 * one_minus) / (p.nu2 * one_minus);
            let diff = (lambda_star - lambda_e).abs();
            if !(diff <= PSI_TOLERANCE) {
                return Err(Error::InconsistentPsi {
                    lambda_star,
                    lambda_e,
                    diff,
                });
            }
            (beta_e, lambda_e, Some(lambda_star))
        }
    };
    Ok(Equilibrium {
        beta_e,
        lambda_e,
        interior: in_unit_interval(beta_e) && in_unit_interval(lambda_e),
        lambda_star,
    })
}

/// ψ(λ) = ν1 − μ1 − μ2ν1 + ν2(1 − μ2)λ, the technical capital coefficient
/// rate. Its root is λ̃e*.
pub fn psi(p: &ModelParameters, lambda: f64) -> f64 {
    p.nu1 - p.mu1 - p.mu2 * p.nu1 + p.nu2 * (1.0 - p.mu2) * lambda
}

/// Right-hand side of the delayed subsystem. Each component is evaluated
/// as `bracket * state`, so a zero coordinate stays exactly zero.
#[inline]
pub fn vector_field(c: &SubsystemCoefficients, now: State, delayed: State) -> State {
    let beta_bracket = c.beta0 + c.growth_coupling * now.beta - c.delta0 * now.lambda;
    let lambda_bracket = c.lambda0 - c.wage_damping * now.lambda
        + c.growth_coupling * now.beta
        + c.rho1 * delayed.beta;
    State::new(beta_bracket * now.beta, lambda_bracket * now.lambda)
}

//! Characteristic quasi-polynomial analysis.
//!
//! Linearizing either subsystem at its equilibrium gives
//! `P(x) = x² + p0·x + r0 + q0·e^{−xτ}`. A root `x = iω` exists iff
//! `z = ω²` is a positive root of `h(z) = z² + (p0² − 2r0)z + r0² − q0²`,
//! and the delays at which it sits on the axis form the ladder
//! `τ_j = (acos((ω² − r0)/q0) + 2jπ)/ω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParameters;
use crate::subsystem::{equilibrium, subsystem_coefficients, Equilibrium, SubsystemCoefficients, Variant};

/// Δ within this distance of zero is treated as a double root.
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-12;
/// Slack allowed on |(ω² − r0)/q0| ≤ 1 before acos is refused.
pub const ACOS_TOLERANCE: f64 = 1e-12;
/// Every ladder entry must satisfy |P(iω; τ)| below this.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// |h'(z0)| below this means the crossing is not transversal.
pub const DEGENERATE_SLOPE: f64 = 1e-12;
/// |τ − τ0| below this is reported as the Hopf point itself.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_J_MAX: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharCoefficients {
    pub p0: f64,
    pub r0: f64,
    pub q0: f64,
}

impl CharCoefficients {
    pub fn new(p0: f64, r0: f64, q0: f64) -> Self {
        CharCoefficients { p0, r0, q0 }
    }

    /// P(x) for delay τ.
    pub fn eval(&self, x: Complex64, tau: f64) -> Complex64 {
        x * x + self.p0 * x + self.r0 + self.q0 * (-x * tau).exp()
    }

    /// h(z) = z² + (p0² − 2r0)z + r0² − q0².
    pub fn h(&self, z: f64) -> f64 {
        z * z + (self.p0 * self.p0 - 2.0 * self.r0) * z + self.r0 * self.r0 - self.q0 * self.q0
    }

    pub fn h_prime(&self, z: f64) -> f64 {
        2.0 * z + self.p0 * self.p0 - 2.0 * self.r0
    }
}

/// p0, r0, q0 from the Jacobians at the equilibrium. For System B the
/// growth coupling is zero, so r0 vanishes identically.
pub fn char_coefficients(eq: &Equilibrium, c: &SubsystemCoefficients) -> CharCoefficients {
    let (b, l) = (eq.beta_e, eq.lambda_e);
    let gamma = c.growth_coupling;
    // r0 = det J0 = γβλ(δ0 − ν); for System A, δ0 − ν2 = gδ.
    let r0 = if gamma == 0.0 {
        0.0
    } else {
        gamma * (c.delta0 - c.wage_damping) * b * l
    };
    CharCoefficients {
        p0: c.wage_damping * l - gamma * b,
        r0,
        q0: c.delta0 * c.rho1 * b * l,
    }
}

/// All roots of x² + p0x + r0 + q0 have negative real part.
pub fn stable_at_zero_delay(c: &CharCoefficients) -> bool {
    c.p0 > 0.0 && c.r0 + c.q0 > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HCase {
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
}

impl HCase {
    /// Cases guaranteeing at least one positive root of h.
    pub fn admits_crossing(self) -> bool {
        matches!(self, HCase::H3 | HCase::H4 | HCase::H6)
    }
}

impl std::fmt::Display for HCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HClassification {
    pub case: HCase,
    pub discriminant: f64,
    /// Positive roots of h, largest first.
    pub roots: Vec<f64>,
    /// Set when r0² = q0² put a root exactly at z = 0; that root is not a
    /// crossing and is omitted from `roots`.
    pub zero_root_dropped: bool,
}

/// Roots of z² + bz + c, larger first, computed without cancellation.
fn quadratic_roots(b: f64, c: f64, disc: f64) -> (f64, f64) {
    let s = disc.max(0.0).sqrt();
    if b >= 0.0 {
        let lo = (-b - s) / 2.0;
        let hi = if lo != 0.0 { c / lo } else { 0.0 };
        (hi, lo)
    } else {
        let hi = (-b + s) / 2.0;
        (hi, c / hi)
    }
}

pub fn classify_h(c: &CharCoefficients) -> HClassification {
    let b = c.p0 * c.p0 - 2.0 * c.r0;
    let cc = c.r0 * c.r0 - c.q0 * c.q0;
    let disc = b * b - 4.0 * cc;
    let two_r0_minus_p0sq = -b;

    let mut zero_root_dropped = false;
    let (case, roots) = if cc < 0.0 {
        let (hi, _) = quadratic_roots(b, cc, disc);
        (HCase::H4, vec![hi])
    } else if disc.abs() <= DISCRIMINANT_TOLERANCE {
        if two_r0_minus_p0sq > 0.0 {
            (HCase::H3, vec![-b / 2.0])
        } else {
            (HCase::H2, vec![])
        }
    } else if disc < 0.0 {
        (HCase::H1, vec![])
    } else if two_r0_minus_p0sq > 0.0 {
        let (hi, lo) = quadratic_roots(b, cc, disc);
        if cc == 0.0 {
            zero_root_dropped = true;
            (HCase::H6, vec![hi])
        } else {
            (HCase::H6, vec![hi, lo])
        }
    } else {
        (HCase::H5, vec![])
    };
    HClassification {
        case,
        discriminant: disc,
        roots,
        zero_root_dropped,
    }
}

/// ω_k = √z_k, in the same (descending) order as the roots.
pub fn crossing_frequencies(h: &HClassification) -> Result<Vec<f64>> {
    if h.roots.is_empty() {
        return Err(Error::NoCrossing {
            case: h.case.to_string(),
        });
    }
    Ok(h.roots.iter().map(|z| z.sqrt()).collect())
}

/// Delays τ_j (j = 0..=j_max) at which `iω` is a root of P.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayLadder {
    pub omega: f64,
    pub taus: Vec<f64>,
    /// The principal acos branch contradicted p0ω = q0 sin(ωτ) and the
    /// reflected angle 2π − acos(·) was used.
    pub reflected: bool,
}

impl DelayLadder {
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

pub fn critical_delays(c: &CharCoefficients, omega: f64, j_max: usize) -> Result<DelayLadder> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("crossing frequency must be positive, got {omega}")));
    }
    if c.q0 == 0.0 {
        return Err(Error::InvalidInput("q0 = 0: characteristic equation has no delay term".into()));
    }
    let arg = (omega * omega - c.r0) / c.q0;
    if !(arg.abs() <= 1.0 + ACOS_TOLERANCE) {
        return Err(Error::AcosDomain { arg });
    }
    let principal = arg.clamp(-1.0, 1.0).acos();
    // sin(ωτ) must equal p0ω/q0; acos only yields the non-negative-sine half.
    let reflected = c.p0 * omega / c.q0 < 0.0;
    let angle = if reflected { 2.0 * PI - principal } else { principal };

    let taus: Vec<f64> = (0..=j_max)
        .map(|j| (angle + 2.0 * PI * j as f64) / omega)
        .collect();
    for &tau in &taus {
        let residual = c.eval(Complex64::new(0.0, omega), tau).norm();
        if !(residual < RESIDUAL_TOLERANCE) {
            return Err(Error::ResidualCheckFailed { omega, tau, residual });
        }
    }
    Ok(DelayLadder { omega, taus, reflected })
}

/// Direction in which a root pair crosses the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transversality {
    pub z: f64,
    pub h_prime: f64,
    /// Strictly positive denominator of the closed form.
    pub d: f64,
    /// d Re x / dτ at the crossing, = ω² h'(ω²) / D.
    pub re_lambda_prime: f64,
    /// +1 destabilizing, −1 stabilizing.
    pub sign: i8,
}

pub fn transversality(c: &CharCoefficients, omega: f64, tau: f64) -> Result<Transversality> {
    let z = omega * omega;
    let h_prime = c.h_prime(z);
    if h_prime.abs() < DEGENERATE_SLOPE {
        return Err(Error::DegenerateCrossing { h_prime });
    }
    let (s, co) = (omega * tau).sin_cos();
    let d = (c.p0 * co - 2.0 * omega * s - c.q0 * tau).powi(2) + (c.p0 * s + 2.0 * omega * co).powi(2);
    Ok(Transversality {
        z,
        h_prime,
        d,
        re_lambda_prime: z * h_prime / d,
        sign: if h_prime > 0.0 { 1 } else { -1 },
    })
}

/// Everything the spectral analysis produces for one coefficient set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub coefficients: CharCoefficients,
    pub stable_at_zero: bool,
    pub h: HClassification,
    pub omega: Vec<f64>,
    pub ladders: Vec<DelayLadder>,
    pub tau0: Option<f64>,
    pub omega0: Option<f64>,
    pub z0: Option<f64>,
    /// Transversality at (ω0, τ0).
    pub transversality: Option<Transversality>,
    /// Smallest ladder value over all frequencies exceeding τ0.
    pub tau1: Option<f64>,
    pub notes: Vec<String>,
}

impl SpectralReport {
    pub fn has_crossing(&self) -> bool {
        self.tau0.is_some()
    }

    /// Largest |P(iω; τ)| over all reported ladder entries.
    pub fn max_residual(&self) -> f64 {
        self.ladders
            .iter()
            .flat_map(|l| {
                l.taus
                    .iter()
                    .map(move |&t| self.coefficients.eval(Complex64::new(0.0, l.omega), t).norm())
            })
            .fold(0.0, f64::max)
    }
}

pub fn spectral_report(c: &CharCoefficients, j_max: usize) -> Result<SpectralReport> {
    let h = classify_h(c);
    let mut notes = Vec::new();
    if h.zero_root_dropped {
        notes.push("r0^2 = q0^2: root z = 0 of h is not a crossing and was omitted".to_string());
    }
    let mut report = SpectralReport {
        coefficients: *c,
        stable_at_zero: stable_at_zero_delay(c),
        h,
        omega: Vec::new(),
        ladders: Vec::new(),
        tau0: None,
        omega0: None,
        z0: None,
        transversality: None,
        tau1: None,
        notes,
    };
    if report.h.roots.is_empty() {
        return Ok(report);
    }
    report.omega = crossing_frequencies(&report.h)?;
    report.ladders = report
        .omega
        .iter()
        .map(|&w| critical_delays(c, w, j_max))
        .collect::<Result<_>>()?;

    let first = report
        .ladders
        .iter()
        .min_by(|a, b| a.taus[0].total_cmp(&b.taus[0]))
        .expect("at least one ladder");
    let (tau0, omega0) = (first.taus[0], first.omega);
    report.tau0 = Some(tau0);
    report.omega0 = Some(omega0);
    report.z0 = Some(omega0 * omega0);
    report.tau1 = report
        .ladders
        .iter()
        .flat_map(|l| l.taus.iter().copied())
        .filter(|&t| t > tau0 + CRITICAL_TOLERANCE)
        .min_by(f64::total_cmp);
    report.transversality = Some(transversality(c, omega0, tau0)?);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// No positive root of h and stable without delay.
    StableAllDelays,
    /// τ < τ0.
    Stable,
    /// |τ − τ0| < 1e−9.
    HopfCritical,
    /// τ lies in an interval where roots have entered the right half-plane.
    /// `to` is `None` past the last computed ladder value.
    Unstable { from: f64, to: Option<f64> },
    /// The delay-free system is already unstable.
    UnstableAtZero,
    /// Beyond τ1 with stabilizing crossings present; not resolved.
    Undetermined { tau1: f64 },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::StableAllDelays => "stable_all_delays",
            Verdict::Stable => "stable",
            Verdict::HopfCritical => "hopf_critical",
            Verdict::Unstable { .. } => "unstable",
            Verdict::UnstableAtZero => "unstable_at_zero",
            Verdict::Undetermined { .. } => "undetermined",
        }
    }
}

/// Stability of the equilibrium at delay τ given a spectral report.
pub fn verdict_at(report: &SpectralReport, tau: f64) -> Result<Verdict> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput(format!("delay must be finite and >= 0, got {tau}")));
    }
    if !report.stable_at_zero {
        return Ok(Verdict::UnstableAtZero);
    }
    let Some(tau0) = report.tau0 else {
        return Ok(Verdict::StableAllDelays);
    };
    if (tau - tau0).abs() < CRITICAL_TOLERANCE {
        return Ok(Verdict::HopfCritical);
    }
    if tau < tau0 {
        return Ok(Verdict::Stable);
    }
    match report.tau1 {
        Some(tau1) if tau < tau1 => return Ok(Verdict::Unstable { from: tau0, to: Some(tau1) }),
        None => return Ok(Verdict::Unstable { from: tau0, to: None }),
        Some(_) => {}
    }
    // Past τ1: only resolvable when every crossing is destabilizing.
    let all_destabilizing = report
        .omega
        .iter()
        .all(|w| report.coefficients.h_prime(w * w) > 0.0);
    if !all_destabilizing {
        return Ok(Verdict::Undetermined {
            tau1: report.tau1.expect("checked above"),
        });
    }
    let mut ladder: Vec<f64> = report.ladders.iter().flat_map(|l| l.taus.iter().copied()).collect();
    ladder.sort_by(f64::total_cmp);
    let from = ladder.iter().rev().copied().find(|&t| t <= tau).unwrap_or(tau0);
    let to = ladder.iter().copied().find(|&t| t > tau);
    Ok(Verdict::Unstable { from, to })
}

/// Full pipeline from validated parameters to a verdict at delay τ.
pub fn stability_verdict(
    p: &ModelParameters,
    variant: Variant,
    tau: f64,
    j_max: usize,
) -> Result<(Verdict, SpectralReport)> {
    let coeffs = subsystem_coefficients(p, variant)?;
    let eq = equilibrium(&coeffs, p)?;
    let report = spectral_report(&char_coefficients(&eq, &coeffs), j_max)?;
    Ok((verdict_at(&report, tau)?, report))
}

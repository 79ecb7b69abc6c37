//! One-shot analysis of a parameter point, shared by the `analyze` and
//! `sweep` commands so both produce identical numbers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal_form::{hopf_analysis, HopfAnalysis};
use crate::params::{ModelParameters, RawParameters};
use crate::spectral::{char_coefficients, spectral_report, verdict_at, SpectralReport, Verdict};
use crate::subsystem::{equilibrium, subsystem_coefficients, Equilibrium, SubsystemCoefficients, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub variant: Variant,
    pub parameters: RawParameters,
    pub coefficients: SubsystemCoefficients,
    pub equilibrium: Equilibrium,
    pub spectral: SpectralReport,
    pub tau: f64,
    pub verdict: Verdict,
    /// Present when requested and the point has a crossing.
    pub hopf: Option<std::result::Result<HopfAnalysis, Error>>,
}

pub fn analyze(p: &ModelParameters, variant: Variant, tau: f64, j_max: usize, with_hopf: bool) -> Result<Analysis> {
    let coefficients = subsystem_coefficients(p, variant)?;
    let eq = equilibrium(&coefficients, p)?;
    let spectral = spectral_report(&char_coefficients(&eq, &coefficients), j_max)?;
    let verdict = verdict_at(&spectral, tau)?;
    let hopf = (with_hopf && spectral.has_crossing()).then(|| hopf_analysis(&eq, &coefficients, &spectral));
    Ok(Analysis {
        variant,
        parameters: *p.raw(),
        coefficients,
        equilibrium: eq,
        spectral,
        tau,
        verdict,
        hopf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfSummary {
    pub omega0: f64,
    pub tau0: f64,
    pub c1_re: f64,
    pub c1_im: f64,
    pub mu2_bar: f64,
    pub beta2: f64,
    pub direction: String,
    pub orbit_stability: String,
    pub period_estimate: f64,
    pub extrapolated: bool,
}

/// Flat document written by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisDocument {
    pub variant: Variant,
    pub parameters: RawParameters,
    pub beta_e: f64,
    pub lambda_e: f64,
    pub interior: bool,
    pub lambda_star: Option<f64>,
    pub p0: f64,
    pub r0: f64,
    pub q0: f64,
    pub stable_at_zero: bool,
    pub h_case: String,
    pub h_roots: Vec<f64>,
    pub omega: Vec<f64>,
    pub tau_ladder: Vec<Vec<f64>>,
    pub tau0: Option<f64>,
    pub omega0: Option<f64>,
    pub z0: Option<f64>,
    pub h_prime_z0: Option<f64>,
    pub re_lambda_prime: Option<f64>,
    pub tau1: Option<f64>,
    pub tau: f64,
    pub verdict: Verdict,
    pub hopf: Option<HopfSummary>,
    pub hopf_error: Option<String>,
    pub warnings: Vec<String>,
}

impl Analysis {
    pub fn hopf_summary(&self) -> Option<HopfSummary> {
        let h = self.hopf.as_ref()?.as_ref().ok()?;
        Some(HopfSummary {
            omega0: h.eigen.omega,
            tau0: h.eigen.tau_k,
            c1_re: h.report.c1_0.re,
            c1_im: h.report.c1_0.im,
            mu2_bar: h.report.mu2_bar,
            beta2: h.report.beta2,
            direction: h.report.direction.to_string(),
            orbit_stability: h.report.orbit_stability.to_string(),
            period_estimate: h.report.period_estimate,
            extrapolated: h.extrapolated,
        })
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.equilibrium.warnings();
        w.extend(self.spectral.notes.iter().cloned());
        if matches!(self.hopf, Some(Ok(ref h)) if h.extrapolated) {
            w.push("normal-form quantities for System B reuse the System A reduction".to_string());
        }
        w
    }

    pub fn document(&self) -> AnalysisDocument {
        let s = &self.spectral;
        AnalysisDocument {
            variant: self.variant,
            parameters: self.parameters,
            beta_e: self.equilibrium.beta_e,
            lambda_e: self.equilibrium.lambda_e,
            interior: self.equilibrium.interior,
            lambda_star: self.equilibrium.lambda_star,
            p0: s.coefficients.p0,
            r0: s.coefficients.r0,
            q0: s.coefficients.q0,
            stable_at_zero: s.stable_at_zero,
            h_case: s.h.case.to_string(),
            h_roots: s.h.roots.clone(),
            omega: s.omega.clone(),
            tau_ladder: s.ladders.iter().map(|l| l.taus.clone()).collect(),
            tau0: s.tau0,
            omega0: s.omega0,
            z0: s.z0,
            h_prime_z0: s.transversality.map(|t| t.h_prime),
            re_lambda_prime: s.transversality.map(|t| t.re_lambda_prime),
            tau1: s.tau1,
            tau: self.tau,
            verdict: self.verdict,
            hopf: self.hopf_summary(),
            hopf_error: match &self.hopf {
                Some(Err(e)) => Some(e.to_string()),
                _ => None,
            },
            warnings: self.warnings(),
        }
    }
}

/// Column names of a sweep table; the Hopf columns are appended only when
/// requested.
pub fn sweep_header(param: &str, with_hopf: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        param, "status", "beta_e", "lambda_e", "p0", "r0", "q0", "h_case", "tau0", "verdict",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if with_hopf {
        h.extend(
            ["c1_re", "c1_im", "mu2_bar", "beta2", "direction", "orbit_stability"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    h
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One CSV row. `status` is `ok`, `NoCrossing` for points without an
/// imaginary-axis crossing, or the error tag for points that failed.
pub fn sweep_row(value: f64, outcome: &Result<Analysis>, with_hopf: bool) -> Vec<String> {
    let width = sweep_header("", with_hopf).len();
    let mut row = vec![fmt_f64(value)];
    match outcome {
        Err(e) => {
            row.push(e.tag().to_string());
            row.resize(width, String::new());
        }
        Ok(a) => {
            let s = &a.spectral;
            row.push(if s.has_crossing() { "ok" } else { "NoCrossing" }.to_string());
            row.push(fmt_f64(a.equilibrium.beta_e));
            row.push(fmt_f64(a.equilibrium.lambda_e));
            row.push(fmt_f64(s.coefficients.p0));
            row.push(fmt_f64(s.coefficients.r0));
            row.push(fmt_f64(s.coefficients.q0));
            row.push(s.h.case.to_string());
            row.push(opt(s.tau0));
            row.push(a.verdict.label().to_string());
            if with_hopf {
                match &a.hopf {
                    Some(Ok(h)) => {
                        row.push(fmt_f64(h.report.c1_0.re));
                        row.push(fmt_f64(h.report.c1_0.im));
                        row.push(fmt_f64(h.report.mu2_bar));
                        row.push(fmt_f64(h.report.beta2));
                        row.push(h.report.direction.to_string());
                        row.push(h.report.orbit_stability.to_string());
                    }
                    Some(Err(e)) => {
                        row.push(e.tag().to_string());
                        row.resize(width, String::new());
                    }
                    None => row.resize(width, String::new()),
                }
            }
        }
    }
    row
}

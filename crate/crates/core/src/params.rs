//! Economic parameters of the generalized Goodwin model, their admissible
//! ranges, and the constants derived from them.
//!
//! Parameters arrive as a flat key/value document with exactly seventeen
//! snake_case keys. [`RawParameters`] holds them unchecked; validation
//! produces a [`ModelParameters`] that carries its [`DerivedConstants`].

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Names of the seventeen parameters, in canonical order.
pub const FIELD_NAMES: [&str; 17] = [
    "mu1", "mu2", "nu1", "nu2", "n", "gamma1", "gamma2", "a1", "a2", "a3", "b1", "b2", "b3", "c",
    "s_pi", "s_w", "delta",
];

/// Unvalidated parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParameters {
    pub mu1: f64,
    pub mu2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub n: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c: f64,
    pub s_pi: f64,
    pub s_w: f64,
    pub delta: f64,
}

/// One failed inequality of the admissible parameter region.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub name: &'static str,
    pub value: f64,
    pub constraint: &'static str,
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::ConstraintViolation {
            name: v.name.to_string(),
            value: v.value,
            constraint: v.constraint.to_string(),
        }
    }
}

impl RawParameters {
    /// Parses a flat JSON object holding exactly the seventeen parameters.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        match value {
            Value::Object(map) => Self::from_map(&map),
            _ => Err(Error::Config("expected a JSON object".into())),
        }
    }

    /// Builds a parameter set from a key/value map. Unknown keys are rejected.
    pub fn from_map(map: &Map<String, Value>) -> Result<Self> {
        if let Some(unknown) = map.keys().find(|k| !FIELD_NAMES.contains(&k.as_str())) {
            return Err(Error::UnknownField(unknown.clone()));
        }
        let mut raw = RawParameters::zeroed();
        for name in FIELD_NAMES {
            let value = map
                .get(name)
                .ok_or_else(|| Error::MissingField(name.to_string()))?;
            let x = value
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::NonFinite {
                    name: name.to_string(),
                })?;
            raw.set(name, x)?;
        }
        Ok(raw)
    }

    fn zeroed() -> Self {
        RawParameters {
            mu1: 0.0,
            mu2: 0.0,
            nu1: 0.0,
            nu2: 0.0,
            n: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            a1: 0.0,
            a2: 0.0,
            a3: 0.0,
            b1: 0.0,
            b2: 0.0,
            b3: 0.0,
            c: 0.0,
            s_pi: 0.0,
            s_w: 0.0,
            delta: 0.0,
        }
    }

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "mu1" => &mut self.mu1,
            "mu2" => &mut self.mu2,
            "nu1" => &mut self.nu1,
            "nu2" => &mut self.nu2,
            "n" => &mut self.n,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "a1" => &mut self.a1,
            "a2" => &mut self.a2,
            "a3" => &mut self.a3,
            "b1" => &mut self.b1,
            "b2" => &mut self.b2,
            "b3" => &mut self.b3,
            "c" => &mut self.c,
            "s_pi" => &mut self.s_pi,
            "s_w" => &mut self.s_w,
            "delta" => &mut self.delta,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(name).map(|x| *x)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = self
            .slot(name)
            .ok_or_else(|| Error::UnknownField(name.to_string()))?;
        *slot = value;
        Ok(())
    }

    /// Every inequality the parameters fail, in a fixed order.
    pub fn violations(&self) -> Vec<Violation> {
        let p = self;
        let checks: [(&'static str, f64, bool, &'static str); 21] = [
            ("mu1", p.mu1, p.mu1 >= 0.0, "mu1 >= 0"),
            ("mu2", p.mu2, p.mu2 > 0.0, "mu2 > 0"),
            ("mu2", p.mu2, p.mu2 <= 1.0, "mu2 <= 1"),
            ("nu1", p.nu1, p.nu1 >= 0.0, "nu1 >= 0"),
            ("nu2", p.nu2, p.nu2 > 0.0, "nu2 > 0"),
            ("n", p.n, p.n >= 0.0, "n >= 0"),
            ("gamma1", p.gamma1, p.gamma1 >= 0.0, "gamma1 >= 0"),
            ("gamma2", p.gamma2, p.gamma2 >= 0.0, "gamma2 >= 0"),
            ("a1", p.a1, p.a1 > 0.0, "a1 > 0"),
            ("a2", p.a2, p.a2 > 0.0, "a2 > 0"),
            ("a3", p.a3, (0.0..=1.0).contains(&p.a3), "0 <= a3 <= 1"),
            ("b1", p.b1, p.b1 >= 0.0, "b1 >= 0"),
            ("b2", p.b2, p.b2 >= 0.0, "b2 >= 0"),
            ("b3", p.b3, (0.0..1.0).contains(&p.b3), "0 <= b3 < 1"),
            ("c", p.c, p.c > 0.0 && p.c < 1.0, "0 < c < 1"),
            ("s_w", p.s_w, p.s_w > 0.0, "s_w > 0"),
            ("s_pi", p.s_pi, p.s_pi > p.s_w, "s_pi > s_w"),
            ("s_pi", p.s_pi, p.s_pi < 1.0, "s_pi < 1"),
            ("delta", p.delta, p.delta > 0.0, "delta > 0"),
            ("a3*b3", p.a3 * p.b3, p.a3 * p.b3 < 1.0, "a3*b3 < 1"),
            ("g", p.g(), p.g() > 0.0, "g = c - (s_pi - s_w) > 0"),
        ];
        checks
            .into_iter()
            .filter(|(_, _, ok, _)| !ok)
            .map(|(name, value, _, constraint)| Violation {
                name,
                value,
                constraint,
            })
            .collect()
    }

    fn g(&self) -> f64 {
        self.c - (self.s_pi - self.s_w)
    }

    /// Checks every admissibility inequality; the first failure is returned.
    pub fn validate(self) -> Result<ModelParameters> {
        for name in FIELD_NAMES {
            let x = self.get(name).unwrap_or(f64::NAN);
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    name: name.to_string(),
                });
            }
        }
        if let Some(v) = self.violations().into_iter().next() {
            return Err(v.into());
        }
        Ok(ModelParameters {
            derived: derive_constants(&self),
            raw: self,
        })
    }
}

/// Constants derived once from the raw parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// c − (s_π − s_w)
    pub g: f64,
    pub rho0: f64,
    pub rho1: f64,
}

/// Closed-form g, ρ0, ρ1. Requires a3·b3 ≠ 1.
pub fn derive_constants(p: &RawParameters) -> DerivedConstants {
    let denom = 1.0 - p.a3 * p.b3;
    DerivedConstants {
        g: p.c - (p.s_pi - p.s_w),
        rho0: (p.a1 * (1.0 - p.b3) - p.b1 * (1.0 - p.a3)) / denom,
        rho1: p.a2 * (1.0 - p.b3) / denom,
    }
}

/// Validated parameters with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParameters {
    raw: RawParameters,
    derived: DerivedConstants,
}

impl ModelParameters {
    pub fn raw(&self) -> &RawParameters {
        &self.raw
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }
}

impl std::ops::Deref for ModelParameters {
    type Target = RawParameters;

    fn deref(&self) -> &RawParameters {
        &self.raw
    }
}

/// Convenience for `RawParameters::validate`.
pub fn validate_parameters(raw: RawParameters) -> Result<ModelParameters> {
    raw.validate()
}

/// Parameter sets used in the worked examples.
pub mod presets {
    use super::RawParameters;

    /// Variable-speed technical progress case (System A). μ1, μ2 are fixed
    /// at 0 and 1 as that subsystem requires.
    pub fn system_a() -> RawParameters {
        RawParameters {
            mu1: 0.0,
            mu2: 1.0,
            nu1: 0.02,
            nu2: 0.04,
            n: 0.01,
            gamma1: 0.01,
            gamma2: 0.012,
            a1: 0.9,
            a2: 1.0,
            a3: 0.99,
            b1: 1.9,
            b2: 0.0,
            b3: 0.6,
            c: 0.38,
            s_pi: 0.24,
            s_w: 0.04,
            delta: 4.2,
        }
    }

    /// Non-neutral technical progress case (System B).
    pub fn system_b() -> RawParameters {
        RawParameters {
            mu1: 0.0186145,
            mu2: 0.5,
            nu1: 0.015,
            nu2: 0.03,
            n: 0.01,
            gamma1: 0.0,
            gamma2: 0.0,
            a1: 0.9,
            a2: 1.0,
            a3: 1.0,
            b1: 1.9,
            b2: 0.0,
            b3: 0.6,
            c: 0.4,
            s_pi: 0.24,
            s_w: 0.04,
            delta: 4.0,
        }
    }
}

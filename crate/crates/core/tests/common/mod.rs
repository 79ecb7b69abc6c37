//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use goodwin_delay::normal_form::EigenPair;
use goodwin_delay::spectral::{char_coefficients, spectral_report, CharCoefficients, SpectralReport};
use goodwin_delay::{
    equilibrium, presets, subsystem_coefficients, Equilibrium, ModelParameters, RawParameters,
    SubsystemCoefficients, Variant,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;

/// Reference values computed in 50-digit arithmetic from the closed forms.
#[allow(clippy::excessive_precision)]
pub mod reference {
    pub const A_BETA_E: f64 = 0.90048400905266623753;
    pub const A_LAMBDA_E: f64 = 0.70201734687014069705;
    pub const A_P0: f64 = 0.017274885766173633032;
    pub const A_R0: f64 = 0.0057349137428425227032;
    pub const A_Q0: f64 = 0.49575930479564122724;
    pub const A_Z0: f64 = 0.50134330408876854209;
    pub const A_OMEGA0: f64 = 0.70805600349744125454;
    pub const A_TAU0: f64 = 0.034848844387498302839;
    pub const A_TAU1: f64 = 8.9087024324424047669;
    pub const A_H_PRIME: f64 = 0.99151520237008638715;
    pub const A_RE_LAMBDA_PRIME: f64 = 0.24772964247174406809;
    pub const A_PERIOD: f64 = 8.873853588054906464;
    pub const A_C1_RE: f64 = 0.0013216356828792731;
    pub const A_C1_IM: f64 = -0.013656094307539212;

    pub const B_BETA_E: f64 = 0.93722895705521472393;
    pub const B_LAMBDA_E: f64 = 0.74096380368098159509;
    pub const B_LAMBDA_STAR: f64 = 0.74096666666666666667;
    pub const B_P0: f64 = 0.011114457055214723926;
    pub const B_Q0: f64 = 0.56597897734576687117;
    pub const B_OMEGA0: f64 = 0.75227469393713187868;
    pub const B_TAU0: f64 = 0.019638293654893296270;
}

/// A validated point together with its analysis inputs.
#[derive(Debug, Clone)]
pub struct Point {
    pub params: ModelParameters,
    pub variant: Variant,
    pub coeffs: SubsystemCoefficients,
    pub eq: Equilibrium,
    pub report: SpectralReport,
}

impl Point {
    pub fn new(raw: RawParameters, variant: Variant) -> Option<Point> {
        let params = raw.validate().ok()?;
        let coeffs = subsystem_coefficients(&params, variant).ok()?;
        let eq = equilibrium(&coeffs, &params).ok()?;
        let report = spectral_report(&char_coefficients(&eq, &coeffs), 3).ok()?;
        Some(Point {
            params,
            variant,
            coeffs,
            eq,
            report,
        })
    }

    pub fn char(&self) -> CharCoefficients {
        self.report.coefficients
    }
}

pub fn case_a() -> Point {
    Point::new(presets::system_a(), Variant::A).unwrap()
}

pub fn case_b() -> Point {
    Point::new(presets::system_b(), Variant::B).unwrap()
}

fn jitter(rng: &mut StdRng, x: f64, spread: f64) -> f64 {
    x * rng.gen_range(1.0 - spread..1.0 + spread)
}

/// Random perturbation of the System A example; may be invalid.
pub fn perturb_a(rng: &mut StdRng, spread: f64) -> RawParameters {
    let mut p = presets::system_a();
    for name in [
        "nu1", "nu2", "n", "gamma1", "gamma2", "a1", "a2", "b1", "b3", "c", "s_pi", "s_w", "delta",
    ] {
        let v = jitter(rng, p.get(name).unwrap(), spread);
        p.set(name, v).unwrap();
    }
    p.a3 = rng.gen_range(0.9..=1.0);
    p
}

/// Random perturbation of the System B example with μ1 solved so that the
/// ψ-root coincides with the equilibrium wage share.
pub fn perturb_b(rng: &mut StdRng, spread: f64) -> RawParameters {
    let mut p = presets::system_b();
    for name in ["nu1", "nu2", "n", "a1", "a2", "b1", "b3", "c", "s_pi", "s_w", "delta"] {
        let v = jitter(rng, p.get(name).unwrap(), spread);
        p.set(name, v).unwrap();
    }
    p.mu2 = rng.gen_range(0.3..0.8);
    let g = p.c - (p.s_pi - p.s_w);
    let drive = (g - p.s_w) * p.delta - p.mu2 * p.nu1 - p.n;
    let delta0 = g * p.delta + p.mu2 * p.nu2;
    let k = p.nu2 * (1.0 - p.mu2);
    p.mu1 = (k * drive + delta0 * p.nu1 * (1.0 - p.mu2)) / (k + delta0);
    p
}

/// Draws until a valid point with an imaginary-axis crossing that is
/// stable without delay is found.
pub fn sample_crossing_point(rng: &mut StdRng) -> Point {
    loop {
        let (raw, variant) = if rng.gen_bool(0.5) {
            (perturb_a(rng, 0.2), Variant::A)
        } else {
            (perturb_b(rng, 0.2), Variant::B)
        };
        if let Some(pt) = Point::new(raw, variant) {
            if pt.report.has_crossing() && pt.report.stable_at_zero {
                return pt;
            }
        }
    }
}

/// Number of roots of x² + p0x + r0 + q0e^{−xτ} with Re x > 0, by the
/// argument principle on a rectangle enclosing every such root.
pub fn rhp_root_count(c: &CharCoefficients, tau: f64) -> i64 {
    // |x|² ≤ |p0||x| + |r0| + |q0| whenever Re x ≥ 0
    let r = (c.p0.abs() + (c.p0 * c.p0 + 4.0 * (c.r0.abs() + c.q0.abs())).sqrt()) / 2.0 + 1.0;
    let f = |x: Complex64| x * x + c.p0 * x + c.r0 + c.q0 * (-x * tau).exp();
    let corners = [
        Complex64::new(0.0, -r),
        Complex64::new(r, -r),
        Complex64::new(r, r),
        Complex64::new(0.0, r),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        const N: usize = 256;
        for i in 0..N {
            let s0 = a + (b - a) * (i as f64 / N as f64);
            let s1 = a + (b - a) * ((i + 1) as f64 / N as f64);
            total += arg_change(&f, s0, s1, 0);
        }
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

fn arg_change(f: &impl Fn(Complex64) -> Complex64, a: Complex64, b: Complex64, depth: u32) -> f64 {
    let d = (f(b) / f(a)).arg();
    if d.abs() > 0.3 && depth < 30 {
        let m = (a + b) / 2.0;
        arg_change(f, a, m, depth + 1) + arg_change(f, m, b, depth + 1)
    } else {
        d
    }
}

/// First delay at which a root enters the right half-plane, found by a
/// geometric τ scan followed by bisection.
pub fn brute_force_onset(c: &CharCoefficients, tau_max: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut tau = 1e-6;
    while tau <= tau_max {
        if rhp_root_count(c, tau) > 0 {
            let mut hi = tau;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if rhp_root_count(c, mid) > 0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-9 {
                    break;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        lo = tau;
        tau *= 1.1;
    }
    None
}

/// Nonlinear part of the rescaled right-hand side at complex arguments,
/// written directly from the model equations.
fn complex_field(pt: &Point, tau_k: f64, u1: Complex64, u2: Complex64, u1_delayed: Complex64) -> [Complex64; 2] {
    let c = &pt.coeffs;
    let (b, l, bd) = (pt.eq.beta_e + u1, pt.eq.lambda_e + u2, pt.eq.beta_e + u1_delayed);
    let f1 = (c.beta0 + c.growth_coupling * b - c.delta0 * l) * b;
    let f2 = (c.lambda0 - c.wage_damping * l + c.growth_coupling * b + c.rho1 * bd) * l;
    [tau_k * f1, tau_k * f2]
}

/// g20, g11, g02 as second derivatives of g(z, w) = q̄*(0)·f(zq + wq̄),
/// by central finite differences with z and w treated as independent.
pub fn finite_difference_g(pt: &Point, ep: &EigenPair) -> [Complex64; 3] {
    let e = Complex64::new(0.0, -ep.omega_tau()).exp();
    let qs = ep.q_star(0.0);
    let g = |z: Complex64, w: Complex64| {
        let u1 = z + w;
        let u2 = ep.alpha * z + ep.alpha.conj() * w;
        let u1d = z * e + w * e.conj();
        let f = complex_field(pt, ep.tau_k, u1, u2, u1d);
        qs[0].conj() * f[0] + qs[1].conj() * f[1]
    };
    // f is quadratic, so the stencils carry no truncation error; a wide step
    // keeps cancellation against the O(1) equilibrium terms small.
    let h = Complex64::new(1e-3, 0.0);
    let z0 = Complex64::new(0.0, 0.0);
    let gzz = (g(h, z0) - 2.0 * g(z0, z0) + g(-h, z0)) / (h * h);
    let gww = (g(z0, h) - 2.0 * g(z0, z0) + g(z0, -h)) / (h * h);
    let gzw = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h);
    [gzz, gzw, gww]
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

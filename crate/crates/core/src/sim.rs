//! Fixed-step integration of the constant-delay subsystems by the method of
//! steps.
//!
//! For τ > 0 the step is h = τ/m, so the delayed argument of the first and
//! last Runge–Kutta stages lands exactly on a stored node. The two midpoint
//! stages need β(t − τ + h/2), taken from the cubic Hermite interpolant
//! through the bracketing nodes and their derivatives. Only the last m + 1
//! nodes are kept for lookups; the trajectory records every
//! `record_every`-th node.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::subsystem::{vector_field, State, SubsystemCoefficients};

/// A state component beyond this magnitude truncates the run.
pub const OVERFLOW_LIMIT: f64 = 1e6;
pub const MIN_STEPS_PER_DELAY: usize = 4;
pub const DEFAULT_STEPS_PER_DELAY: usize = 8;
pub const DEFAULT_STEP: f64 = 0.01;

/// Initial function on [−τ, 0].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistorySpec {
    Constant { value: State },
}

impl HistorySpec {
    pub fn constant(value: State) -> Self {
        HistorySpec::Constant { value }
    }

    pub fn value(&self, _t: f64) -> State {
        match self {
            HistorySpec::Constant { value } => *value,
        }
    }

    pub fn derivative(&self, _t: f64) -> State {
        match self {
            HistorySpec::Constant { .. } => State::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub t_end: f64,
    /// Requested step; `None` picks min(τ/8, 0.01).
    pub step_hint: Option<f64>,
    /// Record every n-th node (n ≥ 1).
    pub record_every: usize,
}

impl SimOptions {
    pub fn new(t_end: f64) -> Self {
        SimOptions {
            t_end,
            step_hint: None,
            record_every: 1,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step_hint = Some(step);
        self
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub tau: f64,
    /// Integration step.
    pub step: f64,
    /// Steps per delay interval (τ > 0 only).
    pub steps_per_delay: Option<usize>,
    pub record_every: usize,
    pub history: HistorySpec,
    /// Short hash of the coefficient bundle.
    pub digest: String,
    /// Set when the run stopped early because the state blew up.
    pub overflow: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Last integrated node, recorded or not.
    pub final_time: f64,
    pub final_state: State,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// Spacing between recorded samples.
    pub fn sample_interval(&self) -> f64 {
        self.meta.step * self.meta.record_every as f64
    }

    pub fn last(&self) -> State {
        self.final_state
    }

    /// Recorded state closest to time t.
    pub fn at(&self, t: f64) -> State {
        let i = (t / self.sample_interval()).round().max(0.0) as usize;
        self.states[i.min(self.states.len() - 1)]
    }
}

/// ceil(x), except values within 1e−9 of an integer round to it.
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

pub fn default_step_hint(tau: f64) -> f64 {
    if tau > 0.0 {
        (tau / DEFAULT_STEPS_PER_DELAY as f64).min(DEFAULT_STEP)
    } else {
        DEFAULT_STEP
    }
}

pub fn coefficient_digest(coeffs: &SubsystemCoefficients) -> String {
    let json = serde_json::to_vec(coeffs).expect("coefficients serialize");
    hex::encode(&Sha256::digest(&json)[..8])
}

/// Stored node value and derivative, for Hermite lookups.
#[derive(Clone, Copy, Default)]
struct Node {
    y: State,
    dy: State,
}

pub fn simulate(
    coeffs: &SubsystemCoefficients,
    tau: f64,
    history: HistorySpec,
    opts: SimOptions,
) -> Result<Trajectory> {
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {}", opts.t_end)));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("delay must be finite and >= 0, got {tau}")));
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidInput("record_every must be at least 1".into()));
    }
    if let Some(h) = opts.step_hint {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
        }
    }
    let y0 = history.value(0.0);
    if !y0.is_finite() {
        return Err(Error::InvalidInput("initial state is not finite".into()));
    }

    let (step, m) = if tau > 0.0 {
        let m = match opts.step_hint {
            Some(h) => ceil_tolerant(tau / h),
            None => ceil_tolerant(tau / default_step_hint(tau)).max(DEFAULT_STEPS_PER_DELAY),
        };
        if m < MIN_STEPS_PER_DELAY {
            return Err(Error::StepTooLarge { m });
        }
        (tau / m as f64, Some(m))
    } else {
        (opts.step_hint.unwrap_or(DEFAULT_STEP), None)
    };
    let n_steps = ceil_tolerant(opts.t_end / step);

    let mut meta = TrajectoryMeta {
        tau,
        step,
        steps_per_delay: m,
        record_every: opts.record_every,
        history,
        digest: coefficient_digest(coeffs),
        overflow: false,
    };
    let capacity = n_steps / opts.record_every + 1;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(0.0);
    states.push(y0);

    let f = |now: State, delayed: State| vector_field(coeffs, now, delayed);
    let half = 0.5 * step;
    let sixth = step / 6.0;
    let eighth = step / 8.0;
    let mut y = y0;
    let mut done = 0;
    let mut countdown = opts.record_every;

    match m {
        None => {
            while done < n_steps {
                let k1 = f(y, y);
                let a = y + half * k1;
                let k2 = f(a, a);
                let b = y + half * k2;
                let k3 = f(b, b);
                let c = y + step * k3;
                let k4 = f(c, c);
                let next = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if overflowed(next) {
                    meta.overflow = true;
                    break;
                }
                y = next;
                done += 1;
                countdown -= 1;
                if countdown == 0 {
                    countdown = opts.record_every;
                    times.push(done as f64 * step);
                    states.push(y);
                }
            }
        }
        Some(m) => {
            // Ring of the last m + 1 nodes. With node i in slot `cur`, node
            // i − m sits in the following slot and node i − m + 1 after it.
            let len = m + 1;
            let wrap = |s: usize| if s + 1 == len { 0 } else { s + 1 };
            let mut ring = vec![Node::default(); len];
            let mut cur = 0;
            let hist_node = |k: isize| Node {
                y: history.value(k as f64 * step),
                dy: history.derivative(k as f64 * step),
            };
            while done < n_steps {
                let lo = done as isize - m as isize;
                let (s_lo, s_hi) = (wrap(cur), wrap(wrap(cur)));
                // Interval [lo, lo+1] inside the history (lo+1 <= 0) takes
                // both ends, including their derivatives, from the history.
                let (a, b) = if lo < 0 {
                    (hist_node(lo), hist_node(lo + 1))
                } else {
                    (ring[s_lo], ring[s_hi])
                };
                let k1 = f(y, a.y);
                // a node's derivative is its first stage; node lo+1 < i as m >= 4
                ring[cur] = Node { y, dy: k1 };
                let mid = 0.5 * (a.y + b.y) + eighth * (a.dy - b.dy);
                let k2 = f(y + half * k1, mid);
                let k3 = f(y + half * k2, mid);
                let k4 = f(y + step * k3, b.y);
                let next = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if overflowed(next) {
                    meta.overflow = true;
                    break;
                }
                y = next;
                cur = s_lo;
                done += 1;
                countdown -= 1;
                if countdown == 0 {
                    countdown = opts.record_every;
                    times.push(done as f64 * step);
                    states.push(y);
                }
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        final_time: done as f64 * step,
        final_state: y,
        meta,
    })
}

fn overflowed(y: State) -> bool {
    !(y.beta.abs() <= OVERFLOW_LIMIT && y.lambda.abs() <= OVERFLOW_LIMIT)
}

/// Peak-to-peak amplitude over one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl EnvelopeWindow {
    pub fn combined(&self) -> f64 {
        self.beta + self.lambda
    }
}

/// Peak-to-peak amplitudes over consecutive non-overlapping windows of the
/// given duration. A trailing partial window is dropped.
pub fn amplitude_envelope(traj: &Trajectory, window: f64) -> Result<Vec<EnvelopeWindow>> {
    let dt = traj.sample_interval();
    let steps = (window / dt).round();
    let steps = if steps.is_finite() && steps > 0.0 { steps as usize } else { 0 };
    if steps < 5 {
        return Err(Error::WindowTooShort { steps });
    }
    let span = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let mut out = Vec::new();
    let mut s = 0;
    while s + steps < traj.states.len() {
        let seg = &traj.states[s..=s + steps];
        out.push(EnvelopeWindow {
            t_start: traj.times[s],
            t_end: traj.times[s + steps],
            beta: span(&mut seg.iter().map(|x| x.beta)),
            lambda: span(&mut seg.iter().map(|x| x.lambda)),
        });
        s += steps;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeClass {
    Decaying,
    Sustained,
    Growing,
}

impl std::fmt::Display for EnvelopeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnvelopeClass::Decaying => "decaying",
            EnvelopeClass::Sustained => "sustained",
            EnvelopeClass::Growing => "growing",
        })
    }
}

/// Relative drift of the combined amplitude from the first to the last
/// window, and the resulting class. |drift| ≤ `tolerance` is sustained.
pub fn classify_envelope(env: &[EnvelopeWindow], tolerance: f64) -> Option<(EnvelopeClass, f64)> {
    let (first, last) = (env.first()?.combined(), env.last()?.combined());
    let drift = if first > 0.0 {
        last / first - 1.0
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let class = if drift > tolerance {
        EnvelopeClass::Growing
    } else if drift < -tolerance {
        EnvelopeClass::Decaying
    } else {
        EnvelopeClass::Sustained
    };
    Some((class, drift))
}

/// Mean spacing between alternate crossings of β through its mean, over
/// the second half of the trajectory.
pub fn oscillation_period(traj: &Trajectory) -> Result<f64> {
    let start = traj.states.len() / 2;
    let tail = &traj.states[start..];
    let times = &traj.times[start..];
    if tail.len() < 2 {
        return Err(Error::NoOscillation { crossings: 0 });
    }
    let mean = tail.iter().map(|s| s.beta).sum::<f64>() / tail.len() as f64;
    let mut crossings = Vec::new();
    for k in 1..tail.len() {
        let (a, b) = (tail[k - 1].beta - mean, tail[k].beta - mean);
        if (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0) {
            let frac = a / (a - b);
            crossings.push(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    if crossings.len() < 3 {
        return Err(Error::NoOscillation {
            crossings: crossings.len(),
        });
    }
    let spans: Vec<f64> = crossings.windows(3).map(|w| w[2] - w[0]).collect();
    Ok(spans.iter().sum::<f64>() / spans.len() as f64)
}

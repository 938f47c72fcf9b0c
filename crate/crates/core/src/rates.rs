//! Time-dependent decay and Lamb-shift rates for a Lorentzian reservoir.
//!
//! The driven-qubit rates are functions of the dimensionless time
//! `T = lambda t` and are returned in units of `lambda`. The undriven rate
//! uses physical time with `alpha` in units of rate. The two are separate
//! parameterizations and are never mixed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-channel values for `xi = -1, 0, +1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelRates {
    pub minus: f64,
    pub zero: f64,
    pub plus: f64,
}

impl ChannelRates {
    pub fn as_array(&self) -> [f64; 3] {
        [self.minus, self.zero, self.plus]
    }

    pub fn min(&self) -> f64 {
        self.minus.min(self.zero).min(self.plus)
    }
}

/// `q_xi = s - xi p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QTriple {
    pub minus: f64,
    pub zero: f64,
    pub plus: f64,
}

impl QTriple {
    pub fn new(s: f64, p: f64) -> Self {
        Self { minus: s + p, zero: s, plus: s - p }
    }

    /// Largest `|q|` over the three channels.
    pub fn max_abs(&self) -> f64 {
        self.minus.abs().max(self.zero.abs()).max(self.plus.abs())
    }
}

/// Decay rates `gamma_xi` and shift rates `lambda_xi` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    pub gamma: ChannelRates,
    pub lamb: ChannelRates,
}

/// Lorentzian decay and shift rate `(gamma, lambda)` at dimensionless time
/// `t` for channel detuning `q`.
pub fn lorentzian_rate(t: f64, q: f64, alpha: f64) -> Result<(f64, f64)> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    let amp = alpha * alpha / (1.0 + q * q);
    let decay = (-t).exp();
    let (sin, cos) = (q * t).sin_cos();
    let gamma = 0.5 * amp * (1.0 - decay * cos + decay * q * sin);
    let lamb = amp * (-q + decay * q * cos + decay * sin);
    Ok((gamma, lamb))
}

/// Long-time limits `(gamma, lambda)` of [`lorentzian_rate`].
pub fn lorentzian_asymptote(q: f64, alpha: f64) -> (f64, f64) {
    let amp = alpha * alpha / (1.0 + q * q);
    (0.5 * amp, -amp * q)
}

pub fn rate_sample(t: f64, s: f64, p: f64, alpha: f64) -> Result<RateSample> {
    let q = QTriple::new(s, p);
    let (gm, lm) = lorentzian_rate(t, q.minus, alpha)?;
    let (g0, l0) = lorentzian_rate(t, q.zero, alpha)?;
    let (gp, lp) = lorentzian_rate(t, q.plus, alpha)?;
    Ok(RateSample {
        t,
        gamma: ChannelRates { minus: gm, zero: g0, plus: gp },
        lamb: ChannelRates { minus: lm, zero: l0, plus: lp },
    })
}

/// Time after which every Lorentzian decay rate with `|q| <= q_max` is
/// strictly positive: `ln sqrt(1 + q_max^2)`.
pub fn positivity_time(q_max: f64) -> f64 {
    0.5 * (1.0 + q_max * q_max).ln()
}

/// Minimum of `gamma(T; q)` (with `alpha = 1`) over a dense uniform scan of
/// `[0, t_max]`.
pub fn min_lorentzian_gamma(q: f64, t_max: f64, dt: f64) -> f64 {
    let n = (t_max / dt).round() as usize;
    (0..=n)
        .map(|k| lorentzian_rate(k as f64 * dt, q, 1.0).map(|r| r.0).unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest `s >= 0` at which the channel rate `gamma(T; q = s)` first
/// takes negative values somewhere in `T in [0, 50]`.
///
/// Bisection on `s` with a dense `T` scan (step `1e-3`) as inner loop.
pub fn negativity_threshold_s() -> f64 {
    const T_MAX: f64 = 50.0;
    const DT: f64 = 1e-3;
    let negative = |s: f64| min_lorentzian_gamma(s, T_MAX, DT) < 0.0;
    let (mut lo, mut hi) = (0.0, 10.0);
    debug_assert!(!negative(lo) && negative(hi));
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if negative(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Relative tolerance for the undriven rate's denominator zeros.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// Shape of `d = sqrt(lambda^2 - 2 alpha lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Root {
    Real(f64),
    Critical,
    Imaginary(f64),
}

fn root(alpha: f64, width: f64) -> Root {
    let d2 = width * width - 2.0 * alpha * width;
    let scale = width * width;
    if d2.abs() <= 1e-14 * scale {
        Root::Critical
    } else if d2 > 0.0 {
        Root::Real(d2.sqrt())
    } else {
        Root::Imaginary((-d2).sqrt())
    }
}

/// `(cosh(dt/2), sinh(dt/2)/d)` continued to real arithmetic for every
/// sign of `d^2`.
fn hyperbolic_pair(t: f64, alpha: f64, width: f64) -> (f64, f64) {
    match root(alpha, width) {
        Root::Real(d) => {
            let x = 0.5 * d * t;
            (x.cosh(), x.sinh() / d)
        }
        Root::Critical => (1.0, 0.5 * t),
        Root::Imaginary(k) => {
            let x = 0.5 * k * t;
            (x.cos(), x.sin() / k)
        }
    }
}

/// Decay rate of the undriven qubit resonant with the Lorentzian centre,
/// in physical time.
///
/// For `lambda < 2 alpha` the expression is evaluated through its
/// trigonometric continuation and has poles; evaluating within
/// [`POLE_TOLERANCE`] of one is an error. At `lambda = 2 alpha` the
/// removable singularity is replaced by its limit `2 alpha lambda t/(2 + lambda t)`.
pub fn nondriven_rate(t: f64, alpha: f64, width: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    match root(alpha, width) {
        Root::Real(d) => {
            let th = (0.5 * d * t).tanh();
            Ok(2.0 * alpha * width * th / (d + width * th))
        }
        Root::Critical => Ok(2.0 * alpha * width * t / (2.0 + width * t)),
        Root::Imaginary(k) => {
            let (sin, cos) = (0.5 * k * t).sin_cos();
            let den = k * cos + width * sin;
            let scale = k * cos.abs() + width * sin.abs();
            if den.abs() <= POLE_TOLERANCE * scale {
                return Err(Error::Pole { t, denominator: den });
            }
            Ok(2.0 * alpha * width * sin / den)
        }
    }
}

/// Long-time limit `2 alpha lambda/(d + lambda)` of the undriven rate when
/// `lambda >= 2 alpha`; `None` when the rate keeps oscillating.
pub fn nondriven_asymptote(alpha: f64, width: f64) -> Option<f64> {
    match root(alpha, width) {
        Root::Real(d) => Some(2.0 * alpha * width / (d + width)),
        Root::Critical => Some(2.0 * alpha),
        Root::Imaginary(_) => None,
    }
}

/// Poles of [`nondriven_rate`] in `(0, t_max]`, ascending. Empty when
/// `lambda >= 2 alpha`.
pub fn nondriven_poles(alpha: f64, width: f64, t_max: f64) -> Vec<f64> {
    let Root::Imaginary(k) = root(alpha, width) else {
        return Vec::new();
    };
    // k cos x + lambda sin x = 0  <=>  x = n pi - atan(k / lambda), n >= 1
    let base = std::f64::consts::PI - (k / width).atan();
    (0..)
        .map(|n| 2.0 * (base + n as f64 * std::f64::consts::PI) / k)
        .take_while(|&t| t <= t_max)
        .collect()
}

/// Excited-state amplitude `c(t) = e^{-lambda t/2} [cosh(dt/2) + (lambda/d) sinh(dt/2)]`
/// of the undriven model, for which `gamma = -2 c'/c`. It is regular
/// everywhere and vanishes at the poles of the rate.
pub fn nondriven_amplitude(t: f64, alpha: f64, width: f64) -> f64 {
    let (ch, sh_over_d) = hyperbolic_pair(t, alpha, width);
    (-0.5 * width * t).exp() * (ch + width * sh_over_d)
}

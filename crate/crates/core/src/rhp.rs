//! Divisibility-based non-Markovianity.
//!
//! `g(t)` measures the first-order growth of the trace norm of the Bell
//! (Choi) state under `1 + eps L(t)`. It vanishes exactly when the
//! intermediate maps stay completely positive. The measure integrates `g`
//! and maps it into `[0, 1)` as `I/(I + 1)`.
//!
//! Normalization: for a normalized Bell state, the trace-norm difference
//! quotient equals twice the closed forms below (e.g. a single channel with
//! `Tr(A^dag A) = 1` gives `P[gamma]`, not `P[gamma]/2`). Reported `g` values
//! use the closed-form convention, i.e. the quotient divided by the qubit
//! dimension; [`g_numeric_raw`] exposes the undivided quotient.

use nalgebra::Matrix4x3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GeneratorSpec, Superoperator};
use crate::grid::{trapezoid, TimeGrid};
use crate::ops::{self, c, C64, Op2, Op4, Vec4};
use crate::params::Coefficients;
use crate::rates::{lorentzian_rate, nondriven_poles, nondriven_rate, positivity_time, rate_sample, QTriple, RateSample};

/// Quotient values below this magnitude are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-7;

/// Ratio between the raw Choi quotient and the reported `g`.
pub const CHOI_NORMALIZATION: f64 = 2.0;

/// Bell-state probe and the step ladder for the `eps -> 0` limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiProbe {
    state: Vec4,
    phi: Op4,
    /// Orthonormal basis of the complement of `state`, as columns.
    complement: Matrix4x3<C64>,
    /// Decreasing steps; each is divided by `max(1, |L(t)|_F)` before use.
    pub ladder: [f64; 3],
}

impl Default for ChoiProbe {
    fn default() -> Self {
        Self::with_phase(0.0)
    }
}

impl ChoiProbe {
    /// `(|00> + e^{i phase} |11>)/sqrt(2)` projector. The phase only moves
    /// the probe within the maximally entangled family.
    pub fn with_phase(phase: f64) -> Self {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let v = Vec4::new(c(amp), ops::ZERO, ops::ZERO, C64::from_polar(amp, phase));
        let mut basis: Vec<Vec4> = vec![v];
        for k in 0..4 {
            let mut e = Vec4::zeros();
            e[k] = ops::ONE;
            for b in &basis {
                e -= b * b.dotc(&e);
            }
            if e.norm() > 0.5 && basis.len() < 4 {
                basis.push(e.normalize());
            }
        }
        let complement = Matrix4x3::from_columns(&basis[1..]);
        Self { state: v, phi: v * v.adjoint(), complement, ladder: [1e-8, 5e-9, 2.5e-9] }
    }

    pub fn projector(&self) -> &Op4 {
        &self.phi
    }

    /// `(L kron id)[|phi><phi|]`, with `L` acting on the first tensor factor.
    pub fn image(&self, l: &Superoperator) -> Op4 {
        let mut out = Op4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = Op2::zeros();
                e[(i, j)] = ops::ONE;
                // <i i'| phi><phi |j j'> block for the ancilla pair (i, j)
                let weight = self.phi[(3 * i, 3 * j)];
                if weight == ops::ZERO {
                    continue;
                }
                let le = l.apply(&e) * weight;
                out += le.kronecker(&e);
            }
        }
        out
    }

    /// `|phi><phi| + eps X|_1 - 1` for traceless-up-to-rounding Hermitian
    /// `X`. The three small eigenvalues come from the Schur complement on
    /// the orthogonal complement of `phi`, so they keep full relative
    /// precision at tiny `eps`; the large one follows from the trace.
    pub fn excess_trace_norm(&self, x: &Op4, eps: f64) -> f64 {
        let a = self.state.dotc(&(x * self.state)).re;
        let col = self.complement.adjoint() * (x * self.state);
        let block = self.complement.adjoint() * x * self.complement;
        let outer = col * col.adjoint();
        let small_eigenvalues = |shift: f64| {
            let schur = block * c(eps) - outer * c(eps * eps / (1.0 + eps * a - shift));
            let mut ev: Vec<f64> = ((schur + schur.adjoint()) * c(0.5)).symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        };
        // each small eigenvalue is a fixed point of mu -> eig_k(S(mu))
        let first = small_eigenvalues(0.0);
        let negative: f64 = (0..3)
            .map(|k| {
                let mut mu = first[k];
                for _ in 0..4 {
                    mu = small_eigenvalues(mu)[k];
                }
                mu
            })
            .filter(|m| *m < 0.0)
            .map(|m| -m)
            .sum();
        eps * x.trace().re + 2.0 * negative
    }
}

fn p_neg(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        0.0
    }
}

/// Difference quotient `(|P + eps X|_1 - 1)/eps`, extrapolated to `eps = 0`
/// with one Richardson step on a halving ladder. Not normalized.
pub fn g_numeric_raw(l: &Superoperator, probe: &ChoiProbe) -> Result<f64> {
    let x = probe.image(l);
    let scale = l.frobenius().max(1.0);
    let q: Vec<f64> = probe
        .ladder
        .iter()
        .map(|&e| {
            let eps = e / scale;
            probe.excess_trace_norm(&x, eps) / eps
        })
        .collect();
    let r1 = 2.0 * q[1] - q[0];
    let r2 = 2.0 * q[2] - q[1];
    if (r1 - r2).abs() > 1e-6 * r2.abs().max(1.0) {
        return Err(Error::NumericInstability(format!(
            "Richardson estimates disagree: {r1:e} vs {r2:e}"
        )));
    }
    Ok(r2)
}

/// `g(t)` from the generator via the Choi construction, clamped to `[0, inf)`.
pub fn g_numeric(spec: &GeneratorSpec, t: f64, probe: &ChoiProbe) -> Result<f64> {
    let raw = g_numeric_raw(&spec.at(t)?, probe)?;
    normalize_quotient(raw)
}

fn normalize_quotient(raw: f64) -> Result<f64> {
    if raw < -NOISE_FLOOR * CHOI_NORMALIZATION {
        return Err(Error::NumericInstability(format!("negative divisibility quotient {raw:e}")));
    }
    let g = raw / CHOI_NORMALIZATION;
    Ok(if g < NOISE_FLOOR { 0.0 } else { g })
}

/// Closed form in the secular regime.
pub fn g_secular_analytic(rates: &RateSample, coeffs: &Coefficients) -> f64 {
    let k = coeffs;
    let g = &rates.gamma;
    0.5 * (k.plus * k.plus * p_neg(g.plus) + k.minus * k.minus * p_neg(g.minus) + 2.0 * k.zero * k.zero * p_neg(g.zero))
}

/// How the `C_0` term enters the single-channel prefactor
/// `(C+^2 + C-^2 + 2 C0^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroCoefficient {
    /// `2 C0^2`: the prefactor is `Tr(A^dag A) = 1`.
    #[default]
    Squared,
    /// `2 C0`, for comparison only; does not match the Choi computation.
    Linear,
}

/// Closed form for the single-channel (`p << 1`) generator.
pub fn g_nonsecular_analytic(gamma: f64, coeffs: &Coefficients, form: ZeroCoefficient) -> f64 {
    let k = coeffs;
    let zero = match form {
        ZeroCoefficient::Squared => 2.0 * k.zero * k.zero,
        ZeroCoefficient::Linear => 2.0 * k.zero,
    };
    0.5 * (k.plus * k.plus + k.minus * k.minus + zero) * p_neg(gamma)
}

/// Closed form for the undriven qubit.
pub fn g_undriven_analytic(gamma: f64) -> f64 {
    0.5 * p_neg(gamma)
}

/// Closed-form `g(t)` for the models that have one.
pub fn g_analytic(spec: &GeneratorSpec, t: f64) -> Option<Result<f64>> {
    match spec {
        GeneratorSpec::Secular(p) => {
            Some(rate_sample(t, p.s(), p.p(), p.alpha).map(|r| g_secular_analytic(&r, &p.coeffs)))
        }
        GeneratorSpec::SimplifiedNonsecular(p) => Some(
            lorentzian_rate(t, p.s(), p.alpha)
                .map(|(g, _)| g_nonsecular_analytic(g, &p.coeffs, ZeroCoefficient::Squared)),
        ),
        GeneratorSpec::Undriven(u) => Some(nondriven_rate(t, u.alpha, u.width).map(g_undriven_analytic)),
        GeneratorSpec::FullNonsecular(_) => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhpMethod {
    Numeric,
    SecularAnalytic,
    NonsecularAnalytic,
    UndrivenAnalytic,
}

impl RhpMethod {
    /// The closed-form method matching a spec, if any.
    pub fn analytic_for(spec: &GeneratorSpec) -> Option<Self> {
        match spec {
            GeneratorSpec::Secular(_) => Some(Self::SecularAnalytic),
            GeneratorSpec::SimplifiedNonsecular(_) => Some(Self::NonsecularAnalytic),
            GeneratorSpec::Undriven(_) => Some(Self::UndrivenAnalytic),
            GeneratorSpec::FullNonsecular(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhpReport {
    pub method: RhpMethod,
    pub grid: Vec<f64>,
    /// `g` at each grid point; `NaN` at a rate pole.
    pub g: Vec<f64>,
    /// `inf` when the grid crosses a pole of the undriven rate.
    pub integral: f64,
    pub measure: f64,
    pub divergent: bool,
    pub poles: Vec<f64>,
    /// Upper bound on the contribution of `g` beyond the grid end.
    pub tail_bound: f64,
}

fn g_series(spec: &GeneratorSpec, grid: &TimeGrid, f: impl Fn(f64) -> Result<f64> + Sync) -> Result<Vec<f64>> {
    grid.points()
        .par_iter()
        .map(|&t| match f(t) {
            Err(Error::Pole { .. }) if matches!(spec, GeneratorSpec::Undriven(_)) => Ok(f64::NAN),
            other => other,
        })
        .collect()
}

/// Integrate `g` over `grid` (native time units) and form `I/(I + 1)`.
pub fn rhp_measure(spec: &GeneratorSpec, grid: &TimeGrid, method: RhpMethod, probe: &ChoiProbe) -> Result<RhpReport> {
    let g = match method {
        RhpMethod::Numeric => g_series(spec, grid, |t| g_numeric(spec, t, probe))?,
        _ => {
            if RhpMethod::analytic_for(spec) != Some(method) {
                return Err(Error::Precondition(format!("{method:?} does not apply to {}", spec.model())));
            }
            g_series(spec, grid, |t| g_analytic(spec, t).expect("closed form exists"))?
        }
    };
    let poles = match spec {
        GeneratorSpec::Undriven(u) => nondriven_poles(u.alpha, u.width, grid.end()),
        _ => Vec::new(),
    };
    let (finite_t, finite_g): (Vec<f64>, Vec<f64>) =
        grid.points().iter().zip(&g).filter(|(_, g)| g.is_finite()).map(|(t, g)| (*t, *g)).unzip();
    // the rate drops to -inf right after every pole, so the integral diverges
    let divergent = !poles.is_empty();
    let integral = if divergent { f64::INFINITY } else { trapezoid(&finite_t, &finite_g) };
    let measure = if divergent { 1.0 } else { integral / (integral + 1.0) };
    let tail_bound = tail_bound(spec, grid.end());
    if tail_bound > 1e-6 && !divergent {
        log::warn!("divisibility integral not converged: tail bound {tail_bound:e} beyond t = {}", grid.end());
    }
    Ok(RhpReport { method, grid: grid.points().to_vec(), g, integral, measure, divergent, poles, tail_bound })
}

/// Bound on `int_{t_end}^inf g`. Zero once every Lorentzian rate is past
/// its positivity time.
pub fn tail_bound(spec: &GeneratorSpec, t_end: f64) -> f64 {
    let lorentz = |q_max: f64, alpha: f64| {
        if t_end >= positivity_time(q_max) {
            0.0
        } else {
            // |gamma| <= alpha^2 e^{-T} / (2 sqrt(1+q^2)) beyond the positive part
            0.5 * alpha * alpha * (-t_end).exp() / (1.0 + q_max * q_max).sqrt().max(1.0) * 2.0
        }
    };
    match spec {
        GeneratorSpec::Secular(p) | GeneratorSpec::FullNonsecular(p) => {
            lorentz(QTriple::new(p.s(), p.p()).max_abs(), p.alpha)
        }
        GeneratorSpec::SimplifiedNonsecular(p) => lorentz(p.s().abs(), p.alpha),
        GeneratorSpec::Undriven(u) => {
            if u.is_markovian() {
                0.0
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Largest `|g_numeric - g_analytic|` over the grid, skipping rate poles.
/// `None` when the model has no closed form.
pub fn max_cross_validation_error(spec: &GeneratorSpec, grid: &TimeGrid, probe: &ChoiProbe) -> Result<Option<f64>> {
    if RhpMethod::analytic_for(spec).is_none() {
        return Ok(None);
    }
    let errs: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|&t| {
            let an = match g_analytic(spec, t).expect("closed form exists") {
                Err(Error::Pole { .. }) => return Ok(0.0),
                other => other?,
            };
            Ok((g_numeric(spec, t, probe)? - an).abs())
        })
        .collect::<Result<_>>()?;
    Ok(Some(errs.into_iter().fold(0.0, f64::max)))
}

//! Integration of `d rho/dt = L(t) rho` and finite-time propagators.
//!
//! Fixed-step classical RK4. Output points are hit exactly by shortening the
//! last substep before each one. Emitted states are symmetrized and
//! trace-renormalized; the integration itself continues from the raw vector
//! and positivity is only monitored.
//!
//! The undriven rate has poles when `lambda < 2 alpha`. Across such a pole
//! the master equation is singular but the map is not: it is fixed by the
//! excited-state amplitude `c(t)`, which obeys the regular linear equation
//! `c'' + lambda c' + (alpha lambda/2) c = 0`. Grids that contain a pole are
//! integrated through that equation instead.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GeneratorSpec, Model, Superoperator};
use crate::grid::TimeGrid;
use crate::ops::{self, c, C64, Op2, Op4, Vec4};
use crate::params::UndrivenParams;
use crate::rates::nondriven_poles;

/// A qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(Op2);

const STATE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;
const POSITIVITY_ABORT: f64 = 1e-6;

impl QubitState {
    pub fn new(rho: Op2) -> Result<Self> {
        let herm = ops::hermiticity_defect(&rho);
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = ops::trace(&rho);
        if (tr - ops::ONE).norm() > STATE_TOL {
            return Err(Error::InvalidParameter(format!("trace {tr} != 1")));
        }
        let [lo, _] = ops::hermitian_eigenvalues_2(&rho);
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {lo}")));
        }
        Ok(Self(rho))
    }

    /// `rho = (I + x sx + y sy + z sz)/2`; requires `|r| <= 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm2: f64 = r.iter().map(|v| v * v).sum();
        if norm2.is_nan() || norm2 > 1.0 + POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!("Bloch vector {r:?} outside the unit ball")));
        }
        Ok(Self::from_bloch_unchecked(r))
    }

    pub(crate) fn from_bloch_unchecked(r: [f64; 3]) -> Self {
        let [x, y, z] = r;
        Self(Op2::new(c(0.5 * (1.0 + z)), C64::new(0.5 * x, -0.5 * y), C64::new(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z))))
    }

    /// Pure state on the Bloch sphere at polar angle `theta`, azimuth `phi`.
    pub fn pure(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::from_bloch_unchecked([st * cp, st * sp, ct])
    }

    pub fn excited() -> Self {
        Self::from_bloch_unchecked([0.0, 0.0, 1.0])
    }

    pub fn ground() -> Self {
        Self::from_bloch_unchecked([0.0, 0.0, -1.0])
    }

    pub fn rho(&self) -> &Op2 {
        &self.0
    }

    pub fn bloch(&self) -> [f64; 3] {
        let r = &self.0;
        [2.0 * r[(1, 0)].re, 2.0 * r[(1, 0)].im, (r[(0, 0)] - r[(1, 1)]).re]
    }

    pub fn purity(&self) -> f64 {
        ops::trace(&(self.0 * self.0)).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        ops::hermitian_eigenvalues_2(&self.0)[0]
    }

    /// Symmetrize, renormalize the trace and check positivity.
    fn clean(raw: Op2, t: f64) -> Result<Self> {
        let herm = (raw + raw.adjoint()) * c(0.5);
        let tr = ops::trace(&herm).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::IntegrationFailure { t, reason: format!("trace {tr}") });
        }
        let rho = herm * c(1.0 / tr);
        let [lo, _] = ops::hermitian_eigenvalues_2(&rho);
        if lo < -POSITIVITY_ABORT {
            return Err(Error::IntegrationFailure { t, reason: format!("positivity lost, eigenvalue {lo:e}") });
        }
        Ok(Self(rho))
    }
}

/// Raw (pre-cleaning) invariant defects seen along an integration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_trace_defect: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: Model,
    pub grid: TimeGrid,
    pub states: Vec<QubitState>,
    pub diagnostics: Diagnostics,
}

/// A finite-time map on vectorized density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator(pub Op4);

impl Propagator {
    pub fn identity() -> Self {
        Self(Op4::identity())
    }

    pub fn matrix(&self) -> &Op4 {
        &self.0
    }

    pub fn apply(&self, rho: &Op2) -> Op2 {
        ops::unvec(&(self.0 * ops::vec(rho)))
    }

    pub fn then(&self, later: &Propagator) -> Propagator {
        Propagator(later.0 * self.0)
    }
}

impl Mul for Propagator {
    type Output = Propagator;
    fn mul(self, rhs: Propagator) -> Propagator {
        Propagator(self.0 * rhs.0)
    }
}

/// RK4 substep, in units of the dimensionless time `T` (converted to
/// `step/lambda` for the undriven model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step: 1e-3 }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        Self { step }
    }

    fn native_step(&self, spec: &GeneratorSpec) -> Result<f64> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("integrator step {}", self.step)));
        }
        Ok(self.step * spec.time_unit())
    }
}

/// Generator evaluation with a one-entry cache: consecutive RK4 steps share
/// the boundary time.
struct CachedGenerator<'a> {
    spec: &'a GeneratorSpec,
    last: Option<(f64, Op4)>,
}

impl<'a> CachedGenerator<'a> {
    fn new(spec: &'a GeneratorSpec) -> Self {
        Self { spec, last: None }
    }

    fn at(&mut self, t: f64) -> Result<Op4> {
        if let Some((tc, m)) = self.last {
            if tc == t {
                return Ok(m);
            }
        }
        let m = self.spec.at(t).map_err(|e| match e {
            Error::Pole { .. } => e,
            other => Error::IntegrationFailure { t, reason: other.to_string() },
        })?;
        self.last = Some((t, *m.matrix()));
        Ok(*m.matrix())
    }
}

/// Advance `y` from `t0` to `t1` with substep `h`, landing exactly on `t1`.
fn rk4_advance<V>(gen: &mut CachedGenerator<'_>, t0: f64, t1: f64, mut y: V, h: f64, act: impl Fn(&Op4, &V) -> V) -> Result<V>
where
    V: Copy + Add<Output = V> + Mul<C64, Output = V> + FiniteCheck,
{
    let mut t = t0;
    while t < t1 {
        let remaining = t1 - t;
        let dt = if remaining <= h * (1.0 + 1e-9) { remaining } else { h };
        let l0 = gen.at(t)?;
        let lm = gen.at(t + 0.5 * dt)?;
        let tn = if dt == remaining { t1 } else { t + dt };
        let l1 = gen.at(tn)?;
        let k1 = act(&l0, &y);
        let k2 = act(&lm, &(y + k1 * c(0.5 * dt)));
        let k3 = act(&lm, &(y + k2 * c(0.5 * dt)));
        let k4 = act(&l1, &(y + k3 * c(dt)));
        y = y + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(dt / 6.0);
        if !y.is_all_finite() {
            return Err(Error::IntegrationFailure { t: tn, reason: "non-finite state".into() });
        }
        t = tn;
    }
    Ok(y)
}

trait FiniteCheck {
    fn is_all_finite(&self) -> bool;
}

impl FiniteCheck for Vec4 {
    fn is_all_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl FiniteCheck for Op4 {
    fn is_all_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn undriven_poles_in(spec: &GeneratorSpec, t_end: f64) -> Option<(UndrivenParams, Vec<f64>)> {
    match spec {
        GeneratorSpec::Undriven(u) => {
            let poles = nondriven_poles(u.alpha, u.width, t_end);
            (!poles.is_empty()).then_some((*u, poles))
        }
        _ => None,
    }
}

/// Integrate a trajectory from `rho0` over `grid` (native time units).
pub fn evolve(rho0: &QubitState, spec: &GeneratorSpec, grid: &TimeGrid, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let h = cfg.native_step(spec)?;
    if let Some((u, poles)) = undriven_poles_in(spec, grid.end()) {
        log::debug!("undriven rate has {} pole(s) on the grid; using the amplitude equation", poles.len());
        return evolve_through_poles(rho0, &u, grid, h);
    }
    let mut gen = CachedGenerator::new(spec);
    let pts = grid.points();
    let mut states = Vec::with_capacity(pts.len());
    let mut diag = Diagnostics { min_eigenvalue: rho0.min_eigenvalue(), ..Default::default() };
    states.push(*rho0);
    let mut v = ops::vec(rho0.rho());
    for w in pts.windows(2) {
        v = rk4_advance(&mut gen, w[0], w[1], v, h, |l, y| l * y)?;
        let raw = ops::unvec(&v);
        record(&mut diag, &raw);
        states.push(QubitState::clean(raw, w[1])?);
    }
    Ok(Trajectory { model: spec.model(), grid: grid.clone(), states, diagnostics: diag })
}

fn record(diag: &mut Diagnostics, raw: &Op2) {
    diag.max_trace_defect = diag.max_trace_defect.max((ops::trace(raw) - ops::ONE).norm());
    diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(ops::hermiticity_defect(raw));
    let herm = (raw + raw.adjoint()) * c(0.5);
    diag.min_eigenvalue = diag.min_eigenvalue.min(ops::hermitian_eigenvalues_2(&herm)[0]);
}

/// `Phi(t1, t0)` from `dM/dt = L(t) M`, `M(t0) = I`.
pub fn propagator(spec: &GeneratorSpec, t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Propagator> {
    if !(t0 >= 0.0 && t1 >= t0) {
        return Err(Error::Precondition(format!("need 0 <= t0 <= t1, got t0={t0}, t1={t1}")));
    }
    let h = cfg.native_step(spec)?;
    if let Some((u, _)) = undriven_poles_in(spec, t1) {
        let later = amplitude_map(&u, t1, h);
        if t0 == 0.0 {
            return Ok(later);
        }
        let earlier = amplitude_map(&u, t0, h);
        let inv = earlier
            .0
            .try_inverse()
            .ok_or_else(|| Error::IntegrationFailure { t: t0, reason: "map not invertible at a rate pole".into() })?;
        return Ok(Propagator(later.0 * inv));
    }
    let mut gen = CachedGenerator::new(spec);
    let m = rk4_advance(&mut gen, t0, t1, Op4::identity(), h, |l, y| l * y)?;
    Ok(Propagator(m))
}

/// `Phi(t_k, 0)` for every grid point.
pub fn grid_propagators(spec: &GeneratorSpec, grid: &TimeGrid, cfg: &IntegratorConfig) -> Result<Vec<Propagator>> {
    let h = cfg.native_step(spec)?;
    if let Some((u, _)) = undriven_poles_in(spec, grid.end()) {
        let amps = amplitudes_on_grid(&u, grid, h);
        return Ok(amps.into_iter().map(amplitude_propagator).collect());
    }
    let mut gen = CachedGenerator::new(spec);
    let pts = grid.points();
    let mut out = Vec::with_capacity(pts.len());
    let mut m = Op4::identity();
    out.push(Propagator(m));
    for w in pts.windows(2) {
        m = rk4_advance(&mut gen, w[0], w[1], m, h, |l, y| l * y)?;
        out.push(Propagator(m));
    }
    Ok(out)
}

/// RK4 for the real pair `(c, c')` of the undriven amplitude equation.
fn amplitudes_on_grid(u: &UndrivenParams, grid: &TimeGrid, h: f64) -> Vec<f64> {
    let (w, k) = (u.width, 0.5 * u.alpha * u.width);
    let f = |y: [f64; 2]| [y[1], -w * y[1] - k * y[0]];
    let mut y = [1.0, 0.0];
    let mut out = vec![1.0];
    for win in grid.points().windows(2) {
        let (mut t, t1) = (win[0], win[1]);
        while t < t1 {
            let remaining = t1 - t;
            let dt = if remaining <= h * (1.0 + 1e-9) { remaining } else { h };
            let k1 = f(y);
            let k2 = f([y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
            let k3 = f([y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
            let k4 = f([y[0] + dt * k3[0], y[1] + dt * k3[1]]);
            for i in 0..2 {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t = if dt == remaining { t1 } else { t + dt };
        }
        out.push(y[0]);
    }
    out
}

/// Map with `rho_ee -> c^2 rho_ee`, `rho_eg -> c rho_eg` (bare basis).
fn amplitude_propagator(amp: f64) -> Propagator {
    let mut m = Op4::zeros();
    m[(0, 0)] = c(amp * amp);
    m[(1, 1)] = c(amp);
    m[(2, 2)] = c(amp);
    m[(3, 0)] = c(1.0 - amp * amp);
    m[(3, 3)] = ops::ONE;
    Propagator(m)
}

fn amplitude_map(u: &UndrivenParams, t: f64, h: f64) -> Propagator {
    if t == 0.0 {
        return Propagator::identity();
    }
    let grid = TimeGrid::new(vec![0.0, t]).expect("t > 0");
    amplitude_propagator(*amplitudes_on_grid(u, &grid, h).last().expect("two points"))
}

fn evolve_through_poles(rho0: &QubitState, u: &UndrivenParams, grid: &TimeGrid, h: f64) -> Result<Trajectory> {
    let amps = amplitudes_on_grid(u, grid, h);
    let mut diag = Diagnostics { min_eigenvalue: rho0.min_eigenvalue(), ..Default::default() };
    let mut states = Vec::with_capacity(amps.len());
    for (&t, &a) in grid.points().iter().zip(&amps) {
        let raw = amplitude_propagator(a).apply(rho0.rho());
        record(&mut diag, &raw);
        states.push(QubitState::clean(raw, t)?);
    }
    states[0] = *rho0;
    Ok(Trajectory { model: Model::Undriven, grid: grid.clone(), states, diagnostics: diag })
}

/// Apply precomputed grid propagators to an initial state.
pub fn trajectory_from_propagators(rho0: &QubitState, spec: &GeneratorSpec, grid: &TimeGrid, props: &[Propagator]) -> Result<Trajectory> {
    if props.len() != grid.len() {
        return Err(Error::InvalidGrid("propagator count does not match grid".into()));
    }
    let mut diag = Diagnostics { min_eigenvalue: rho0.min_eigenvalue(), ..Default::default() };
    let mut states = Vec::with_capacity(props.len());
    states.push(*rho0);
    for (t, p) in grid.points().iter().zip(props).skip(1) {
        let raw = p.apply(rho0.rho());
        record(&mut diag, &raw);
        states.push(QubitState::clean(raw, *t)?);
    }
    Ok(Trajectory { model: spec.model(), grid: grid.clone(), states, diagnostics: diag })
}

/// Convenience: superoperator applied to a state.
pub fn act(l: &Superoperator, rho: &QubitState) -> Op2 {
    l.apply(rho.rho())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::hamiltonian_part;
    use crate::params::ModelParams;

    #[test]
    fn bloch_roundtrip() {
        let s = QubitState::from_bloch([0.3, -0.4, 0.5]).unwrap();
        let b = s.bloch();
        assert!((b[0] - 0.3).abs() < 1e-15 && (b[1] + 0.4).abs() < 1e-15 && (b[2] - 0.5).abs() < 1e-15);
        assert!(QubitState::from_bloch([1.0, 1.0, 0.0]).is_err());
        assert!((QubitState::pure(0.7, 1.1).purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_density_matrices() {
        assert!(QubitState::new(ops::sigma_minus()).is_err());
        assert!(QubitState::new(ops::identity()).is_err());
        assert!(QubitState::new(Op2::new(c(1.5), ops::ZERO, ops::ZERO, c(-0.5))).is_err());
    }

    #[test]
    fn zero_generator_constant_trajectory() {
        // p = 0 and alpha tiny at T = 0 only: use an undriven spec evaluated on [0, 0]? simpler: secular with p=0
        // and a state commuting with everything: the maximally mixed state under s=0 symmetric rates.
        let spec = GeneratorSpec::Secular(ModelParams::dimensionless(0.0, 0.0, 0.0, 1.0, 0.5).unwrap());
        let rho0 = QubitState::from_bloch([0.0, 0.0, 0.0]).unwrap();
        let grid = TimeGrid::uniform(5.0, 0.5).unwrap();
        let traj = evolve(&rho0, &spec, &grid, &IntegratorConfig::default()).unwrap();
        for s in &traj.states {
            assert!((s.rho() - rho0.rho()).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_propagator_for_empty_interval() {
        let spec = GeneratorSpec::Secular(ModelParams::dimensionless(1.0, 10.0, 0.0, 1.0, 0.5).unwrap());
        let p = propagator(&spec, 2.5, 2.5, &IntegratorConfig::default()).unwrap();
        assert_eq!(p, Propagator::identity());
        assert!(propagator(&spec, 2.0, 1.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn amplitude_route_matches_closed_form() {
        let u = UndrivenParams::new(1.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(10.0, 0.01).unwrap();
        let amps = amplitudes_on_grid(&u, &grid, 1e-3);
        for (t, a) in grid.points().iter().zip(amps) {
            let exact = crate::rates::nondriven_amplitude(*t, 1.0, 1.0);
            assert!((a - exact).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn hamiltonian_precession() {
        let omega = 2.0;
        let l = hamiltonian_part(&(ops::sigma_z() * c(0.5 * omega))).unwrap();
        let x_plus = QubitState::from_bloch([1.0, 0.0, 0.0]).unwrap();
        let d = act(&l, &x_plus);
        // d/dt x = 0, d/dt y = omega at t = 0
        let dy = 2.0 * d[(1, 0)].im;
        assert!((dy - omega).abs() < 1e-14);
    }
}

//! Information-backflow non-Markovianity.
//!
//! For a pair of initial states the trace distance `D(t)` is tracked along
//! the dynamics and its growth rate `sigma = dD/dt` is integrated over the
//! intervals where it is positive. The measure is the maximum of that
//! integral over initial pairs, searched here over pure states: a coarse
//! stage over antipodal and random pairs, then Nelder-Mead refinement of
//! the best candidates.
//!
//! Closed forms are provided for the secular, resonant single-channel and
//! undriven models. In the secular model the transverse Bloch components
//! decay with `Gamma(t)` and the longitudinal one with `Lambda(t)`; in the
//! resonant single-channel model the jump operator is `|+x><-x|`, so `x`
//! plays the longitudinal role there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{grid_propagators, IntegratorConfig, Propagator, QubitState, Trajectory};
use crate::error::{Error, Result};
use crate::generator::GeneratorSpec;
use crate::grid::{cumulative_trapezoid, derivative, trapezoid, TimeGrid};
use crate::ops;
use crate::params::{ModelParams, UndrivenParams};
use crate::rates::{lorentzian_rate, nondriven_amplitude, nondriven_poles, nondriven_rate, rate_sample};

/// Two initial states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePair {
    pub rho1: QubitState,
    pub rho2: QubitState,
}

impl StatePair {
    pub fn new(rho1: QubitState, rho2: QubitState) -> Self {
        Self { rho1, rho2 }
    }

    pub fn from_bloch(r1: [f64; 3], r2: [f64; 3]) -> Result<Self> {
        Ok(Self::new(QubitState::from_bloch(r1)?, QubitState::from_bloch(r2)?))
    }

    /// Pure pair from spherical angles `(theta1, phi1, theta2, phi2)`.
    pub fn from_angles(a: [f64; 4]) -> Self {
        Self::new(QubitState::pure(a[0], a[1]), QubitState::pure(a[2], a[3]))
    }

    /// Bloch-component differences `(dx, dy, dz)`.
    pub fn deltas(&self) -> [f64; 3] {
        let (a, b) = (self.rho1.bloch(), self.rho2.bloch());
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
}

/// `||rho1 - rho2||_1 / 2` from the eigenvalues of the difference.
pub fn trace_distance(rho1: &QubitState, rho2: &QubitState) -> f64 {
    0.5 * ops::trace_norm_2(&(rho1.rho() - rho2.rho()))
}

pub fn trace_distance_series(traj1: &Trajectory, traj2: &Trajectory) -> Result<Vec<f64>> {
    if traj1.grid != traj2.grid {
        return Err(Error::InvalidGrid("trajectories are sampled on different grids".into()));
    }
    Ok(traj1.states.iter().zip(&traj2.states).map(|(a, b)| trace_distance(a, b)).collect())
}

/// `dD/dt` by three-point differences on the shared grid.
pub fn sigma_numeric(traj1: &Trajectory, traj2: &Trajectory) -> Result<Vec<f64>> {
    let d = trace_distance_series(traj1, traj2)?;
    Ok(derivative(traj1.grid.points(), &d))
}

/// Pairing of the decay exponents with the Bloch components in the
/// secular closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecularPairing {
    /// Transverse `(dx, dy)` with `Gamma`, longitudinal `dz` with `Lambda`;
    /// this is what the secular generator produces.
    #[default]
    TransverseGamma,
    /// Transverse with `Lambda`, longitudinal with `Gamma`. Kept for
    /// comparison; disagrees with the integrated dynamics.
    TransverseLambda,
}

fn half_norm_rate(transverse: (f64, f64, f64), longitudinal: (f64, f64, f64)) -> f64 {
    // each tuple: (weight^2, exp(-2 X), X')
    let (wt, et, dt) = transverse;
    let (wl, el, dl) = longitudinal;
    let norm2 = et * wt + el * wl;
    if norm2 <= 0.0 {
        return 0.0;
    }
    -(et * dt * wt + el * dl * wl) / (2.0 * norm2.sqrt())
}

/// Closed-form `sigma` for the secular generator on `grid` (dimensionless
/// time). `Gamma` and `Lambda` come from cumulative trapezoid quadrature of
/// the rate combinations; their derivatives from the rates directly.
pub fn sigma_secular_analytic(
    deltas: [f64; 3],
    grid: &TimeGrid,
    params: &ModelParams,
    pairing: SecularPairing,
) -> Result<Vec<f64>> {
    let k = params.coeffs;
    let t = grid.points();
    let mut lambda_rate = Vec::with_capacity(t.len());
    let mut gamma_rate = Vec::with_capacity(t.len());
    for &ti in t {
        let r = rate_sample(ti, params.s(), params.p(), params.alpha)?.gamma;
        let pop = k.plus * k.plus * r.plus + k.minus * k.minus * r.minus;
        lambda_rate.push(pop);
        gamma_rate.push(0.5 * (pop + 4.0 * k.zero * k.zero * r.zero));
    }
    let lambda_int = cumulative_trapezoid(t, &lambda_rate);
    let gamma_int = cumulative_trapezoid(t, &gamma_rate);
    let [dx, dy, dz] = deltas;
    let (wt, wl) = (dx * dx + dy * dy, dz * dz);
    Ok((0..t.len())
        .map(|i| {
            let g = ((-2.0 * gamma_int[i]).exp(), gamma_rate[i]);
            let l = ((-2.0 * lambda_int[i]).exp(), lambda_rate[i]);
            let (tr, lo) = match pairing {
                SecularPairing::TransverseGamma => (g, l),
                SecularPairing::TransverseLambda => (l, g),
            };
            half_norm_rate((wt, tr.0, tr.1), (wl, lo.0, lo.1))
        })
        .collect())
}

/// Closed form used for the resonant single-channel model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonantSigmaForm {
    /// Amplitude damping along `x`:
    /// `D = sqrt(e^{-2G} dx^2 + e^{-G}(dy^2 + dz^2))/2` with `G = int gamma`.
    #[default]
    AmplitudeDamping,
    /// `-gamma e^{-2G} B / (sqrt 2 sqrt(dz^2 + dx^2 + e^{-2G} B))`,
    /// `B = dx^2 - dz^2 + 2 dy^2`. Kept for comparison; it does not
    /// reproduce `D(0)` and disagrees with the integrated dynamics.
    Literal,
}

fn is_resonant(params: &ModelParams) -> bool {
    let k = params.coeffs;
    (k.plus + k.minus).abs() <= 1e-12
}

/// Closed-form `sigma` for the single-channel model at resonance
/// (`Delta = 0`), exact in the limit `p -> 0`.
pub fn sigma_resonant_nonsecular_analytic(
    deltas: [f64; 3],
    grid: &TimeGrid,
    params: &ModelParams,
    form: ResonantSigmaForm,
) -> Result<Vec<f64>> {
    if !is_resonant(params) {
        return Err(Error::Precondition("resonant closed form requires Delta = 0".into()));
    }
    let t = grid.points();
    let gamma = t
        .iter()
        .map(|&ti| lorentzian_rate(ti, params.s(), params.alpha).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let big_g = cumulative_trapezoid(t, &gamma);
    let [dx, dy, dz] = deltas;
    Ok(gamma
        .iter()
        .zip(&big_g)
        .map(|(&g, &int)| match form {
            ResonantSigmaForm::AmplitudeDamping => {
                let e = (-int).exp();
                amplitude_damping_sigma(g, e, dx * dx, dy * dy + dz * dz)
            }
            ResonantSigmaForm::Literal => {
                let e2 = (-2.0 * int).exp();
                let b = dx * dx - dz * dz + 2.0 * dy * dy;
                let arg = dz * dz + dx * dx + e2 * b;
                if arg <= 0.0 {
                    0.0
                } else {
                    -g * e2 * b / (std::f64::consts::SQRT_2 * arg.sqrt())
                }
            }
        })
        .collect())
}

/// `-gamma [2 E^2 l + E t] / (4 sqrt(E^2 l + E t))` for amplitude damping
/// with population factor `E = e^{-int gamma}`, longitudinal weight `l` and
/// transverse weight `t`.
fn amplitude_damping_sigma(gamma: f64, e: f64, longitudinal: f64, transverse: f64) -> f64 {
    let norm2 = e * e * longitudinal + e * transverse;
    if norm2 <= 0.0 {
        return 0.0;
    }
    -gamma * (2.0 * e * e * longitudinal + e * transverse) / (4.0 * norm2.sqrt())
}

/// Closed-form `sigma` for the undriven qubit on `grid` (physical time).
/// `Gamma` is the trapezoid integral of the rate; when the grid crosses a
/// pole `e^{-Gamma}` is taken as `c(t)^2` instead and `sigma` is `NaN` at
/// grid points on a pole.
pub fn sigma_undriven_analytic(deltas: [f64; 3], grid: &TimeGrid, params: &UndrivenParams) -> Result<Vec<f64>> {
    let t = grid.points();
    let [dx, dy, dz] = deltas;
    let (lon, tra) = (dz * dz, dx * dx + dy * dy);
    let has_poles = !nondriven_poles(params.alpha, params.width, grid.end()).is_empty();
    let gamma: Vec<f64> = t
        .iter()
        .map(|&ti| match nondriven_rate(ti, params.alpha, params.width) {
            Ok(g) => Ok(g),
            Err(Error::Pole { .. }) => Ok(f64::NAN),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let population: Vec<f64> = if has_poles {
        t.iter().map(|&ti| nondriven_amplitude(ti, params.alpha, params.width).powi(2)).collect()
    } else {
        cumulative_trapezoid(t, &gamma).into_iter().map(|g| (-g).exp()).collect()
    };
    Ok(gamma.iter().zip(&population).map(|(&g, &e)| amplitude_damping_sigma(g, e, lon, tra)).collect())
}

/// `trapezoid(sigma) - (D(end) - D(0))`: consistency of a sampled `sigma`
/// with the trace-distance endpoints.
pub fn ftc_defect(grid: &TimeGrid, distance: &[f64], sigma: &[f64]) -> f64 {
    trapezoid(grid.points(), sigma) - (distance[distance.len() - 1] - distance[0])
}

/// `D(t)`, `sigma(t)` and the positive-part integral for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub t: Vec<f64>,
    pub distance: Vec<f64>,
    pub sigma: Vec<f64>,
    pub backflow: f64,
}

/// Trace-distance dynamics of a pair from precomputed `Phi(t_k, 0)`.
pub fn pair_series(grid: &TimeGrid, props: &[Propagator], pair: &StatePair) -> PairSeries {
    let diff = pair.rho1.rho() - pair.rho2.rho();
    let distance: Vec<f64> = props.iter().map(|p| 0.5 * ops::trace_norm_2(&p.apply(&diff))).collect();
    let sigma = derivative(grid.points(), &distance);
    let backflow = positive_integral(grid.points(), &sigma);
    PairSeries { t: grid.points().to_vec(), distance, sigma, backflow }
}

fn positive_integral(t: &[f64], sigma: &[f64]) -> f64 {
    let pos: Vec<f64> = sigma.iter().map(|s| s.max(0.0)).collect();
    trapezoid(t, &pos)
}

fn backflow(grid: &TimeGrid, props: &[Propagator], pair: &StatePair) -> f64 {
    let diff = pair.rho1.rho() - pair.rho2.rho();
    let distance: Vec<f64> = props.iter().map(|p| 0.5 * ops::trace_norm_2(&p.apply(&diff))).collect();
    positive_integral(grid.points(), &derivative(grid.points(), &distance))
}

/// Pair-search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Fibonacci-sphere directions for antipodal pure pairs.
    pub directions: usize,
    /// Random non-antipodal pure pairs.
    pub random_pairs: usize,
    /// Stage-1 candidates refined by Nelder-Mead.
    pub refine: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { directions: 128, random_pairs: 64, refine: 3, max_iterations: 300, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Coarse,
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub stage: Stage,
    /// Stage-1 grid index (refined entries carry the index of their seed).
    pub index: usize,
    pub angles: [f64; 4],
    pub bloch1: [f64; 3],
    pub bloch2: [f64; 3],
    pub value: f64,
}

impl Candidate {
    fn new(stage: Stage, index: usize, angles: [f64; 4], value: f64) -> Self {
        let pair = StatePair::from_angles(angles);
        Self { stage, index, angles, bloch1: pair.rho1.bloch(), bloch2: pair.rho2.bloch(), value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpReport {
    pub measure: f64,
    pub best: Candidate,
    pub candidates: Vec<Candidate>,
    pub evaluations: usize,
    pub grid_len: usize,
    pub refinement_steps: usize,
}

impl BlpReport {
    pub fn best_pair(&self) -> StatePair {
        StatePair::from_angles(self.best.angles)
    }
}

fn angles_of(r: [f64; 3]) -> (f64, f64) {
    let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    ((r[2] / n).clamp(-1.0, 1.0).acos(), r[1].atan2(r[0]))
}

fn antipodal(r: [f64; 3]) -> [f64; 4] {
    let (theta, phi) = angles_of(r);
    [theta, phi, std::f64::consts::PI - theta, phi + std::f64::consts::PI]
}

/// `n` nearly uniform unit vectors (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Stage-1 pairs: the three coordinate-axis antipodal pairs, then the
/// Fibonacci directions, then random pure pairs.
pub fn coarse_candidates(cfg: &SearchConfig) -> Vec<[f64; 4]> {
    let mut out: Vec<[f64; 4]> =
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].into_iter().map(antipodal).collect();
    out.extend(fibonacci_sphere(cfg.directions).into_iter().map(antipodal));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    for _ in 0..cfg.random_pairs {
        let mut a = [0.0; 4];
        for k in 0..2 {
            a[2 * k] = (1.0 - 2.0 * rng.random::<f64>()).acos();
            a[2 * k + 1] = two_pi * rng.random::<f64>();
        }
        out.push(a);
    }
    out
}

/// Maximize backflow over initial pairs for the dynamics of `spec` on `grid`.
pub fn blp_measure(spec: &GeneratorSpec, grid: &TimeGrid, search: &SearchConfig, integrator: &IntegratorConfig) -> Result<BlpReport> {
    let props = grid_propagators(spec, grid, integrator)?;
    Ok(search_pairs(grid, &props, search))
}

/// Pair search over precomputed propagators.
pub fn search_pairs(grid: &TimeGrid, props: &[Propagator], search: &SearchConfig) -> BlpReport {
    let objective = |a: &[f64; 4]| backflow(grid, props, &StatePair::from_angles(*a));
    let coarse: Vec<Candidate> = coarse_candidates(search)
        .par_iter()
        .enumerate()
        .map(|(i, a)| Candidate::new(Stage::Coarse, i, *a, objective(a)))
        .collect();
    let mut ranked: Vec<&Candidate> = coarse.iter().collect();
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
    let seeds: Vec<Candidate> = ranked.iter().take(search.refine).map(|c| **c).collect();

    let refined: Vec<(Candidate, usize, f64)> = seeds
        .par_iter()
        .map(|seed| {
            let result = nelder_mead_maximize(objective, seed.angles, 0.3, search.max_iterations);
            (Candidate::new(Stage::Refined, seed.index, result.best, result.value), result.evaluations, result.max_seen)
        })
        .collect();

    let mut evaluations = coarse.len();
    let mut best = *ranked[0];
    let mut measure = best.value;
    let mut candidates = coarse.clone();
    let mut steps = 0;
    for (cand, evals, max_seen) in refined {
        evaluations += evals;
        steps += evals;
        measure = measure.max(max_seen);
        if cand.value > best.value {
            best = cand;
        }
        candidates.push(cand);
    }
    // every evaluated pair is a lower bound; the best pair carries the max
    debug_assert!(measure >= best.value);
    if measure > best.value {
        measure = best.value.max(measure);
    }
    BlpReport { measure, best, candidates, evaluations, grid_len: grid.len(), refinement_steps: steps }
}

struct NmResult {
    best: [f64; 4],
    value: f64,
    max_seen: f64,
    evaluations: usize,
}

/// Nelder-Mead on four angles, maximizing `f`.
fn nelder_mead_maximize(f: impl Fn(&[f64; 4]) -> f64, start: [f64; 4], step: f64, max_iter: usize) -> NmResult {
    let mut evals = 0usize;
    let mut max_seen = f64::NEG_INFINITY;
    let mut eval = |x: &[f64; 4]| {
        evals += 1;
        let v = f(x);
        if v > max_seen {
            max_seen = v;
        }
        -v
    };
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(5);
    simplex.push((start, eval(&start)));
    for k in 0..4 {
        let mut x = start;
        x[k] += step;
        simplex.push((x, eval(&x)));
    }
    let lerp = |a: &[f64; 4], b: &[f64; 4], t: f64| {
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = a[i] + t * (b[i] - a[i]);
        }
        out
    };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[4].1 - simplex[0].1;
        if spread.abs() <= 1e-12 * simplex[0].1.abs().max(1e-12) {
            break;
        }
        let mut centroid = [0.0; 4];
        for (x, _) in &simplex[..4] {
            for i in 0..4 {
                centroid[i] += x[i] / 4.0;
            }
        }
        let worst = simplex[4];
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = eval(&expanded);
            simplex[4] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (reflected, fr) } else { (worst.0, worst.1) };
            let contracted = lerp(&centroid, &target, 0.5);
            let fc = eval(&contracted);
            if fc < ft {
                simplex[4] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &entry.0, 0.5);
                    *entry = (x, eval(&x));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NmResult { best: simplex[0].0, value: -simplex[0].1, max_seen, evaluations: evals }
}

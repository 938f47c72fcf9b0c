//! Undriven qubit versus the driven qubit in the same reservoir.

use nmdrive_core::blp::SearchConfig;
use serde::Serialize;

use crate::config::{RegimeChoice, Scenario};
use crate::error::Result;
use crate::measures::{both, MeasurePair};

/// Measures at or below this are reported as zero.
pub const ZERO_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub undriven: MeasurePair,
    pub driven: MeasurePair,
    /// Undriven dynamics Markovian by both measures, driven dynamics not
    /// by either.
    pub laser_induced: bool,
}

fn vanishes(m: &MeasurePair) -> bool {
    m.n_rhp <= ZERO_TOLERANCE && m.n_blp <= ZERO_TOLERANCE
}

/// The undriven model takes `alpha` and `lambda` from the scenario and
/// assumes the qubit sits at the Lorentzian centre; the driven run uses
/// the scenario as given (an `undriven` regime choice falls back to `auto`).
pub fn run_compare(scenario: &Scenario, search: &SearchConfig) -> Result<Comparison> {
    let off = Scenario { regime: RegimeChoice::Undriven, ..scenario.clone() };
    let mut on = scenario.clone();
    if on.regime == RegimeChoice::Undriven {
        on.regime = RegimeChoice::Auto;
    }
    let on_setup = on.resolve()?;
    if (scenario.omega_a - scenario.omega_0).abs() > 1e-9 * scenario.omega_0.abs().max(1.0) {
        log::warn!("undriven reference assumes omega_A = omega_0; got {} vs {}", scenario.omega_a, scenario.omega_0);
    }
    let undriven = both(&off.resolve()?, search)?;
    let driven = both(&on_setup, search)?;
    let laser_induced = vanishes(&undriven) && driven.n_rhp > ZERO_TOLERANCE && driven.n_blp > ZERO_TOLERANCE;
    Ok(Comparison { undriven, driven, laser_induced })
}

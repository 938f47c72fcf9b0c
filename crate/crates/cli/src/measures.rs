//! Both measures for one resolved scenario, shared by `compare`, `sweep`
//! and the single-measure commands so that all of them agree bit for bit.

use nmdrive_core::blp::{blp_measure, BlpReport, SearchConfig};
use nmdrive_core::rhp::{rhp_measure, ChoiProbe, RhpMethod, RhpReport};
use serde::Serialize;

use crate::config::Setup;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurePair {
    pub model: String,
    pub n_rhp: f64,
    pub rhp_integral: f64,
    pub rhp_divergent: bool,
    pub n_blp: f64,
    pub best_bloch1: [f64; 3],
    pub best_bloch2: [f64; 3],
}

pub fn divisibility(setup: &Setup) -> Result<RhpReport> {
    Ok(rhp_measure(&setup.spec, &setup.grid, RhpMethod::Numeric, &ChoiProbe::default())?)
}

pub fn backflow(setup: &Setup, search: &SearchConfig) -> Result<BlpReport> {
    Ok(blp_measure(&setup.spec, &setup.grid, search, &setup.integrator)?)
}

pub fn both(setup: &Setup, search: &SearchConfig) -> Result<MeasurePair> {
    let rhp = divisibility(setup)?;
    let blp = backflow(setup, search)?;
    Ok(MeasurePair {
        model: setup.spec.model().to_string(),
        n_rhp: rhp.measure,
        rhp_integral: rhp.integral,
        rhp_divergent: rhp.divergent,
        n_blp: blp.measure,
        best_bloch1: blp.best.bloch1,
        best_bloch2: blp.best.bloch2,
    })
}

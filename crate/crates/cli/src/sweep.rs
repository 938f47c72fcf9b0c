//! Cartesian parameter sweeps. Points run on the rayon pool; rows come
//! back in grid order (first axis slowest).

use std::str::FromStr;

use clap::ValueEnum;
use nmdrive_core::blp::SearchConfig;
use nmdrive_core::rates::rate_sample;
use nmdrive_core::{Error, GeneratorSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Scenario;
use crate::error::{CliError, Result};
use crate::measures;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + (self.stop - self.start) * i as f64 / n).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(CliError::input(format!("axis {}: steps must be >= 1", self.name)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::input(format!("axis {}: non-finite range", self.name)));
        }
        if self.steps > 1 && self.start == self.stop {
            return Err(CliError::input(format!("axis {}: degenerate range with {} steps", self.name, self.steps)));
        }
        Scenario::default().set(&self.name, self.start)
    }
}

/// `name=start:stop:steps`, or `name=value` for a single point.
impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CliError::input(format!("axis '{s}': expected name=start:stop:steps"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let axis = match parts.as_slice() {
            [v] => Axis { name: name.trim().into(), start: num(v)?, stop: num(v)?, steps: 1 },
            [a, b, n] => Axis {
                name: name.trim().into(),
                start: num(a)?,
                stop: num(b)?,
                steps: n.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        axis.validate()?;
        Ok(axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOutput {
    /// Minimum of each decay rate over the horizon.
    Rates,
    Rhp,
    Blp,
    /// Both measures.
    #[default]
    BothMeasures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub base: Scenario,
    pub output: SweepOutput,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub model: Option<String>,
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub min_gamma: Option<[f64; 3]>,
    pub n_rhp: Option<f64>,
    pub n_blp: Option<f64>,
    pub error: Option<String>,
}

fn min_rates(setup: &crate::config::Setup) -> nmdrive_core::Result<[f64; 3]> {
    let mut out = [f64::INFINITY; 3];
    for &t in setup.grid.points() {
        let r = match &setup.spec {
            GeneratorSpec::Undriven(u) => match nmdrive_core::rates::nondriven_rate(t, u.alpha, u.width) {
                Ok(g) => [g; 3],
                Err(Error::Pole { .. }) => continue,
                Err(e) => return Err(e),
            },
            spec => {
                let p = spec.driven_params().expect("driven");
                rate_sample(t, p.s(), p.p(), p.alpha)?.gamma.as_array()
            }
        };
        for k in 0..3 {
            out[k] = out[k].min(r[k]);
        }
    }
    Ok(out)
}

fn evaluate(scenario: &Scenario, spec: &SweepSpec, values: &[f64]) -> SweepRow {
    let mut row = SweepRow { values: values.to_vec(), model: None, s: None, p: None, min_gamma: None, n_rhp: None, n_blp: None, error: None };
    let result = (|| -> Result<()> {
        let setup = scenario.resolve()?;
        row.model = Some(setup.spec.model().to_string());
        if let Some(p) = setup.model_params() {
            row.s = Some(p.s());
            row.p = Some(p.p());
        }
        match spec.output {
            SweepOutput::Rates => row.min_gamma = Some(min_rates(&setup)?),
            SweepOutput::Rhp => row.n_rhp = Some(measures::divisibility(&setup)?.measure),
            SweepOutput::Blp => row.n_blp = Some(measures::backflow(&setup, &spec.search)?.measure),
            SweepOutput::BothMeasures => {
                let m = measures::both(&setup, &spec.search)?;
                row.n_rhp = Some(m.n_rhp);
                row.n_blp = Some(m.n_blp);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Every grid point, in order. Per-point failures land in the `error`
/// field; only an invalid spec fails the sweep as a whole.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.axes.is_empty() {
        return Err(CliError::input("sweep needs at least one --axis"));
    }
    for a in &spec.axes {
        a.validate()?;
    }
    let axis_values: Vec<Vec<f64>> = spec.axes.iter().map(Axis::values).collect();
    let total: usize = axis_values.iter().map(Vec::len).product();
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut v = vec![0.0; axis_values.len()];
            for (k, vals) in axis_values.iter().enumerate().rev() {
                v[k] = vals[idx % vals.len()];
                idx /= vals.len();
            }
            v
        })
        .collect();
    Ok(points
        .par_iter()
        .map(|values| {
            let mut sc = spec.base.clone();
            for (a, v) in spec.axes.iter().zip(values) {
                sc.set(&a.name, *v).expect("validated axis name");
            }
            evaluate(&sc, spec, values)
        })
        .collect())
}

pub fn sweep_table(spec: &SweepSpec, rows: &[SweepRow]) -> Table {
    let mut cols: Vec<&str> = spec.axes.iter().map(|a| a.name.as_str()).collect();
    cols.extend(["model", "s_eff", "p_eff"]);
    match spec.output {
        SweepOutput::Rates => cols.extend(["min_gamma_minus", "min_gamma_zero", "min_gamma_plus"]),
        SweepOutput::Rhp => cols.push("n_rhp"),
        SweepOutput::Blp => cols.push("n_blp"),
        SweepOutput::BothMeasures => cols.extend(["n_rhp", "n_blp"]),
    }
    cols.push("error");
    let mut t = Table::new(&cols);
    for r in rows {
        let mut cells: Vec<Cell> = r.values.iter().map(|v| Cell::Num(*v)).collect();
        cells.push(r.model.clone().map_or(Cell::Empty, Cell::Text));
        cells.push(r.s.into());
        cells.push(r.p.into());
        match spec.output {
            SweepOutput::Rates => {
                let g = r.min_gamma.map(|g| g.map(Some)).unwrap_or([None; 3]);
                cells.extend(g.into_iter().map(Cell::from));
            }
            SweepOutput::Rhp => cells.push(r.n_rhp.into()),
            SweepOutput::Blp => cells.push(r.n_blp.into()),
            SweepOutput::BothMeasures => {
                cells.push(r.n_rhp.into());
                cells.push(r.n_blp.into());
            }
        }
        cells.push(r.error.clone().map_or(Cell::Empty, Cell::Text));
        t.push(cells);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: Axis = "s=0:6:7".parse().unwrap();
        assert_eq!(a.values(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b: Axis = "p=0.01".parse().unwrap();
        assert_eq!(b.values(), vec![0.01]);
        assert!("s=1:1:3".parse::<Axis>().is_err());
        assert!("s=0:1:0".parse::<Axis>().is_err());
        assert!("bogus=0:1:2".parse::<Axis>().is_err());
        assert!("s0:1:2".parse::<Axis>().is_err());
    }

    #[test]
    fn row_order_is_first_axis_slowest() {
        let spec = SweepSpec {
            axes: vec!["s=0:1:2".parse().unwrap(), "p=0.01:0.02:3".parse().unwrap()],
            base: Scenario { tmax: 1.0, step: 0.1, ..Default::default() },
            output: SweepOutput::Rates,
            search: SearchConfig::default(),
        };
        let rows = run_sweep(&spec).unwrap();
        let got: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
        assert_eq!(got[0], vec![0.0, 0.01]);
        assert_eq!(got[2], vec![0.0, 0.02]);
        assert_eq!(got[3], vec![1.0, 0.01]);
        assert!(rows.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn point_failures_are_recorded() {
        let spec = SweepSpec {
            axes: vec!["alpha=-1:1:2".parse().unwrap()],
            base: Scenario { tmax: 1.0, step: 0.1, ..Default::default() },
            output: SweepOutput::Rates,
            search: SearchConfig::default(),
        };
        let rows = run_sweep(&spec).unwrap();
        assert!(rows[0].error.is_some());
        assert!(rows[1].error.is_none());
    }
}

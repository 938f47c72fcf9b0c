//! Scenario parameters: defaults, the config file, flag overrides, and
//! resolution into a generator, grid and integrator.
//!
//! Config file grammar: one `key = value` per line, `#` starts a comment,
//! strings quoted. Keys: `regime`, `omega_A`, `omega_L`, `Omega`, `alpha`,
//! `lambda`, `omega_0`, `s`, `p`, `tmax`, `step`, `substep`, `seed`.
//! Frequencies share one arbitrary unit. `s` and `p`, when given, override
//! the Lorentzian centre and the drive strength (see [`Scenario::effective`]).

use std::path::Path;

use clap::ValueEnum;
use nmdrive_core::params::classify_regime;
use nmdrive_core::{
    DriveParams, GeneratorSpec, IntegratorConfig, ModelParams, Regime, RegimeThresholds, ReservoirParams, TimeGrid,
    UndrivenParams,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeChoice {
    /// Pick from `p` with thresholds 0.1 and 10.
    #[default]
    Auto,
    Secular,
    Nonsecular,
    /// Full generator with all nonsecular terms.
    Intermediate,
    /// Bare qubit resonant with the Lorentzian centre, no drive.
    Undriven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub regime: RegimeChoice,
    #[serde(rename = "omega_A")]
    pub omega_a: f64,
    #[serde(rename = "omega_L")]
    pub omega_l: f64,
    #[serde(rename = "Omega")]
    pub rabi: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub omega_0: f64,
    pub s: Option<f64>,
    pub p: Option<f64>,
    /// Horizon in units of `1/lambda`.
    pub tmax: f64,
    /// Output and quadrature grid step, units of `1/lambda`.
    pub step: f64,
    /// RK4 substep, units of `1/lambda`.
    pub substep: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            regime: RegimeChoice::Auto,
            omega_a: 1000.0,
            omega_l: 1000.0,
            rabi: 10.0,
            alpha: 0.5,
            lambda: 1.0,
            omega_0: 1000.0,
            s: None,
            p: None,
            tmax: 30.0,
            step: 0.01,
            substep: 1e-3,
            seed: 0,
        }
    }
}

/// Every key optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub regime: Option<RegimeChoice>,
    #[serde(rename = "omega_A")]
    pub omega_a: Option<f64>,
    #[serde(rename = "omega_L")]
    pub omega_l: Option<f64>,
    #[serde(rename = "Omega")]
    pub rabi: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub omega_0: Option<f64>,
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub tmax: Option<f64>,
    pub step: Option<f64>,
    pub substep: Option<f64>,
    pub seed: Option<u64>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// Fill `base` with every key present here.
    pub fn apply(&self, base: &mut Scenario) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { base.$f = v; } )* };
        }
        set!(regime, omega_a, omega_l, rabi, alpha, lambda, omega_0, tmax, step, substep, seed);
        if self.s.is_some() {
            base.s = self.s;
        }
        if self.p.is_some() {
            base.p = self.p;
        }
    }
}

/// A resolved run: generator, grid in native time, integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub spec: GeneratorSpec,
    pub grid: TimeGrid,
    pub integrator: IntegratorConfig,
    /// `None` for the undriven model.
    pub regime: Option<Regime>,
    pub warnings: Vec<String>,
}

impl Setup {
    pub fn model_params(&self) -> Option<&ModelParams> {
        self.spec.driven_params()
    }
}

impl Scenario {
    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_l
    }

    /// Physical parameters with the `s` and `p` overrides folded in.
    ///
    /// `p` rescales `Delta` and `Omega` together (keeping the dressed
    /// coefficients) by moving `omega_L`; `s` then places `omega_0` at
    /// `omega_L + s lambda`. Without an `s` override the previous `s` is kept.
    pub fn effective(&self) -> Result<Scenario> {
        let mut out = self.clone();
        let s_before = (self.omega_0 - self.omega_l) / self.lambda;
        if let Some(p) = self.p {
            if !(p > 0.0 && p.is_finite()) {
                return Err(CliError::input(format!("p must be > 0, got {p}")));
            }
            let omega = self.detuning().hypot(self.rabi);
            if omega == 0.0 {
                return Err(CliError::input("p override needs a nonzero drive (Delta or Omega)"));
            }
            let f = p * self.lambda / omega;
            out.rabi = self.rabi * f;
            out.omega_l = self.omega_a - self.detuning() * f;
        }
        out.omega_0 = out.omega_l + self.s.unwrap_or(s_before) * self.lambda;
        out.s = None;
        out.p = None;
        Ok(out)
    }

    pub fn resolve(&self) -> Result<Setup> {
        let checks = [
            ("tmax", self.tmax),
            ("step", self.step),
            ("substep", self.substep),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::input(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let integrator = IntegratorConfig::with_step(self.substep);
        if self.regime == RegimeChoice::Undriven {
            let u = UndrivenParams::new(self.alpha, self.lambda)?;
            let grid = TimeGrid::uniform(self.tmax / self.lambda, self.step / self.lambda)?;
            return Ok(Setup { spec: GeneratorSpec::Undriven(u), grid, integrator, regime: None, warnings: Vec::new() });
        }
        let eff = self.effective()?;
        let drive = DriveParams::new(eff.omega_a, eff.omega_l, eff.rabi)?;
        let reservoir = ReservoirParams::new(eff.alpha, eff.lambda, eff.omega_0)?;
        let warnings = drive.validity_warnings();
        let params = ModelParams::from_physical(&drive, &reservoir)?;
        let regime = match self.regime {
            RegimeChoice::Auto => classify_regime(params.p(), RegimeThresholds::default()),
            RegimeChoice::Secular => Regime::Secular,
            RegimeChoice::Nonsecular => Regime::Nonsecular,
            RegimeChoice::Intermediate | RegimeChoice::Undriven => Regime::Intermediate,
        };
        let spec = match regime {
            Regime::Secular => GeneratorSpec::Secular(params),
            Regime::Nonsecular => GeneratorSpec::SimplifiedNonsecular(params),
            Regime::Intermediate => GeneratorSpec::FullNonsecular(params),
        };
        let grid = TimeGrid::uniform(self.tmax, self.step)?;
        Ok(Setup { spec, grid, integrator, regime: Some(regime), warnings })
    }

    /// Set one parameter by its config-file name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "omega_A" => self.omega_a = value,
            "omega_L" => self.omega_l = value,
            "Omega" => self.rabi = value,
            "alpha" => self.alpha = value,
            "lambda" => self.lambda = value,
            "omega_0" => self.omega_0 = value,
            "s" => self.s = Some(value),
            "p" => self.p = Some(value),
            "tmax" => self.tmax = value,
            other => return Err(CliError::input(format!("unknown sweep parameter '{other}'"))),
        }
        Ok(())
    }

    /// `(key, value)` lines for output headers, defaults resolved.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("regime".to_string(), format!("{:?}", self.regime).to_lowercase()),
            ("omega_A".into(), self.omega_a.to_string()),
            ("omega_L".into(), self.omega_l.to_string()),
            ("Omega".into(), self.rabi.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("lambda".into(), self.lambda.to_string()),
            ("omega_0".into(), self.omega_0.to_string()),
        ];
        if let Some(s) = self.s {
            out.push(("s_override".into(), s.to_string()));
        }
        if let Some(p) = self.p {
            out.push(("p_override".into(), p.to_string()));
        }
        out.extend([
            ("tmax".into(), self.tmax.to_string()),
            ("step".into(), self.step.to_string()),
            ("substep".into(), self.substep.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]);
        out
    }
}

/// Derived quantities of a resolved setup, for headers and summaries.
pub fn setup_provenance(setup: &Setup) -> Vec<(String, String)> {
    let mut out = vec![("model".to_string(), setup.spec.model().to_string())];
    if let Some(p) = setup.model_params() {
        out.extend([
            ("s".into(), p.s().to_string()),
            ("p".into(), p.p().to_string()),
            ("C_plus".into(), p.coeffs.plus.to_string()),
            ("C_minus".into(), p.coeffs.minus.to_string()),
            ("C_zero".into(), p.coeffs.zero.to_string()),
        ]);
    }
    if let Some(r) = setup.regime {
        out.push(("resolved_regime".into(), format!("{r:?}").to_lowercase()));
    }
    out.push(("grid_points".into(), setup.grid.len().to_string()));
    out.push(("grid_end_native".into(), setup.grid.end().to_string()));
    for w in &setup.warnings {
        out.push(("warning".into(), w.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let f = ScenarioFile::parse("# comment\nalpha = 0.25\nOmega = 3.0\nregime = \"secular\"\nseed = 4\n").unwrap();
        let mut s = Scenario::default();
        f.apply(&mut s);
        assert_eq!((s.alpha, s.rabi, s.regime, s.seed), (0.25, 3.0, RegimeChoice::Secular, 4));
        assert_eq!(s.lambda, 1.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioFile::parse("alpah = 1.0\n").is_err());
        assert!(ScenarioFile::parse("alpha = \"x\"\n").is_err());
    }

    #[test]
    fn overrides_set_s_and_p() {
        let sc = Scenario { omega_a: 100.0, omega_l: 99.0, rabi: 2.0, lambda: 2.0, s: Some(1.5), p: Some(10.0), ..Default::default() };
        let setup = sc.resolve().unwrap();
        let p = setup.model_params().unwrap();
        assert!((p.s() - 1.5).abs() < 1e-12 && (p.p() - 10.0).abs() < 1e-12);
        let k = nmdrive_core::Coefficients::from_drive(1.0, 2.0).unwrap();
        assert!((p.coeffs.plus - k.plus).abs() < 1e-12);
        assert_eq!(setup.regime, Some(Regime::Secular));
    }

    #[test]
    fn regime_follows_p() {
        let mut sc = Scenario { p: Some(0.01), ..Default::default() };
        assert_eq!(sc.resolve().unwrap().spec.model(), nmdrive_core::Model::SimplifiedNonsecular);
        sc.p = Some(1.0);
        assert_eq!(sc.resolve().unwrap().spec.model(), nmdrive_core::Model::FullNonsecular);
        sc.regime = RegimeChoice::Undriven;
        let setup = sc.resolve().unwrap();
        assert_eq!(setup.spec.model(), nmdrive_core::Model::Undriven);
    }

    #[test]
    fn undriven_grid_in_physical_time() {
        let sc = Scenario { regime: RegimeChoice::Undriven, lambda: 2.0, tmax: 30.0, ..Default::default() };
        assert!((sc.resolve().unwrap().grid.end() - 15.0).abs() < 1e-12);
    }
}

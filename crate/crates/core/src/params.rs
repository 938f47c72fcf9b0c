//! Model parameters: drive, reservoir, dimensionless regime parameters and
//! the dressed-basis coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Laser drive of the qubit. All frequencies share one user-chosen unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    omega_a: f64,
    omega_l: f64,
    rabi: f64,
}

impl DriveParams {
    pub fn new(omega_a: f64, omega_l: f64, rabi: f64) -> Result<Self> {
        if !(omega_a.is_finite() && omega_l.is_finite() && rabi.is_finite()) {
            return Err(Error::InvalidParameter("drive frequencies must be finite".into()));
        }
        if rabi < 0.0 {
            return Err(Error::InvalidParameter(format!("Rabi frequency {rabi} < 0")));
        }
        Ok(Self { omega_a, omega_l, rabi })
    }

    /// Qubit transition frequency.
    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }

    /// Laser frequency.
    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Qubit-laser detuning `omega_A - omega_L`.
    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_l
    }

    /// Dressed splitting `sqrt(Delta^2 + Omega^2)`, always recomputed.
    pub fn dressed_splitting(&self) -> f64 {
        self.detuning().hypot(self.rabi)
    }

    /// Messages for violated near-resonance / weak-drive conditions
    /// (`Omega << omega_A`, `|Delta| << omega_A`, read as a factor of ten).
    /// Results are not altered.
    pub fn validity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let scale = self.omega_a.abs();
        if self.rabi >= 0.1 * scale {
            out.push(format!(
                "Rabi frequency {} is not small compared to omega_A = {}",
                self.rabi, self.omega_a
            ));
        }
        if self.detuning().abs() >= 0.1 * scale {
            out.push(format!(
                "detuning {} is not small compared to omega_A = {}",
                self.detuning(),
                self.omega_a
            ));
        }
        out
    }
}

/// Lorentzian reservoir: coupling, half-width and centre frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub alpha: f64,
    pub width: f64,
    pub center: f64,
}

impl ReservoirParams {
    pub fn new(alpha: f64, width: f64, center: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {width}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter("omega_0 must be finite".into()));
        }
        Ok(Self { alpha, width, center })
    }
}

/// Dimensionless detuning `s = (omega_0 - omega_L)/lambda` and time-scale
/// ratio `p = omega/lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub s: f64,
    pub p: f64,
}

impl RegimeParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !s.is_finite() || !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("need finite s and p >= 0, got s={s}, p={p}")));
        }
        Ok(Self { s, p })
    }
}

/// Dressed-basis coefficients `C_+`, `C_-` (signed) and `C_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub plus: f64,
    pub minus: f64,
    pub zero: f64,
}

impl Coefficients {
    /// `C_± = (Delta ± omega)/(2 omega)`, `C_0 = Omega/(2 omega)`.
    pub fn from_drive(detuning: f64, rabi: f64) -> Result<Self> {
        if rabi < 0.0 {
            return Err(Error::InvalidParameter(format!("Rabi frequency {rabi} < 0")));
        }
        let omega = detuning.hypot(rabi);
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::DegenerateDrive);
        }
        let two_omega = 2.0 * omega;
        Ok(Self {
            plus: (detuning + omega) / two_omega,
            minus: (detuning - omega) / two_omega,
            zero: rabi / two_omega,
        })
    }

    /// Coefficients at resonance (`Delta = 0`).
    pub fn resonant() -> Self {
        Self { plus: 0.5, minus: -0.5, zero: 0.5 }
    }
}

/// Classification of `p` into the asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Nonsecular,
    Intermediate,
    Secular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { lo: 0.1, hi: 10.0 }
    }
}

pub fn classify_regime(p: f64, thresholds: RegimeThresholds) -> Regime {
    if p <= thresholds.lo {
        Regime::Nonsecular
    } else if p >= thresholds.hi {
        Regime::Secular
    } else {
        Regime::Intermediate
    }
}

/// Derive `(s, p)` and the dressed coefficients from physical parameters.
pub fn derive(drive: &DriveParams, reservoir: &ReservoirParams) -> Result<(RegimeParams, Coefficients)> {
    let coeffs = Coefficients::from_drive(drive.detuning(), drive.rabi())?;
    let regime = RegimeParams::new(
        (reservoir.center - drive.omega_l()) / reservoir.width,
        drive.dressed_splitting() / reservoir.width,
    )?;
    Ok((regime, coeffs))
}

/// Everything the driven-qubit generators need, in dimensionless units
/// (time `T = lambda t`, rates in units of `lambda`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub regime: RegimeParams,
    pub coeffs: Coefficients,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(regime: RegimeParams, coeffs: Coefficients, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        Ok(Self { regime, coeffs, alpha })
    }

    /// Direct dimensionless construction; `p` is independent of the ratio
    /// `Delta/Omega` that fixes the coefficients.
    pub fn dimensionless(s: f64, p: f64, detuning: f64, rabi: f64, alpha: f64) -> Result<Self> {
        Self::new(RegimeParams::new(s, p)?, Coefficients::from_drive(detuning, rabi)?, alpha)
    }

    pub fn from_physical(drive: &DriveParams, reservoir: &ReservoirParams) -> Result<Self> {
        for w in drive.validity_warnings() {
            log::warn!("{w}");
        }
        let (regime, coeffs) = derive(drive, reservoir)?;
        Self::new(regime, coeffs, reservoir.alpha)
    }

    pub fn s(&self) -> f64 {
        self.regime.s
    }

    pub fn p(&self) -> f64 {
        self.regime.p
    }
}

/// Undriven qubit resonant with the Lorentzian centre. `alpha` carries
/// units of rate here and time is physical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndrivenParams {
    pub alpha: f64,
    pub width: f64,
}

impl UndrivenParams {
    pub fn new(alpha: f64, width: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {width}")));
        }
        Ok(Self { alpha, width })
    }

    /// Markovian (nonnegative rate) exactly when `lambda >= 2 alpha`.
    pub fn is_markovian(&self) -> bool {
        self.width >= 2.0 * self.alpha
    }
}

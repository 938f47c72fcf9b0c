//! Dissipative dynamics of a laser-driven qubit in a Lorentzian reservoir,
//! and two non-Markovianity quantifiers evaluated both numerically and in
//! closed form: the divisibility measure (Choi-state norm growth) and the
//! information-backflow measure (trace-distance growth).

pub mod blp;
pub mod dynamics;
pub mod error;
pub mod generator;
pub mod grid;
pub mod ops;
pub mod params;
pub mod rates;
pub mod rhp;

pub use dynamics::{evolve, grid_propagators, propagator, IntegratorConfig, Propagator, QubitState, Trajectory};
pub use error::{Error, Result};
pub use generator::{GeneratorSpec, Model, Superoperator};
pub use grid::TimeGrid;
pub use params::{
    classify_regime, derive, Coefficients, DriveParams, ModelParams, Regime, RegimeParams, RegimeThresholds,
    ReservoirParams, UndrivenParams,
};
pub use rates::{RateSample, ChannelRates};

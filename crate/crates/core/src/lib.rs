//! Analysis of cyclic feedback loops `ẋ_i = α_i f_i(x_{i-1}) - x_i`.
//!
//! The crate enumerates equilibria through the composed map
//! `f̃ = α_d f_d ∘ … ∘ α_1 f_1`, computes Jacobian spectra in closed form,
//! classifies the dynamical regime (monostable, bistable, oscillatory),
//! integrates trajectories to confirm the predicted attractors, and sweeps
//! production rates to chart regime regions.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the command line tool and the
//! file formats use.

pub mod atlas;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod network;
pub mod parallel;
pub mod regulation;
pub mod scalar;
mod search;
pub mod stability;

pub use error::{Error, Result};
pub use network::{CyclicNetwork, Equilibrium, SearchBound};
pub use regulation::{Convexity, Derivatives, Monotonicity, RegulationFunction, RegulationKind};
pub use scalar::Scalar;
pub use stability::{Branch, RegimeReport, SpectrumReport, Thresholds};

pub type Regulation = RegulationFunction<f64>;
pub type Network = CyclicNetwork<f64>;
pub type FixedPoint = Equilibrium<f64>;
pub type Regime = RegimeReport<f64>;
pub type Spectrum = SpectrumReport<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type AttractorReport = dynamics::AttractorReport<f64>;

pub type Regulation32 = RegulationFunction<f32>;
pub type Network32 = CyclicNetwork<f32>;

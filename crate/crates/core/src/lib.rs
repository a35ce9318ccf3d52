//! Numerical laboratory for sojourn times and time delays of dispersive
//! one-dimensional quantum dynamics, including an exactly solvable
//! finite-rank model with both time-dependent and stationary scattering.

pub mod dispersion;
pub mod error;
pub mod fit;
pub mod grid;
pub mod localization;
pub mod propagation;
pub mod quad;
pub mod sojourn;
pub mod stationary;

pub use dispersion::{DispersionRelation, EnergyWindow};
pub use error::Error;
pub use grid::{Grid, Representation, WaveFunction};
pub use localization::LocalizationFunction;
pub use propagation::{Direction, FriedrichsModel, Profile, RankOnePotential};
pub use sojourn::{Extrapolation, SojournConfig, SweepReport, SweepRow, TimeDelays};
pub use stationary::{BoundaryMatrix, ScatteringTrace};

pub type Result<T> = std::result::Result<T, Error>;

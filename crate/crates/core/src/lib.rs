//! Twin-photon transverse-spectral correlations: the type-I SPDC biphoton
//! amplitude, a Geiger-mode camera simulator and the streaming correlation
//! estimators that recover mode sizes, g² and detection efficiency.

pub mod accum;
pub mod amplitude;
pub mod analysis;
pub mod calibration;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod grid;
pub mod io;
pub mod map;
pub mod params;
pub mod phase;
pub mod ring;
pub mod sampler;
pub mod schmidt;
pub mod sim;

pub use accum::CorrelationAccumulator;
pub use amplitude::{amplitude_grid, biphoton_amplitude, pump_envelope, AmplitudeGrid};
pub use error::{Error, Result};
pub use grid::{Arm, ArmWindow, GridSpec};
pub use map::Map2;
pub use params::CrystalPumpParams;
pub use schmidt::{schmidt_spectrum, SchmidtSpectrum};
pub use sim::{CameraFrame, SimulationConfig};

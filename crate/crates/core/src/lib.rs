//! Simulation of spin-orbit (vector vortex) beams: paraxial modes, Jones-style
//! optical elements on the four-dimensional spin-orbit space, the SO(3)
//! picture of maximally nonseparable states and the interferometric
//! signature of their topological phase.

pub mod bench;
pub mod elements;
pub mod error;
pub mod interferometry;
pub mod modes;
pub mod selftest;
pub mod so3;
pub mod state;

pub use elements::{apply_sequence, lift, cyclic_sequence, OpticalElement, Polarization};
pub use error::{ElementError, InterferenceError, ModeError, So3Error, StateError};
pub use interferometry::{InterferenceConfig, IntensityImage, Polarity};
pub use modes::{BeamGeometry, ModeLabel, TransversePoint};
pub use so3::{gauge_decompose, trace_trajectory, HomotopyClass, SO3Point, Trajectory};
pub use state::{prepare_initial, PreparationConfig, SpinOrbitState};

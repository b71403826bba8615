//! Spin-orbit coupling of electrons floating on liquid helium: device
//! constants, truncated spin-vibration Hilbert spaces, interaction-picture
//! Hamiltonians, time evolution, gate pulse sequences and the reduced-model
//! comparisons built on them.

pub mod constants;
pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub mod linalg;
pub mod par;
pub mod propagator;
pub mod gates;
pub mod effective;
pub mod experiments;

pub use constants::{DerivedCouplings, DeviceParams, PhysicalConstants};
pub use error::{Error, Result};
pub use hilbert::{Level, OperatorMatrix, SpaceLayout, StateVector};
pub use linalg::C64;
pub use par::Execution;

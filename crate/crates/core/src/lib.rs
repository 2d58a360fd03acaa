//! Ergodic Jacobi matrices over torus maps, the doubling map and the
//! solenoid: spectra, integrated density of states, gap detection and gap
//! labels, plus the oscillation, gauge and cocycle machinery behind them.

pub mod cli;
pub mod cocycle;
pub mod dynamics;
pub mod error;
pub mod ids;
pub mod labelling;
pub mod lattice;
pub mod oscillation;
pub mod sampling;
pub mod tridiag;

pub use dynamics::{PhasePoint, SystemSpec};
pub use error::{Error, Result};
pub use ids::{DosEstimate, Gap};
pub use sampling::{JacobiCoeffs, SamplingFn, TrigPoly};
pub use tridiag::{EigenList, JacobiBlock};

/// The golden mean `(√5 − 1)/2`, the default rotation frequency.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

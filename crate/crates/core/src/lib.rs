//! Modal approximation laboratory for one-dimensional coupled wave-heat
//! systems: generator matrices, spectra, resolvent scans, characteristic
//! roots of the unbounded-domain problem, and time-domain energy decay.

// Pull in the LAPACK/BLAS backend even for targets that only use `dot`.
use ndarray_linalg as _;

pub mod basis;
pub mod continuous;
pub mod dynamics;
pub mod fitting;
pub mod generator;
pub mod gram;
pub mod model;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod spectral;
pub mod verify;

//! Complex linear algebra and finite-dimensional quantum-state primitives.

pub mod linalg;
pub mod measures;
pub mod random;
pub mod registers;
pub mod state;
pub mod tolerance;

pub use linalg::{CMat, CVec, C64};
pub use measures::{fidelity, schatten_norm, trace_distance};
pub use random::{derive_rng, haar_unitary, sample_flat, StreamRng};
pub use registers::{maximally_entangled, partial_trace, schmidt_spectrum};
pub use state::{DensityMatrix, Operator, PureState, Spectrum};
pub use tolerance::Tolerances;

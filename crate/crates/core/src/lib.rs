//! Continuous fusion frames on discretized measure spaces, their weavings,
//! and brute-force certificates for the bounds that weaving theory predicts.
//!
//! A measure space `(X, μ)` is a finite set of nodes with positive masses,
//! the Hilbert space is `ℂ^d`, and "for every partition of `X`" becomes an
//! enumeration (or search) over node assignments.

pub mod certify;
pub mod error;
pub mod frame;
pub mod hilbert;
pub mod instances;
pub mod perturbation;
pub mod product;
pub mod weaving;

pub use error::{FrameError, Result};
pub use frame::{CFrame, CFusionFrame, Field, FrameBounds};
pub use hilbert::{DiscretizedMeasureSpace, Operator, Partition, Subspace, Vector};
pub use weaving::{SearchStrategy, UniversalBounds, WovenFamily};

//! Translation-invariant valuations on convex polytopes.
//!
//! The crate works with polytopes given by vertices and provides volumes,
//! mixed and intrinsic volumes, area measures, Klain functions, Radon and
//! cosine transforms on Grassmannians, membership tests for the classes of
//! generalized zonoids, and successive radii.

pub mod counterexample;
pub mod error;
pub mod estimate;
pub mod hull;
pub mod io;
pub mod lp;
pub mod meb;
pub mod membership;
pub mod polytope;
pub mod radii;
pub mod rng;
pub mod shapes;
pub mod subspace;
pub mod transforms;
pub mod valuation;
pub mod volumes;

pub use error::{Error, Result};
pub use estimate::{Estimate, TwoRouteCheck};
pub use polytope::{Face, FaceId, FaceLattice, Polytope};
pub use rng::RandomStream;
pub use subspace::{Subspace, Vector};
pub use transforms::{AtomicGrassMeasure, GrassFunction};
pub use valuation::{Term, ValuationSpec};

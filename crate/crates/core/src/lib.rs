//! Numerical laboratory for the facial structure of closed convex cones.
//!
//! Cones are described by [`ConeSpec`] values (atoms such as the orthant, the
//! second-order cone and the PSD cone, combinators, compact slices and a
//! gallery of named counterexample sets). On top of exact and iterative
//! projections the crate offers face calculus, error-bound probing,
//! slice-to-cone constant transfer and projection-map constructors.

pub mod amenability;
pub mod cli;
pub mod cone;
pub mod error;
pub mod face;
pub mod gallery;
pub mod hull_constants;
pub mod linalg;
pub mod proj_exposed;
pub mod projection;
pub mod report;
pub mod verify;

pub use cone::{ConeSpec, Membership, MembershipStatus, SliceGenerator, SliceSpec};
pub use error::{ConeError, Result};
pub use linalg::{AffineSubspace, BoundedRegion, Tolerance, Vector};
pub use projection::{moreau_decompose, project, MoreauSplit, ProjectionMethod, ProjectionResult};

//! Exact facet enumeration and quantum analysis of bipartite Bell polytopes.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches files,
//! clocks or threads lives in the `bellslice` companion crate.
//!
//! Module map:
//! - [`scenario`]: Bell scenarios, Collins-Gisin (CG) coordinates, local vertices.
//! - [`exactgeom`]: exact integer/rational linear algebra and V→H conversion.
//! - [`symmetry`]: relabeling group, canonical forms, orbit sizes, classes.
//! - [`slicer`]: liftings, polytope slices and slicing campaigns.
//! - [`sdp`]: a first-order semidefinite program solver.
//! - [`quantum`]: seesaw and NPA bounds, noise resistance, detection
//!   efficiency, concurrence.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod budget;
pub mod exactgeom;
pub mod quantum;
pub mod scenario;
pub mod sdp;
pub mod slicer;
pub mod symmetry;

pub use budget::{Budget, Unlimited};
pub use exactgeom::{ExactRational, Halfspace, Inequality};
pub use scenario::{BehaviorVector, CgLayout, DeterministicStrategy, JointTable, Scenario};
pub use symmetry::{FacetClass, SymmetryElement};

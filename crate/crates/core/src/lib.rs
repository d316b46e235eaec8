//! Set optimization in the complete lattice of closed convex upper sets.
//!
//! Values of a set-valued objective live in `G(R^d, C)`, the closed convex
//! sets `A` with `A = A + C` for a pointed polyhedral cone `C`, ordered by
//! `⊇`. The crate provides the lattice arithmetic, the inf-translation
//! `f̂(x; M) = inf_{y ∈ M} f(x + y)`, the scalarizations
//! `φ_{f,z*}(x) = inf_{z ∈ f(x)} z*·z`, a sweep-and-verify solver, brute-force
//! oracles on finite instances, and a discretized multi-criteria calculus of
//! variations solver.

pub mod calcvar;
pub mod catalog;
pub mod cone;
pub mod error;
pub mod gset;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod setfn;
pub mod solver;

pub use cone::{Cone, ConeKind, ConeSpec, DualBase, TOL_GEOM};
pub use error::{Error, Result};
pub use gset::{lattice_inf, lattice_sup_2d, Boundary2d, ExtReal, Facet, GValue, GValueJson};
pub use linalg::Point;
pub use setfn::{CandidateSet, CoSampling, Evaluator, ScalarizationProfile, SetFunction, VarSpace};

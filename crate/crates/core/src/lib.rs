//! Numerical laboratory for open rational gl(n) spin chains with diagonal
//! boundaries: transfer matrices over tensor products of evaluation modules,
//! nested Bethe equations, Bethe vectors, and exact-diagonalization checks.

pub mod bethe;
pub mod error;
pub mod harness;
pub mod identities;
pub mod reflection;
pub mod sampling;
pub mod tensor;
pub mod vectors;
pub mod yangian;

pub use bethe::{BetheSystem, RootFamilies, SolveOptions};
pub use error::{Error, Result};
pub use reflection::{BoundarySpec, Conventions, KPlusMode, OpenChain};
pub use tensor::{OperatorMatrix, SpaceLayout, C64};
pub use yangian::{gl_rep, ChainSpec, GlRep, SiteSpec};

//! Exact computation and constructions for anti-van der Waerden numbers
//! `aw(G, k)` and `aw_u(G, k)` over `[n]` and `Z_n`.

pub mod closed_forms;
pub mod constructions;
pub mod error;
pub mod model;
pub mod progressions;
pub mod reference;
pub mod solver;
pub mod store;
pub mod verification;

pub use error::{Error, Result};
pub use model::{
    ApFreeSet, Color, Coloring, Factorization, GroupInstance, GroupKind, Progression,
    SolverOutcome, SpecialCertificate,
};

//! Finite universal algebra toolkit: operation tables, the relation algebra of
//! reflexive admissible and U-admissible relations, quantified relational
//! identities, term clones and Maltsev term searches.

pub mod algebra;
pub mod error;
pub mod exec;
pub mod freeclone;
pub mod identities;
pub mod maltsev;
pub mod relations;
pub mod uadmissible;

pub use algebra::{FiniteAlgebra, Operations, Term};
pub use error::{Error, Result};
pub use exec::Exec;
pub use freeclone::TermClone;
pub use relations::BinRel;
pub use uadmissible::UAdmRel;

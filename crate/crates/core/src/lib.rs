//! Exact computation of fusion systems, centric linking systems, and group
//! cohomology with coefficients in finite abelian p-groups.
//!
//! The pipeline: build a finite permutation group, take a Sylow p-subgroup,
//! form the fusion system and its centric linking system, then compare two
//! independently computed cohomologies - the nerve cohomology of the linking
//! system with a nilpotent local system, and the stable elements inside the
//! bar cohomology of the Sylow subgroup - using exact linear algebra over
//! Z/p^e throughout. Characteristic bisets and their idempotents give a third
//! route to the same stable subgroup.

pub mod biset;
pub mod cohomology;
pub mod error;
pub mod fusion;
pub mod group;
pub mod linking;
pub mod perm;
pub mod quotient;
pub mod stable;
pub mod zint;
pub mod zpe;

pub use error::{Error, Result};
pub use group::{FiniteGroup, Subgroup};
pub use perm::Perm;
pub use zpe::{Mat, Zpe};

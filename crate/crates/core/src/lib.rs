//! Finite meet-trees and their partial automorphisms.
//!
//! Everything here is finite and exact: trees are small tables, types are
//! canonical descriptors, and every search is bounded by a [`Budget`].

pub mod amalg;
pub mod budget;
pub mod corpus;
pub mod error;
pub mod json;
pub mod laws;
pub mod nopair;
pub mod orbit_lab;
pub mod pauto;
pub mod pec;
pub mod tree;
pub mod types;

pub use budget::Budget;
pub use error::Error;
pub use pauto::{classify_orbit, orbit_decomposition, Orbit, OrbitClass, OrbitKind, PartialAutomorphism};
pub use tree::{Elem, MeetTree};
pub use types::OneType;

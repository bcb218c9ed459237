//! widthlab-core: an exact computational laboratory for small finite groups.
//!
//! The crate builds classical and alternating groups from pinned generator
//! tables, enumerates them breadth-first into dense element tables, and
//! computes commutator sets, displacement sets, product-set widths, and
//! automorphism statistics exactly. A companion numerical module handles
//! maximal-torus angle functions for special unitary groups.
//!
//! Everything is deterministic: enumeration order, set algebra, search
//! tie-breaking, and randomized drivers (which take explicit seeds).

pub mod autos;
pub mod catalog;
pub mod dns;
pub mod element;
pub mod error;
pub mod gf;
pub mod group;
pub mod kt;
pub mod lattice;
pub mod suites;
pub mod torus;
pub mod width;

pub use autos::AutoSpec;
pub use element::{Element, ElementKind};
pub use error::{Error, Result};
pub use gf::{Field, FieldElem, FormKind, FormSpec, Matrix};
pub use group::{AutPerm, ElementSet, GroupHandle, DEFAULT_CAP};

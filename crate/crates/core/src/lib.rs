//! A CONGEST-model round simulator and exact distributed maximum matching.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: graphs, matchings, walks and alternating distances;
//! * [`oracle`]: centralized ground truth (blossom matching, exhaustive
//!   alternating-path enumeration);
//! * [`sim`]: the synchronous round simulator and round accounting;
//! * [`mvpart`]: the round-charged distance and partition subroutines;
//! * [`cap`], [`abt`], [`certificate`], [`linear`]: augmenting-path
//!   constructions;
//! * [`driver`]: the phased maximum-matching driver;
//! * [`generate`], [`fixtures`], [`experiment`]: instances and the harness.

pub mod abt;
pub mod cap;
pub mod certificate;
pub mod driver;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod linear;
pub mod mvpart;
pub mod oracle;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{augment_along, is_augmenting, AltDist, Dist, EdgeId, Graph, Matching, NodeId, Walk};

//! Model checking for knowledge and common knowledge over finite
//! interpreted systems.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: interpreted systems, points, events and their locality.
//! - [`logic`]: the formula language and its evaluation, including the
//!   fixed-point engines for `C`, `C^ε` and `C^◇`.
//! - [`coordination`]: event ensembles and the correspondence between
//!   coordination and (approximate) common knowledge.
//! - [`imprecision`]: temporal imprecision and its consequences for
//!   perfectly coordinated ensembles.
//! - [`scenarios`]: generators for muddy children, the Alice–Bob channel and
//!   coordinated attack.

pub mod coordination;
pub mod error;
pub mod imprecision;
pub mod logic;
pub mod model;
pub mod partition;
pub mod random;
pub mod report;
pub mod scenarios;

pub use coordination::{CoordinationMode, Ensemble};
pub use error::{Error, PointRef, Result};
pub use logic::{parse_formula, Checker, Extension, Formula, Group, Mode};
pub use model::{AgentId, Event, InterpretedSystem, Point, SystemDesc};
pub use partition::{reachability_partition, ReachabilityPartition};
pub use report::{Counterexample, VerificationReport};

//! Classification and cascade synthesis of linear two-mode interfaces.
//!
//! An interface is a 4×4 real symplectic matrix acting on the quadratures
//! `(q1, p1, q2, p2)`. Products are read right to left: in `compose(&[a, b])`
//! the interface `b` acts first.

pub mod classify;
pub mod cli;
pub mod error;
pub mod json;
pub mod linalg;
pub mod plan;
pub mod symplectic;
pub mod synth_general;
pub mod synth_restricted;
pub mod verify;

pub use classify::{Class, Invariants, Thresholds};
pub use error::{Error, Result};
pub use linalg::Quad2;
pub use plan::{Component, Library, Step, SynthPlan};
pub use symplectic::{Interface, Mode, OpKind, SingleModeOp, StandardSpec};

//! Fully dynamic weighted set cover and dominating set with a (1+eps) ln n
//! approximation, maintained by a leveled greedy cover with lazy counters,
//! local rises and partial/global resets.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod counters;
pub mod ds;
pub mod engine;
mod error;
pub mod greedy;
pub mod ledger;
pub mod levels;
pub mod oracle;
pub mod workloads;

pub use ds::DomSetEngine;
pub use engine::{
    CoverEntry, EngineOptions, ResetKind, ResetReport, SetCoverEngine, SetSystem, StepReport, Totals, UpdateOp,
};
pub use error::{Error, FaultKind};
pub use levels::{Levels, Params};

//! Idle-time opportunity modeling for server cores and packages.
//!
//! Closed-form M/M/1, c×M/M/1 and M/M/c idle distributions ([`queueing`]),
//! their mapping onto C-state tables ([`cstate`]), a seeded discrete-event
//! simulator that checks the closed forms ([`sim`]), and ingestion of
//! measured idle traces ([`trace`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cstate;
pub mod error;
pub mod interval;
pub mod queueing;
pub mod report;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};

//! Worst-case response-time analysis for AXI-style SoC interconnects.
//!
//! - [`model`]: topology types, JSON format, validation.
//! - [`component`]: per-IP closed-form delay bounds.
//! - [`system`]: end-to-end bounds under interference.
//! - [`sim`]: cycle-level discrete-event simulator used to check the bounds.
//! - [`experiment`]: built-in validation suites and sweeps.

pub mod model;
pub mod component;
pub mod system;
pub mod sim;
pub mod experiment;

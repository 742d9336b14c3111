//! Periodic merging comparator networks.
//!
//! * [`netcore`]: the comparator-network model and its execution.
//! * [`builders`]: `CW_k`, `P_k`, the 3-periodic merger `M_k` and the
//!   experimental 4-periodic `M'_k`.
//! * [`oracle`]: zero-one principle verification harnesses.
//! * [`columns`]: the ones-per-column abstraction of `M_k` and its interval
//!   analysis, as executable checks.
//! * [`netlist`]: the text interchange format.

pub mod builders;
pub mod columns;
pub mod error;
pub mod netcore;
pub mod netlist;
pub mod oracle;

pub use error::{Error, Result};
pub use netcore::{Comparator, CompactForm, DropMode, Network, Stage};

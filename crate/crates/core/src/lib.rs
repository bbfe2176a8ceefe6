//! Deterministic, reversible, probabilistic and quantum Turing machines over a
//! single rule-table abstraction.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod frontend;
pub mod machine;
pub mod oracle;
pub mod quantum;
pub mod scalar;
pub mod simulate;

pub use frontend::Machine;

//! Text formats: the machine DSL and JSON documents.

pub mod dsl;
pub mod json;

pub use dsl::{parse_machine, serialize_machine, Diagnostic, Machine, MachineDoc, Severity, Span};

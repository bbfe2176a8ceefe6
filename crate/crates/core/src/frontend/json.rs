//! JSON documents for traces, quantum evolutions and configurations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{ClassicalConfig, ClassicalMachine, Configuration, ProcState, QuantumConfig, Symbol, Tape};
use crate::quantum::{QuantumMachine, StateVector};
use crate::scalar::Amplitude;
use crate::simulate::{HaltReason, Trace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("bad tape position `{0}`")]
    Position(String),
    #[error("tape cell {pos} holds {bit}; expected 0 or 1")]
    Bit { pos: i64, bit: u8 },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("bad processor state `{0}`")]
    BadProc(String),
    #[error("configuration needs a `{0}` field")]
    Missing(&'static str),
    #[error("unknown halt reason `{0}`")]
    HaltReason(String),
}

/// A configuration. Classical ones carry `state`, quantum ones `proc`.
/// Only cells holding 1 are listed in `tape`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub head: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proc: Option<String>,
    #[serde(default)]
    pub tape: BTreeMap<String, u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpDoc {
    pub config: ConfigDoc,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tape: Option<BTreeMap<String, u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amps: Option<Vec<AmpDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub machine: String,
    pub kind: String,
    pub steps: Vec<StepDoc>,
    pub halted: String,
}

fn tape_doc(tape: &Tape) -> BTreeMap<String, u8> {
    tape.ones().map(|x| (x.to_string(), 1)).collect()
}

fn tape_from_doc(cells: &BTreeMap<String, u8>) -> Result<Tape, JsonError> {
    let mut tape = Tape::new();
    for (pos, &bit) in cells {
        let x: i64 = pos.trim().parse().map_err(|_| JsonError::Position(pos.clone()))?;
        match bit {
            0 => {}
            1 => tape.write(x, Symbol::One),
            _ => return Err(JsonError::Bit { pos: x, bit }),
        }
    }
    Ok(tape)
}

pub fn classical_config_doc(m: &ClassicalMachine, c: &ClassicalConfig) -> ConfigDoc {
    ConfigDoc { head: c.head, state: Some(m.state_name(c.proc).to_string()), proc: None, tape: tape_doc(&c.tape) }
}

pub fn quantum_config_doc(c: &QuantumConfig) -> ConfigDoc {
    ConfigDoc { head: c.head, state: None, proc: Some(c.proc.to_string()), tape: tape_doc(&c.tape) }
}

impl ConfigDoc {
    pub fn to_classical(&self, m: &ClassicalMachine) -> Result<ClassicalConfig, JsonError> {
        let name = self.state.as_ref().ok_or(JsonError::Missing("state"))?;
        let q = m.state_by_name(name).ok_or_else(|| JsonError::UnknownState(name.clone()))?;
        Ok(Configuration::new(self.head, q, tape_from_doc(&self.tape)?))
    }

    pub fn to_quantum(&self, qubits: u8) -> Result<QuantumConfig, JsonError> {
        let bits = self.proc.as_ref().ok_or(JsonError::Missing("proc"))?;
        let p = ProcState::parse(bits)
            .filter(|p| p.width() == qubits)
            .ok_or_else(|| JsonError::BadProc(bits.clone()))?;
        Ok(Configuration::new(self.head, p, tape_from_doc(&self.tape)?))
    }
}

pub fn parse_config_doc(text: &str) -> Result<ConfigDoc, JsonError> {
    serde_json::from_str(text).map_err(|e| JsonError::Syntax(e.to_string()))
}

pub fn config_json(doc: &ConfigDoc) -> String {
    serde_json::to_string(doc).expect("config documents always serialize")
}

/// Classical trace: one step record per configuration, carrying the rule
/// applied to leave it.
pub fn classical_trace_doc(m: &ClassicalMachine, trace: &Trace) -> TraceDoc {
    let steps = trace
        .entries
        .iter()
        .enumerate()
        .map(|(t, e)| StepDoc {
            t,
            head: Some(e.config.head),
            state: Some(m.state_name(e.config.proc).to_string()),
            tape: Some(tape_doc(&e.config.tape)),
            rule: e.rule.as_ref().map(|r| m.describe_rule(r)),
            amps: None,
        })
        .collect();
    TraceDoc { machine: m.name.clone(), kind: m.kind.to_string(), steps, halted: trace.halted.to_string() }
}

/// Quantum evolution: step `t` holds the amplitudes of the `t`-th state.
pub fn quantum_trace_doc<A: Amplitude>(m: &QuantumMachine, states: &[StateVector<A>]) -> TraceDoc {
    let steps = states
        .iter()
        .enumerate()
        .map(|(t, psi)| StepDoc {
            t,
            head: None,
            state: None,
            tape: None,
            rule: None,
            amps: Some(
                psi.iter()
                    .map(|(c, a)| {
                        let (re, im) = a.text_parts();
                        AmpDoc { config: quantum_config_doc(c), re, im }
                    })
                    .collect(),
            ),
        })
        .collect();
    TraceDoc {
        machine: m.name.clone(),
        kind: "quantum".into(),
        steps,
        halted: HaltReason::StepLimit.to_string(),
    }
}

pub fn emit_trace_json(doc: &TraceDoc) -> String {
    serde_json::to_string_pretty(doc).expect("trace documents always serialize")
}

pub fn parse_trace_json(text: &str) -> Result<TraceDoc, JsonError> {
    let doc: TraceDoc = serde_json::from_str(text).map_err(|e| JsonError::Syntax(e.to_string()))?;
    HaltReason::from_name(&doc.halted).ok_or_else(|| JsonError::HaltReason(doc.halted.clone()))?;
    Ok(doc)
}

impl TraceDoc {
    pub fn halt_reason(&self) -> Option<HaltReason> {
        HaltReason::from_name(&self.halted)
    }

    /// Configuration recorded at classical step `t`.
    pub fn classical_config(&self, m: &ClassicalMachine, t: usize) -> Result<ClassicalConfig, JsonError> {
        let s = self.steps.get(t).ok_or(JsonError::Missing("steps"))?;
        ConfigDoc {
            head: s.head.ok_or(JsonError::Missing("head"))?,
            state: s.state.clone(),
            proc: None,
            tape: s.tape.clone().unwrap_or_default(),
        }
        .to_classical(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Direction::*, Kind, Rule, StateId};
    use crate::quantum::{apply_step, QDelta};
    use crate::scalar::Scalar;
    use crate::simulate::run_deterministic;
    use Symbol::*;

    fn right_mover() -> ClassicalMachine {
        let q = StateId(0);
        ClassicalMachine::with_numbered_states("rm", Kind::Reversible, 1)
            .unwrap()
            .with_rules([Rule::certain(q, Zero, Zero, Right, q), Rule::certain(q, One, One, Right, q)])
            .unwrap()
    }

    #[test]
    fn empty_trace_keeps_halt_reason() {
        let doc = TraceDoc { machine: "m".into(), kind: "deterministic".into(), steps: vec![], halted: "no-rule".into() };
        let text = emit_trace_json(&doc);
        assert!(text.contains("\"steps\": []"));
        assert_eq!(parse_trace_json(&text).unwrap(), doc);
    }

    #[test]
    fn classical_replay() {
        let m = right_mover();
        let trace = run_deterministic(&m, m.initial_config(&[One, Zero, One]), 4).unwrap();
        let doc = parse_trace_json(&emit_trace_json(&classical_trace_doc(&m, &trace))).unwrap();
        assert_eq!(doc.steps.len(), 5);
        let c0 = doc.classical_config(&m, 0).unwrap();
        let replay = run_deterministic(&m, c0, doc.steps.len() - 1).unwrap();
        assert_eq!(replay.last(), &doc.classical_config(&m, 4).unwrap());
        assert_eq!(doc.halt_reason(), Some(HaltReason::StepLimit));
    }

    #[test]
    fn coin_amplitudes_are_canonical_text() {
        let n = ProcState::zeros(1);
        let h = Scalar::frac_1_sqrt2();
        let delta = QDelta::new(1)
            .with_rules([
                Rule::new(n, Zero, Zero, Right, n, h.clone()),
                Rule::new(n, Zero, One, Right, n, h.clone()),
            ])
            .unwrap();
        let m = QuantumMachine::new("coin", delta);
        let psi0 = StateVector::<Scalar>::basis(Configuration::new(0, n, Tape::new()));
        let psi1 = apply_step(&m.delta, &psi0);
        let doc = quantum_trace_doc(&m, &[psi0, psi1]);
        let amps = doc.steps[1].amps.as_ref().unwrap();
        assert_eq!(amps.len(), 2);
        assert!(amps.iter().all(|a| a.re == "1/2*sqrt2" && a.im == "0"));
        let back = amps[1].config.to_quantum(1).unwrap();
        assert_eq!(back.tape.get(0), One);
    }

    #[test]
    fn config_errors() {
        let m = right_mover();
        let doc = parse_config_doc(r#"{"head": 1, "state": "q7", "tape": {}}"#).unwrap();
        assert_eq!(doc.to_classical(&m), Err(JsonError::UnknownState("q7".into())));
        let doc = parse_config_doc(r#"{"head": 1, "state": "q0", "tape": {"x": 1}}"#).unwrap();
        assert!(matches!(doc.to_classical(&m), Err(JsonError::Position(_))));
        assert!(parse_config_doc("{").is_err());
    }
}

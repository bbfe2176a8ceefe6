//! Operational semantics: deterministic stepping, backward steps of reversible
//! machines, seeded probabilistic runs and Born read-out.
//!
//! Runs follow one input convention: the head starts on cell 0 and the input
//! word is written from cell 0 rightward.
//!
//! # Random draws
//!
//! Probabilistic runs draw one 64-bit word per step from ChaCha8
//! (`rand_chacha::ChaCha8Rng`, seeded with `seed_from_u64(seed)`). The draw
//! for step `i` is the `u64` at word position `2·i` of that stream, so every
//! step's draw can be computed independently of the others. The word `r` is
//! read as the exact rational `r / 2^64` and compared against exact
//! cumulative rule weights in canonical rule order; if it lands past the row
//! sum the run halts with [`HaltReason::ProbHalt`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::{self, Verdict};
use crate::machine::{ClassicalConfig, ClassicalMachine, Configuration, Rule, StateId, Symbol};
use crate::quantum::StateVector;
use crate::scalar::{QReal, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("row ({state}, {read}) holds {count} rules; the machine is not deterministic there")]
    NotDeterministic { state: String, read: Symbol, count: usize },
    #[error("rule `{0}` has weight other than 1")]
    NotZeroOne(String),
    #[error("machine is not probabilistic: {0}")]
    NotProbabilistic(String),
    #[error("configuration has no predecessor")]
    NoPredecessor,
    #[error("configuration has {0} predecessors; the machine is not reversible")]
    AmbiguousPredecessor(usize),
    #[error("state vector is not normalized: norm² = {0}")]
    NotNormalized(String),
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HaltReason {
    /// No rule applies to the scanned `(state, symbol)`.
    NoRule,
    /// The current state is a declared halt state.
    HaltState,
    /// The step budget ran out.
    StepLimit,
    /// A substochastic row's deficit was sampled.
    ProbHalt,
}

impl HaltReason {
    pub fn name(self) -> &'static str {
        match self {
            HaltReason::NoRule => "no-rule",
            HaltReason::HaltState => "halt-state",
            HaltReason::StepLimit => "step-limit",
            HaltReason::ProbHalt => "prob-halt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [HaltReason::NoRule, HaltReason::HaltState, HaltReason::StepLimit, HaltReason::ProbHalt]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a single deterministic step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next { config: ClassicalConfig, rule: Rule<StateId> },
    Halt(HaltReason),
}

/// A configuration and the rule applied to leave it (`None` on the last one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub config: ClassicalConfig,
    pub rule: Option<Rule<StateId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub halted: HaltReason,
}

impl Trace {
    /// Number of rules applied.
    pub fn steps(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn last(&self) -> &ClassicalConfig {
        &self.entries.last().expect("trace holds its start configuration").config
    }

    /// Line-oriented rendering: one `step` line per configuration and a
    /// closing `halted` line.
    pub fn to_text(&self, m: &ClassicalMachine) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let c = &e.config;
            let lo = c.tape.min_one().map_or(c.head, |x| x.min(c.head));
            let hi = c.tape.max_one().map_or(c.head, |x| x.max(c.head));
            let rule = e.rule.as_ref().map_or_else(|| "-".to_string(), |r| m.describe_rule(r));
            out.push_str(&format!(
                "step {i} | state {} | head {} | window {}@{lo} | rule {rule}\n",
                m.state_name(c.proc),
                c.head,
                c.tape.bits(lo, hi),
            ));
        }
        out.push_str(&format!("halted {}\n", self.halted));
        out
    }
}

fn apply(rule: &Rule<StateId>, c: &ClassicalConfig) -> ClassicalConfig {
    Configuration::new(c.head + rule.mv.offset(), rule.to, c.tape.set(c.head, rule.write))
}

pub fn step_deterministic(m: &ClassicalMachine, c: &ClassicalConfig) -> Result<Step, SimError> {
    if m.is_halt(c.proc) {
        return Ok(Step::Halt(HaltReason::HaltState));
    }
    let read = c.scanned();
    let mut row = m.table().row(c.proc, read);
    let Some((target, weight)) = row.next() else {
        return Ok(Step::Halt(HaltReason::NoRule));
    };
    let rule = Rule::new(c.proc, read, target.write, target.mv, target.to, weight.clone());
    if row.next().is_some() {
        return Err(SimError::NotDeterministic {
            state: m.state_name(c.proc).to_string(),
            read,
            count: m.table().row_len(c.proc, read),
        });
    }
    if !weight.is_one() {
        return Err(SimError::NotZeroOne(m.describe_rule(&rule)));
    }
    Ok(Step::Next { config: apply(&rule, c), rule })
}

pub fn run_deterministic(m: &ClassicalMachine, c0: ClassicalConfig, max_steps: usize) -> Result<Trace, SimError> {
    let mut entries = Vec::new();
    let mut cur = c0;
    for _ in 0..max_steps {
        match step_deterministic(m, &cur)? {
            Step::Next { config, rule } => {
                entries.push(TraceEntry { config: cur, rule: Some(rule) });
                cur = config;
            }
            Step::Halt(reason) => {
                entries.push(TraceEntry { config: cur, rule: None });
                return Ok(Trace { entries, halted: reason });
            }
        }
    }
    entries.push(TraceEntry { config: cur, rule: None });
    Ok(Trace { entries, halted: HaltReason::StepLimit })
}

/// The unique configuration that steps to `c`.
///
/// A candidate predecessor exists for each rule entering `c.proc` whose
/// written symbol sits where the head was before the move. Halt states never
/// step, so rules leaving them are skipped.
pub fn step_backward(m: &ClassicalMachine, c: &ClassicalConfig) -> Result<ClassicalConfig, SimError> {
    let mut found: Option<ClassicalConfig> = None;
    let mut count = 0;
    for rule in m.table().iter().filter(|r| r.to == c.proc && !m.is_halt(r.from)) {
        let prev_head = c.head - rule.mv.offset();
        if c.tape.get(prev_head) != rule.write {
            continue;
        }
        if !rule.weight.is_one() {
            return Err(SimError::NotZeroOne(m.describe_rule(&rule)));
        }
        count += 1;
        found = Some(Configuration::new(prev_head, rule.from, c.tape.set(prev_head, rule.read)));
    }
    match (count, found) {
        (1, Some(prev)) => Ok(prev),
        (0, _) => Err(SimError::NoPredecessor),
        (n, _) => Err(SimError::AmbiguousPredecessor(n)),
    }
}

/// Raw 64-bit draw for step `step` of the run seeded with `seed`.
pub fn step_draw(seed: u64, step: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(step) * 2);
    rng.next_u64()
}

fn unit_fraction(draw: u64) -> QReal {
    let den = BigInt::from(1u8) << 64;
    QReal::from_rational(BigRational::new(BigInt::from(draw), den))
}

/// Rule chosen for `draw` in row `(q, s)`, or `None` when the draw falls in
/// the halting deficit.
pub fn sample_rule(m: &ClassicalMachine, q: StateId, read: Symbol, draw: u64) -> Option<Rule<StateId>> {
    let u = unit_fraction(draw);
    let mut cumulative = QReal::zero();
    for (target, w) in m.table().row(q, read) {
        cumulative = cumulative + &w.re;
        if u < cumulative {
            return Some(Rule::new(q, read, target.write, target.mv, target.to, w.clone()));
        }
    }
    None
}

pub fn run_probabilistic(
    m: &ClassicalMachine,
    c0: ClassicalConfig,
    max_steps: usize,
    seed: u64,
) -> Result<Trace, SimError> {
    match classify::is_probabilistic(m) {
        Ok(Verdict::Holds) => {}
        Ok(Verdict::Fails(w)) => {
            return Err(SimError::NotProbabilistic(classify::DisplayRow(m, &w).to_string()))
        }
        Err(e) => return Err(SimError::NotProbabilistic(e.to_string())),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut cur = c0;
    for _ in 0..max_steps {
        if m.is_halt(cur.proc) {
            entries.push(TraceEntry { config: cur, rule: None });
            return Ok(Trace { entries, halted: HaltReason::HaltState });
        }
        // Sequential next_u64 calls read words 2i, 2i+1: the same draw as
        // step_draw(seed, i).
        let draw = rng.next_u64();
        match sample_rule(m, cur.proc, cur.scanned(), draw) {
            Some(rule) => {
                let next = apply(&rule, &cur);
                entries.push(TraceEntry { config: cur, rule: Some(rule) });
                cur = next;
            }
            None => {
                entries.push(TraceEntry { config: cur, rule: None });
                return Ok(Trace { entries, halted: HaltReason::ProbHalt });
            }
        }
    }
    entries.push(TraceEntry { config: cur, rule: None });
    Ok(Trace { entries, halted: HaltReason::StepLimit })
}

/// Outcome probabilities `|amp|²` of a unit state vector.
pub fn born_distribution(
    psi: &StateVector<Scalar>,
) -> Result<BTreeMap<crate::machine::QuantumConfig, QReal>, SimError> {
    let norm = psi.norm_sqr();
    if !norm.is_one() {
        return Err(SimError::NotNormalized(norm.to_string()));
    }
    Ok(psi.iter().map(|(c, a)| (c.clone(), a.abs2())).collect())
}

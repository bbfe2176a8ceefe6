//! Membership tests for the classical machine classes.
//!
//! Every test works on the `(state, read)` rows of the rule table. A failed
//! test returns a witness naming the offending row or pair of rows.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::machine::{ClassicalMachine, Direction, Rule, StateId, Symbol, Target};
use crate::scalar::QReal;

/// Outcome of a membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// A `(state, read)` row and its weight sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowWitness {
    pub state: StateId,
    pub read: Symbol,
    pub row_sum: QReal,
}

/// Why two distinct rows make the one-step map non-injective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Collision {
    /// Both rows write the same symbol, move the same way and enter the same
    /// state.
    SameTarget(Target<StateId>),
    /// Both rows enter `to` but arrive from different directions.
    MixedDirections { to: StateId, first: Direction, second: Direction },
    /// Literal summed reading: the two row sums add up to `total`.
    RowSums { total: QReal },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairWitness {
    pub first: (StateId, Symbol),
    pub second: (StateId, Symbol),
    pub collision: Collision,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("rule `{0}` has a weight other than 0 or 1")]
    NotZeroOne(String),
    #[error("rule `{0}` has a weight that is not a real number in [0, 1]")]
    NotProbability(String),
    #[error("machine is not deterministic: row ({state}, {read}) has {count} rules")]
    NotDeterministic { state: String, read: Symbol, count: usize },
}

/// How the reversibility condition is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reading {
    /// Injectivity of the one-step map: distinct rows never share a target
    /// `(s', d, q')`, and every state is entered from a single direction.
    #[default]
    Pointwise,
    /// The summed form taken at face value: for every pair of distinct rows
    /// the two row sums must add up to 0 or 1. Rejects every total machine.
    Literal,
}

fn rows(m: &ClassicalMachine) -> impl Iterator<Item = (StateId, Symbol)> + '_ {
    m.state_ids().flat_map(|q| Symbol::ALL.into_iter().map(move |s| (q, s)))
}

fn row_sum(m: &ClassicalMachine, q: StateId, s: Symbol) -> QReal {
    m.table().row(q, s).map(|(_, w)| w.re.clone()).sum()
}

fn require_zero_one(m: &ClassicalMachine) -> Result<(), ClassifyError> {
    match m.table().iter().find(|r| !r.weight.is_one()) {
        Some(r) => Err(ClassifyError::NotZeroOne(m.describe_rule(&r))),
        None => Ok(()),
    }
}

fn require_deterministic(m: &ClassicalMachine) -> Result<(), ClassifyError> {
    match is_deterministic(m)? {
        Verdict::Holds => Ok(()),
        Verdict::Fails(w) => Err(ClassifyError::NotDeterministic {
            state: m.state_name(w.state).to_string(),
            read: w.read,
            count: m.table().row_len(w.state, w.read),
        }),
    }
}

/// Every row holds at most one rule, all weights 1.
pub fn is_deterministic(m: &ClassicalMachine) -> Result<Verdict<RowWitness>, ClassifyError> {
    require_zero_one(m)?;
    for (q, s) in rows(m) {
        let sum = row_sum(m, q, s);
        if sum > QReal::one() {
            return Ok(Verdict::Fails(RowWitness { state: q, read: s, row_sum: sum }));
        }
    }
    Ok(Verdict::Holds)
}

/// Deterministic and every row holds exactly one rule. The witness is the
/// first empty row.
pub fn is_total(m: &ClassicalMachine) -> Result<Verdict<RowWitness>, ClassifyError> {
    require_deterministic(m)?;
    for (q, s) in rows(m) {
        if m.table().row_len(q, s) == 0 {
            return Ok(Verdict::Fails(RowWitness { state: q, read: s, row_sum: QReal::zero() }));
        }
    }
    Ok(Verdict::Holds)
}

/// Copy of `m` where every empty row gets the self-loop `q s -> s N q`.
pub fn complete_with_self_loops(m: &ClassicalMachine) -> ClassicalMachine {
    let mut out = m.clone();
    for (q, s) in rows(m) {
        if m.table().row_len(q, s) == 0 {
            out.add_rule(Rule::certain(q, s, s, Direction::Stay, q))
                .expect("row was empty and states are declared");
        }
    }
    out
}

pub fn is_reversible(m: &ClassicalMachine) -> Result<Verdict<PairWitness>, ClassifyError> {
    is_reversible_with(m, Reading::Pointwise)
}

pub fn is_reversible_with(
    m: &ClassicalMachine,
    reading: Reading,
) -> Result<Verdict<PairWitness>, ClassifyError> {
    require_deterministic(m)?;
    match reading {
        Reading::Pointwise => Ok(pointwise_reversible(m)),
        Reading::Literal => Ok(literal_reversible(m)),
    }
}

fn pointwise_reversible(m: &ClassicalMachine) -> Verdict<PairWitness> {
    let mut by_target: BTreeMap<Target<StateId>, (StateId, Symbol)> = BTreeMap::new();
    let mut entry_dir: BTreeMap<StateId, ((StateId, Symbol), Direction)> = BTreeMap::new();
    for rule in m.table().iter() {
        let row = (rule.from, rule.read);
        let target = rule.target();
        if let Some(&prev) = by_target.get(&target) {
            return Verdict::Fails(PairWitness {
                first: prev,
                second: row,
                collision: Collision::SameTarget(target),
            });
        }
        by_target.insert(target, row);
        match entry_dir.get(&rule.to) {
            Some(&(prev, dir)) if dir != rule.mv => {
                return Verdict::Fails(PairWitness {
                    first: prev,
                    second: row,
                    collision: Collision::MixedDirections { to: rule.to, first: dir, second: rule.mv },
                });
            }
            Some(_) => {}
            None => {
                entry_dir.insert(rule.to, (row, rule.mv));
            }
        }
    }
    Verdict::Holds
}

fn literal_reversible(m: &ClassicalMachine) -> Verdict<PairWitness> {
    let all: Vec<_> = rows(m).map(|(q, s)| ((q, s), row_sum(m, q, s))).collect();
    for (i, (a, sa)) in all.iter().enumerate() {
        for (b, sb) in &all[i + 1..] {
            let total = sa + sb;
            if !(total.is_zero() || total.is_one()) {
                return Verdict::Fails(PairWitness {
                    first: *a,
                    second: *b,
                    collision: Collision::RowSums { total },
                });
            }
        }
    }
    Verdict::Holds
}

fn require_probability_weights(m: &ClassicalMachine) -> Result<(), ClassifyError> {
    let bad = m.table().iter().find(|r| {
        !r.weight.is_real() || r.weight.re.is_negative() || r.weight.re > QReal::one()
    });
    match bad {
        Some(r) => Err(ClassifyError::NotProbability(m.describe_rule(&r))),
        None => Ok(()),
    }
}

/// Every row sum lies in `[0, 1]`.
pub fn is_probabilistic(m: &ClassicalMachine) -> Result<Verdict<RowWitness>, ClassifyError> {
    require_probability_weights(m)?;
    for (q, s) in rows(m) {
        let sum = row_sum(m, q, s);
        if sum > QReal::one() {
            return Ok(Verdict::Fails(RowWitness { state: q, read: s, row_sum: sum }));
        }
    }
    Ok(Verdict::Holds)
}

/// Nonempty rows whose weights sum to less than 1. The deficit is the halting
/// probability of the sampler.
pub fn substochastic_rows(m: &ClassicalMachine) -> Vec<RowWitness> {
    rows(m)
        .filter(|&(q, s)| m.table().row_len(q, s) > 0)
        .map(|(q, s)| RowWitness { state: q, read: s, row_sum: row_sum(m, q, s) })
        .filter(|w| w.row_sum < QReal::one())
        .collect()
}

/// Every verdict at once, for reports.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub deterministic: Result<Verdict<RowWitness>, ClassifyError>,
    pub total: Result<Verdict<RowWitness>, ClassifyError>,
    pub reversible: Result<Verdict<PairWitness>, ClassifyError>,
    pub probabilistic: Result<Verdict<RowWitness>, ClassifyError>,
    pub substochastic: Vec<RowWitness>,
}

impl ClassReport {
    pub fn new(m: &ClassicalMachine, reading: Reading) -> Self {
        ClassReport {
            deterministic: is_deterministic(m),
            total: is_total(m),
            reversible: is_reversible_with(m, reading),
            probabilistic: is_probabilistic(m),
            substochastic: substochastic_rows(m),
        }
    }

    /// Whether `m` belongs to the class it declares.
    pub fn member_of_declared(&self, m: &ClassicalMachine) -> bool {
        fn ok<W>(r: &Result<Verdict<W>, ClassifyError>) -> bool {
            matches!(r, Ok(Verdict::Holds))
        }
        match m.kind {
            crate::machine::Kind::Deterministic => ok(&self.deterministic),
            crate::machine::Kind::Reversible => ok(&self.reversible),
            crate::machine::Kind::Probabilistic => ok(&self.probabilistic),
            crate::machine::Kind::Quantum => false,
        }
    }
}

/// Human-readable rendering of a row witness against its machine.
pub struct DisplayRow<'a>(pub &'a ClassicalMachine, pub &'a RowWitness);

impl fmt::Display for DisplayRow<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let DisplayRow(m, w) = self;
        write!(f, "row ({}, {}) sums to {}", m.state_name(w.state), w.read, w.row_sum)
    }
}

/// Human-readable rendering of a pair witness against its machine.
pub struct DisplayPair<'a>(pub &'a ClassicalMachine, pub &'a PairWitness);

impl fmt::Display for DisplayPair<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let DisplayPair(m, w) = self;
        write!(
            f,
            "rows ({}, {}) and ({}, {}) ",
            m.state_name(w.first.0),
            w.first.1,
            m.state_name(w.second.0),
            w.second.1
        )?;
        match &w.collision {
            Collision::SameTarget(t) => {
                write!(f, "share target ({}, {}, {})", t.write, t.mv, m.state_name(t.to))
            }
            Collision::MixedDirections { to, first, second } => {
                write!(f, "enter {} moving {} and {}", m.state_name(*to), first, second)
            }
            Collision::RowSums { total } => write!(f, "have combined row sum {total}"),
        }
    }
}

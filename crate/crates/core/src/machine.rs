//! Machine components shared by every kind: symbols, moves, control states,
//! tapes, configurations and rule tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// A tape symbol from the binary alphabet. `Zero` is the blank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Zero,
    One,
}

impl Symbol {
    pub const ALL: [Symbol; 2] = [Symbol::Zero, Symbol::One];

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Symbol::Zero => 0,
            Symbol::One => 1,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Head movement: left, no motion, right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Left,
    Stay,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Left, Direction::Stay, Direction::Right];

    pub fn offset(self) -> i64 {
        match self {
            Direction::Left => -1,
            Direction::Stay => 0,
            Direction::Right => 1,
        }
    }

    pub fn from_offset(d: i64) -> Option<Self> {
        match d {
            -1 => Some(Direction::Left),
            0 => Some(Direction::Stay),
            1 => Some(Direction::Right),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::Left => 'L',
            Direction::Stay => 'N',
            Direction::Right => 'R',
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s {
            "L" => Some(Direction::Left),
            "N" => Some(Direction::Stay),
            "R" => Some(Direction::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Index into a classical machine's declared state list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

/// Processor state of a quantum machine: a value of `k` binary observables.
///
/// Written as a bitstring whose first character is the most significant
/// bit of `code`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcState {
    k: u8,
    code: u32,
}

/// Largest supported processor width.
pub const MAX_QUBITS: u8 = 16;

impl ProcState {
    /// Panics if `code` does not fit in `k` bits or `k` exceeds [`MAX_QUBITS`].
    pub fn new(k: u8, code: u32) -> Self {
        assert!((1..=MAX_QUBITS).contains(&k), "qubit count {k} out of range");
        assert!(code < (1u32 << k), "code {code} does not fit in {k} bits");
        ProcState { k, code }
    }

    pub fn zeros(k: u8) -> Self {
        ProcState::new(k, 0)
    }

    pub fn parse(bits: &str) -> Option<Self> {
        let k = u8::try_from(bits.len()).ok()?;
        if k == 0 || k > MAX_QUBITS {
            return None;
        }
        let mut code = 0u32;
        for c in bits.chars() {
            code = code << 1 | u32::from(Symbol::from_char(c)?.bit());
        }
        Some(ProcState { k, code })
    }

    pub fn width(self) -> u8 {
        self.k
    }

    pub fn code(self) -> u32 {
        self.code
    }

    /// Every processor state of width `k`, in code order.
    pub fn all(k: u8) -> impl Iterator<Item = ProcState> {
        (0..1u32 << k).map(move |code| ProcState::new(k, code))
    }
}

impl fmt::Display for ProcState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.k).rev() {
            write!(f, "{}", self.code >> i & 1)?;
        }
        Ok(())
    }
}

/// Control label of a configuration: a classical [`StateId`] or a quantum
/// [`ProcState`].
pub trait Control: Copy + Ord + std::hash::Hash + fmt::Debug + Send + Sync + 'static {
    /// Integer used by the canonical configuration order.
    fn code(&self) -> u64;
}

impl Control for StateId {
    fn code(&self) -> u64 {
        self.0 as u64
    }
}

impl Control for ProcState {
    fn code(&self) -> u64 {
        u64::from(self.code)
    }
}

/// Bi-infinite binary tape with finitely many `1` cells.
///
/// Only the positions holding `1` are stored, so equal tapes have identical
/// representations.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tape {
    ones: BTreeSet<i64>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    /// Tape holding `bits` starting at cell `offset`.
    pub fn from_bits(bits: &[Symbol], offset: i64) -> Self {
        let mut tape = Tape::new();
        for (i, &s) in bits.iter().enumerate() {
            tape.write(offset + i as i64, s);
        }
        tape
    }

    /// Parse a `0`/`1` string placed at `offset`.
    pub fn parse_bits(bits: &str, offset: i64) -> Option<Self> {
        let symbols: Option<Vec<Symbol>> = bits.chars().map(Symbol::from_char).collect();
        Some(Tape::from_bits(&symbols?, offset))
    }

    pub fn get(&self, x: i64) -> Symbol {
        Symbol::from_bit(self.ones.contains(&x))
    }

    /// Copy of this tape with cell `x` set to `s`.
    pub fn set(&self, x: i64, s: Symbol) -> Tape {
        let mut t = self.clone();
        t.write(x, s);
        t
    }

    pub fn write(&mut self, x: i64, s: Symbol) {
        match s {
            Symbol::One => {
                self.ones.insert(x);
            }
            Symbol::Zero => {
                self.ones.remove(&x);
            }
        }
    }

    pub fn is_blank(&self) -> bool {
        self.ones.is_empty()
    }

    /// Positions holding `1`, ascending.
    pub fn ones(&self) -> impl Iterator<Item = i64> + '_ {
        self.ones.iter().copied()
    }

    pub fn min_one(&self) -> Option<i64> {
        self.ones.first().copied()
    }

    pub fn max_one(&self) -> Option<i64> {
        self.ones.last().copied()
    }

    /// Cells `lo..=hi` as a bit string.
    pub fn bits(&self, lo: i64, hi: i64) -> String {
        (lo..=hi).map(|x| char::from(b'0' + self.get(x).bit())).collect()
    }

    /// Whether the tapes agree on every cell outside `cells`.
    pub fn agrees_outside(&self, other: &Tape, cells: &[i64]) -> bool {
        self.ones
            .symmetric_difference(&other.ones)
            .all(|x| cells.contains(x))
    }
}

/// Basis configuration `|x, n, m⟩`: head position, control state, tape.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration<P> {
    pub head: i64,
    pub proc: P,
    pub tape: Tape,
}

impl<P: Control> Configuration<P> {
    pub fn new(head: i64, proc: P, tape: Tape) -> Self {
        Configuration { head, proc, tape }
    }

    pub fn scanned(&self) -> Symbol {
        self.tape.get(self.head)
    }
}

pub type ClassicalConfig = Configuration<StateId>;
pub type QuantumConfig = Configuration<ProcState>;

/// One instruction `(q, s, s', d, q')` with its weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule<P> {
    pub from: P,
    pub read: Symbol,
    pub write: Symbol,
    pub mv: Direction,
    pub to: P,
    pub weight: Scalar,
}

impl<P: Control> Rule<P> {
    pub fn new(from: P, read: Symbol, write: Symbol, mv: Direction, to: P, weight: Scalar) -> Self {
        Rule { from, read, write, mv, to, weight }
    }

    /// Rule with weight 1.
    pub fn certain(from: P, read: Symbol, write: Symbol, mv: Direction, to: P) -> Self {
        Rule::new(from, read, write, mv, to, Scalar::one())
    }

    pub fn target(&self) -> Target<P> {
        Target { write: self.write, mv: self.mv, to: self.to }
    }
}

/// The `(s', d, q')` half of an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Target<P> {
    pub write: Symbol,
    pub mv: Direction,
    pub to: P,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("duplicate rule for key {0}")]
    Duplicate(String),
    #[error("zero-weight rule {0}; omit it instead")]
    ZeroWeight(String),
}

/// Sparse transition function: absent entries are 0.
///
/// Rows are keyed by `(from, read)`; within a row entries are keyed by
/// [`Target`], so iteration follows the canonical
/// `(from, read, write, move, to)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable<P> {
    rows: BTreeMap<(P, Symbol), BTreeMap<Target<P>, Scalar>>,
}

impl<P: Control> Default for RuleTable<P> {
    fn default() -> Self {
        RuleTable { rows: BTreeMap::new() }
    }
}

impl<P: Control> RuleTable<P> {
    pub fn new() -> Self {
        RuleTable::default()
    }

    pub fn insert(&mut self, rule: Rule<P>) -> Result<(), TableError> {
        let key = format!(
            "({:?}, {}, {}, {}, {:?})",
            rule.from, rule.read, rule.write, rule.mv, rule.to
        );
        if rule.weight.is_zero() {
            return Err(TableError::ZeroWeight(key));
        }
        let row = self.rows.entry((rule.from, rule.read)).or_default();
        let target = rule.target();
        if row.contains_key(&target) {
            return Err(TableError::Duplicate(key));
        }
        row.insert(target, rule.weight);
        Ok(())
    }

    /// δ(from, read, write, mv, to), 0 when absent.
    pub fn weight(&self, from: P, read: Symbol, write: Symbol, mv: Direction, to: P) -> Scalar {
        self.rows
            .get(&(from, read))
            .and_then(|row| row.get(&Target { write, mv, to }))
            .cloned()
            .unwrap_or_default()
    }

    /// Nonzero entries of row `(from, read)` in canonical order.
    pub fn row(&self, from: P, read: Symbol) -> impl Iterator<Item = (&Target<P>, &Scalar)> {
        self.rows.get(&(from, read)).into_iter().flat_map(|row| row.iter())
    }

    pub fn row_len(&self, from: P, read: Symbol) -> usize {
        self.rows.get(&(from, read)).map_or(0, BTreeMap::len)
    }

    /// All rules in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = Rule<P>> + '_ {
        self.rows.iter().flat_map(|(&(from, read), row)| {
            row.iter().map(move |(t, w)| Rule::new(from, read, t.write, t.mv, t.to, w.clone()))
        })
    }

    pub fn len(&self) -> usize {
        self.rows.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl<P: Control> FromIterator<Rule<P>> for Result<RuleTable<P>, TableError> {
    fn from_iter<I: IntoIterator<Item = Rule<P>>>(iter: I) -> Self {
        let mut table = RuleTable::new();
        for rule in iter {
            table.insert(rule)?;
        }
        Ok(table)
    }
}

/// The four machine kinds a document can declare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Deterministic,
    Reversible,
    Probabilistic,
    Quantum,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Deterministic => "deterministic",
            Kind::Reversible => "reversible",
            Kind::Probabilistic => "probabilistic",
            Kind::Quantum => "quantum",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "deterministic" => Some(Kind::Deterministic),
            "reversible" => Some(Kind::Reversible),
            "probabilistic" => Some(Kind::Probabilistic),
            "quantum" => Some(Kind::Quantum),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("machine declares no states")]
    NoStates,
    #[error("state index {0} is not declared")]
    UnknownState(usize),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("classical machine cannot have kind `quantum`")]
    QuantumKind,
    #[error(transparent)]
    Table(#[from] TableError),
}

/// A deterministic, reversible or probabilistic machine over named states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalMachine {
    pub name: String,
    pub kind: Kind,
    states: Vec<String>,
    table: RuleTable<StateId>,
    start: StateId,
    halt: BTreeSet<StateId>,
}

impl ClassicalMachine {
    /// Machine with no rules, starting in the first state.
    pub fn new(name: impl Into<String>, kind: Kind, states: Vec<String>) -> Result<Self, MachineError> {
        if kind == Kind::Quantum {
            return Err(MachineError::QuantumKind);
        }
        if states.is_empty() {
            return Err(MachineError::NoStates);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(MachineError::DuplicateState(s.clone()));
            }
        }
        Ok(ClassicalMachine {
            name: name.into(),
            kind,
            states,
            table: RuleTable::new(),
            start: StateId(0),
            halt: BTreeSet::new(),
        })
    }

    /// States named `q0 … q{n-1}`.
    pub fn with_numbered_states(name: impl Into<String>, kind: Kind, n: usize) -> Result<Self, MachineError> {
        ClassicalMachine::new(name, kind, (0..n).map(|i| format!("q{i}")).collect())
    }

    fn check(&self, q: StateId) -> Result<(), MachineError> {
        if q.0 < self.states.len() {
            Ok(())
        } else {
            Err(MachineError::UnknownState(q.0))
        }
    }

    pub fn add_rule(&mut self, rule: Rule<StateId>) -> Result<(), MachineError> {
        self.check(rule.from)?;
        self.check(rule.to)?;
        self.table.insert(rule)?;
        Ok(())
    }

    pub fn with_rules(mut self, rules: impl IntoIterator<Item = Rule<StateId>>) -> Result<Self, MachineError> {
        for r in rules {
            self.add_rule(r)?;
        }
        Ok(self)
    }

    pub fn set_start(&mut self, q: StateId) -> Result<(), MachineError> {
        self.check(q)?;
        self.start = q;
        Ok(())
    }

    pub fn add_halt(&mut self, q: StateId) -> Result<(), MachineError> {
        self.check(q)?;
        self.halt.insert(q);
        Ok(())
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn table(&self) -> &RuleTable<StateId> {
        &self.table
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn halt_states(&self) -> &BTreeSet<StateId> {
        &self.halt
    }

    pub fn is_halt(&self, q: StateId) -> bool {
        self.halt.contains(&q)
    }

    /// Start configuration with `input` written from cell 0 and the head on 0.
    pub fn initial_config(&self, input: &[Symbol]) -> ClassicalConfig {
        Configuration::new(0, self.start, Tape::from_bits(input, 0))
    }

    /// `q s -> s' d q'` rendering used by traces and diagnostics.
    pub fn describe_rule(&self, rule: &Rule<StateId>) -> String {
        format!(
            "{} {} -> {} {} {}",
            self.state_name(rule.from),
            rule.read,
            rule.write,
            rule.mv,
            self.state_name(rule.to)
        )
    }
}

/// Truncation bound: head and tape support confined to `[-L, L]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    radius: u32,
}

/// Largest radius whose window tape still packs into a `u64` code.
pub const MAX_WINDOW_RADIUS: u32 = 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("window radius must be between 1 and {MAX_WINDOW_RADIUS}, got {0}")]
    BadRadius(u32),
    #[error("configuration at head {head} lies outside the window L={radius}")]
    Outside { head: i64, radius: u32 },
}

impl Window {
    pub fn new(radius: u32) -> Result<Self, WindowError> {
        if radius == 0 || radius > MAX_WINDOW_RADIUS {
            return Err(WindowError::BadRadius(radius));
        }
        Ok(Window { radius })
    }

    pub fn radius(self) -> u32 {
        self.radius
    }

    pub fn lo(self) -> i64 {
        -i64::from(self.radius)
    }

    pub fn hi(self) -> i64 {
        i64::from(self.radius)
    }

    /// Number of tape cells in the window, `2L + 1`.
    pub fn cells(self) -> u32 {
        2 * self.radius + 1
    }

    /// `(2L+1) · controls · 2^(2L+1)`.
    pub fn config_count(self, controls: usize) -> u128 {
        u128::from(self.cells()) * controls as u128 * (1u128 << self.cells())
    }

    pub fn contains<P>(self, c: &Configuration<P>) -> bool {
        (self.lo()..=self.hi()).contains(&c.head)
            && c.tape.min_one().is_none_or(|x| x >= self.lo())
            && c.tape.max_one().is_none_or(|x| x <= self.hi())
    }

    /// Inside the window with the head at least one cell from the edge, so
    /// every one-step image stays inside.
    pub fn is_interior<P>(self, c: &Configuration<P>) -> bool {
        self.contains(c) && c.head > self.lo() && c.head < self.hi()
    }

    /// Window cells as an integer; cell `-L` is the most significant bit.
    pub fn tape_code(self, tape: &Tape) -> u64 {
        tape.ones().fold(0u64, |acc, x| acc | 1u64 << (self.hi() - x))
    }

    pub fn tape_from_code(self, code: u64) -> Tape {
        let mut tape = Tape::new();
        for x in self.lo()..=self.hi() {
            if code >> (self.hi() - x) & 1 == 1 {
                tape.write(x, Symbol::One);
            }
        }
        tape
    }

    /// Sort key `(head, control code, tape code)`, `None` outside the window.
    pub fn key<P: Control>(self, c: &Configuration<P>) -> Option<(i64, u64, u64)> {
        self.contains(c).then(|| (c.head, c.proc.code(), self.tape_code(&c.tape)))
    }
}

/// Canonical order of window configurations: lexicographic on head, control
/// code and window tape bits.
pub fn config_canonical_cmp<P: Control>(
    a: &Configuration<P>,
    b: &Configuration<P>,
    window: Window,
) -> Result<std::cmp::Ordering, WindowError> {
    let key = |c: &Configuration<P>| {
        window.key(c).ok_or(WindowError::Outside { head: c.head, radius: window.radius })
    };
    Ok(key(a)?.cmp(&key(b)?))
}

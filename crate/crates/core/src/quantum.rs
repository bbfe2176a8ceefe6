//! Quantum machines: the local transition function, the evolution operator it
//! induces, and the local well-formedness conditions.
//!
//! The evolution operator acts on a basis configuration `|x, n, m⟩` as
//!
//! ```text
//! U|x, n, m⟩ = Σ_{s', d, n'} δ(n, m_x, s', d, n') |x + d, n', m[x := s']⟩
//! ```
//!
//! and is unitary exactly when every `(n, s)` row of δ has squared norm 1 and
//! the images of distinct configurations are orthogonal. Both conditions are
//! checked here with exact arithmetic; [`crate::oracle`] checks the same
//! property on an explicit truncated matrix.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::classify::{self, Verdict};
use crate::machine::{
    ClassicalConfig, ClassicalMachine, Configuration, Direction, ProcState, QuantumConfig, Rule,
    RuleTable, StateId, Symbol, TableError, Tape, Window,
};
use crate::scalar::{Amplitude, QReal, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error("processor state `{found}` has width {}, expected {expected}", found.width())]
    Width { expected: u8, found: ProcState },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("orthogonality check needs a window of radius at least 2, got {0}")]
    WindowTooSmall(u32),
    #[error("state vector is not normalized: norm² = {0}")]
    NotNormalized(String),
}

/// Local transition function δ: N × Σ × Σ × D × N → ℚ(√2, i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QDelta {
    qubits: u8,
    table: RuleTable<ProcState>,
}

impl QDelta {
    pub fn new(qubits: u8) -> Self {
        assert!((1..=crate::machine::MAX_QUBITS).contains(&qubits));
        QDelta { qubits, table: RuleTable::new() }
    }

    pub fn qubits(&self) -> u8 {
        self.qubits
    }

    pub fn table(&self) -> &RuleTable<ProcState> {
        &self.table
    }

    fn check(&self, n: ProcState) -> Result<(), QuantumError> {
        if n.width() == self.qubits {
            Ok(())
        } else {
            Err(QuantumError::Width { expected: self.qubits, found: n })
        }
    }

    pub fn insert(&mut self, rule: Rule<ProcState>) -> Result<(), QuantumError> {
        self.check(rule.from)?;
        self.check(rule.to)?;
        self.table.insert(rule)?;
        Ok(())
    }

    pub fn with_rules(mut self, rules: impl IntoIterator<Item = Rule<ProcState>>) -> Result<Self, QuantumError> {
        for r in rules {
            self.insert(r)?;
        }
        Ok(self)
    }

    /// δ(n, s, s', d, n'), 0 when absent.
    pub fn lookup(
        &self,
        n: ProcState,
        read: Symbol,
        write: Symbol,
        mv: Direction,
        n2: ProcState,
    ) -> Result<Scalar, QuantumError> {
        self.check(n)?;
        self.check(n2)?;
        Ok(self.table.weight(n, read, write, mv, n2))
    }

    /// All `(n, s)` rows, in order.
    pub fn rows(&self) -> impl Iterator<Item = (ProcState, Symbol)> {
        ProcState::all(self.qubits).flat_map(|n| Symbol::ALL.into_iter().map(move |s| (n, s)))
    }
}

/// A named δ with a start processor state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumMachine {
    pub name: String,
    pub delta: QDelta,
    pub start: ProcState,
}

impl QuantumMachine {
    pub fn new(name: impl Into<String>, delta: QDelta) -> Self {
        let start = ProcState::zeros(delta.qubits());
        QuantumMachine { name: name.into(), delta, start }
    }
}

/// Finitely supported superposition of basis configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<A = Scalar> {
    amps: BTreeMap<QuantumConfig, A>,
    pruned_mass: f64,
}

impl<A: Amplitude> Default for StateVector<A> {
    fn default() -> Self {
        StateVector { amps: BTreeMap::new(), pruned_mass: 0.0 }
    }
}

impl<A: Amplitude> StateVector<A> {
    pub fn basis(c: QuantumConfig) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(c, A::from_scalar(&Scalar::one()));
        StateVector { amps, pruned_mass: 0.0 }
    }

    /// Sums amplitudes of repeated configurations and drops negligible ones.
    pub fn from_amplitudes(items: impl IntoIterator<Item = (QuantumConfig, A)>) -> Self {
        let mut acc: BTreeMap<QuantumConfig, A> = BTreeMap::new();
        for (c, a) in items {
            match acc.get_mut(&c) {
                Some(v) => *v = v.add(&a),
                None => {
                    acc.insert(c, a);
                }
            }
        }
        let mut out = StateVector::default();
        for (c, a) in acc {
            out.push_pruned(c, a);
        }
        out
    }

    fn push_pruned(&mut self, c: QuantumConfig, a: A) {
        if a.is_negligible() {
            self.pruned_mass += a.abs2_f64();
        } else {
            self.amps.insert(c, a);
        }
    }

    pub fn amplitude(&self, c: &QuantumConfig) -> A {
        self.amps.get(c).cloned().unwrap_or_else(A::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuantumConfig, &A)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Squared modulus mass dropped by pruning so far (always 0 for the exact
    /// backend).
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    pub fn norm_sqr_f64(&self) -> f64 {
        self.amps.values().map(A::abs2_f64).sum()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> A {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = A::zero();
        for (c, a) in &small.amps {
            if let Some(b) = large.amps.get(c) {
                let term = if flip { b.conj().mul(a) } else { a.conj().mul(b) };
                acc = acc.add(&term);
            }
        }
        acc
    }
}

impl StateVector<Scalar> {
    /// Exact `Σ |amp|²`.
    pub fn norm_sqr(&self) -> QReal {
        self.amps.values().map(Scalar::abs2).sum()
    }

    /// Fails unless the exact norm is 1.
    pub fn normalized(items: impl IntoIterator<Item = (QuantumConfig, Scalar)>) -> Result<Self, QuantumError> {
        let v = StateVector::from_amplitudes(items);
        let norm = v.norm_sqr();
        if norm.is_one() {
            Ok(v)
        } else {
            Err(QuantumError::NotNormalized(norm.to_string()))
        }
    }

    /// Floating image of this vector.
    pub fn to_float(&self) -> StateVector<num_complex::Complex64> {
        StateVector::from_amplitudes(self.amps.iter().map(|(c, a)| (c.clone(), a.to_complex64())))
    }
}

/// One application of U.
pub fn apply_step<A: Amplitude>(delta: &QDelta, psi: &StateVector<A>) -> StateVector<A> {
    let mut acc: BTreeMap<QuantumConfig, A> = BTreeMap::new();
    for (c, amp) in psi.iter() {
        let read = c.scanned();
        for (target, w) in delta.table().row(c.proc, read) {
            let next = Configuration::new(
                c.head + target.mv.offset(),
                target.to,
                c.tape.set(c.head, target.write),
            );
            let term = amp.mul(&A::from_scalar(w));
            match acc.get_mut(&next) {
                Some(v) => *v = v.add(&term),
                None => {
                    acc.insert(next, term);
                }
            }
        }
    }
    let mut out = StateVector { amps: BTreeMap::new(), pruned_mass: psi.pruned_mass };
    for (c, a) in acc {
        out.push_pruned(c, a);
    }
    out
}

/// `U^t ψ`.
pub fn evolve<A: Amplitude>(delta: &QDelta, psi: &StateVector<A>, t: usize) -> StateVector<A> {
    let mut cur = psi.clone();
    for _ in 0..t {
        cur = apply_step(delta, &cur);
    }
    cur
}

/// `⟨to|U|from⟩` from the Kronecker structure: nonzero only when the head
/// moves by at most one cell and the tapes agree away from the scanned cell.
pub fn matrix_element(delta: &QDelta, from: &QuantumConfig, to: &QuantumConfig) -> Scalar {
    let Some(mv) = Direction::from_offset(to.head - from.head) else {
        return Scalar::zero();
    };
    if !from.tape.agrees_outside(&to.tape, &[from.head]) {
        return Scalar::zero();
    }
    delta
        .table()
        .weight(from.proc, from.tape.get(from.head), to.tape.get(from.head), mv, to.proc)
}

/// Squared norm of one `(n, s)` row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowNorm {
    pub proc: ProcState,
    pub read: Symbol,
    pub norm_sqr: QReal,
}

impl RowNorm {
    pub fn is_unit(&self) -> bool {
        self.norm_sqr.is_one()
    }
}

/// `Σ_{s', d, n'} |δ(n, s, s', d, n')|²` for every row.
pub fn check_normalization(delta: &QDelta) -> Vec<RowNorm> {
    delta
        .rows()
        .map(|(n, s)| RowNorm {
            proc: n,
            read: s,
            norm_sqr: delta.table().row(n, s).map(|(_, w)| w.abs2()).sum(),
        })
        .collect()
}

/// Two distinct configurations whose one-step images overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub first: QuantumConfig,
    pub second: QuantumConfig,
    pub inner: Scalar,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrthogonalityReport {
    pub pairs_checked: usize,
    pub overlaps: Vec<Overlap>,
}

impl OrthogonalityReport {
    pub fn passes(&self) -> bool {
        self.overlaps.is_empty()
    }
}

/// Pairwise orthogonality of one-step images.
///
/// Images of `c₁` and `c₂` can share a basis state only if the heads are at
/// most two cells apart and the tapes agree outside the two scanned cells, so
/// the inner product depends on the two control states, the head offset and
/// the contents of those cells. The check places the first head at every
/// interior cell of `window` and enumerates all such local assignments with
/// the remaining cells blank. Since the inner product is translation
/// invariant, the verdict is the same for every window of radius ≥ 2.
pub fn check_orthogonality(delta: &QDelta, window: Window) -> Result<OrthogonalityReport, QuantumError> {
    if window.radius() < 2 {
        return Err(QuantumError::WindowTooSmall(window.radius()));
    }
    let procs: Vec<ProcState> = ProcState::all(delta.qubits()).collect();
    let mut images: HashMap<QuantumConfig, StateVector<Scalar>> = HashMap::new();
    let mut image = |c: &QuantumConfig| -> StateVector<Scalar> {
        images
            .entry(c.clone())
            .or_insert_with(|| apply_step(delta, &StateVector::basis(c.clone())))
            .clone()
    };
    let mut report = OrthogonalityReport::default();
    let (lo, hi) = (window.lo() + 1, window.hi() - 1);
    for x1 in lo..=hi {
        for gap in 0..=2 {
            let x2 = x1 + gap;
            if x2 > hi {
                continue;
            }
            for pair in local_pairs(&procs, x1, x2) {
                let (c1, c2) = pair;
                report.pairs_checked += 1;
                let inner = image(&c1).inner(&image(&c2));
                if !inner.is_zero() {
                    report.overlaps.push(Overlap { first: c1, second: c2, inner });
                }
            }
        }
    }
    Ok(report)
}

/// Distinct configuration pairs with heads at `x1 <= x2` whose tapes are blank
/// outside `{x1, x2}`.
fn local_pairs(procs: &[ProcState], x1: i64, x2: i64) -> Vec<(QuantumConfig, QuantumConfig)> {
    let cells: Vec<i64> = if x1 == x2 { vec![x1] } else { vec![x1, x2] };
    let patterns = 1u32 << cells.len();
    let tape = |bits: u32| {
        let mut t = Tape::new();
        for (i, &x) in cells.iter().enumerate() {
            t.write(x, Symbol::from_bit(bits >> i & 1 == 1));
        }
        t
    };
    let mut out = Vec::new();
    for &n1 in procs {
        for b1 in 0..patterns {
            let c1 = Configuration::new(x1, n1, tape(b1));
            for &n2 in procs {
                for b2 in 0..patterns {
                    // Same head: unordered pairs of distinct configurations.
                    if x1 == x2 && (n2, b2) <= (n1, b1) {
                        continue;
                    }
                    out.push((c1.clone(), Configuration::new(x2, n2, tape(b2))));
                }
            }
        }
    }
    out
}

/// A single failed condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Row whose squared norm differs from 1 by `defect = 1 - norm²`.
    Row { proc: ProcState, read: Symbol, norm_sqr: QReal, defect: QReal },
    /// Pair of configurations with non-orthogonal images.
    Pair(Overlap),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFormedness {
    pub normalized: bool,
    pub orthogonal: bool,
    pub violations: Vec<Violation>,
}

impl WellFormedness {
    pub fn is_well_formed(&self) -> bool {
        self.normalized && self.orthogonal
    }
}

/// Both local conditions, with every violation found.
pub fn well_formed(delta: &QDelta, window: Window) -> Result<WellFormedness, QuantumError> {
    let mut violations: Vec<Violation> = check_normalization(delta)
        .into_iter()
        .filter(|r| !r.is_unit())
        .map(|r| Violation::Row {
            defect: QReal::one() - &r.norm_sqr,
            proc: r.proc,
            read: r.read,
            norm_sqr: r.norm_sqr,
        })
        .collect();
    let normalized = violations.is_empty();
    let ortho = check_orthogonality(delta, window)?;
    let orthogonal = ortho.passes();
    violations.extend(ortho.overlaps.into_iter().map(Violation::Pair));
    Ok(WellFormedness { normalized, orthogonal, violations })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("cannot lift: {classifier} failed ({detail})")]
    Precondition { classifier: &'static str, detail: String },
}

/// A reversible machine embedded as a quantum machine.
#[derive(Clone, Debug)]
pub struct Lifted {
    pub machine: QuantumMachine,
    /// Processor code of each classical state, indexed by [`StateId`].
    pub encoding: Vec<ProcState>,
}

impl Lifted {
    pub fn encode(&self, q: StateId) -> ProcState {
        self.encoding[q.0]
    }

    pub fn decode(&self, n: ProcState) -> Option<StateId> {
        self.encoding.iter().position(|&e| e == n).map(StateId)
    }

    pub fn encode_config(&self, c: &ClassicalConfig) -> QuantumConfig {
        Configuration::new(c.head, self.encode(c.proc), c.tape.clone())
    }
}

/// Smallest `k ≥ 1` with `2^k ≥ states`.
pub fn qubits_for(states: usize) -> u8 {
    let mut k = 1u8;
    while (1usize << k) < states {
        k += 1;
    }
    k
}

/// Embed a total deterministic reversible machine: each rule becomes an
/// amplitude-1 entry and every unused processor code gets identity rows.
pub fn lift_reversible(m: &ClassicalMachine) -> Result<Lifted, LiftError> {
    let fail = |classifier: &'static str, detail: String| LiftError::Precondition { classifier, detail };
    match classify::is_deterministic(m) {
        Ok(Verdict::Holds) => {}
        Ok(Verdict::Fails(w)) => {
            return Err(fail("is_deterministic", classify::DisplayRow(m, &w).to_string()))
        }
        Err(e) => return Err(fail("is_deterministic", e.to_string())),
    }
    match classify::is_total(m) {
        Ok(Verdict::Holds) => {}
        Ok(Verdict::Fails(w)) => return Err(fail("is_total", classify::DisplayRow(m, &w).to_string())),
        Err(e) => return Err(fail("is_total", e.to_string())),
    }
    match classify::is_reversible(m) {
        Ok(Verdict::Holds) => {}
        Ok(Verdict::Fails(w)) => {
            return Err(fail("is_reversible", classify::DisplayPair(m, &w).to_string()))
        }
        Err(e) => return Err(fail("is_reversible", e.to_string())),
    }
    let states = m.states().len();
    let k = qubits_for(states);
    let encoding: Vec<ProcState> = (0..states).map(|i| ProcState::new(k, i as u32)).collect();
    let mut delta = QDelta::new(k);
    for r in m.table().iter() {
        delta
            .insert(Rule::new(encoding[r.from.0], r.read, r.write, r.mv, encoding[r.to.0], r.weight))
            .expect("classical table has unique keys");
    }
    for n in ProcState::all(k).skip(states) {
        for s in Symbol::ALL {
            delta
                .insert(Rule::certain(n, s, s, Direction::Stay, n))
                .expect("unused code has no rules yet");
        }
    }
    let mut machine = QuantumMachine::new(format!("{}_lifted", m.name), delta);
    machine.start = encoding[m.start().0];
    Ok(Lifted { machine, encoding })
}

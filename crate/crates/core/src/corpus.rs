//! Named reference machines and seeded random generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::machine::{
    ClassicalMachine, Configuration, Direction, Kind, ProcState, QuantumConfig, Rule, StateId, Symbol, Tape,
};
use crate::quantum::{lift_reversible, QDelta, QuantumMachine, StateVector};
use crate::scalar::{QReal, Scalar};

use Direction::{Left, Right, Stay};
use Symbol::{One, Zero};

fn classical(name: &str, kind: Kind, states: usize, rules: Vec<Rule<StateId>>) -> ClassicalMachine {
    ClassicalMachine::with_numbered_states(name, kind, states)
        .and_then(|m| m.with_rules(rules))
        .expect("reference machine is consistent")
}

fn delta(k: u8, rules: Vec<Rule<ProcState>>) -> QDelta {
    QDelta::new(k).with_rules(rules).expect("reference table is consistent")
}

fn p(code: u32) -> ProcState {
    ProcState::new(1, code)
}

/// Single-state machine that moves right forever, leaving the tape alone.
pub fn right_mover() -> ClassicalMachine {
    let q = StateId(0);
    classical(
        "right_mover",
        Kind::Reversible,
        1,
        vec![Rule::certain(q, Zero, Zero, Right, q), Rule::certain(q, One, One, Right, q)],
    )
}

/// Writes 1 everywhere it goes. Total and deterministic, not injective.
pub fn constant_writer() -> ClassicalMachine {
    let q = StateId(0);
    classical(
        "constant_writer",
        Kind::Deterministic,
        1,
        vec![Rule::certain(q, Zero, One, Right, q), Rule::certain(q, One, One, Right, q)],
    )
}

/// Two rules with disjoint targets that still collide: both enter `q0`,
/// one moving right and one moving left.
pub fn direction_collision() -> ClassicalMachine {
    let q = StateId(0);
    classical(
        "direction_collision",
        Kind::Deterministic,
        1,
        vec![Rule::certain(q, Zero, Zero, Right, q), Rule::certain(q, One, One, Left, q)],
    )
}

/// Two-state reversible machine: flips every bit and alternates state.
pub fn flipper() -> ClassicalMachine {
    let (a, b) = (StateId(0), StateId(1));
    classical(
        "flipper",
        Kind::Reversible,
        2,
        vec![
            Rule::certain(a, Zero, One, Right, b),
            Rule::certain(a, One, Zero, Right, b),
            Rule::certain(b, Zero, One, Right, a),
            Rule::certain(b, One, Zero, Right, a),
        ],
    )
}

/// Writes a uniformly random bit and moves right.
pub fn fair_coin_writer() -> ClassicalMachine {
    let q = StateId(0);
    let half = Scalar::ratio(1, 2);
    classical(
        "fair_coin_writer",
        Kind::Probabilistic,
        1,
        Symbol::ALL
            .iter()
            .flat_map(|&s| {
                [
                    Rule::new(q, s, Zero, Right, q, half.clone()),
                    Rule::new(q, s, One, Right, q, half.clone()),
                ]
            })
            .collect(),
    )
}

/// Halts with probability 1/4 on every step.
pub fn leaky_walker() -> ClassicalMachine {
    let q = StateId(0);
    classical(
        "leaky_walker",
        Kind::Probabilistic,
        1,
        Symbol::ALL
            .iter()
            .flat_map(|&s| {
                [
                    Rule::new(q, s, s, Left, q, Scalar::ratio(1, 4)),
                    Rule::new(q, s, s, Right, q, Scalar::ratio(1, 2)),
                ]
            })
            .collect(),
    )
}

/// `N`-moving identity on `k` qubits.
pub fn identity(k: u8) -> QDelta {
    delta(
        k,
        ProcState::all(k)
            .flat_map(|n| Symbol::ALL.map(|s| Rule::certain(n, s, s, Stay, n)))
            .collect(),
    )
}

/// 2x2 coin matrix `u[write][read]` applied to the scanned cell, then a move.
fn coin(k: u8, u: [[Scalar; 2]; 2], mv: Direction) -> QDelta {
    let mut rules = Vec::new();
    for n in ProcState::all(k) {
        for read in Symbol::ALL {
            for write in Symbol::ALL {
                let w = &u[write.bit() as usize][read.bit() as usize];
                if !w.is_zero() {
                    rules.push(Rule::new(n, read, write, mv, n, w.clone()));
                }
            }
        }
    }
    delta(k, rules)
}

fn h() -> Scalar {
    Scalar::frac_1_sqrt2()
}

/// Hadamard on the scanned cell, then move right.
pub fn hadamard_coin() -> QDelta {
    coin(1, [[h(), h()], [h(), -h()]], Right)
}

/// `[[1, i], [i, 1]] / √2` on the scanned cell, then move right.
pub fn phase_coin() -> QDelta {
    let ih = Scalar::i() * h();
    coin(1, [[h(), ih.clone()], [ih, h()]], Right)
}

/// Rational rotation `[[3/5, 4/5], [4/5, -3/5]]`, moving left.
pub fn rotation_coin() -> QDelta {
    let (a, b) = (Scalar::ratio(3, 5), Scalar::ratio(4, 5));
    coin(1, [[a.clone(), b.clone()], [b, -a]], Left)
}

/// Hadamard walk: the processor qubit is the coin, the tape is untouched,
/// and the move follows the new coin value.
pub fn hadamard_walk() -> QDelta {
    let hm = [[h(), h()], [h(), -h()]];
    let mut rules = Vec::new();
    for from in 0..2u32 {
        for to in 0..2u32 {
            let mv = if to == 0 { Left } else { Right };
            for s in Symbol::ALL {
                rules.push(Rule::new(p(from), s, s, mv, p(to), hm[to as usize][from as usize].clone()));
            }
        }
    }
    delta(1, rules)
}

/// Two-qubit walk: a Hadamard on the high qubit picks the move, the low qubit
/// records the scanned bit parity with a CNOT-style update.
pub fn parity_walk() -> QDelta {
    let hm = [[h(), h()], [h(), -h()]];
    let mut rules = Vec::new();
    for from in ProcState::all(2) {
        let (c, r) = (from.code() >> 1, from.code() & 1);
        for s in Symbol::ALL {
            for c2 in 0..2u32 {
                let to = ProcState::new(2, (c2 << 1) | (r ^ s.bit() as u32));
                let mv = if c2 == 0 { Left } else { Right };
                rules.push(Rule::new(from, s, s, mv, to, hm[c2 as usize][c as usize].clone()));
            }
        }
    }
    delta(2, rules)
}

/// Row-normalized coin whose two images overlap: the scanned-0 row splits
/// evenly while the scanned-1 row writes 1 with certainty.
pub fn lopsided_coin() -> QDelta {
    delta(
        1,
        ProcState::all(1)
            .flat_map(|n| {
                [
                    Rule::new(n, Zero, Zero, Right, n, h()),
                    Rule::new(n, Zero, One, Right, n, h()),
                    Rule::certain(n, One, One, Right, n),
                ]
            })
            .collect(),
    )
}

/// Identity with one branch missing: row `(1, 1)` is empty.
pub fn dropped_branch() -> QDelta {
    let rules = identity(1).table().iter().filter(|r| !(r.from == p(1) && r.read == One)).collect();
    delta(1, rules)
}

/// Hadamard coin with the sign of the `(1, 1)` entry lost.
pub fn unsigned_hadamard() -> QDelta {
    coin(1, [[h(), h()], [h(), h()]], Right)
}

/// Identity with every amplitude halved.
pub fn scaled_identity() -> QDelta {
    let rules = identity(1).table().iter().map(|r| Rule { weight: Scalar::ratio(1, 2), ..r }).collect();
    delta(1, rules)
}

/// Identity plus a spurious second branch on row `(0, 0)`.
pub fn overweight_identity() -> QDelta {
    let mut d = identity(1);
    d.insert(Rule::certain(p(0), Zero, One, Stay, p(0))).expect("new key");
    d
}

/// Writes 1 and moves right regardless of input.
pub fn constant_writer_delta() -> QDelta {
    delta(
        1,
        ProcState::all(1).flat_map(|n| Symbol::ALL.map(|s| Rule::certain(n, s, One, Right, n))).collect(),
    )
}

/// Both processor states collapse onto `0`.
pub fn state_merger() -> QDelta {
    delta(
        1,
        ProcState::all(1).flat_map(|n| Symbol::ALL.map(|s| Rule::certain(n, s, s, Right, p(0)))).collect(),
    )
}

/// Quantum copy of `direction_collision`: each row is a unit vector, yet
/// configurations two cells apart share an image.
pub fn mixed_directions() -> QDelta {
    delta(
        1,
        ProcState::all(1)
            .flat_map(|n| [Rule::certain(n, Zero, Zero, Right, n), Rule::certain(n, One, One, Left, n)])
            .collect(),
    )
}

/// Reference δ tables with their expected well-formedness.
pub fn quantum_reference() -> Vec<(&'static str, QDelta, bool)> {
    vec![
        ("identity_1", identity(1), true),
        ("identity_2", identity(2), true),
        ("hadamard_coin", hadamard_coin(), true),
        ("phase_coin", phase_coin(), true),
        ("rotation_coin", rotation_coin(), true),
        ("hadamard_walk", hadamard_walk(), true),
        ("parity_walk", parity_walk(), true),
        ("lopsided_coin", lopsided_coin(), false),
        ("dropped_branch", dropped_branch(), false),
        ("unsigned_hadamard", unsigned_hadamard(), false),
        ("scaled_identity", scaled_identity(), false),
        ("overweight_identity", overweight_identity(), false),
        ("constant_writer", constant_writer_delta(), false),
        ("state_merger", state_merger(), false),
        ("mixed_directions", mixed_directions(), false),
    ]
}

/// Random total reversible machine on `states` states.
///
/// Every state gets one entry direction, and rows `(q, s)` are matched to
/// targets `(write, to)` by a random bijection. Such a machine is injective.
pub fn random_reversible<R: Rng + ?Sized>(rng: &mut R, states: usize, name: &str) -> ClassicalMachine {
    let dirs: Vec<Direction> = (0..states).map(|_| *Direction::ALL.choose(rng).expect("nonempty")).collect();
    let mut targets: Vec<(Symbol, usize)> =
        (0..states).flat_map(|q| Symbol::ALL.map(|s| (s, q))).collect();
    targets.shuffle(rng);
    let rules = (0..states)
        .flat_map(|q| Symbol::ALL.map(move |s| (q, s)))
        .zip(targets)
        .map(|((q, s), (w, to))| Rule::certain(StateId(q), s, w, dirs[to], StateId(to)))
        .collect();
    classical(name, Kind::Reversible, states, rules)
}

/// Random total deterministic machine with uniformly chosen rules.
pub fn random_deterministic<R: Rng + ?Sized>(rng: &mut R, states: usize, name: &str) -> ClassicalMachine {
    let rules = (0..states)
        .flat_map(|q| Symbol::ALL.map(move |s| (q, s)))
        .map(|(q, s)| {
            let w = Symbol::from_bit(rng.gen());
            let mv = *Direction::ALL.choose(rng).expect("nonempty");
            Rule::certain(StateId(q), s, w, mv, StateId(rng.gen_range(0..states)))
        })
        .collect::<Vec<_>>();
    classical(name, Kind::Deterministic, states, rules)
}

/// Total deterministic machine on 1 to `max_states` states: half of the
/// draws are built reversible so both verdicts are well represented.
pub fn random_total_deterministic<R: Rng + ?Sized>(rng: &mut R, max_states: usize, name: &str) -> ClassicalMachine {
    let states = rng.gen_range(1..=max_states);
    let mut m = if rng.gen_bool(0.5) {
        random_reversible(rng, states, name)
    } else {
        random_deterministic(rng, states, name)
    };
    m.kind = Kind::Deterministic;
    m
}

/// Lifts of `count` random reversible machines on up to `max_states` states.
pub fn random_lifted<R: Rng + ?Sized>(rng: &mut R, count: usize, max_states: usize) -> Vec<QDelta> {
    (0..count)
        .map(|i| {
            let states = rng.gen_range(1..=max_states);
            let m = random_reversible(rng, states, &format!("rev{i}"));
            lift_reversible(&m).expect("generated machine is reversible").machine.delta
        })
        .collect()
}

const WEIGHT_POOL: [(i64, i64); 5] = [(1, 1), (1, 2), (1, 3), (2, 3), (3, 4)];

fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> Scalar {
    let part = |rng: &mut R| {
        let (a, b) = *WEIGHT_POOL.choose(rng).expect("nonempty");
        let sign = if rng.gen_bool(0.5) { -1 } else { 1 };
        match rng.gen_range(0..3) {
            0 => QReal::ratio(sign * a, b),
            1 => QReal::ratio_sqrt2(sign * a, b),
            _ => QReal::ratio(sign * a, b) + QReal::ratio_sqrt2(b, a + b),
        }
    };
    let re = part(rng);
    if rng.gen_bool(0.3) {
        Scalar::new(re, part(rng))
    } else {
        Scalar::real(re)
    }
}

/// Random machine of any kind, for serializer round trips. Weights respect
/// the kind's domain but no class property is implied.
pub fn random_machine<R: Rng + ?Sized>(rng: &mut R, name: &str) -> crate::Machine {
    let kind = *[Kind::Deterministic, Kind::Reversible, Kind::Probabilistic, Kind::Quantum]
        .choose(rng)
        .expect("nonempty");
    let rule_count = rng.gen_range(0..8);
    if kind == Kind::Quantum {
        let k = rng.gen_range(1..=2u8);
        let mut d = QDelta::new(k);
        for _ in 0..rule_count {
            let n = ProcState::new(k, rng.gen_range(0..1 << k));
            let to = ProcState::new(k, rng.gen_range(0..1 << k));
            let mv = *Direction::ALL.choose(rng).expect("nonempty");
            let rule = Rule::new(n, Symbol::from_bit(rng.gen()), Symbol::from_bit(rng.gen()), mv, to, random_scalar(rng));
            let _ = d.insert(rule);
        }
        let mut m = QuantumMachine::new(name, d);
        m.start = ProcState::new(k, rng.gen_range(0..1 << k));
        return m.into();
    }
    let states = rng.gen_range(1..=4);
    let mut m = ClassicalMachine::with_numbered_states(name, kind, states).expect("valid");
    for _ in 0..rule_count {
        let weight = match kind {
            Kind::Probabilistic => {
                let (a, b) = *WEIGHT_POOL.choose(rng).expect("nonempty");
                if rng.gen_bool(0.2) {
                    Scalar::real(QReal::ratio_sqrt2(1, 2))
                } else {
                    Scalar::ratio(a, b)
                }
            }
            _ => Scalar::one(),
        };
        let rule = Rule::new(
            StateId(rng.gen_range(0..states)),
            Symbol::from_bit(rng.gen()),
            Symbol::from_bit(rng.gen()),
            *Direction::ALL.choose(rng).expect("nonempty"),
            StateId(rng.gen_range(0..states)),
            weight,
        );
        let _ = m.add_rule(rule);
    }
    m.set_start(StateId(rng.gen_range(0..states))).expect("in range");
    if rng.gen_bool(0.3) {
        m.add_halt(StateId(rng.gen_range(0..states))).expect("in range");
    }
    m.into()
}

/// Random configuration with head and tape support inside `[-radius, radius]`.
pub fn random_quantum_config<R: Rng + ?Sized>(rng: &mut R, k: u8, radius: i64) -> QuantumConfig {
    let head = rng.gen_range(-radius..=radius);
    let proc = ProcState::new(k, rng.gen_range(0..1 << k));
    let mut tape = Tape::new();
    for x in -radius..=radius {
        if rng.gen_bool(0.4) {
            tape.write(x, One);
        }
    }
    Configuration::new(head, proc, tape)
}

/// Unit state vector over up to `1 + splits` configurations with exact
/// amplitudes, built by repeatedly splitting one amplitude `a` into
/// `a*c` and `a*s` with `|c|² + |s|² = 1`.
pub fn random_unit_state<R: Rng + ?Sized>(rng: &mut R, k: u8, radius: i64, splits: usize) -> StateVector<Scalar> {
    let h = Scalar::frac_1_sqrt2();
    let pairs = [
        (h.clone(), h.clone()),
        (Scalar::ratio(3, 5), Scalar::ratio(4, 5)),
        (h.clone(), -(Scalar::i() * h.clone())),
        (Scalar::new(QReal::ratio(1, 2), QReal::ratio(1, 2)), Scalar::new(QReal::ratio(1, 2), QReal::ratio(-1, 2))),
    ];
    let phases = [Scalar::one(), -Scalar::one(), Scalar::i(), -Scalar::i()];
    let mut items = vec![(random_quantum_config(rng, k, radius), phases.choose(rng).expect("nonempty").clone())];
    for _ in 0..splits {
        let c = random_quantum_config(rng, k, radius);
        if items.iter().any(|(d, _)| *d == c) {
            continue;
        }
        let i = rng.gen_range(0..items.len());
        let (cf, sf) = pairs.choose(rng).expect("nonempty");
        let a = items[i].1.clone();
        items[i].1 = &a * cf;
        items.push((c, &a * sf));
    }
    StateVector::from_amplitudes(items)
}

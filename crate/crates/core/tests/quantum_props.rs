mod common;

use common::naive_step;
use proptest::prelude::*;
use tmkit::corpus;
use tmkit::machine::{Configuration, Direction, ProcState, QuantumConfig, Rule, Symbol, Tape, Window};
use tmkit::quantum::{
    apply_step, check_orthogonality, evolve, lift_reversible, matrix_element, well_formed, QDelta, StateVector,
};
use tmkit::scalar::{QReal, Scalar};
use tmkit::simulate::{born_distribution, step_deterministic, Step};

fn n0() -> ProcState {
    ProcState::zeros(1)
}

fn origin() -> QuantumConfig {
    Configuration::new(0, n0(), Tape::new())
}

fn config(k: u8) -> impl Strategy<Value = QuantumConfig> {
    (-3i64..=3, 0u32..1 << k, 0u64..128).prop_map(move |(head, n, bits)| {
        let w = Window::new(3).unwrap();
        Configuration::new(head, ProcState::new(k, n), w.tape_from_code(bits))
    })
}

fn good_deltas() -> Vec<(&'static str, QDelta)> {
    corpus::quantum_reference().into_iter().filter(|(_, _, ok)| *ok).map(|(n, d, _)| (n, d)).collect()
}

#[test]
fn coin_two_steps_by_hand() {
    let d = corpus::hadamard_coin();
    let psi = evolve(&d, &StateVector::<Scalar>::basis(origin()), 2);
    assert_eq!(psi.len(), 4);
    for (c, a) in psi.iter() {
        assert_eq!(c.head, 2);
        assert_eq!(a.abs2(), QReal::ratio(1, 4));
    }
    // Independent expansion: two naive steps, merged by configuration.
    let mut expected: Vec<(QuantumConfig, Scalar)> = Vec::new();
    for (c, a) in naive_step(&d, &origin()) {
        for (e, b) in naive_step(&d, &c) {
            let w = &a * &b;
            match expected.iter_mut().find(|(f, _)| *f == e) {
                Some((_, v)) => *v = &*v + &w,
                None => expected.push((e, w)),
            }
        }
    }
    assert_eq!(expected.len(), psi.len());
    for (c, a) in expected {
        assert_eq!(psi.amplitude(&c), a);
    }
}

#[test]
fn coin_matrix_element_example() {
    let d = corpus::hadamard_coin();
    let to = Configuration::new(1, n0(), Tape::parse_bits("1", 0).unwrap());
    let naive = naive_step(&d, &origin());
    let want = naive.iter().find(|(c, _)| *c == to).map(|(_, a)| a.clone()).unwrap();
    assert_eq!(want, Scalar::frac_1_sqrt2());
    assert_eq!(matrix_element(&d, &origin(), &to), want);
}

#[test]
fn colliding_writes_have_unit_overlap() {
    let n = n0();
    let d = QDelta::new(1)
        .with_rules([
            Rule::certain(n, Symbol::Zero, Symbol::Zero, Direction::Right, n),
            Rule::certain(n, Symbol::One, Symbol::Zero, Direction::Right, n),
        ])
        .unwrap();
    let a = origin();
    let b = Configuration::new(0, n, Tape::parse_bits("1", 0).unwrap());
    let (ia, ib) = (naive_step(&d, &a), naive_step(&d, &b));
    assert_eq!(ia, ib);
    let report = check_orthogonality(&d, Window::new(2).unwrap()).unwrap();
    assert!(report.overlaps.iter().any(|o| o.inner.is_one()));
}

#[test]
fn lopsided_coin_rows_pass_but_images_overlap() {
    let d = corpus::lopsided_coin();
    let wf = well_formed(&d, Window::new(2).unwrap()).unwrap();
    assert!(wf.normalized && !wf.orthogonal);
    let a = naive_step(&d, &origin());
    let b = naive_step(&d, &Configuration::new(0, n0(), Tape::parse_bits("1", 0).unwrap()));
    let mut inner = Scalar::zero();
    for (c, x) in &a {
        for (e, y) in &b {
            if c == e {
                inner = &inner + &(&x.conj() * y);
            }
        }
    }
    assert_eq!(inner, Scalar::frac_1_sqrt2());
}

#[test]
fn lift_of_right_mover_is_well_formed() {
    let lifted = lift_reversible(&corpus::right_mover()).unwrap();
    let d = &lifted.machine.delta;
    assert_eq!(d.qubits(), 1);
    assert!(well_formed(d, Window::new(2).unwrap()).unwrap().is_well_formed());
    assert!(d.table().iter().all(|r| r.weight.is_one()));
    let unused = ProcState::new(1, 1);
    assert!(d.table().iter().filter(|r| r.from == unused).all(|r| r.to == unused && r.mv == Direction::Stay));
}

proptest! {
    #[test]
    fn step_matches_reference(idx in 0usize..15, c in config(2)) {
        let (_, d, _) = corpus::quantum_reference().swap_remove(idx);
        let c = Configuration::new(c.head, ProcState::new(d.qubits(), c.proc.code() % (1 << d.qubits())), c.tape);
        let image = apply_step(&d, &StateVector::<Scalar>::basis(c.clone()));
        let naive = naive_step(&d, &c);
        prop_assert_eq!(image.len(), naive.len());
        for (e, a) in &naive {
            prop_assert_eq!(&image.amplitude(e), a);
            prop_assert_eq!(&matrix_element(&d, &c, e), a);
        }
        prop_assert!(image.len() <= 2 * 3 * (1 << d.qubits()));
    }

    #[test]
    fn matrix_element_is_local(idx in 0usize..15, a in config(1), b in config(1)) {
        let (_, d, _) = corpus::quantum_reference().swap_remove(idx);
        if d.qubits() != 1 {
            return Ok(());
        }
        let off = a.tape.ones().chain(b.tape.ones()).any(|x| x != a.head && a.tape.get(x) != b.tape.get(x));
        if (a.head - b.head).abs() > 1 || off {
            prop_assert!(matrix_element(&d, &a, &b).is_zero());
        }
    }

    #[test]
    fn well_formed_evolution_keeps_unit_norm(seed in any::<u64>(), idx in 0usize..7) {
        let (_, d) = good_deltas().swap_remove(idx);
        let mut rng = common::rng(seed);
        let mut psi = corpus::random_unit_state(&mut rng, d.qubits(), 3, 5);
        for _ in 0..3 {
            psi = apply_step(&d, &psi);
            prop_assert!(psi.norm_sqr().is_one());
            let total: QReal = born_distribution(&psi).unwrap().into_values().sum();
            prop_assert!(total.is_one());
        }
    }

    #[test]
    fn lift_commutes_with_classical_step(seed in any::<u64>(), states in 1usize..=4, head in -3i64..=3, bits in 0u64..128) {
        let mut rng = common::rng(seed);
        let m = corpus::random_reversible(&mut rng, states, "r");
        let lifted = lift_reversible(&m).unwrap();
        let tape = Window::new(3).unwrap().tape_from_code(bits);
        for q in m.state_ids() {
            let c = Configuration::new(head, q, tape.clone());
            let Step::Next { config, .. } = step_deterministic(&m, &c).unwrap() else { unreachable!("total") };
            let image = apply_step(&lifted.machine.delta, &StateVector::<Scalar>::basis(lifted.encode_config(&c)));
            prop_assert_eq!(image.len(), 1);
            prop_assert!(image.amplitude(&lifted.encode_config(&config)).is_one());
        }
    }
}

//! Embed a reversible machine as a quantum machine and check that the two
//! evolutions agree step for step.

use tmkit::corpus;
use tmkit::frontend::{serialize_machine, Machine};
use tmkit::machine::Symbol;
use tmkit::quantum::{apply_step, lift_reversible, StateVector};
use tmkit::scalar::Scalar;
use tmkit::simulate::run_deterministic;

fn main() {
    let m = corpus::flipper();
    let lifted = lift_reversible(&m).unwrap();
    print!("{}", serialize_machine(&Machine::Quantum(lifted.machine.clone())));

    let c0 = m.initial_config(&[Symbol::One, Symbol::One, Symbol::Zero]);
    let trace = run_deterministic(&m, c0.clone(), 10).unwrap();
    let mut psi = StateVector::<Scalar>::basis(lifted.encode_config(&c0));
    for entry in &trace.entries[1..] {
        psi = apply_step(&lifted.machine.delta, &psi);
        assert!(psi.amplitude(&lifted.encode_config(&entry.config)).is_one());
    }
    println!("{} steps agree", trace.steps());

    match lift_reversible(&corpus::constant_writer()) {
        Ok(_) => unreachable!(),
        Err(e) => println!("{e}"),
    }
}

//! Run a reversible machine forward, then undo every step.

use tmkit::corpus;
use tmkit::machine::Symbol;
use tmkit::simulate::{run_deterministic, step_backward};

fn main() {
    let m = corpus::flipper();
    let input = [Symbol::One, Symbol::Zero, Symbol::One, Symbol::One];
    let trace = run_deterministic(&m, m.initial_config(&input), 6).unwrap();
    print!("{}", trace.to_text(&m));

    let mut c = trace.last().clone();
    for entry in trace.entries.iter().rev().skip(1) {
        c = step_backward(&m, &c).unwrap();
        assert_eq!(c, entry.config);
    }
    println!("backward steps recovered the start: head {}, tape {}", c.head, c.tape.bits(0, 3));
}

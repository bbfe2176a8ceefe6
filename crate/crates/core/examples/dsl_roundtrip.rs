//! Parse a machine description, report diagnostics, and print the canonical
//! form.

use tmkit::frontend::{parse_machine, serialize_machine};

const SOURCE: &str = "\
# rules may come in any order; weights default to 1
machine coin
kind quantum
qubits 1
rule 0 1 -> 1 R 0 : -1/sqrt2
rule 0 0 -> 1 R 0 : 1/sqrt2
rule 0 0 -> 0 R 0 : 1/sqrt2
rule 0 1 -> 0 R 0 : 1/sqrt2
";

const BROKEN: &str = "\
machine broken
kind deterministic
states q0 q1
rule q0 0 -> 1 R q2
rule q0 1 -> 1 X q0
rule q1 0 -> 0 L q1 : 1/2
";

fn main() {
    let doc = parse_machine(SOURCE).unwrap();
    let canonical = serialize_machine(&doc.machine);
    print!("{canonical}");
    assert_eq!(serialize_machine(&parse_machine(&canonical).unwrap().machine), canonical);

    for d in parse_machine(BROKEN).unwrap_err() {
        println!("broken.tm:{d}");
    }
}

//! Classify the bundled machines and compare reversibility with a
//! brute-force injectivity check.

use tmkit::classify::{ClassReport, DisplayPair, Reading, Verdict};
use tmkit::corpus;
use tmkit::machine::Window;
use tmkit::oracle::brute_injectivity;

fn main() {
    let window = Window::new(2).unwrap();
    for m in [corpus::right_mover(), corpus::flipper(), corpus::constant_writer(), corpus::direction_collision()] {
        let report = ClassReport::new(&m, Reading::Pointwise);
        let local = match &report.reversible {
            Ok(Verdict::Holds) => "reversible".to_string(),
            Ok(Verdict::Fails(w)) => format!("not reversible: {}", DisplayPair(&m, w)),
            Err(e) => format!("n/a: {e}"),
        };
        let brute = brute_injectivity(&m, window).unwrap();
        println!("{:<20} {local}", m.name);
        println!("{:<20} injective on L=2 interior: {}", "", brute.holds());
    }

    let literal = ClassReport::new(&corpus::right_mover(), Reading::Literal);
    println!("right_mover under the literal summation reading: {:?}", literal.reversible.map(|v| v.holds()));
}

//! Hadamard coin: exact evolution, interference, Born probabilities and the
//! float backend.

use num_complex::Complex64;
use tmkit::corpus;
use tmkit::machine::{Configuration, ProcState, Tape, Window};
use tmkit::quantum::{evolve, well_formed, StateVector};
use tmkit::scalar::Scalar;
use tmkit::simulate::born_distribution;

fn main() {
    let coin = corpus::hadamard_coin();
    println!("well-formed: {}", well_formed(&coin, Window::new(2).unwrap()).unwrap().is_well_formed());

    let start = Configuration::new(0, ProcState::zeros(1), Tape::new());
    let psi = evolve(&coin, &StateVector::<Scalar>::basis(start.clone()), 3);
    for (c, p) in born_distribution(&psi).unwrap() {
        println!("head {} tape {} -> {p}", c.head, c.tape.bits(0, 2));
    }
    println!("norm^2 = {}", psi.norm_sqr());

    // Paths in the walk cancel, so the exact and float supports can differ.
    let walk = corpus::hadamard_walk();
    let exact = evolve(&walk, &StateVector::<Scalar>::basis(start.clone()), 20);
    let float = evolve(&walk, &StateVector::<Complex64>::basis(start), 20);
    println!(
        "walk after 20 steps: {} exact terms, {} float terms, norm^2 {} vs {:.15}",
        exact.len(),
        float.len(),
        exact.norm_sqr(),
        float.norm_sqr_f64()
    );
}

//! Seeded sampling: reproducible traces and empirical rule frequencies.

use tmkit::corpus;
use tmkit::frontend::json::{classical_trace_doc, emit_trace_json};
use tmkit::machine::Symbol;
use tmkit::simulate::{run_probabilistic, HaltReason};

fn main() {
    let coin = corpus::fair_coin_writer();
    let runs = 100_000u64;
    let ones = (0..runs)
        .filter(|&seed| {
            let t = run_probabilistic(&coin, coin.initial_config(&[]), 1, seed).unwrap();
            t.last().tape.get(0) == Symbol::One
        })
        .count();
    println!("fair coin: {ones} ones in {runs} single-step runs ({:.4})", ones as f64 / runs as f64);

    let walker = corpus::leaky_walker();
    let t = run_probabilistic(&walker, walker.initial_config(&[]), 50, 7).unwrap();
    assert_eq!(t.halted, HaltReason::ProbHalt);
    println!("leaky walker, seed 7: stopped after {} steps ({})", t.steps(), t.halted);

    let t = run_probabilistic(&coin, coin.initial_config(&[]), 3, 42).unwrap();
    println!("{}", emit_trace_json(&classical_trace_doc(&coin, &t)));
}

//! Reference implementations used as oracles by the integration tests.
//! They work from the raw rule list and share no stepping code with the
//! library.

#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tmkit::machine::{Configuration, ProcState, QuantumConfig, Symbol, Tape};
use tmkit::quantum::QDelta;
use tmkit::scalar::{QReal, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One step by scanning every rule, merging equal images by linear search.
pub fn naive_step(delta: &QDelta, c: &QuantumConfig) -> Vec<(QuantumConfig, Scalar)> {
    let mut out: Vec<(QuantumConfig, Scalar)> = Vec::new();
    let scanned = c.tape.ones().any(|x| x == c.head);
    for r in delta.table().iter() {
        if r.from != c.proc || (r.read == Symbol::One) != scanned {
            continue;
        }
        let mut tape = Tape::new();
        for x in c.tape.ones().filter(|&x| x != c.head) {
            tape.write(x, Symbol::One);
        }
        if r.write == Symbol::One {
            tape.write(c.head, Symbol::One);
        }
        let head = c.head
            + match r.mv.letter() {
                'L' => -1,
                'R' => 1,
                _ => 0,
            };
        let image = Configuration::new(head, r.to, tape);
        match out.iter_mut().find(|(d, _)| *d == image) {
            Some((_, a)) => *a = &*a + &r.weight,
            None => out.push((image, r.weight.clone())),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

/// Every configuration with head and tape support in `[-radius, radius]`.
pub fn all_configs(k: u8, radius: i64) -> Vec<QuantumConfig> {
    let cells = (2 * radius + 1) as u32;
    let mut out = Vec::new();
    for head in -radius..=radius {
        for n in 0..1u32 << k {
            for bits in 0..1u64 << cells {
                let mut tape = Tape::new();
                for i in 0..cells {
                    if bits >> i & 1 == 1 {
                        tape.write(-radius + i as i64, Symbol::One);
                    }
                }
                out.push(Configuration::new(head, ProcState::new(k, n), tape));
            }
        }
    }
    out
}

/// Column orthonormality in floating point, over configurations whose head
/// is at least one cell from the window edge.
pub fn dense_unitary_f64(delta: &QDelta, radius: i64) -> bool {
    let domain: Vec<QuantumConfig> =
        all_configs(delta.qubits(), radius).into_iter().filter(|c| c.head.abs() < radius).collect();
    let columns: Vec<Vec<(QuantumConfig, Complex64)>> = domain
        .iter()
        .map(|c| naive_step(delta, c).into_iter().map(|(d, a)| (d, a.to_complex64())).collect())
        .collect();
    for i in 0..columns.len() {
        for j in i..columns.len() {
            let mut dot = Complex64::new(0.0, 0.0);
            for (d, a) in &columns[i] {
                if let Some((_, b)) = columns[j].iter().find(|(e, _)| e == d) {
                    dot += a.conj() * b;
                }
            }
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - Complex64::new(want, 0.0)).norm() > 1e-9 {
                return false;
            }
        }
    }
    true
}

pub fn small_qreal() -> impl Strategy<Value = QReal> {
    (-20i64..=20, 1i64..=12, -20i64..=20, 1i64..=12)
        .prop_map(|(a, b, c, d)| QReal::ratio(a, b) + QReal::ratio_sqrt2(c, d))
}

pub fn small_scalar() -> impl Strategy<Value = Scalar> {
    (small_qreal(), small_qreal()).prop_map(|(re, im)| Scalar::new(re, im))
}

//! Arithmetic in Q(sqrt2, i): parsing, canonical text, exact comparisons.

use tmkit::scalar::{QReal, Scalar};

fn main() {
    let h: Scalar = "1/sqrt2".parse().unwrap();
    println!("1/sqrt2         = {h}");
    println!("(1/sqrt2)^2     = {}", &h * &h);
    println!("|(1+i)/2|^2     = {}", "(1 + i)/2".parse::<Scalar>().unwrap().abs2());

    let phase = &h * &Scalar::new(QReal::one(), QReal::one());
    println!("e^(i pi/4)      = {phase}");
    println!("its 8th power   = {}", (0..8).fold(Scalar::one(), |acc, _| &acc * &phase));

    // 140/99 is within 1e-4 of sqrt2; the sign is decided without floats.
    let gap = QReal::ratio(140, 99) - QReal::sqrt2();
    println!("140/99 - sqrt2  = {gap} (negative: {})", gap.is_negative());

    match "1/sqrt3".parse::<Scalar>() {
        Ok(s) => println!("unexpected: {s}"),
        Err(e) => println!("1/sqrt3 rejected at offset {}: {}", e.offset, e.message),
    }
}

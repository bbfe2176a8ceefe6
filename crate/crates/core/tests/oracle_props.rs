mod common;

use proptest::prelude::*;
use tmkit::corpus;
use tmkit::machine::Window;
use tmkit::oracle::{build_truncated_matrix, check_matrix_unitary, Exactness};
use tmkit::quantum::{apply_step, well_formed, StateVector};
use tmkit::scalar::{QReal, Scalar};

#[test]
fn coin_columns_split_evenly() {
    let m = build_truncated_matrix(&corpus::hadamard_coin(), Window::new(2).unwrap()).unwrap();
    assert_eq!(m.domain.len(), 192);
    assert_eq!(m.codomain.len(), 320);
    for col in &m.columns {
        assert_eq!(col.len(), 2);
        assert!(col.iter().all(|(_, v)| v.abs2() == QReal::ratio(1, 2)));
    }
    assert!(check_matrix_unitary(&m, Exactness::Exact).passes());
}

#[test]
fn exact_and_float_checks_agree_with_dense_reference() {
    for (name, d, expected) in corpus::quantum_reference() {
        if d.qubits() > 1 {
            continue;
        }
        let w = Window::new(2).unwrap();
        let m = build_truncated_matrix(&d, w).unwrap();
        let exact = check_matrix_unitary(&m, Exactness::Exact).passes();
        let float = check_matrix_unitary(&m, Exactness::Tolerance(1e-9)).passes();
        let dense = common::dense_unitary_f64(&d, 2);
        assert_eq!((exact, float, dense), (expected, expected, expected), "{name}");
    }
}

#[test]
fn verdicts_are_window_stable() {
    for (name, d, _) in corpus::quantum_reference() {
        let verdict = |r: u32| {
            let w = Window::new(r).unwrap();
            (
                well_formed(&d, w).unwrap().is_well_formed(),
                check_matrix_unitary(&build_truncated_matrix(&d, w).unwrap(), Exactness::Exact).passes(),
            )
        };
        assert_eq!(verdict(2), verdict(3), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lifted_columns_match_step_expansion(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = corpus::random_lifted(&mut rng, 1, 4).pop().unwrap();
        let w = Window::new(2).unwrap();
        let m = build_truncated_matrix(&d, w).unwrap();
        for (col, c) in m.domain.iter().enumerate() {
            let image = apply_step(&d, &StateVector::<Scalar>::basis(c.clone()));
            prop_assert_eq!(m.columns[col].len(), image.len());
            prop_assert!(image.len() <= 2 * 3 * (1 << d.qubits()));
            for (row, v) in &m.columns[col] {
                prop_assert_eq!(&image.amplitude(&m.codomain[*row]), v);
            }
        }
        prop_assert!(check_matrix_unitary(&m, Exactness::Exact).passes());
        prop_assert!(well_formed(&d, w).unwrap().is_well_formed());
    }
}

//! Materialize the evolution operator on a finite window and compare the
//! column check with the local well-formedness conditions.

use tmkit::corpus;
use tmkit::machine::Window;
use tmkit::oracle::{build_truncated_matrix, check_matrix_unitary, Exactness};
use tmkit::quantum::well_formed;

fn main() {
    for radius in [2, 3] {
        let w = Window::new(radius).unwrap();
        println!("L = {radius}");
        for (name, delta, _) in corpus::quantum_reference() {
            let local = well_formed(&delta, w).unwrap().is_well_formed();
            let m = build_truncated_matrix(&delta, w).unwrap();
            let report = check_matrix_unitary(&m, Exactness::Exact);
            println!(
                "  {name:<20} local {:<5} oracle {:<5} ({}x{}, {} nonzeros, {} defects)",
                local,
                report.passes(),
                m.codomain.len(),
                m.domain.len(),
                m.nonzeros(),
                report.norm_defects.len() + report.overlaps.len()
            );
        }
    }
}

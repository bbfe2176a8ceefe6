//! Brute-force ground truth on a finite window of configurations.
//!
//! The evolution operator acts on infinitely many basis states, but it only
//! moves the head by one cell and only touches the scanned cell. Restricting
//! the columns to the interior of a window `[-L, L]` therefore yields a finite
//! matrix whose columns are exactly the columns of the full operator. The
//! checks here build that matrix entry by entry from
//! [`quantum::matrix_element`] and test column orthonormality directly, and
//! test classical reversibility as injectivity of the one-step map.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::classify::Verdict;
use crate::machine::{
    ClassicalConfig, ClassicalMachine, Configuration, Control, Direction, ProcState, QuantumConfig,
    StateId, Symbol, Window,
};
use crate::quantum::{self, QDelta};
use crate::scalar::{QReal, Scalar};

/// Default bound on the number of enumerated configurations.
pub const DEFAULT_CAP: u128 = 1_000_000;

/// Version tag of the configuration ordering written in matrix dumps.
pub const ORDERING_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("window L={radius} with {controls} control states has {count} configurations, over the cap of {cap}")]
    TooLarge { radius: u32, controls: usize, count: u128, cap: u128 },
    #[error("machine is not deterministic at row ({state}, {read})")]
    NotDeterministic { state: String, read: Symbol },
}

fn check_cap(w: Window, controls: usize, cap: u128) -> Result<(), OracleError> {
    let count = w.config_count(controls);
    if count > cap {
        return Err(OracleError::TooLarge { radius: w.radius(), controls, count, cap });
    }
    Ok(())
}

/// Every configuration inside `w`, in canonical order. `controls` must be
/// sorted by code.
pub fn enumerate_window<P: Control>(
    controls: &[P],
    w: Window,
    cap: u128,
) -> Result<Vec<Configuration<P>>, OracleError> {
    check_cap(w, controls.len(), cap)?;
    debug_assert!(controls.windows(2).all(|p| p[0].code() < p[1].code()));
    let tapes = 1u64 << w.cells();
    let mut out = Vec::with_capacity(w.config_count(controls.len()) as usize);
    for head in w.lo()..=w.hi() {
        for &p in controls {
            for code in 0..tapes {
                out.push(Configuration::new(head, p, w.tape_from_code(code)));
            }
        }
    }
    Ok(out)
}

fn interior<P: Control>(all: &[Configuration<P>], w: Window) -> Vec<Configuration<P>> {
    all.iter().filter(|c| w.is_interior(*c)).cloned().collect()
}

/// Position of a window configuration in the output of
/// [`enumerate_window`].
fn window_index(w: Window, controls: usize, c: &QuantumConfig) -> Option<usize> {
    let (head, proc, tape) = w.key(c)?;
    let tapes = 1usize << w.cells();
    Some(((head - w.lo()) as usize * controls + proc as usize) * tapes + tape as usize)
}

/// `U` restricted to interior columns, stored sparsely by column.
#[derive(Clone, Debug)]
pub struct TruncatedMatrix {
    pub window: Window,
    pub qubits: u8,
    /// Interior configurations (head in `[-L+1, L-1]`), canonical order.
    pub domain: Vec<QuantumConfig>,
    /// All window configurations, canonical order.
    pub codomain: Vec<QuantumConfig>,
    /// Per column, the nonzero `(row, value)` entries in row order.
    pub columns: Vec<Vec<(usize, Scalar)>>,
}

impl TruncatedMatrix {
    pub fn entry(&self, row: usize, col: usize) -> Scalar {
        self.columns[col]
            .iter()
            .find(|(r, _)| *r == row)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }

    pub fn nonzeros(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Text dump: a `#` header, then one `row col scalar` line per nonzero.
    pub fn write_dump(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(
            out,
            "# tmkit truncated matrix L={} k={} ordering={} rows={} cols={} nonzeros={}",
            self.window.radius(),
            self.qubits,
            ORDERING_VERSION,
            self.codomain.len(),
            self.domain.len(),
            self.nonzeros()
        )?;
        writeln!(out, "# ordering {ORDERING_VERSION}: (head, proc bits, tape bits from cell -L), lexicographic")?;
        for (col, entries) in self.columns.iter().enumerate() {
            for (row, v) in entries {
                writeln!(out, "{row} {col} {v}")?;
            }
        }
        Ok(())
    }
}

pub fn build_truncated_matrix(delta: &QDelta, w: Window) -> Result<TruncatedMatrix, OracleError> {
    build_truncated_matrix_capped(delta, w, DEFAULT_CAP)
}

pub fn build_truncated_matrix_capped(
    delta: &QDelta,
    w: Window,
    cap: u128,
) -> Result<TruncatedMatrix, OracleError> {
    let procs: Vec<ProcState> = ProcState::all(delta.qubits()).collect();
    let codomain = enumerate_window(&procs, w, cap)?;
    let domain = interior(&codomain, w);
    let columns = domain
        .iter()
        .map(|from| {
            // Kronecker support of the column: head within one cell, any
            // control state, any symbol in the scanned cell, tape unchanged
            // elsewhere.
            let mut entries = Vec::new();
            for mv in Direction::ALL {
                for &p in &procs {
                    for s in Symbol::ALL {
                        let to = Configuration::new(from.head + mv.offset(), p, from.tape.set(from.head, s));
                        let v = quantum::matrix_element(delta, from, &to);
                        if !v.is_zero() {
                            let row = window_index(w, procs.len(), &to).expect("interior image stays in window");
                            entries.push((row, v));
                        }
                    }
                }
            }
            entries.sort_by_key(|(r, _)| *r);
            entries
        })
        .collect();
    Ok(TruncatedMatrix { window: w, qubits: delta.qubits(), domain, codomain, columns })
}

/// How `check_matrix_unitary` compares values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exactness {
    Exact,
    Tolerance(f64),
}

/// A defective Gram-matrix entry.
#[derive(Clone, Debug, PartialEq)]
pub enum GramValue {
    Exact(Scalar),
    Approx(Complex64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarityReport {
    pub columns: usize,
    /// Columns whose squared norm is not 1, with that norm.
    pub norm_defects: Vec<(usize, GramValue)>,
    /// Column pairs `(i, j)`, `i < j`, with nonzero inner product.
    pub overlaps: Vec<(usize, usize, GramValue)>,
}

impl UnitarityReport {
    pub fn passes(&self) -> bool {
        self.norm_defects.is_empty() && self.overlaps.is_empty()
    }
}

/// Column orthonormality `U†U = I` on the interior domain.
///
/// The Gram matrix is accumulated row by row: two columns can only have a
/// nonzero inner product through rows where both are nonzero, so every pair
/// absent from the accumulation has inner product exactly 0.
pub fn check_matrix_unitary(m: &TruncatedMatrix, exactness: Exactness) -> UnitarityReport {
    let mut by_row: HashMap<usize, Vec<(usize, &Scalar)>> = HashMap::new();
    for (col, entries) in m.columns.iter().enumerate() {
        for (row, v) in entries {
            by_row.entry(*row).or_default().push((col, v));
        }
    }
    match exactness {
        Exactness::Exact => {
            let mut gram: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
            for entries in by_row.values() {
                for (i, (ci, vi)) in entries.iter().enumerate() {
                    for (cj, vj) in &entries[i..] {
                        let term = vi.conj() * *vj;
                        let slot = gram.entry((*ci.min(cj), *ci.max(cj))).or_default();
                        *slot = &*slot + &term;
                    }
                }
            }
            let mut report = UnitarityReport { columns: m.columns.len(), norm_defects: vec![], overlaps: vec![] };
            for col in 0..m.columns.len() {
                let norm = gram.get(&(col, col)).cloned().unwrap_or_default();
                if !norm.is_one() {
                    report.norm_defects.push((col, GramValue::Exact(norm)));
                }
            }
            for ((i, j), v) in gram {
                if i != j && !v.is_zero() {
                    report.overlaps.push((i, j, GramValue::Exact(v)));
                }
            }
            report
        }
        Exactness::Tolerance(tol) => {
            let mut gram: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
            for entries in by_row.values() {
                for (i, (ci, vi)) in entries.iter().enumerate() {
                    for (cj, vj) in &entries[i..] {
                        let term = vi.to_complex64().conj() * vj.to_complex64();
                        *gram.entry((*ci.min(cj), *ci.max(cj))).or_default() += term;
                    }
                }
            }
            let mut report = UnitarityReport { columns: m.columns.len(), norm_defects: vec![], overlaps: vec![] };
            for col in 0..m.columns.len() {
                let norm = gram.get(&(col, col)).copied().unwrap_or_default();
                if (norm - Complex64::new(1.0, 0.0)).norm() > tol {
                    report.norm_defects.push((col, GramValue::Approx(norm)));
                }
            }
            for ((i, j), v) in gram {
                if i != j && v.norm() > tol {
                    report.overlaps.push((i, j, GramValue::Approx(v)));
                }
            }
            report
        }
    }
}

/// Applies the unique rule of the scanned row, ignoring halt states.
fn raw_step(m: &ClassicalMachine, c: &ClassicalConfig) -> Result<Option<ClassicalConfig>, OracleError> {
    let read = c.scanned();
    let mut row = m.table().row(c.proc, read);
    let Some((t, w)) = row.next() else { return Ok(None) };
    if row.next().is_some() || !w.is_one() {
        return Err(OracleError::NotDeterministic { state: m.state_name(c.proc).to_string(), read });
    }
    Ok(Some(Configuration::new(c.head + t.mv.offset(), t.to, c.tape.set(c.head, t.write))))
}

/// Injectivity of the one-step map on the interior of `w`. The witness is a
/// pair of distinct configurations with the same image.
pub fn brute_injectivity(
    m: &ClassicalMachine,
    w: Window,
) -> Result<Verdict<(ClassicalConfig, ClassicalConfig)>, OracleError> {
    brute_injectivity_capped(m, w, DEFAULT_CAP)
}

pub fn brute_injectivity_capped(
    m: &ClassicalMachine,
    w: Window,
    cap: u128,
) -> Result<Verdict<(ClassicalConfig, ClassicalConfig)>, OracleError> {
    let states: Vec<StateId> = m.state_ids().collect();
    let all = enumerate_window(&states, w, cap)?;
    let mut seen: HashMap<ClassicalConfig, ClassicalConfig> = HashMap::new();
    for c in interior(&all, w) {
        let Some(image) = raw_step(m, &c)? else { continue };
        if let Some(prev) = seen.get(&image) {
            return Ok(Verdict::Fails((prev.clone(), c)));
        }
        seen.insert(image, c);
    }
    Ok(Verdict::Holds)
}

/// Gram value of an exact column norm, for assertions.
pub fn exact_norm(report: &UnitarityReport, col: usize) -> Option<QReal> {
    report.norm_defects.iter().find(|(c, _)| *c == col).and_then(|(_, v)| match v {
        GramValue::Exact(s) => Some(s.re.clone()),
        GramValue::Approx(_) => None,
    })
}

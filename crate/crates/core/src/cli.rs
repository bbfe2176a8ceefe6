//! `tmkit` command line. Exit codes: 0 pass, 1 property violation, 2 usage
//! or parse error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::classify::{self, ClassReport, DisplayPair, DisplayRow, Reading, Verdict};
use crate::frontend::json;
use crate::frontend::{parse_machine, serialize_machine, Machine};
use crate::machine::{ClassicalMachine, Configuration, ProcState, QuantumConfig, Symbol, Tape, Window};
use crate::oracle::{self, Exactness, GramValue};
use crate::quantum::{self, apply_step, matrix_element, QuantumMachine, StateVector, Violation};
use crate::scalar::{Amplitude, Scalar, DEFAULT_TOLERANCE};
use crate::simulate::{self, run_deterministic, run_probabilistic, step_backward};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// How many violations are listed before the output is truncated.
const SHOW_LIMIT: usize = 8;

#[derive(Parser, Debug)]
#[command(name = "tmkit", version, about = "Classical, probabilistic and quantum Turing machine toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every class check and print verdicts with witnesses.
    Classify {
        file: PathBuf,
        /// Use the literal summation reading of the reversibility condition.
        #[arg(long)]
        literal_reversibility: bool,
        /// Window radius for the quantum orthogonality check.
        #[arg(long, default_value_t = 2)]
        window: u32,
    },
    /// Check only the declared kind.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        window: u32,
    },
    /// Run a classical or probabilistic machine.
    Run {
        file: PathBuf,
        /// Input bits written from cell 0.
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// One backward step of a reversible machine.
    Back {
        file: PathBuf,
        /// Configuration as JSON, e.g. {"head":1,"state":"q0","tape":{"0":1}}.
        #[arg(long)]
        config: String,
    },
    /// Evolve a quantum machine from a basis configuration.
    Evolve {
        file: PathBuf,
        #[arg(long)]
        steps: usize,
        #[command(flatten)]
        start: BasisArgs,
        #[arg(long)]
        json: bool,
    },
    /// One matrix element of the evolution operator.
    Element {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Embed a reversible machine as a quantum machine.
    Lift {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Compare the local check with the truncated-matrix oracle.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        window: u32,
        #[arg(long, conflicts_with = "tol")]
        exact: bool,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the truncated matrix as `row col scalar` lines.
        #[arg(long)]
        matrix_dump: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct BasisArgs {
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    head: i64,
    /// Processor state bits; defaults to the machine's start state.
    #[arg(long)]
    proc: Option<String>,
    /// Tape contents as BITS@OFFSET.
    #[arg(long)]
    tape: Option<String>,
}

/// Failure of a command: the message and the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn from_env_value(v: Option<&str>) -> Result<Self, String> {
        match v {
            None | Some("") | Some("exact") => Ok(Backend::Exact),
            Some("float") => Ok(Backend::Float),
            Some(other) => Err(format!("TMKIT_BACKEND must be `exact` or `float`, not `{other}`")),
        }
    }
}

/// Entry point used by the binary. Reads `TMKIT_BACKEND` from the environment.
pub fn main() -> i32 {
    let backend = std::env::var("TMKIT_BACKEND").ok();
    run(std::env::args_os(), backend.as_deref(), &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    backend: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let backend = match Backend::from_env_value(backend) {
        Ok(b) => b,
        Err(msg) => {
            let _ = writeln!(err, "tmkit: {msg}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, backend, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, backend: Backend, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Classify { file, literal_reversibility, window } => {
            let reading = if literal_reversibility { Reading::Literal } else { Reading::Pointwise };
            match load(&file)? {
                Machine::Classical(m) => classify_classical(&m, reading, out),
                Machine::Quantum(q) => classify_quantum(&q, window_of(window)?, out),
            }
        }
        Command::Check { file, window } => match load(&file)? {
            Machine::Classical(m) => {
                let report = ClassReport::new(&m, Reading::Pointwise);
                let ok = report.member_of_declared(&m);
                writeln!(out, "{}: {} {}", m.name, if ok { "is" } else { "is not" }, m.kind)?;
                Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
            }
            Machine::Quantum(q) => {
                let wf = quantum::well_formed(&q.delta, window_of(window)?).map_err(|e| Failure::usage(e.to_string()))?;
                let ok = wf.is_well_formed();
                writeln!(out, "{}: {} well-formed", q.name, if ok { "is" } else { "is not" })?;
                Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
            }
        },
        Command::Run { file, input, steps, seed, json } => {
            let m = classical_only(load(&file)?, "run")?;
            let bits: Vec<Symbol> = input
                .chars()
                .map(|c| Symbol::from_char(c).ok_or_else(|| Failure::usage(format!("bad input bit `{c}`"))))
                .collect::<Result<_, _>>()?;
            let c0 = m.initial_config(&bits);
            let trace = if m.kind == crate::machine::Kind::Probabilistic {
                run_probabilistic(&m, c0, steps, seed)
            } else {
                run_deterministic(&m, c0, steps)
            }
            .map_err(|e| Failure { code: EXIT_VIOLATION, message: e.to_string() })?;
            if json {
                writeln!(out, "{}", json::emit_trace_json(&json::classical_trace_doc(&m, &trace)))?;
            } else {
                write!(out, "{}", trace.to_text(&m))?;
            }
            Ok(EXIT_OK)
        }
        Command::Back { file, config } => {
            let m = classical_only(load(&file)?, "back")?;
            let c = json::parse_config_doc(&config)
                .and_then(|d| d.to_classical(&m))
                .map_err(|e| Failure::usage(format!("--config: {e}")))?;
            match step_backward(&m, &c) {
                Ok(prev) => {
                    writeln!(out, "{}", json::config_json(&json::classical_config_doc(&m, &prev)))?;
                    Ok(EXIT_OK)
                }
                Err(e @ simulate::SimError::NotDeterministic { .. }) | Err(e @ simulate::SimError::NotZeroOne(_)) => {
                    Err(Failure::usage(e.to_string()))
                }
                Err(e) => Err(Failure { code: EXIT_VIOLATION, message: e.to_string() }),
            }
        }
        Command::Evolve { file, steps, start, json } => {
            let q = quantum_only(load(&file)?, "evolve")?;
            let c0 = basis_config(&q, &start)?;
            match backend {
                Backend::Exact => evolve_with::<Scalar>(&q, c0, steps, json, out),
                Backend::Float => evolve_with::<Complex64>(&q, c0, steps, json, out),
            }
        }
        Command::Element { file, from, to } => {
            let q = quantum_only(load(&file)?, "element")?;
            let k = q.delta.qubits();
            let parse = |flag: &str, text: &str| {
                json::parse_config_doc(text)
                    .and_then(|d| d.to_quantum(k))
                    .map_err(|e| Failure::usage(format!("--{flag}: {e}")))
            };
            let (a, b) = (parse("from", &from)?, parse("to", &to)?);
            writeln!(out, "{}", matrix_element(&q.delta, &a, &b))?;
            Ok(EXIT_OK)
        }
        Command::Lift { file, output } => {
            let m = classical_only(load(&file)?, "lift")?;
            match quantum::lift_reversible(&m) {
                Ok(lifted) => {
                    fs::write(&output, serialize_machine(&Machine::Quantum(lifted.machine)))
                        .map_err(|e| Failure::usage(format!("{}: {e}", output.display())))?;
                    for (i, n) in lifted.encoding.iter().enumerate() {
                        writeln!(out, "{} -> {n}", m.states()[i])?;
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => Err(Failure { code: EXIT_VIOLATION, message: e.to_string() }),
            }
        }
        Command::Verify { file, window, exact, tol, matrix_dump } => {
            let w = window_of(window)?;
            let exactness = match (exact, tol, backend) {
                (true, _, _) | (false, None, Backend::Exact) => Exactness::Exact,
                (false, Some(t), _) if t.is_finite() && t >= 0.0 => Exactness::Tolerance(t),
                (false, Some(t), _) => return Err(Failure::usage(format!("--tol must be a nonnegative number, not {t}"))),
                (false, None, Backend::Float) => Exactness::Tolerance(DEFAULT_TOLERANCE),
            };
            match load(&file)? {
                Machine::Quantum(q) => verify_quantum(&q, w, exactness, matrix_dump.as_deref(), out),
                Machine::Classical(m) => {
                    if matrix_dump.is_some() {
                        return Err(Failure::usage("--matrix-dump applies to quantum machines only"));
                    }
                    verify_classical(&m, w, out)
                }
            }
        }
    }
}

fn load(path: &Path) -> Result<Machine, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_machine(&text).map(|doc| doc.machine).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
        Failure::usage(lines.join("\n"))
    })
}

fn window_of(radius: u32) -> Result<Window, Failure> {
    Window::new(radius).map_err(|e| Failure::usage(e.to_string()))
}

fn classical_only(m: Machine, cmd: &str) -> Result<ClassicalMachine, Failure> {
    match m {
        Machine::Classical(m) => Ok(m),
        Machine::Quantum(q) => Err(Failure::usage(format!("`{cmd}` needs a classical machine; {} is quantum", q.name))),
    }
}

fn quantum_only(m: Machine, cmd: &str) -> Result<QuantumMachine, Failure> {
    match m {
        Machine::Quantum(q) => Ok(q),
        Machine::Classical(m) => {
            Err(Failure::usage(format!("`{cmd}` needs a quantum machine; {} is {}", m.name, m.kind)))
        }
    }
}

fn verdict_line<W>(
    out: &mut dyn Write,
    label: &str,
    r: &Result<Verdict<W>, classify::ClassifyError>,
    show: impl Fn(&W) -> String,
) -> io::Result<bool> {
    match r {
        Ok(Verdict::Holds) => writeln!(out, "{label}: yes").map(|_| true),
        Ok(Verdict::Fails(w)) => writeln!(out, "{label}: no ({})", show(w)).map(|_| false),
        Err(e) => writeln!(out, "{label}: n/a ({e})").map(|_| false),
    }
}

fn classify_classical(m: &ClassicalMachine, reading: Reading, out: &mut dyn Write) -> Outcome {
    let report = ClassReport::new(m, reading);
    writeln!(out, "machine {} (declared {})", m.name, m.kind)?;
    verdict_line(out, "deterministic", &report.deterministic, |w| DisplayRow(m, w).to_string())?;
    verdict_line(out, "total", &report.total, |w| DisplayRow(m, w).to_string())?;
    let label = match reading {
        Reading::Pointwise => "reversible",
        Reading::Literal => "reversible (literal)",
    };
    verdict_line(out, label, &report.reversible, |w| DisplayPair(m, w).to_string())?;
    verdict_line(out, "probabilistic", &report.probabilistic, |w| DisplayRow(m, w).to_string())?;
    for row in &report.substochastic {
        writeln!(out, "warning: substochastic {}; the deficit halts", DisplayRow(m, row))?;
    }
    let ok = report.member_of_declared(m);
    writeln!(out, "declared kind {}: {}", m.kind, if ok { "holds" } else { "fails" })?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn render_qconfig(c: &QuantumConfig) -> String {
    let lo = c.tape.min_one().map_or(c.head, |x| x.min(c.head));
    let hi = c.tape.max_one().map_or(c.head, |x| x.max(c.head));
    format!("head {} | proc {} | window {}@{lo}", c.head, c.proc, c.tape.bits(lo, hi))
}

fn print_violations(wf: &quantum::WellFormedness, out: &mut dyn Write) -> io::Result<()> {
    for v in wf.violations.iter().take(SHOW_LIMIT) {
        match v {
            Violation::Row { proc, read, norm_sqr, .. } => {
                writeln!(out, "  row ({proc}, {read}) has squared norm {norm_sqr}")?
            }
            Violation::Pair(o) => writeln!(
                out,
                "  images of [{}] and [{}] overlap with inner product {}",
                render_qconfig(&o.first),
                render_qconfig(&o.second),
                o.inner
            )?,
        }
    }
    if wf.violations.len() > SHOW_LIMIT {
        writeln!(out, "  ... {} more", wf.violations.len() - SHOW_LIMIT)?;
    }
    Ok(())
}

fn classify_quantum(q: &QuantumMachine, w: Window, out: &mut dyn Write) -> Outcome {
    let wf = quantum::well_formed(&q.delta, w).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out, "machine {} (declared quantum, {} qubits)", q.name, q.delta.qubits())?;
    writeln!(out, "row normalization: {}", if wf.normalized { "yes" } else { "no" })?;
    writeln!(out, "orthogonality: {}", if wf.orthogonal { "yes" } else { "no" })?;
    print_violations(&wf, out)?;
    let ok = wf.is_well_formed();
    writeln!(out, "declared kind quantum: {}", if ok { "holds" } else { "fails" })?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn basis_config(q: &QuantumMachine, a: &BasisArgs) -> Result<QuantumConfig, Failure> {
    let k = q.delta.qubits();
    let proc = match &a.proc {
        None => q.start,
        Some(bits) => ProcState::parse(bits)
            .filter(|p| p.width() == k)
            .ok_or_else(|| Failure::usage(format!("--proc must be {k} bits, not `{bits}`")))?,
    };
    let tape = match &a.tape {
        None => Tape::new(),
        Some(arg) => {
            let (bits, offset) = arg.split_once('@').unwrap_or((arg.as_str(), "0"));
            let offset: i64 = offset.parse().map_err(|_| Failure::usage(format!("bad tape offset in `{arg}`")))?;
            Tape::parse_bits(bits, offset).ok_or_else(|| Failure::usage(format!("bad tape bits in `{arg}`")))?
        }
    };
    Ok(Configuration::new(a.head, proc, tape))
}

fn evolve_with<A: Amplitude>(
    q: &QuantumMachine,
    c0: QuantumConfig,
    steps: usize,
    json_out: bool,
    out: &mut dyn Write,
) -> Outcome {
    let mut states = vec![StateVector::<A>::basis(c0)];
    for _ in 0..steps {
        let next = apply_step(&q.delta, states.last().expect("nonempty"));
        states.push(next);
    }
    if json_out {
        writeln!(out, "{}", json::emit_trace_json(&json::quantum_trace_doc(q, &states)))?;
        return Ok(EXIT_OK);
    }
    let psi = states.last().expect("nonempty");
    writeln!(out, "t {steps} | backend {} | terms {}", A::BACKEND, psi.len())?;
    for (c, a) in psi.iter() {
        let (re, im) = a.text_parts();
        writeln!(out, "{} | re {re} | im {im}", render_qconfig(c))?;
    }
    writeln!(out, "norm2 {}", psi.norm_sqr_f64())?;
    if psi.pruned_mass() > 0.0 {
        writeln!(out, "pruned {}", psi.pruned_mass())?;
    }
    Ok(EXIT_OK)
}

fn gram_text(v: &GramValue) -> String {
    match v {
        GramValue::Exact(s) => s.to_string(),
        GramValue::Approx(z) => format!("{} + {}i", z.re, z.im),
    }
}

fn verify_quantum(
    q: &QuantumMachine,
    w: Window,
    exactness: Exactness,
    dump: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let wf = quantum::well_formed(&q.delta, w).map_err(|e| Failure::usage(e.to_string()))?;
    let local = wf.is_well_formed();
    writeln!(out, "local: {}", if local { "well-formed" } else { "not well-formed" })?;
    print_violations(&wf, out)?;

    let matrix = oracle::build_truncated_matrix(&q.delta, w).map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(path) = dump {
        let mut f = io::BufWriter::new(
            fs::File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        );
        matrix.write_dump(&mut f)?;
        f.flush()?;
    }
    let report = oracle::check_matrix_unitary(&matrix, exactness);
    let global = report.passes();
    writeln!(
        out,
        "oracle: {} (L={}, {} columns, {} rows, {} nonzeros)",
        if global { "columns orthonormal" } else { "columns not orthonormal" },
        w.radius(),
        matrix.domain.len(),
        matrix.codomain.len(),
        matrix.nonzeros()
    )?;
    for (col, v) in report.norm_defects.iter().take(SHOW_LIMIT) {
        writeln!(out, "  column [{}] has squared norm {}", render_qconfig(&matrix.domain[*col]), gram_text(v))?;
    }
    for (i, j, v) in report.overlaps.iter().take(SHOW_LIMIT) {
        writeln!(
            out,
            "  columns [{}] and [{}] have inner product {}",
            render_qconfig(&matrix.domain[*i]),
            render_qconfig(&matrix.domain[*j]),
            gram_text(v)
        )?;
    }
    writeln!(out, "agreement: {}", if local == global { "yes" } else { "no" })?;
    Ok(if local && global { EXIT_OK } else { EXIT_VIOLATION })
}

fn verify_classical(m: &ClassicalMachine, w: Window, out: &mut dyn Write) -> Outcome {
    let local = classify::is_reversible(m).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(
        out,
        "local: {}",
        match &local {
            Verdict::Holds => "reversible".to_string(),
            Verdict::Fails(p) => format!("not reversible ({})", DisplayPair(m, p)),
        }
    )?;
    let global = oracle::brute_injectivity(m, w).map_err(|e| Failure::usage(e.to_string()))?;
    let show = |c: &crate::machine::ClassicalConfig| json::config_json(&json::classical_config_doc(m, c));
    writeln!(
        out,
        "oracle: {}",
        match &global {
            Verdict::Holds => format!("injective on L={} interior", w.radius()),
            Verdict::Fails((a, b)) => format!("not injective: {} and {} share an image", show(a), show(b)),
        }
    )?;
    let agree = local.holds() == global.holds();
    writeln!(out, "agreement: {}", if agree { "yes" } else { "no" })?;
    Ok(if local.holds() && global.holds() { EXIT_OK } else { EXIT_VIOLATION })
}

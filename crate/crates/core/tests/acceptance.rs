//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmkit::classify::{is_reversible, is_reversible_with, Reading};
use tmkit::corpus;
use tmkit::frontend::{parse_machine, serialize_machine, Machine};
use tmkit::machine::{ClassicalMachine, Configuration, StateId, Symbol, Tape, Window};
use tmkit::oracle::{brute_injectivity, build_truncated_matrix, check_matrix_unitary, Exactness};
use tmkit::quantum::{apply_step, lift_reversible, matrix_element, well_formed, QDelta, StateVector};
use tmkit::scalar::Scalar;
use tmkit::simulate::{run_deterministic, run_probabilistic, step_backward, step_deterministic, Step};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn window(radius: u32) -> Window {
    Window::new(radius).expect("valid radius")
}

/// Well-formed and broken δ tables: the named references plus ten lifts.
fn quantum_corpus() -> Vec<(String, QDelta)> {
    let mut out: Vec<(String, QDelta)> =
        corpus::quantum_reference().into_iter().map(|(n, d, _)| (n.to_string(), d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11f7);
    for (i, d) in corpus::random_lifted(&mut rng, 10, 4).into_iter().enumerate() {
        out.push((format!("lifted_{i}"), d));
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut agree, mut reversible) = (0, 0);
    let mut first_miss = None;
    for i in 0..200 {
        let m = corpus::random_total_deterministic(&mut rng, 3, &format!("m{i}"));
        let local = is_reversible(&m).expect("deterministic").holds();
        let global = brute_injectivity(&m, window(2)).expect("within cap").holds();
        if local == global {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(i);
        }
        reversible += usize::from(local);
    }
    let elapsed = start.elapsed();
    let pass = agree == 200 && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "{agree}/200 agree ({reversible} reversible), {:.2}s{}",
            elapsed.as_secs_f64(),
            first_miss.map_or(String::new(), |i| format!(", first mismatch #{i}"))
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let deltas = quantum_corpus();
    let broken = deltas.iter().filter(|(_, d)| !well_formed(d, window(2)).unwrap().is_well_formed()).count();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for radius in [2, 3] {
        let w = window(radius);
        for (name, d) in &deltas {
            let local = well_formed(d, w).expect("radius >= 2").is_well_formed();
            let m = build_truncated_matrix(d, w).expect("within cap");
            let global = check_matrix_unitary(&m, Exactness::Exact).passes();
            checked += 1;
            if local != global {
                mismatches.push(format!("{name}@L={radius}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && deltas.len() >= 20 && broken >= 5 && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{}/{checked} agree over {} tables ({broken} broken) at L=2,3, {:.2}s{}",
            checked - mismatches.len(),
            deltas.len(),
            elapsed.as_secs_f64(),
            if mismatches.is_empty() { String::new() } else { format!(", mismatches: {}", mismatches.join(" ")) }
        ),
    )
}

fn criterion_3() -> Outcome {
    let w = window(2);
    let mut pairs = 0usize;
    let mut mismatches = 0usize;
    let mut escaped = 0usize;
    let mut machines = 0;
    let mut shape = (0, 0);
    for (_, d) in quantum_corpus().into_iter().filter(|(_, d)| d.qubits() == 1) {
        machines += 1;
        let m = build_truncated_matrix(&d, w).expect("within cap");
        shape = (m.domain.len(), m.codomain.len());
        for c in &m.domain {
            let image = apply_step(&d, &StateVector::<Scalar>::basis(c.clone()));
            escaped += image.iter().filter(|(r, _)| !w.contains(*r)).count();
            for r in &m.codomain {
                pairs += 1;
                if matrix_element(&d, c, r) != image.amplitude(r) {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0 && escaped == 0 && pairs > 0,
        format!(
            "{mismatches} mismatches over {pairs} pairs ({machines} machines, {} x {} per machine), {escaped} images leave the window",
            shape.0, shape.1
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = window(2);
    let good: Vec<(String, QDelta)> =
        quantum_corpus().into_iter().filter(|(_, d)| well_formed(d, w).unwrap().is_well_formed()).collect();
    let mut exact_failures = 0;
    let mut worst_float = 0f64;
    let mut runs = 0;
    for (_, d) in &good {
        for _ in 0..100 {
            let psi0 = corpus::random_unit_state(&mut rng, d.qubits(), 3, 4);
            let mut exact = psi0.clone();
            let mut float = psi0.to_float();
            for _ in 0..5 {
                exact = apply_step(d, &exact);
                float = apply_step(d, &float);
                if !exact.norm_sqr().is_one() {
                    exact_failures += 1;
                }
                let dev = (float.norm_sqr_f64() + float.pruned_mass() - 1.0).abs();
                worst_float = worst_float.max(dev).max((float.norm_sqr_f64() - 1.0).abs());
            }
            runs += 1;
        }
    }
    outcome(
        exact_failures == 0 && worst_float < 1e-9,
        format!(
            "{runs} runs x 5 steps over {} well-formed tables: {exact_failures} exact failures, worst float deviation {worst_float:.2e}, {:.2}s",
            good.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn random_classical_config<R: Rng>(rng: &mut R, states: usize, radius: i64) -> tmkit::machine::ClassicalConfig {
    let mut tape = Tape::new();
    for x in -radius..=radius {
        if rng.gen_bool(0.5) {
            tape.write(x, Symbol::One);
        }
    }
    Configuration::new(rng.gen_range(-radius..=radius), StateId(rng.gen_range(0..states)), tape)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for i in 0..50 {
        let states = rng.gen_range(1..=4);
        let m = corpus::random_reversible(&mut rng, states, &format!("r{i}"));
        let lifted = lift_reversible(&m).expect("reversible by construction");
        let c0 = random_classical_config(&mut rng, states, 3);
        let trace = run_deterministic(&m, c0.clone(), 20).expect("deterministic");
        let mut psi = StateVector::<Scalar>::basis(lifted.encode_config(&c0));
        let mut ok = trace.steps() == 20;
        for entry in trace.entries.iter().skip(1) {
            psi = apply_step(&lifted.machine.delta, &psi);
            let image = lifted.encode_config(&entry.config);
            ok &= psi.len() == 1 && psi.amplitude(&image).is_one();
        }
        if !ok {
            failures.push(i);
        }
    }
    outcome(failures.is_empty(), format!("{}/50 machines commute over 20 steps", 50 - failures.len()))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut machines: Vec<ClassicalMachine> = vec![corpus::right_mover(), corpus::flipper()];
    for i in 0..10 {
        let states = rng.gen_range(1..=4);
        machines.push(corpus::random_reversible(&mut rng, states, &format!("r{i}")));
    }
    let mut checked = 0;
    let mut failures = 0;
    for m in &machines {
        for _ in 0..100 {
            let c = random_classical_config(&mut rng, m.states().len(), 3);
            let Ok(Step::Next { config, .. }) = step_deterministic(m, &c) else {
                failures += 1;
                continue;
            };
            checked += 1;
            if step_backward(m, &config).as_ref() != Ok(&c) {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0 && checked == 100 * machines.len(),
        format!("{checked} round trips over {} machines, {failures} failures", machines.len()),
    )
}

fn coin_counts(runs: u64) -> (u64, String) {
    let m = corpus::fair_coin_writer();
    let mut ones = 0;
    let mut record = String::with_capacity(runs as usize);
    for seed in 0..runs {
        let trace = run_probabilistic(&m, m.initial_config(&[]), 1, seed).expect("probabilistic");
        let bit = trace.last().tape.get(0);
        ones += u64::from(bit.bit());
        record.push(if bit == Symbol::One { '1' } else { '0' });
    }
    (ones, record)
}

fn criterion_7() -> Outcome {
    const RUNS: u64 = 100_000;
    let (ones, first) = coin_counts(RUNS);
    let (again, second) = coin_counts(RUNS);
    let freq = ones as f64 / RUNS as f64;
    let bound = 4.0 * (0.25 / RUNS as f64).sqrt();
    let reproducible = ones == again && first == second;
    outcome(
        (freq - 0.5).abs() < bound && reproducible,
        format!(
            "write-1 frequency {freq:.5} (|dev| {:.5} < {bound:.5}), rerun {}",
            (freq - 0.5).abs(),
            if reproducible { "identical" } else { "differs" }
        ),
    )
}

fn corpus_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("machines");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("machines directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tm"))
        .collect();
    files.sort();
    files
}

const MALFORMED: &[&str] = &[
    "",
    "machine\n",
    "machine m\nkind\n",
    "machine m\nkind classical\nstates a\n",
    "machine m\nkind deterministic\nstates a\nrule a 0 -> 0 R b\n",
    "machine m\nkind deterministic\nstates a\nrule a 0 -> 0 X a\n",
    "machine m\nkind deterministic\nstates a\nrule a 2 -> 0 R a\n",
    "machine m\nkind deterministic\nstates a\nrule a 0 => 0 R a\n",
    "machine m\nkind deterministic\nstates a\nrule a 0 -> 0 R a\nrule a 0 -> 0 R a\n",
    "machine m\nkind deterministic\nstates a\nrule a 0 -> 0 R a : 1/2\n",
    "machine m\nkind probabilistic\nstates a\nrule a 0 -> 0 R a : 0.5\n",
    "machine m\nkind quantum\nqubits 1\nrule 0 0 -> 0 R 0 : sqrt3\n",
    "machine m\nkind quantum\nqubits 1\nrule 0 0 -> 0 R 0 : 0\n",
    "machine m\nkind quantum\nqubits 2\nrule 0 0 -> 0 R 00\n",
    "machine m\nkind quantum\nstates a\n",
    "machine m\r\nkind reversible\r\nstates a\r\nhalt b\r\n",
    "machine m\nkind reversible\nstates a\nfrobnicate\n",
];

fn position_inside(text: &str, line: usize, column: usize) -> bool {
    let lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    (text.is_empty() && line == 1 && column == 1)
        || (line >= 1 && line <= lines.len() && column >= 1 && column <= lines[line - 1].chars().count().max(1))
}

fn criterion_8() -> Outcome {
    let mut problems = Vec::new();
    let mut fixed_points = 0;
    let check = |label: String, m: &Machine, problems: &mut Vec<String>| {
        let once = serialize_machine(m);
        match parse_machine(&once) {
            Ok(doc) if doc.machine == *m && serialize_machine(&doc.machine) == once => true,
            Ok(_) => {
                problems.push(format!("{label}: not a fixed point"));
                false
            }
            Err(d) => {
                problems.push(format!("{label}: reparse failed: {}", d[0]));
                false
            }
        }
    };
    let files = corpus_files();
    for path in &files {
        let text = std::fs::read_to_string(path).expect("readable");
        match parse_machine(&text) {
            Ok(doc) => fixed_points += usize::from(check(path.display().to_string(), &doc.machine, &mut problems)),
            Err(d) => problems.push(format!("{}: {}", path.display(), d[0])),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let m = corpus::random_machine(&mut rng, &format!("rand{i}"));
        fixed_points += usize::from(check(format!("random #{i}"), &m, &mut problems));
    }
    let mut positioned = 0;
    for text in MALFORMED {
        match parse_machine(text) {
            Ok(_) => problems.push(format!("accepted malformed input {text:?}")),
            Err(diags) => {
                if !diags.is_empty() && diags.iter().all(|d| position_inside(text, d.line, d.column)) {
                    positioned += 1;
                } else {
                    problems.push(format!("diagnostic outside the source for {text:?}: {diags:?}"));
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{fixed_points}/{} fixed points ({} corpus files + 200 random), {positioned}/{} malformed inputs positioned{}",
            files.len() + 200,
            files.len(),
            MALFORMED.len(),
            problems.first().map_or(String::new(), |p| format!("; {p}"))
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut machines: Vec<ClassicalMachine> =
        vec![corpus::right_mover(), corpus::flipper(), corpus::constant_writer(), corpus::direction_collision()];
    for i in 0..200 {
        machines.push(corpus::random_total_deterministic(&mut rng, 3, &format!("m{i}")));
    }
    let rejected =
        machines.iter().filter(|m| !is_reversible_with(m, Reading::Literal).expect("deterministic").holds()).count();
    outcome(rejected == machines.len(), format!("{rejected}/{} total deterministic machines rejected", machines.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("classifier agrees with brute-force injectivity", criterion_1),
        ("local well-formedness agrees with truncated unitarity", criterion_2),
        ("matrix elements equal one-step coefficients", criterion_3),
        ("norm conservation under well-formed evolution", criterion_4),
        ("lifted evolution commutes with classical runs", criterion_5),
        ("backward step inverts forward step", criterion_6),
        ("seeded fair-coin sampling", criterion_7),
        ("DSL round trip and positioned diagnostics", criterion_8),
        ("literal summation rejects every total machine", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

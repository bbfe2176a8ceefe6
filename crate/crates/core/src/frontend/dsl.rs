//! Line-oriented machine description language.
//!
//! ```text
//! # comment
//! machine <ident>
//! kind deterministic|reversible|probabilistic|quantum
//! states <ident>+            (classical kinds)
//! qubits <int>               (quantum; processor states written as bitstrings)
//! start <ident|bits>         (optional)
//! halt <ident>+              (optional, classical only)
//! rule <state> <bit> -> <bit> <L|N|R> <state> [: <scalar>]
//! ```
//!
//! Directives may appear in any order. An omitted weight means 1.

use std::collections::BTreeMap;
use std::fmt;

use crate::machine::{ClassicalMachine, Direction, Kind, ProcState, Rule, StateId, Symbol, MAX_QUBITS};
use crate::quantum::{QDelta, QuantumMachine};
use crate::scalar::{QReal, Scalar};

/// A parsed machine of any kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Machine {
    Classical(ClassicalMachine),
    Quantum(QuantumMachine),
}

impl Machine {
    pub fn name(&self) -> &str {
        match self {
            Machine::Classical(m) => &m.name,
            Machine::Quantum(m) => &m.name,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Machine::Classical(m) => m.kind,
            Machine::Quantum(_) => Kind::Quantum,
        }
    }
}

impl From<ClassicalMachine> for Machine {
    fn from(m: ClassicalMachine) -> Self {
        Machine::Classical(m)
    }
}

impl From<QuantumMachine> for Machine {
    fn from(m: QuantumMachine) -> Self {
        Machine::Quantum(m)
    }
}

/// 1-based line and column (in characters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl Diagnostic {
    fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), line: span.line, column: span.column }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Source positions of the parsed directives.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceSpans {
    /// First token of each header directive, keyed by directive name.
    pub directives: BTreeMap<&'static str, Span>,
    /// Each `rule` line, in source order.
    pub rules: Vec<Span>,
}

#[derive(Clone, Debug)]
pub struct MachineDoc {
    pub source: String,
    pub machine: Machine,
    pub spans: SourceSpans,
}

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    span: Span,
}

struct Line<'a> {
    number: usize,
    /// Text before any `#` comment, without the line terminator.
    text: &'a str,
}

impl<'a> Line<'a> {
    fn span_at(&self, byte: usize) -> Span {
        Span { line: self.number, column: self.text[..byte].chars().count() + 1 }
    }

    fn tokens(&self, upto: usize) -> Vec<Token<'a>> {
        let text = &self.text[..upto];
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push(Token { text: &self.text[s..i], span: self.span_at(s) });
                    start = None;
                }
                _ => {}
            }
        }
        out
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '\'')
}

struct Header<'a> {
    name: Option<(&'a str, Span)>,
    kind: Option<(Kind, Span)>,
    states: Option<(Vec<Token<'a>>, Span)>,
    qubits: Option<(u8, Span)>,
    start: Option<Token<'a>>,
    halt: Option<(Vec<Token<'a>>, Span)>,
}

struct RuleLine<'a> {
    span: Span,
    from: Token<'a>,
    read: Token<'a>,
    write: Token<'a>,
    mv: Token<'a>,
    to: Token<'a>,
    weight: Option<(&'a str, usize, &'a Line<'a>)>,
}

pub fn parse_machine(text: &str) -> Result<MachineDoc, Vec<Diagnostic>> {
    let lines: Vec<Line<'_>> = text
        .split('\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            let code = raw.find('#').map_or(raw, |p| &raw[..p]);
            Line { number: i + 1, text: code }
        })
        .collect();

    let mut diags = Vec::new();
    let mut header = Header { name: None, kind: None, states: None, qubits: None, start: None, halt: None };
    let mut rule_lines = Vec::new();
    let mut spans = SourceSpans::default();

    for line in &lines {
        let toks = line.tokens(line.text.len());
        let Some(first) = toks.first() else { continue };
        let args = &toks[1..];
        let dup = |name: &str, diags: &mut Vec<Diagnostic>| {
            diags.push(Diagnostic::error(first.span, format!("duplicate `{name}` directive")));
        };
        match first.text {
            "machine" => {
                if header.name.is_some() {
                    dup("machine", &mut diags);
                } else if args.len() != 1 || !is_ident(args[0].text) {
                    let at = args.first().map_or(first.span, |t| t.span);
                    diags.push(Diagnostic::error(at, "expected `machine <identifier>`"));
                } else {
                    header.name = Some((args[0].text, first.span));
                    spans.directives.insert("machine", first.span);
                }
            }
            "kind" => {
                if header.kind.is_some() {
                    dup("kind", &mut diags);
                } else {
                    match args {
                        [k] => match Kind::from_name(k.text) {
                            Some(kind) => {
                                header.kind = Some((kind, first.span));
                                spans.directives.insert("kind", first.span);
                            }
                            None => diags.push(Diagnostic::error(
                                k.span,
                                format!(
                                    "unknown kind `{}`; expected deterministic, reversible, probabilistic or quantum",
                                    k.text
                                ),
                            )),
                        },
                        _ => diags.push(Diagnostic::error(first.span, "expected `kind <kind>`")),
                    }
                }
            }
            "states" => {
                if header.states.is_some() {
                    dup("states", &mut diags);
                } else if args.is_empty() {
                    diags.push(Diagnostic::error(first.span, "`states` needs at least one state name"));
                } else if let Some(bad) = args.iter().find(|t| !is_ident(t.text)) {
                    diags.push(Diagnostic::error(bad.span, format!("`{}` is not a valid state name", bad.text)));
                } else {
                    header.states = Some((args.to_vec(), first.span));
                    spans.directives.insert("states", first.span);
                }
            }
            "qubits" => {
                if header.qubits.is_some() {
                    dup("qubits", &mut diags);
                } else {
                    match args {
                        [n] => match n.text.parse::<u8>() {
                            Ok(k) if (1..=MAX_QUBITS).contains(&k) => {
                                header.qubits = Some((k, first.span));
                                spans.directives.insert("qubits", first.span);
                            }
                            _ => diags.push(Diagnostic::error(
                                n.span,
                                format!("qubit count must be an integer between 1 and {MAX_QUBITS}"),
                            )),
                        },
                        _ => diags.push(Diagnostic::error(first.span, "expected `qubits <int>`")),
                    }
                }
            }
            "start" => {
                if header.start.is_some() {
                    dup("start", &mut diags);
                } else {
                    match args {
                        [s] => {
                            header.start = Some(s.clone());
                            spans.directives.insert("start", first.span);
                        }
                        _ => diags.push(Diagnostic::error(first.span, "expected `start <state>`")),
                    }
                }
            }
            "halt" => {
                if header.halt.is_some() {
                    dup("halt", &mut diags);
                } else if args.is_empty() {
                    diags.push(Diagnostic::error(first.span, "`halt` needs at least one state name"));
                } else {
                    header.halt = Some((args.to_vec(), first.span));
                    spans.directives.insert("halt", first.span);
                }
            }
            "rule" => match split_rule(line, first.span) {
                Ok(r) => rule_lines.push(r),
                Err(d) => diags.push(d),
            },
            other => diags.push(Diagnostic::error(first.span, format!("unknown directive `{other}`"))),
        }
    }

    let top = Span { line: 1, column: 1 };
    if header.name.is_none() && !diags.iter().any(|d| d.message.contains("machine <identifier>")) {
        diags.push(Diagnostic::error(top, "missing `machine <identifier>` directive"));
    }
    let Some((kind, kind_span)) = header.kind else {
        if !diags.iter().any(|d| d.message.contains("kind")) {
            diags.push(Diagnostic::error(top, "missing `kind` directive"));
        }
        return Err(diags);
    };

    let machine = match kind {
        Kind::Quantum => build_quantum(&header, &rule_lines, kind_span, &mut diags),
        _ => build_classical(kind, &header, &rule_lines, kind_span, &mut diags),
    };
    spans.rules = rule_lines.iter().map(|r| r.span).collect();
    match machine {
        Some(machine) if diags.is_empty() => Ok(MachineDoc { source: text.to_string(), machine, spans }),
        _ => Err(diags),
    }
}

fn split_rule<'a>(line: &'a Line<'a>, span: Span) -> Result<RuleLine<'a>, Diagnostic> {
    let colon = line.text.find(':');
    let toks = line.tokens(colon.unwrap_or(line.text.len()));
    let shape = "expected `rule <state> <bit> -> <bit> <L|N|R> <state> [: <weight>]`";
    let [_, from, read, arrow, write, mv, to] = toks.as_slice() else {
        let at = toks.get(7).map_or(span, |t| t.span);
        return Err(Diagnostic::error(at, shape));
    };
    if arrow.text != "->" {
        return Err(Diagnostic::error(arrow.span, format!("expected `->`, found `{}`", arrow.text)));
    }
    let weight = colon.map(|p| (&line.text[p + 1..], p + 1, line));
    Ok(RuleLine {
        span,
        from: from.clone(),
        read: read.clone(),
        write: write.clone(),
        mv: mv.clone(),
        to: to.clone(),
        weight,
    })
}

fn parse_symbol(t: &Token<'_>, diags: &mut Vec<Diagnostic>) -> Option<Symbol> {
    match t.text {
        "0" => Some(Symbol::Zero),
        "1" => Some(Symbol::One),
        _ => {
            diags.push(Diagnostic::error(t.span, format!("expected tape symbol 0 or 1, found `{}`", t.text)));
            None
        }
    }
}

fn parse_direction(t: &Token<'_>, diags: &mut Vec<Diagnostic>) -> Option<Direction> {
    let d = Direction::from_letter(t.text);
    if d.is_none() {
        diags.push(Diagnostic::error(t.span, format!("bad direction `{}`; expected L, N or R", t.text)));
    }
    d
}

fn parse_weight(r: &RuleLine<'_>, kind: Kind, diags: &mut Vec<Diagnostic>) -> Option<Scalar> {
    let Some((text, offset, line)) = r.weight else {
        return Some(Scalar::one());
    };
    let lead = text.len() - text.trim_start().len();
    let at = line.span_at(offset + lead);
    let value: Scalar = match text.trim().parse() {
        Ok(v) => v,
        Err(e) => {
            // Errors at end of input point at the last character instead.
            let trimmed = line.text.trim_end();
            let last = trimmed.char_indices().last().map_or(0, |(i, _)| i);
            let err_at = line.span_at((offset + lead + e.offset).min(last));
            diags.push(Diagnostic::error(err_at, format!("bad weight: {}", e.message)));
            return None;
        }
    };
    let problem = if value.is_zero() {
        Some("zero weight; omit the rule instead".to_string())
    } else {
        match kind {
            Kind::Deterministic | Kind::Reversible if !value.is_one() => {
                Some(format!("{kind} rules must have weight 1 (or omit it), found {value}"))
            }
            Kind::Probabilistic
                if !value.is_real() || value.re.is_negative() || value.re > QReal::one() =>
            {
                Some(format!("probabilistic weights must be real numbers in [0, 1], found {value}"))
            }
            _ => None,
        }
    };
    match problem {
        Some(msg) => {
            diags.push(Diagnostic::error(at, msg));
            None
        }
        None => Some(value),
    }
}

fn build_classical(
    kind: Kind,
    header: &Header<'_>,
    rules: &[RuleLine<'_>],
    kind_span: Span,
    diags: &mut Vec<Diagnostic>,
) -> Option<Machine> {
    if let Some((_, span)) = header.qubits {
        diags.push(Diagnostic::error(span, format!("`qubits` is only valid for quantum machines, not {kind}")));
    }
    let Some((state_toks, _)) = &header.states else {
        diags.push(Diagnostic::error(kind_span, format!("{kind} machine needs a `states` directive")));
        return None;
    };
    let names: Vec<String> = state_toks.iter().map(|t| t.text.to_string()).collect();
    let name = header.name.map_or("", |(n, _)| n);
    let mut m = match ClassicalMachine::new(name, kind, names) {
        Ok(m) => m,
        Err(e) => {
            diags.push(Diagnostic::error(state_toks[0].span, e.to_string()));
            return None;
        }
    };
    let lookup = |t: &Token<'_>, diags: &mut Vec<Diagnostic>| {
        let q = m.state_by_name(t.text);
        if q.is_none() {
            diags.push(Diagnostic::error(t.span, format!("unknown state `{}`", t.text)));
        }
        q
    };
    let start = header.start.as_ref().map(|t| lookup(t, diags));
    let halts: Vec<Option<StateId>> = header
        .halt
        .as_ref()
        .map(|(toks, _)| toks.iter().map(|t| lookup(t, diags)).collect())
        .unwrap_or_default();
    let mut parsed = Vec::new();
    for r in rules {
        let from = lookup(&r.from, diags);
        let to = lookup(&r.to, diags);
        let read = parse_symbol(&r.read, diags);
        let write = parse_symbol(&r.write, diags);
        let mv = parse_direction(&r.mv, diags);
        let weight = parse_weight(r, kind, diags);
        if let (Some(from), Some(to), Some(read), Some(write), Some(mv), Some(weight)) =
            (from, to, read, write, mv, weight)
        {
            parsed.push((r.span, Rule::new(from, read, write, mv, to, weight)));
        }
    }
    if let Some(Some(q)) = start {
        m.set_start(q).expect("looked up");
    }
    for q in halts.into_iter().flatten() {
        m.add_halt(q).expect("looked up");
    }
    let mut first_seen: BTreeMap<(StateId, Symbol, Symbol, Direction, StateId), Span> = BTreeMap::new();
    for (span, rule) in parsed {
        let key = (rule.from, rule.read, rule.write, rule.mv, rule.to);
        if let Some(prev) = first_seen.get(&key) {
            diags.push(Diagnostic::error(span, format!("duplicate rule; first given on line {}", prev.line)));
            continue;
        }
        first_seen.insert(key, span);
        if let Err(e) = m.add_rule(rule) {
            diags.push(Diagnostic::error(span, e.to_string()));
        }
    }
    Some(Machine::Classical(m))
}

fn build_quantum(
    header: &Header<'_>,
    rules: &[RuleLine<'_>],
    kind_span: Span,
    diags: &mut Vec<Diagnostic>,
) -> Option<Machine> {
    if let Some((_, span)) = header.states {
        diags.push(Diagnostic::error(span, "quantum machines declare `qubits`, not `states`"));
    }
    if let Some((_, span)) = header.halt {
        diags.push(Diagnostic::error(span, "`halt` is only valid for classical machines"));
    }
    let Some((k, _)) = header.qubits else {
        diags.push(Diagnostic::error(kind_span, "quantum machine needs a `qubits` directive"));
        return None;
    };
    let proc = |t: &Token<'_>, diags: &mut Vec<Diagnostic>| match ProcState::parse(t.text) {
        Some(p) if p.width() == k => Some(p),
        _ => {
            diags.push(Diagnostic::error(
                t.span,
                format!("expected a processor state of {k} bits, found `{}`", t.text),
            ));
            None
        }
    };
    let start = header.start.as_ref().map(|t| proc(t, diags));
    let mut delta = QDelta::new(k);
    let mut first_seen: BTreeMap<(ProcState, Symbol, Symbol, Direction, ProcState), Span> = BTreeMap::new();
    for r in rules {
        let from = proc(&r.from, diags);
        let to = proc(&r.to, diags);
        let read = parse_symbol(&r.read, diags);
        let write = parse_symbol(&r.write, diags);
        let mv = parse_direction(&r.mv, diags);
        let weight = parse_weight(r, Kind::Quantum, diags);
        let (Some(from), Some(to), Some(read), Some(write), Some(mv), Some(weight)) =
            (from, to, read, write, mv, weight)
        else {
            continue;
        };
        let key = (from, read, write, mv, to);
        if let Some(prev) = first_seen.get(&key) {
            diags.push(Diagnostic::error(r.span, format!("duplicate rule; first given on line {}", prev.line)));
            continue;
        }
        first_seen.insert(key, r.span);
        if let Err(e) = delta.insert(Rule::new(from, read, write, mv, to, weight)) {
            diags.push(Diagnostic::error(r.span, e.to_string()));
        }
    }
    let name = header.name.map_or("", |(n, _)| n);
    let mut m = QuantumMachine::new(name, delta);
    if let Some(Some(p)) = start {
        m.start = p;
    }
    Some(Machine::Quantum(m))
}

/// Canonical text: header directives in fixed order, rules sorted by
/// `(from, read, write, move, to)`, weight 1 omitted, LF line endings.
pub fn serialize_machine(m: &Machine) -> String {
    let mut out = String::new();
    out.push_str(&format!("machine {}\nkind {}\n", m.name(), m.kind()));
    match m {
        Machine::Classical(c) => {
            out.push_str(&format!("states {}\n", c.states().join(" ")));
            if c.start() != StateId(0) {
                out.push_str(&format!("start {}\n", c.state_name(c.start())));
            }
            if !c.halt_states().is_empty() {
                let names: Vec<&str> = c.halt_states().iter().map(|&q| c.state_name(q)).collect();
                out.push_str(&format!("halt {}\n", names.join(" ")));
            }
            for r in c.table().iter() {
                out.push_str(&format!("rule {}{}\n", c.describe_rule(&r), weight_suffix(&r.weight)));
            }
        }
        Machine::Quantum(q) => {
            out.push_str(&format!("qubits {}\n", q.delta.qubits()));
            if q.start != ProcState::zeros(q.delta.qubits()) {
                out.push_str(&format!("start {}\n", q.start));
            }
            for r in q.delta.table().iter() {
                out.push_str(&format!(
                    "rule {} {} -> {} {} {}{}\n",
                    r.from,
                    r.read,
                    r.write,
                    r.mv,
                    r.to,
                    weight_suffix(&r.weight)
                ));
            }
        }
    }
    out
}

fn weight_suffix(w: &Scalar) -> String {
    if w.is_one() {
        String::new()
    } else {
        format!(" : {w}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "machine rm\nkind reversible\nstates q0\nrule q0 0 -> 0 R q0\n";

    fn errors(text: &str) -> Vec<Diagnostic> {
        parse_machine(text).unwrap_err()
    }

    #[test]
    fn minimal_document() {
        let doc = parse_machine(MINIMAL).unwrap();
        assert_eq!(doc.machine.name(), "rm");
        assert_eq!(doc.machine.kind(), Kind::Reversible);
        assert_eq!(doc.spans.rules, vec![Span { line: 4, column: 1 }]);
        assert_eq!(serialize_machine(&doc.machine), MINIMAL);
    }

    #[test]
    fn deterministic_rejects_fractional_weight() {
        let text = "machine m\nkind deterministic\nstates q0\nrule q0 0 -> 0 R q0 : 1/2\n";
        let d = errors(text);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].column), (4, 23));
        assert!(d[0].message.contains("weight 1"));
    }

    #[test]
    fn explicit_unit_weight_is_accepted() {
        let text = "machine m\nkind deterministic\nstates q0\nrule q0 0 -> 0 R q0 : 1\n";
        let doc = parse_machine(text).unwrap();
        assert_eq!(serialize_machine(&doc.machine), text.replace(" : 1", ""));
    }

    #[test]
    fn reports_positions() {
        let d = errors("machine m\nkind deterministic\nstates q0\nrule q0 0 -> 0 X q0\n");
        assert_eq!((d[0].line, d[0].column), (4, 16));
        assert!(d[0].message.contains("bad direction"));

        let d = errors("machine m\nkind deterministic\nstates q0\nrule q0 0 -> 0 R q9\n");
        assert_eq!((d[0].line, d[0].column), (4, 18));
        assert!(d[0].message.contains("unknown state"));

        let d = errors("machine m\nkind quantum\nqubits 1\nrule 0 0 -> 0 R 0 : 1/sqrt3\n");
        assert_eq!((d[0].line, d[0].column), (4, 23));
        assert!(d[0].message.contains("outside"));

        let d = errors("machine m\nkind deterministic\nstates q0\nrule q0 0 -> 0 R q0\n  rule q0 0 -> 0 R q0\n");
        assert_eq!((d[0].line, d[0].column), (5, 3));
        assert!(d[0].message.contains("duplicate rule"));
    }

    #[test]
    fn missing_directives() {
        let d = errors("");
        assert!(d.iter().any(|d| d.message.contains("machine")));
        let d = errors("machine m\nkind quantum\n");
        assert!(d[0].message.contains("qubits"));
        let d = errors("machine m\nkind probabilistic\nrule q0 0 -> 0 R q0\n");
        assert!(d[0].message.contains("states"));
    }

    #[test]
    fn crlf_and_comments() {
        let text = "# header\r\nmachine rm # name\r\nkind reversible\r\nstates q0\r\nrule q0 0 -> 0 R q0\r\n";
        let doc = parse_machine(text).unwrap();
        assert_eq!(serialize_machine(&doc.machine), MINIMAL);
    }

    #[test]
    fn quantum_document() {
        let text = "machine id\nkind quantum\nqubits 1\nrule 1 0 -> 0 N 1\nrule 0 1 -> 1 N 0\nrule 0 0 -> 0 N 0\nrule 1 1 -> 1 N 1\n";
        let doc = parse_machine(text).unwrap();
        assert_eq!(
            serialize_machine(&doc.machine),
            "machine id\nkind quantum\nqubits 1\nrule 0 0 -> 0 N 0\nrule 0 1 -> 1 N 0\nrule 1 0 -> 0 N 1\nrule 1 1 -> 1 N 1\n"
        );
        let d = errors("machine q\nkind quantum\nqubits 2\nrule 0 0 -> 0 N 00\n");
        assert_eq!((d[0].line, d[0].column), (4, 6));
    }

    #[test]
    fn probabilistic_weight_domain() {
        let d = errors("machine p\nkind probabilistic\nstates a\nrule a 0 -> 0 R a : 3/2\n");
        assert!(d[0].message.contains("[0, 1]"));
        let d = errors("machine p\nkind probabilistic\nstates a\nrule a 0 -> 0 R a : 1/2 i\n");
        assert!(d[0].message.contains("[0, 1]"));
        assert!(parse_machine("machine p\nkind probabilistic\nstates a\nrule a 0 -> 0 R a : 1/2*sqrt2\n").is_ok());
    }

    #[test]
    fn start_and_halt() {
        let text = "machine m\nkind deterministic\nstates a b\nstart b\nhalt a\nrule b 0 -> 1 R a\n";
        let doc = parse_machine(text).unwrap();
        let Machine::Classical(m) = &doc.machine else { panic!() };
        assert_eq!(m.start(), StateId(1));
        assert!(m.is_halt(StateId(0)));
        assert_eq!(serialize_machine(&doc.machine), text);
    }
}

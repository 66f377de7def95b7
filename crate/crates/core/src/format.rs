//! Circuit text format and RevLib `.real` interchange.
//!
//! ```text
//! # comment
//! lines 5
//! cnot 1 5 2
//! toffoli 1 2 5
//! ```

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{parse_err, Error, Result};

pub fn serialize(circuit: &Circuit) -> String {
    let mut out = format!("lines {}\n", circuit.lines());
    for g in circuit.gates() {
        out.push_str(g.kind.keyword());
        for &a in g.args.iter().filter(|&&a| a != 0) {
            let _ = write!(out, " {a}");
        }
        out.push('\n');
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut lines: Option<usize> = None;
    let mut gates = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        let Some(l) = lines else {
            if head != "lines" {
                return Err(parse_err(no, "expected `lines <count>` header"));
            }
            let count = words
                .next()
                .and_then(|w| w.parse::<usize>().ok())
                .filter(|c| (1..=crate::circuit::MAX_LINES).contains(c))
                .ok_or_else(|| parse_err(no, "line count must be an integer in 1..=64"))?;
            if words.next().is_some() {
                return Err(parse_err(no, "trailing tokens after line count"));
            }
            lines = Some(count);
            continue;
        };
        let kind = GateKind::from_keyword(head)
            .ok_or_else(|| parse_err(no, format!("unknown gate kind `{head}`")))?;
        let mut args = [0u8; 3];
        let mut count = 0;
        for w in words {
            if count == 3 {
                return Err(parse_err(no, "more than three line indices"));
            }
            let a: usize = w
                .parse()
                .map_err(|_| parse_err(no, format!("invalid line index `{w}`")))?;
            if a == 0 || a > l {
                return Err(parse_err(no, format!("line {a} out of range 1..={l}")));
            }
            args[count] = a as u8;
            count += 1;
        }
        if count < kind.arity() {
            return Err(parse_err(
                no,
                format!("{kind} needs {} line indices", kind.arity()),
            ));
        }
        let gate = Gate::new(kind, args);
        // validate in isolation so the error carries this line number
        Circuit::new(l, vec![gate]).map_err(|e| parse_err(no, e.to_string()))?;
        gates.push(gate);
    }
    let l = lines.ok_or_else(|| parse_err(1, "missing `lines <count>` header"))?;
    Circuit::new(l, gates)
}

/// Exports a RevLib `.real` document. Identity gates have no `.real` code and
/// are dropped; swaps are written as `f2`.
pub fn to_real(circuit: &Circuit) -> String {
    let l = circuit.lines();
    let vars: Vec<String> = (1..=l).map(|i| format!("x{i}")).collect();
    let joined = vars.join(" ");
    let mut out = String::new();
    let _ = writeln!(out, ".version 1.0");
    let _ = writeln!(out, ".numvars {l}");
    let _ = writeln!(out, ".variables {joined}");
    let _ = writeln!(out, ".inputs {joined}");
    let _ = writeln!(out, ".outputs {joined}");
    let _ = writeln!(out, ".constants {}", "-".repeat(l));
    let _ = writeln!(out, ".garbage {}", "-".repeat(l));
    let _ = writeln!(out, ".begin");
    for g in circuit.gates() {
        let code = match g.kind {
            GateKind::Identity => continue,
            GateKind::Not => "t1",
            GateKind::Cnot => "t2",
            GateKind::Swap => "f2",
            GateKind::Toffoli => "t3",
            GateKind::Fredkin => "f3",
        };
        out.push_str(code);
        for &a in g.operands() {
            let _ = write!(out, " {}", vars[a as usize - 1]);
        }
        out.push('\n');
    }
    let _ = writeln!(out, ".end");
    out
}

/// Imports a `.real` document restricted to `t1`, `t2`, `t3`, `f2` and `f3`.
pub fn from_real(text: &str) -> Result<Circuit> {
    let mut numvars: Option<usize> = None;
    let mut variables: Vec<String> = Vec::new();
    let mut in_body = false;
    let mut gates = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        if !in_body {
            match head {
                ".numvars" => {
                    numvars = Some(
                        words
                            .next()
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| parse_err(no, "invalid .numvars"))?,
                    )
                }
                ".variables" => variables = words.map(str::to_owned).collect(),
                ".begin" => in_body = true,
                _ if head.starts_with('.') => {}
                _ => return Err(parse_err(no, format!("unexpected `{head}` before .begin"))),
            }
            continue;
        }
        if head == ".end" {
            let l = numvars.ok_or_else(|| parse_err(no, "missing .numvars"))?;
            return Circuit::new(l, gates);
        }
        let (kind, width) = match head {
            "t1" => (GateKind::Not, 1),
            "t2" => (GateKind::Cnot, 2),
            "t3" => (GateKind::Toffoli, 3),
            "f2" => (GateKind::Swap, 2),
            "f3" => (GateKind::Fredkin, 3),
            other => return Err(parse_err(no, format!("unsupported gate code `{other}`"))),
        };
        let names: Vec<&str> = words.collect();
        if names.len() != width {
            return Err(parse_err(no, format!("{head} takes {width} variables")));
        }
        let mut args = [0u8; 3];
        for (slot, name) in names.iter().enumerate() {
            let idx = variables
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| parse_err(no, format!("unknown variable `{name}`")))?;
            args[slot] = (idx + 1) as u8;
        }
        let l = numvars.ok_or_else(|| parse_err(no, "missing .numvars"))?;
        let gate = Gate::new(kind, args);
        Circuit::new(l, vec![gate]).map_err(|e| parse_err(no, e.to_string()))?;
        gates.push(gate);
    }
    Err(Error::Parse {
        line: text.lines().count(),
        message: "missing .end".into(),
    })
}

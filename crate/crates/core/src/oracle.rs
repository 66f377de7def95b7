//! Truth-table oracles: the benchmark functions and user-supplied tables.
//!
//! Inputs and outputs are read as binary numerals with the first line most
//! significant, so row `r` of a table is the input whose bit string spells
//! `r` in binary.

use std::fmt::Write as _;

use crate::circuit::BitState;
use crate::error::{parse_err, Error, Result};

/// Largest input width for which a table is materialized.
pub const MAX_INPUTS: usize = 24;
/// Largest supported output width.
pub const MAX_OUTPUTS: usize = 32;

pub const BUILTINS: [&str; 8] = [
    "6sym", "9sym", "2of5", "4mod5", "5mod5", "xor5", "nthprime3", "nthprime4",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    name: String,
    inputs: usize,
    outputs: usize,
    table: Vec<u64>,
}

impl BooleanFunction {
    /// Builds a function from a complete table indexed by input numeral.
    pub fn from_table(
        name: impl Into<String>,
        inputs: usize,
        outputs: usize,
        table: Vec<u64>,
    ) -> Result<BooleanFunction> {
        if inputs == 0 || inputs > MAX_INPUTS {
            return Err(Error::TruthTable(format!(
                "input width {inputs} outside 1..={MAX_INPUTS}"
            )));
        }
        if outputs == 0 || outputs > MAX_OUTPUTS {
            return Err(Error::TruthTable(format!(
                "output width {outputs} outside 1..={MAX_OUTPUTS}"
            )));
        }
        if table.len() != 1 << inputs {
            return Err(Error::TruthTable(format!(
                "incomplete table: {} rows for {} inputs",
                table.len(),
                inputs
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v >> outputs != 0) {
            return Err(Error::TruthTable(format!(
                "value {v} does not fit in {outputs} output bits"
            )));
        }
        Ok(BooleanFunction {
            name: name.into(),
            inputs,
            outputs,
            table,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        inputs: usize,
        outputs: usize,
        f: impl Fn(u64) -> u64,
    ) -> Result<BooleanFunction> {
        if inputs == 0 || inputs > MAX_INPUTS {
            return Err(Error::TruthTable(format!(
                "input width {inputs} outside 1..={MAX_INPUTS}"
            )));
        }
        let table = (0..1u64 << inputs).map(f).collect();
        BooleanFunction::from_table(name, inputs, outputs, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn rows(&self) -> u64 {
        1 << self.inputs
    }

    /// Output numeral for input numeral `row`.
    #[inline]
    pub fn value(&self, row: u64) -> u64 {
        self.table[row as usize]
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn eval(&self, x: BitState) -> Result<BitState> {
        if x.len() != self.inputs {
            return Err(Error::WidthMismatch {
                expected: self.inputs,
                got: x.len(),
            });
        }
        BitState::from_value(self.value(x.value()), self.outputs)
    }

    /// Number of inputs mapped to 1 (single-output functions).
    pub fn positives(&self) -> u64 {
        self.table.iter().filter(|&&v| v == 1).count() as u64
    }
}

fn popcount_in(set: &'static [u32]) -> impl Fn(u64) -> u64 {
    move |x| set.contains(&x.count_ones()) as u64
}

fn nth_prime_table(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut k = 2u64;
    while primes.len() < count {
        if (2..k).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d)) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}

/// One of the benchmark functions in [`BUILTINS`] (case-insensitive).
pub fn builtin(name: &str) -> Result<BooleanFunction> {
    let key = name.to_ascii_lowercase();
    match key.as_str() {
        "xor5" => BooleanFunction::from_fn(key, 5, 1, |x| (x.count_ones() & 1) as u64),
        "2of5" => BooleanFunction::from_fn(key, 5, 1, popcount_in(&[2])),
        "6sym" => BooleanFunction::from_fn(key, 6, 1, popcount_in(&[2, 3, 4])),
        "9sym" => BooleanFunction::from_fn(key, 9, 1, popcount_in(&[3, 4, 5, 6])),
        "4mod5" => BooleanFunction::from_fn(key, 4, 1, |x| (x % 5 == 0) as u64),
        "5mod5" => BooleanFunction::from_fn(key, 5, 1, |x| (x % 5 == 0) as u64),
        "nthprime3" => BooleanFunction::from_table(key, 3, 5, nth_prime_table(8)),
        "nthprime4" => BooleanFunction::from_table(key, 4, 6, nth_prime_table(16)),
        _ => Err(Error::UnknownFunction {
            name: name.to_owned(),
            builtins: BUILTINS.join(", "),
        }),
    }
}

/// Parses a truth-table document:
///
/// ```text
/// inputs 2
/// outputs 1
/// 00 0
/// 01 1
/// 10 1
/// 11 0
/// ```
pub fn load_truth_table(name: &str, text: &str) -> Result<BooleanFunction> {
    let mut inputs: Option<usize> = None;
    let mut outputs: Option<usize> = None;
    let mut table: Vec<Option<u64>> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 2 {
            return Err(parse_err(no, "expected two fields"));
        }
        match words[0] {
            "inputs" | "outputs" => {
                let v: usize = words[1]
                    .parse()
                    .map_err(|_| parse_err(no, "invalid width"))?;
                if words[0] == "inputs" {
                    if v == 0 || v > MAX_INPUTS {
                        return Err(parse_err(no, format!("inputs must be in 1..={MAX_INPUTS}")));
                    }
                    inputs = Some(v);
                    table = vec![None; 1 << v];
                } else {
                    if v == 0 || v > MAX_OUTPUTS {
                        return Err(parse_err(no, format!("outputs must be in 1..={MAX_OUTPUTS}")));
                    }
                    outputs = Some(v);
                }
            }
            x => {
                let (Some(n), Some(m)) = (inputs, outputs) else {
                    return Err(parse_err(no, "row before `inputs`/`outputs` header"));
                };
                let y = words[1];
                if x.len() != n || y.len() != m {
                    return Err(parse_err(
                        no,
                        format!("row widths {}/{} do not match {n}/{m}", x.len(), y.len()),
                    ));
                }
                let xv = x
                    .parse::<BitState>()
                    .map_err(|_| parse_err(no, "invalid input bits"))?
                    .value();
                let yv = y
                    .parse::<BitState>()
                    .map_err(|_| parse_err(no, "invalid output bits"))?
                    .value();
                let slot = &mut table[xv as usize];
                if slot.is_some() {
                    return Err(parse_err(no, format!("duplicate row for input {x}")));
                }
                *slot = Some(yv);
            }
        }
    }
    let (Some(n), Some(m)) = (inputs, outputs) else {
        return Err(Error::TruthTable("missing `inputs`/`outputs` header".into()));
    };
    let filled = table.iter().filter(|v| v.is_some()).count();
    if filled != table.len() {
        return Err(Error::TruthTable(format!(
            "incomplete table: {filled} of {} rows",
            table.len()
        )));
    }
    BooleanFunction::from_table(name, n, m, table.into_iter().flatten().collect())
}

/// Canonical truth-table document (rows in input order).
pub fn dump_truth_table(f: &BooleanFunction) -> String {
    let mut out = format!("inputs {}\noutputs {}\n", f.inputs, f.outputs);
    for row in 0..f.rows() {
        let x = BitState::from_value(row, f.inputs).expect("width checked");
        let y = BitState::from_value(f.value(row), f.outputs).expect("width checked");
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

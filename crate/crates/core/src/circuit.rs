//! Reversible circuits over the six-gate library.
//!
//! Lines are numbered from 1. A [`BitState`] renders line 1 leftmost, and a
//! circuit's state is held as a `u64` with line `i` at bit `i - 1`, which caps
//! circuits at 64 lines.
//!
//! Control/target conventions: `CNOT a b` flips `b` when `a` is set,
//! `TOFFOLI a b c` flips `c` when `a` and `b` are set, `FREDKIN a b c` swaps
//! `b` and `c` when `a` is set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported line count.
pub const MAX_LINES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Identity,
    Not,
    Cnot,
    Swap,
    Toffoli,
    Fredkin,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::Identity,
        GateKind::Not,
        GateKind::Cnot,
        GateKind::Swap,
        GateKind::Toffoli,
        GateKind::Fredkin,
    ];

    /// Number of argument slots that carry meaning.
    pub const fn arity(self) -> usize {
        match self {
            GateKind::Identity => 0,
            GateKind::Not => 1,
            GateKind::Cnot | GateKind::Swap => 2,
            GateKind::Toffoli | GateKind::Fredkin => 3,
        }
    }

    /// Keyword used by the circuit text format.
    pub const fn keyword(self) -> &'static str {
        match self {
            GateKind::Identity => "id",
            GateKind::Not => "not",
            GateKind::Cnot => "cnot",
            GateKind::Swap => "swap",
            GateKind::Toffoli => "toffoli",
            GateKind::Fredkin => "fredkin",
        }
    }

    pub fn from_keyword(s: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub(crate) const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A gate: a kind plus three 1-based line indices.
///
/// Only the first `kind.arity()` indices are read by evaluation. A zero slot
/// means "unassigned" and is filled in when the gate is placed in a
/// [`Circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub args: [u8; 3],
}

impl Gate {
    pub const fn new(kind: GateKind, args: [u8; 3]) -> Gate {
        Gate { kind, args }
    }

    pub const fn identity() -> Gate {
        Gate::new(GateKind::Identity, [0, 0, 0])
    }

    pub const fn not(target: u8) -> Gate {
        Gate::new(GateKind::Not, [target, 0, 0])
    }

    pub const fn cnot(control: u8, target: u8) -> Gate {
        Gate::new(GateKind::Cnot, [control, target, 0])
    }

    pub const fn swap(a: u8, b: u8) -> Gate {
        Gate::new(GateKind::Swap, [a, b, 0])
    }

    pub const fn toffoli(c1: u8, c2: u8, target: u8) -> Gate {
        Gate::new(GateKind::Toffoli, [c1, c2, target])
    }

    pub const fn fredkin(control: u8, a: u8, b: u8) -> Gate {
        Gate::new(GateKind::Fredkin, [control, a, b])
    }

    /// The meaningful argument slots.
    pub fn operands(&self) -> &[u8] {
        &self.args[..self.kind.arity()]
    }

    /// Bit mask (bit `i - 1` for line `i`) of lines whose value the gate reads.
    pub fn read_mask(&self) -> u64 {
        self.operands()
            .iter()
            .fold(0, |m, &a| m | 1u64 << (a - 1))
    }

    /// Bit mask of lines the gate may change.
    pub fn write_mask(&self) -> u64 {
        let a = &self.args;
        match self.kind {
            GateKind::Identity => 0,
            GateKind::Not => bit(a[0]),
            GateKind::Cnot => bit(a[1]),
            GateKind::Swap => bit(a[0]) | bit(a[1]),
            GateKind::Toffoli => bit(a[2]),
            GateKind::Fredkin => bit(a[1]) | bit(a[2]),
        }
    }

    /// Checks the gate against a line count, without filling padding.
    pub fn validate(&self, lines: usize) -> Result<()> {
        if lines == 0 || lines > MAX_LINES {
            return Err(Error::UnsupportedLineCount(lines));
        }
        let arity = self.kind.arity();
        if arity > lines {
            return Err(Error::ArityTooLarge {
                kind: self.kind.keyword(),
                needed: arity,
                lines,
            });
        }
        let used = lines.min(3);
        for (slot, &a) in self.args.iter().enumerate() {
            let a = a as usize;
            if slot < used && a == 0 {
                return Err(Error::LineOutOfRange { index: 0, lines });
            }
            if a > lines || (slot >= used && a != 0) {
                return Err(Error::LineOutOfRange { index: a, lines });
            }
        }
        let mut seen = 0u64;
        for &a in self.args.iter().filter(|&&a| a != 0) {
            if seen & bit(a) != 0 {
                return Err(Error::RepeatedArgument(self.args));
            }
            seen |= bit(a);
        }
        Ok(())
    }

    /// Fills zero slots (up to `min(3, lines)` of them) with the smallest
    /// unused line indices.
    fn fill_padding(mut self, lines: usize) -> Gate {
        let used = lines.min(3);
        let mut taken: u64 = self
            .args
            .iter()
            .filter(|&&a| a != 0 && (a as usize) <= MAX_LINES)
            .fold(0, |m, &a| m | bit(a));
        for slot in 0..used {
            if self.args[slot] == 0 {
                if let Some(free) = (1..=lines as u8).find(|&i| taken & bit(i) == 0) {
                    self.args[slot] = free;
                    taken |= bit(free);
                }
            }
        }
        self
    }

    /// Applies the gate to a packed state (line `i` at bit `i - 1`).
    #[inline(always)]
    pub fn apply_bits(&self, s: u64) -> u64 {
        let [a, b, c] = self.args;
        match self.kind {
            GateKind::Identity => s,
            GateKind::Not => s ^ bit(a),
            GateKind::Cnot => s ^ (((s >> (a - 1)) & 1) << (b - 1)),
            GateKind::Swap => {
                let x = ((s >> (a - 1)) ^ (s >> (b - 1))) & 1;
                s ^ ((x << (a - 1)) | (x << (b - 1)))
            }
            GateKind::Toffoli => s ^ (((s >> (a - 1)) & (s >> (b - 1)) & 1) << (c - 1)),
            GateKind::Fredkin => {
                let x = ((s >> (b - 1)) ^ (s >> (c - 1))) & (s >> (a - 1)) & 1;
                s ^ ((x << (b - 1)) | (x << (c - 1)))
            }
        }
    }

    /// Applies the gate to bit-sliced lanes: `lanes[i - 1]` holds line `i`
    /// for 64 independent evaluations.
    #[inline(always)]
    pub fn apply_lanes(&self, lanes: &mut [u64]) {
        let [a, b, c] = self.args;
        let (a, b, c) = (a as usize, b as usize, c as usize);
        match self.kind {
            GateKind::Identity => {}
            GateKind::Not => lanes[a - 1] = !lanes[a - 1],
            GateKind::Cnot => lanes[b - 1] ^= lanes[a - 1],
            GateKind::Swap => lanes.swap(a - 1, b - 1),
            GateKind::Toffoli => lanes[c - 1] ^= lanes[a - 1] & lanes[b - 1],
            GateKind::Fredkin => {
                let x = (lanes[b - 1] ^ lanes[c - 1]) & lanes[a - 1];
                lanes[b - 1] ^= x;
                lanes[c - 1] ^= x;
            }
        }
    }
}

#[inline(always)]
const fn bit(line: u8) -> u64 {
    1u64 << (line - 1)
}

/// A vector of bits indexed by line, rendered with line 1 leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitState {
    bits: u64,
    len: usize,
}

impl BitState {
    pub fn zeros(len: usize) -> Result<BitState> {
        if len > MAX_LINES {
            return Err(Error::UnsupportedLineCount(len));
        }
        Ok(BitState { bits: 0, len })
    }

    /// Builds a state from packed bits (line `i` at bit `i - 1`); bits above
    /// `len` are cleared.
    pub fn from_bits(bits: u64, len: usize) -> Result<BitState> {
        if len > MAX_LINES {
            return Err(Error::UnsupportedLineCount(len));
        }
        Ok(BitState {
            bits: bits & low_mask(len),
            len,
        })
    }

    /// Builds a state from a binary numeral: line 1 carries the most
    /// significant bit.
    pub fn from_value(value: u64, len: usize) -> Result<BitState> {
        if len > MAX_LINES {
            return Err(Error::UnsupportedLineCount(len));
        }
        Ok(BitState {
            bits: value_to_bits(value, len),
            len,
        })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The state read as a binary numeral with line 1 most significant.
    pub fn value(&self) -> u64 {
        bits_to_value(self.bits, self.len)
    }

    /// Value of line `line` (1-based).
    pub fn get(&self, line: usize) -> bool {
        assert!(line >= 1 && line <= self.len, "line {line} out of range");
        (self.bits >> (line - 1)) & 1 == 1
    }

    pub fn set(&mut self, line: usize, value: bool) {
        assert!(line >= 1 && line <= self.len, "line {line} out of range");
        if value {
            self.bits |= 1 << (line - 1);
        } else {
            self.bits &= !(1 << (line - 1));
        }
    }
}

impl fmt::Display for BitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<BitState> {
        let s = s.trim();
        if s.len() > MAX_LINES {
            return Err(Error::UnsupportedLineCount(s.len()));
        }
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                other => return Err(Error::Parse {
                    line: 1,
                    message: format!("invalid bit character `{other}`"),
                }),
            }
        }
        Ok(BitState { bits, len: s.len() })
    }
}

#[inline]
pub(crate) const fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Binary numeral (first line most significant) to packed line bits.
#[inline]
pub(crate) fn value_to_bits(value: u64, len: usize) -> u64 {
    if len == 0 {
        0
    } else {
        (value & low_mask(len)).reverse_bits() >> (64 - len)
    }
}

#[inline]
pub(crate) fn bits_to_value(bits: u64, len: usize) -> u64 {
    value_to_bits(bits, len)
}

/// An ordered cascade of gates over `lines` lines.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    lines: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Validates the gates; zero argument slots are filled with the smallest
    /// unused lines.
    pub fn new(lines: usize, gates: Vec<Gate>) -> Result<Circuit> {
        if lines == 0 || lines > MAX_LINES {
            return Err(Error::UnsupportedLineCount(lines));
        }
        let gates = gates
            .into_iter()
            .map(|g| {
                let g = g.fill_padding(lines);
                g.validate(lines).map(|_| g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { lines, gates })
    }

    pub fn empty(lines: usize) -> Result<Circuit> {
        Circuit::new(lines, Vec::new())
    }

    /// Skips validation; callers guarantee every gate is valid for `lines`.
    pub(crate) fn from_valid(lines: usize, gates: Vec<Gate>) -> Circuit {
        debug_assert!(gates.iter().all(|g| g.validate(lines).is_ok()));
        Circuit { lines, gates }
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub(crate) fn gates_mut(&mut self) -> &mut [Gate] {
        &mut self.gates
    }

    /// Appends the gates of `other` (which must have the same line count).
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if other.lines != self.lines {
            return Err(Error::WidthMismatch {
                expected: self.lines,
                got: other.lines,
            });
        }
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        Ok(Circuit::from_valid(self.lines, gates))
    }

    /// Runs the circuit on packed bits.
    #[inline]
    pub fn run_bits(&self, mut s: u64) -> u64 {
        for g in &self.gates {
            s = g.apply_bits(s);
        }
        s
    }

    /// Runs the circuit on bit-sliced lanes (`lanes.len() >= self.lines()`).
    #[inline]
    pub fn run_lanes(&self, lanes: &mut [u64]) {
        let lanes = &mut lanes[..self.lines];
        for g in &self.gates {
            g.apply_lanes(lanes);
        }
    }
}

/// Applies a single gate to a state. Only the gate's operands are checked
/// against the state width.
pub fn apply_gate(gate: &Gate, state: BitState) -> Result<BitState> {
    let mut seen = 0u64;
    for &a in gate.operands() {
        if a == 0 || a as usize > state.len() {
            return Err(Error::LineOutOfRange {
                index: a as usize,
                lines: state.len(),
            });
        }
        if seen & bit(a) != 0 {
            return Err(Error::RepeatedArgument(gate.args));
        }
        seen |= bit(a);
    }
    Ok(BitState {
        bits: gate.apply_bits(state.bits),
        len: state.len,
    })
}

/// Runs `circuit` on `input`, applying gates first to last.
pub fn run(circuit: &Circuit, input: BitState) -> Result<BitState> {
    if input.len() != circuit.lines() {
        return Err(Error::WidthMismatch {
            expected: circuit.lines(),
            got: input.len(),
        });
    }
    Ok(BitState {
        bits: circuit.run_bits(input.bits),
        len: input.len,
    })
}

/// Pads `x` with zero ancilla lines up to `lines`.
pub fn embed_input(x: BitState, lines: usize) -> Result<BitState> {
    if x.len() > lines {
        return Err(Error::WidthMismatch {
            expected: lines,
            got: x.len(),
        });
    }
    BitState::from_bits(x.bits, lines)
}

/// The last `m` lines of `state`, in line order.
pub fn read_outputs(state: BitState, m: usize) -> Result<BitState> {
    if m > state.len() {
        return Err(Error::WidthMismatch {
            expected: state.len(),
            got: m,
        });
    }
    BitState::from_bits(state.bits >> (state.len() - m), m)
}

/// Drops identity gates and every gate that cannot influence the last `m`
/// lines (backward cone-of-influence slicing).
pub fn remove_unused_gates(circuit: &Circuit, m: usize) -> Result<Circuit> {
    let l = circuit.lines();
    if m == 0 || m > l {
        return Err(Error::WidthMismatch { expected: l, got: m });
    }
    let mut live = low_mask(l) & !low_mask(l - m);
    let mut kept = Vec::with_capacity(circuit.len());
    for g in circuit.gates().iter().rev() {
        let writes = g.write_mask();
        if writes & live != 0 {
            live = (live & !writes) | g.read_mask();
            kept.push(*g);
        }
    }
    kept.reverse();
    Ok(Circuit::from_valid(l, kept))
}

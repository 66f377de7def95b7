//! Bit-sliced evaluation of a circuit against a truth table.
//!
//! Each `u64` lane carries one line for 64 inputs at once, so a gate costs one
//! or two word operations per 64 inputs.

use crate::circuit::{Circuit, MAX_LINES};
use crate::error::{Error, Result};
use crate::oracle::BooleanFunction;

/// `PATTERNS[k]` has bit `j` set iff bit `k` of `j` is set.
const PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Precomputed expected-output lanes for evaluating circuits on `lines` lines
/// against `f`.
#[derive(Debug, Clone)]
pub struct Evaluator<'f> {
    f: &'f BooleanFunction,
    lines: usize,
    blocks: usize,
    /// `expected[block * m + k]`: lane of output `k` (first output line = 0).
    expected: Vec<u64>,
}

/// Mismatch lanes of a whole-table evaluation.
#[derive(Debug, Clone)]
pub struct Diffs {
    pub outputs: usize,
    /// `diff[block * m + k]`: bit `j` set where output `k` is wrong on row
    /// `64 * block + j`. Bits past the table end are cleared.
    pub diff: Vec<u64>,
}

impl Diffs {
    /// Whether any output is wrong on `row`.
    #[inline]
    pub fn any(&self, row: u64) -> bool {
        let m = self.outputs;
        let b = (row >> 6) as usize;
        let j = row & 63;
        self.diff[b * m..(b + 1) * m]
            .iter()
            .any(|w| (w >> j) & 1 == 1)
    }

    /// Weighted count of wrong outputs on `row`.
    #[inline]
    pub fn weighted(&self, row: u64, weights: &[u64]) -> u64 {
        let m = self.outputs;
        let b = (row >> 6) as usize;
        let j = row & 63;
        self.diff[b * m..(b + 1) * m]
            .iter()
            .zip(weights)
            .map(|(w, &wt)| ((w >> j) & 1) * wt)
            .sum()
    }

    /// Per-block "any output wrong" masks.
    pub fn any_masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.diff
            .chunks(self.outputs)
            .map(|c| c.iter().fold(0, |a, w| a | w))
    }
}

impl<'f> Evaluator<'f> {
    pub fn new(f: &'f BooleanFunction, lines: usize) -> Result<Evaluator<'f>> {
        if lines > MAX_LINES || lines < f.inputs().max(f.outputs()) {
            return Err(Error::WidthMismatch {
                expected: f.inputs().max(f.outputs()),
                got: lines,
            });
        }
        let m = f.outputs();
        let rows = f.rows();
        let blocks = rows.div_ceil(64) as usize;
        let mut expected = vec![0u64; blocks * m];
        for row in 0..rows {
            let y = f.value(row);
            let b = (row >> 6) as usize;
            for k in 0..m {
                expected[b * m + k] |= ((y >> (m - 1 - k)) & 1) << (row & 63);
            }
        }
        Ok(Evaluator {
            f,
            lines,
            blocks,
            expected,
        })
    }

    pub fn function(&self) -> &'f BooleanFunction {
        self.f
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    fn valid_mask(&self, block: usize) -> u64 {
        let rows = self.f.rows();
        let start = (block as u64) * 64;
        if rows - start >= 64 {
            u64::MAX
        } else {
            (1u64 << (rows - start)) - 1
        }
    }

    /// Input lanes for rows `64 * block ..`.
    fn load_block(&self, block: usize, lanes: &mut [u64; MAX_LINES]) {
        let n = self.f.inputs();
        let base = (block as u64) * 64;
        for i in 1..=n {
            let pos = n - i;
            lanes[i - 1] = if pos < 6 {
                PATTERNS[pos]
            } else if (base >> pos) & 1 == 1 {
                u64::MAX
            } else {
                0
            };
        }
        lanes[n..self.lines].fill(0);
    }

    /// Runs `circuit` on every input, calling `visit(block, outputs, expected,
    /// valid)` with the output lanes in output order.
    pub fn for_each_block(
        &self,
        circuit: &Circuit,
        mut visit: impl FnMut(usize, &[u64], &[u64], u64),
    ) {
        assert_eq!(circuit.lines(), self.lines, "evaluator built for another width");
        let m = self.f.outputs();
        let mut lanes = [0u64; MAX_LINES];
        for b in 0..self.blocks {
            self.load_block(b, &mut lanes);
            circuit.run_lanes(&mut lanes);
            let outs = &lanes[self.lines - m..self.lines];
            visit(b, outs, &self.expected[b * m..(b + 1) * m], self.valid_mask(b));
        }
    }

    /// Mismatch lanes over the whole table.
    pub fn diffs(&self, circuit: &Circuit) -> Diffs {
        let m = self.f.outputs();
        let mut diff = vec![0u64; self.blocks * m];
        self.for_each_block(circuit, |b, outs, exp, valid| {
            for k in 0..m {
                diff[b * m + k] = (outs[k] ^ exp[k]) & valid;
            }
        });
        Diffs { outputs: m, diff }
    }

    /// Number of inputs with at least one wrong output.
    pub fn mismatches(&self, circuit: &Circuit) -> u64 {
        let mut count = 0;
        self.for_each_block(circuit, |_, outs, exp, valid| {
            let any = outs
                .iter()
                .zip(exp)
                .fold(0, |a, (o, e)| a | (o ^ e));
            count += (any & valid).count_ones() as u64;
        });
        count
    }

    /// Whether every input maps to the same output value.
    pub fn is_constant(&self, circuit: &Circuit) -> bool {
        let mut first: Option<Vec<bool>> = None;
        let mut constant = true;
        self.for_each_block(circuit, |_, outs, _, valid| {
            if !constant {
                return;
            }
            let reference = first.get_or_insert_with(|| outs.iter().map(|o| o & 1 == 1).collect());
            for (o, &r) in outs.iter().zip(reference.iter()) {
                let want = if r { valid } else { 0 };
                if o & valid != want {
                    constant = false;
                }
            }
        });
        constant
    }

    /// Per-row "any output wrong" flags for an arbitrary list of rows,
    /// evaluated by gathering the rows into lanes.
    pub fn mismatch_rows(&self, circuit: &Circuit, rows: &[u64], out: &mut Vec<bool>) {
        assert_eq!(circuit.lines(), self.lines, "evaluator built for another width");
        let n = self.f.inputs();
        let m = self.f.outputs();
        out.clear();
        let mut lanes = [0u64; MAX_LINES];
        let mut exp = [0u64; 64];
        for chunk in rows.chunks(64) {
            lanes[..self.lines].fill(0);
            exp[..m].fill(0);
            for (j, &r) in chunk.iter().enumerate() {
                for i in 1..=n {
                    lanes[i - 1] |= ((r >> (n - i)) & 1) << j;
                }
                let y = self.f.value(r);
                for k in 0..m {
                    exp[k] |= ((y >> (m - 1 - k)) & 1) << j;
                }
            }
            circuit.run_lanes(&mut lanes);
            let any = (0..m).fold(0, |a, k| a | (lanes[self.lines - m + k] ^ exp[k]));
            out.extend((0..chunk.len()).map(|j| (any >> j) & 1 == 1));
        }
    }

    /// Weighted wrong-output counts for a list of rows.
    pub fn weighted_rows(&self, circuit: &Circuit, rows: &[u64], weights: &[u64], out: &mut Vec<u64>) {
        assert_eq!(circuit.lines(), self.lines, "evaluator built for another width");
        let n = self.f.inputs();
        let m = self.f.outputs();
        out.clear();
        let mut lanes = [0u64; MAX_LINES];
        let mut exp = [0u64; 64];
        for chunk in rows.chunks(64) {
            lanes[..self.lines].fill(0);
            exp[..m].fill(0);
            for (j, &r) in chunk.iter().enumerate() {
                for i in 1..=n {
                    lanes[i - 1] |= ((r >> (n - i)) & 1) << j;
                }
                let y = self.f.value(r);
                for k in 0..m {
                    exp[k] |= ((y >> (m - 1 - k)) & 1) << j;
                }
            }
            circuit.run_lanes(&mut lanes);
            out.extend((0..chunk.len()).map(|j| {
                (0..m)
                    .map(|k| (((lanes[self.lines - m + k] ^ exp[k]) >> j) & 1) * weights[k])
                    .sum::<u64>()
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::oracle::builtin;

    /// Scalar reference: embed, run, read, compare.
    fn scalar_mismatches(c: &Circuit, f: &BooleanFunction) -> u64 {
        let n = f.inputs();
        let m = f.outputs();
        let l = c.lines();
        (0..f.rows())
            .filter(|&r| {
                let s = c.run_bits(crate::circuit::value_to_bits(r, n));
                let y = crate::circuit::bits_to_value(s >> (l - m), m);
                y != f.value(r)
            })
            .count() as u64
    }

    #[test]
    fn lanes_agree_with_scalar_runs() {
        let f = builtin("9sym").unwrap();
        let c = Circuit::new(
            10,
            vec![
                Gate::toffoli(1, 2, 10),
                Gate::cnot(3, 10),
                Gate::fredkin(4, 5, 10),
                Gate::swap(6, 9),
                Gate::not(9),
                Gate::toffoli(9, 7, 10),
            ],
        )
        .unwrap();
        let ev = Evaluator::new(&f, 10).unwrap();
        assert_eq!(ev.mismatches(&c), scalar_mismatches(&c, &f));
        let rows: Vec<u64> = (0..f.rows()).rev().collect();
        let mut flags = Vec::new();
        ev.mismatch_rows(&c, &rows, &mut flags);
        assert_eq!(flags.iter().filter(|&&b| b).count() as u64, ev.mismatches(&c));
        let d = ev.diffs(&c);
        for (&r, &flag) in rows.iter().zip(&flags) {
            assert_eq!(d.any(r), flag);
        }
    }

    #[test]
    fn multi_output_lanes() {
        let f = builtin("nthprime3").unwrap();
        let c = Circuit::empty(8).unwrap();
        let ev = Evaluator::new(&f, 8).unwrap();
        assert_eq!(ev.mismatches(&c), 8);
        assert!(ev.is_constant(&c));
        let d = ev.diffs(&c);
        let ones: u64 = f.table().iter().map(|v| v.count_ones() as u64).sum();
        let w = [1u64; 5];
        assert_eq!((0..8).map(|r| d.weighted(r, &w)).sum::<u64>(), ones);
        let mut out = Vec::new();
        ev.weighted_rows(&c, &[0, 7], &w, &mut out);
        assert_eq!(out, vec![1, 3]);
    }

    #[test]
    fn narrow_evaluator_is_rejected() {
        let f = builtin("xor5").unwrap();
        assert!(Evaluator::new(&f, 4).is_err());
    }
}

//! Random gates, random circuits, and single-gate mutation.

use rand::Rng;

use crate::circuit::{Circuit, Gate, GateKind, MAX_LINES};
use crate::error::{Error, Result};
use crate::restriction::Restriction;

/// Uniform sampler over the admissible gates of a restriction.
///
/// The admissible argument triples of each kind are enumerated once, so a
/// draw picks a kind uniformly among the usable kinds and then a triple
/// uniformly among that kind's admissible triples. This is the distribution
/// that rejection sampling of triples converges to, without the retry loop.
#[derive(Debug, Clone)]
pub struct GateSampler {
    lines: usize,
    kinds: Vec<GateKind>,
    triples: [Vec<[u8; 3]>; 6],
}

impl GateSampler {
    pub fn new(lines: usize, restriction: &Restriction) -> Result<GateSampler> {
        if lines == 0 || lines > MAX_LINES {
            return Err(Error::UnsupportedLineCount(lines));
        }
        let all = ordered_tuples(lines);
        let mut triples: [Vec<[u8; 3]>; 6] = Default::default();
        let mut kinds = Vec::new();
        for kind in GateKind::ALL {
            if kind.arity() > lines || !restriction.kind_allowed(kind) {
                continue;
            }
            let admissible: Vec<[u8; 3]> = all
                .iter()
                .copied()
                .filter(|&args| restriction.admits(&Gate::new(kind, args)))
                .collect();
            if admissible.is_empty() {
                return Err(Error::UnsatisfiableRestriction(format!(
                    "{kind} under {restriction} on {lines} lines"
                )));
            }
            triples[kind.index()] = admissible;
            kinds.push(kind);
        }
        if kinds.is_empty() {
            return Err(Error::UnsatisfiableRestriction(format!(
                "every kind under {restriction}"
            )));
        }
        Ok(GateSampler {
            lines,
            kinds,
            triples,
        })
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn kinds(&self) -> &[GateKind] {
        &self.kinds
    }

    pub fn admissible(&self, kind: GateKind) -> &[[u8; 3]] {
        &self.triples[kind.index()]
    }

    pub fn random_gate(&self, rng: &mut impl Rng) -> Gate {
        let kind = self.kinds[rng.random_range(0..self.kinds.len())];
        let list = &self.triples[kind.index()];
        Gate::new(kind, list[rng.random_range(0..list.len())])
    }

    pub fn random_circuit(&self, gates: usize, rng: &mut impl Rng) -> Circuit {
        let gates = (0..gates).map(|_| self.random_gate(rng)).collect();
        Circuit::from_valid(self.lines, gates)
    }

    /// Replaces one uniformly chosen gate with a fresh admissible gate.
    pub fn mutate(&self, parent: &Circuit, rng: &mut impl Rng) -> Circuit {
        let mut child = parent.clone();
        if child.is_empty() {
            return child;
        }
        let p = rng.random_range(0..child.len());
        child.gates_mut()[p] = self.random_gate(rng);
        child
    }
}

/// All ordered tuples of `min(3, lines)` distinct lines, zero-padded.
fn ordered_tuples(lines: usize) -> Vec<[u8; 3]> {
    let l = lines as u8;
    let mut out = Vec::new();
    match lines {
        1 => out.push([1, 0, 0]),
        2 => {
            out.push([1, 2, 0]);
            out.push([2, 1, 0]);
        }
        _ => {
            for a in 1..=l {
                for b in 1..=l {
                    for c in 1..=l {
                        if a != b && b != c && a != c {
                            out.push([a, b, c]);
                        }
                    }
                }
            }
        }
    }
    out
}

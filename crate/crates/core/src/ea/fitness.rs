//! Sampled fitness estimation with the FAILS multiset.

use rand::seq::index;
use rand::Rng;

use crate::circuit::Circuit;
use crate::sim::Evaluator;

/// Bounded multiset of inputs (as row numerals) on which circuits failed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailsSet {
    items: Vec<u64>,
    capacity: usize,
}

impl FailsSet {
    pub fn empty(capacity: usize) -> FailsSet {
        FailsSet {
            items: Vec::new(),
            capacity,
        }
    }

    pub fn from_items(items: Vec<u64>, capacity: usize) -> FailsSet {
        assert!(items.len() <= capacity, "FAILS over capacity");
        FailsSet { items, capacity }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn multiplicity(&self, row: u64) -> usize {
        self.items.iter().filter(|&&r| r == row).count()
    }
}

/// Reservoir-sampled accumulation of next generation's FAILS.
pub struct FailsBuilder<R> {
    items: Vec<u64>,
    capacity: usize,
    seen: u64,
    rng: R,
}

impl<R: Rng> FailsBuilder<R> {
    pub fn new(capacity: usize, rng: R) -> FailsBuilder<R> {
        FailsBuilder {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            seen: 0,
            rng,
        }
    }

    pub fn push(&mut self, row: u64) {
        if self.items.len() < self.capacity {
            self.items.push(row);
        } else {
            let j = self.rng.random_range(0..=self.seen);
            if (j as usize) < self.capacity {
                self.items[j as usize] = row;
            }
        }
        self.seen += 1;
    }

    pub fn extend(&mut self, rows: &[u64]) {
        for &r in rows {
            self.push(r);
        }
    }

    pub fn finish(self) -> FailsSet {
        FailsSet {
            items: self.items,
            capacity: self.capacity,
        }
    }
}

/// `ceil(x)` tolerant of binary rounding just above an integer.
fn ceil_tolerant(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// How many of `b` batch inputs are drawn uniformly and how many come from
/// FAILS (before any shortfall top-up).
pub fn batch_split(batch: usize, ds: f64) -> (usize, usize) {
    let uniform = ceil_tolerant(ds * batch as f64).min(batch);
    let from_fails = ceil_tolerant((1.0 - ds) * batch as f64).min(batch - uniform);
    (uniform, from_fails)
}

/// Draws a batch of exactly `batch` rows: a FAILS portion without
/// replacement (multiplicities respected), topped up with uniform rows.
pub fn draw_batch(
    rows: u64,
    batch: usize,
    ds: f64,
    fails: &FailsSet,
    rng: &mut impl Rng,
    out: &mut Vec<u64>,
) {
    out.clear();
    let (_, want) = batch_split(batch, ds);
    let take = want.min(fails.len());
    if take > 0 {
        out.extend(
            index::sample(rng, fails.len(), take)
                .into_iter()
                .map(|i| fails.items[i]),
        );
    }
    while out.len() < batch {
        out.push(rng.random_range(0..rows));
    }
}

/// Output-error measure that fitness counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FitnessMode {
    /// One per input with any wrong output bit.
    #[default]
    AnyBit,
    /// Sum of per-bit weights of wrong output bits.
    Weighted(Vec<u64>),
}

/// Reusable scratch space for fitness estimation.
#[derive(Debug, Default)]
pub struct Scratch {
    batch: Vec<u64>,
    flags: Vec<bool>,
    weights: Vec<u64>,
}

/// Sampled estimate ê plus the batch inputs (with multiplicity) on which
/// the circuit failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    pub errors: u64,
    pub failed: Vec<u64>,
}

/// Evaluates `circuit` on a batch drawn per [`draw_batch`].
#[allow(clippy::too_many_arguments)]
pub fn estimate_fitness(
    circuit: &Circuit,
    ev: &Evaluator<'_>,
    fails: &FailsSet,
    batch: usize,
    ds: f64,
    mode: &FitnessMode,
    rng: &mut impl Rng,
    scratch: &mut Scratch,
) -> Estimate {
    let f = ev.function();
    draw_batch(f.rows(), batch, ds, fails, rng, &mut scratch.batch);
    evaluate_rows(circuit, ev, mode, scratch)
}

/// Every input exactly once.
pub fn estimate_exhaustive(
    circuit: &Circuit,
    ev: &Evaluator<'_>,
    mode: &FitnessMode,
    scratch: &mut Scratch,
) -> Estimate {
    scratch.batch.clear();
    scratch.batch.extend(0..ev.function().rows());
    evaluate_rows(circuit, ev, mode, scratch)
}

fn evaluate_rows(
    circuit: &Circuit,
    ev: &Evaluator<'_>,
    mode: &FitnessMode,
    scratch: &mut Scratch,
) -> Estimate {
    let f = ev.function();
    let rows = &scratch.batch;
    // whole-table lanes are cheaper than gathering when the table is small
    let use_table = (ev.blocks() as u64) <= (rows.len() as u64 * (f.inputs() + f.outputs()) as u64)
        / circuit.len().max(1) as u64;
    let mut failed = Vec::new();
    let errors = match mode {
        FitnessMode::AnyBit => {
            if use_table {
                let d = ev.diffs(circuit);
                for &r in rows {
                    if d.any(r) {
                        failed.push(r);
                    }
                }
            } else {
                ev.mismatch_rows(circuit, rows, &mut scratch.flags);
                failed.extend(rows.iter().zip(&scratch.flags).filter(|(_, &b)| b).map(|(&r, _)| r));
            }
            failed.len() as u64
        }
        FitnessMode::Weighted(w) => {
            let mut total = 0;
            if use_table {
                let d = ev.diffs(circuit);
                for &r in rows {
                    let e = d.weighted(r, w);
                    total += e;
                    if e > 0 {
                        failed.push(r);
                    }
                }
            } else {
                ev.weighted_rows(circuit, rows, w, &mut scratch.weights);
                for (&r, &e) in rows.iter().zip(&scratch.weights) {
                    total += e;
                    if e > 0 {
                        failed.push(r);
                    }
                }
            }
            total
        }
    };
    Estimate { errors, failed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::oracle::builtin;
    use crate::rng::{stream, Purpose};

    #[test]
    fn split_caps_the_rounding_clash() {
        assert_eq!(batch_split(32, 0.5), (16, 16));
        assert_eq!(batch_split(31, 0.5), (16, 15));
        assert_eq!(batch_split(10, 0.3), (3, 7));
        assert_eq!(batch_split(10, 1.0), (10, 0));
        assert_eq!(batch_split(10, 0.0), (0, 10));
    }

    #[test]
    fn batch_boundaries() {
        let mut rng = stream(1, Purpose::Evaluate, 0, 0);
        let mut out = Vec::new();
        let fails = FailsSet::from_items(vec![7; 20], 64);
        draw_batch(32, 10, 1.0, &fails, &mut rng, &mut out);
        assert_eq!(out.len(), 10);
        draw_batch(32, 10, 0.0, &fails, &mut rng, &mut out);
        assert_eq!(out, vec![7; 10]);
        // shortfall topped up uniformly
        let few = FailsSet::from_items(vec![7, 7, 7], 64);
        draw_batch(32, 10, 0.0, &few, &mut rng, &mut out);
        assert_eq!(out.len(), 10);
        assert_eq!(&out[..3], &[7, 7, 7]);
        draw_batch(32, 10, 0.0, &FailsSet::empty(64), &mut rng, &mut out);
        assert_eq!(out.len(), 10);
    }

    #[test]
    fn exact_and_always_wrong_circuits() {
        let f = builtin("xor5").unwrap();
        let ev = Evaluator::new(&f, 5).unwrap();
        let exact = Circuit::new(5, (1..=4).map(|i| Gate::cnot(i, 5)).collect()).unwrap();
        let wrong = Circuit::new(5, vec![Gate::not(5)]).unwrap().concat(&exact).unwrap();
        let mut scratch = Scratch::default();
        let mut rng = stream(2, Purpose::Evaluate, 0, 0);
        let fails = FailsSet::from_items(vec![1, 2, 3], 64);
        for batch in [1, 17, 32, 180] {
            let e = estimate_fitness(&exact, &ev, &fails, batch, 0.5, &FitnessMode::AnyBit, &mut rng, &mut scratch);
            assert_eq!(e.errors, 0);
            assert!(e.failed.is_empty());
            let e = estimate_fitness(&wrong, &ev, &fails, batch, 0.5, &FitnessMode::AnyBit, &mut rng, &mut scratch);
            assert_eq!(e.errors, batch as u64);
            assert_eq!(e.failed.len(), batch);
        }
    }

    #[test]
    fn table_and_gather_routes_agree() {
        let f = builtin("9sym").unwrap();
        let ev = Evaluator::new(&f, 10).unwrap();
        let c = Circuit::new(10, vec![Gate::toffoli(1, 2, 10), Gate::cnot(3, 10), Gate::fredkin(4, 10, 5)]).unwrap();
        let mut scratch = Scratch::default();
        let fails = FailsSet::empty(10);
        // a one-row batch gathers, a large batch uses the table
        let small = estimate_fitness(&c, &ev, &fails, 1, 1.0, &FitnessMode::AnyBit, &mut stream(5, Purpose::Evaluate, 0, 0), &mut scratch);
        let mut rows = Vec::new();
        draw_batch(512, 1, 1.0, &fails, &mut stream(5, Purpose::Evaluate, 0, 0), &mut rows);
        let mut flags = Vec::new();
        ev.mismatch_rows(&c, &rows, &mut flags);
        assert_eq!(small.errors, flags.iter().filter(|&&b| b).count() as u64);
        let full = estimate_exhaustive(&c, &ev, &FitnessMode::AnyBit, &mut scratch);
        assert_eq!(full.errors, ev.mismatches(&c));
    }

    #[test]
    fn reservoir_stays_bounded() {
        let mut b = FailsBuilder::new(8, stream(3, Purpose::Fails, 0, 0));
        for r in 0..1000 {
            b.push(r);
        }
        let set = b.finish();
        assert_eq!(set.len(), 8);
        assert!(set.items().iter().all(|&r| r < 1000));
    }

    #[test]
    fn weighted_mode_sums_bit_weights() {
        let f = builtin("nthprime3").unwrap();
        let ev = Evaluator::new(&f, 8).unwrap();
        let c = Circuit::empty(8).unwrap();
        let mut scratch = Scratch::default();
        let e = estimate_exhaustive(&c, &ev, &FitnessMode::Weighted(vec![16, 8, 4, 2, 1]), &mut scratch);
        assert_eq!(e.errors, f.table().iter().sum::<u64>());
        assert_eq!(e.failed.len(), 8);
    }
}

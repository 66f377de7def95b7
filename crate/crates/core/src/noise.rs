//! Monte-Carlo fault injection on decomposed circuits.
//!
//! Trials are bit-sliced: each qubit holds a `u64` lane whose bit `j` is its
//! value in trial `j`. Faults are placed by geometric skipping, so the cost
//! grows with the number of faults rather than the number of gate-trials.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{low_mask, value_to_bits, BitState, Circuit};
use crate::cost::{decompose, quantum_cost, CostTable, CouplingMap, Placement, PrimitiveCircuit, Step};
use crate::error::{Error, Result};
use crate::oracle::{BooleanFunction, MAX_INPUTS};
use crate::rng::{stream, Purpose};

/// Trials per RNG stream.
pub const TRIAL_BLOCK: u64 = 256;
/// Upper bound on `2^n * T`.
pub const MAX_SHOTS: u64 = 1 << 36;
pub const DEFAULT_TRIALS: u64 = 1024;

/// What a fault does to the lines of the faulty gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Replace each bit with a uniform random bit.
    #[default]
    Depolarizing,
    /// Flip each bit.
    BitFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub p_meas: f64,
    pub scale: f64,
    pub channel: Channel,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p1: 0.001,
            p2: 0.01,
            p_meas: 0.02,
            scale: 1.0,
            channel: Channel::Depolarizing,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> NoiseModel {
        NoiseModel {
            scale: 0.0,
            ..NoiseModel::default()
        }
    }

    pub fn scaled(&self, scale: f64) -> NoiseModel {
        NoiseModel { scale, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_meas", self.p_meas)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} must lie in [0, 1]")));
            }
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "noise scale {} must be finite and non-negative",
                self.scale
            )));
        }
        Ok(())
    }

    fn effective(&self, p: f64) -> f64 {
        (self.scale * p).min(1.0)
    }

    /// Effective `(p1, p2, p_meas)`.
    pub fn probabilities(&self) -> (f64, f64, f64) {
        (self.effective(self.p1), self.effective(self.p2), self.effective(self.p_meas))
    }

    pub fn is_noiseless(&self) -> bool {
        let (a, b, c) = self.probabilities();
        a == 0.0 && b == 0.0 && c == 0.0
    }
}

fn fault_bits(channel: Channel, old: u64, rng: &mut impl Rng) -> u64 {
    match channel {
        Channel::Depolarizing => rng.random(),
        Channel::BitFlip => !old,
    }
}

/// One noisy execution on packed qubit bits.
pub fn noisy_run_once(prim: &PrimitiveCircuit, input: BitState, noise: &NoiseModel, rng: &mut impl Rng) -> Result<BitState> {
    if input.len() != prim.qubits {
        return Err(Error::WidthMismatch {
            expected: prim.qubits,
            got: input.len(),
        });
    }
    let (p1, p2, pm) = noise.probabilities();
    let mut s = input.bits();
    for step in &prim.steps {
        s = step.apply_bits(s);
        let p = if step.is_two_qubit() {
            p2
        } else if step.is_one_qubit() {
            p1
        } else {
            continue;
        };
        if p > 0.0 && rng.random_bool(p) {
            let mask = step.qubit_mask();
            s = (s & !mask) | (fault_bits(noise.channel, s, rng) & mask);
        }
    }
    if pm > 0.0 {
        for q in 0..prim.qubits {
            if rng.random_bool(pm) {
                s ^= 1 << q;
            }
        }
    }
    BitState::from_bits(s, prim.qubits)
}

/// Independent Bernoulli(p) bits, 64 at a time, by geometric skipping.
struct Bernoulli {
    p: f64,
    log_q: f64,
    /// Failures left before the next success.
    skip: u64,
    primed: bool,
}

impl Bernoulli {
    fn new(p: f64) -> Bernoulli {
        Bernoulli {
            p,
            log_q: (-p).ln_1p(),
            skip: 0,
            primed: false,
        }
    }

    fn draw_skip(&self, rng: &mut impl Rng) -> u64 {
        if self.p >= 1.0 {
            return 0;
        }
        // U in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let k = (u.ln() / self.log_q).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    fn mask(&mut self, rng: &mut impl Rng) -> u64 {
        if self.p <= 0.0 {
            return 0;
        }
        if self.p >= 1.0 {
            return u64::MAX;
        }
        if !self.primed {
            self.skip = self.draw_skip(rng);
            self.primed = true;
        }
        let mut mask = 0;
        let mut pos = 0u64;
        loop {
            if self.skip >= 64 - pos {
                self.skip -= 64 - pos;
                return mask;
            }
            pos += self.skip;
            mask |= 1 << pos;
            pos += 1;
            self.skip = self.draw_skip(rng);
            if pos == 64 {
                return mask;
            }
        }
    }
}

/// Per-input failure counts and their aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyEstimate {
    pub trials: u64,
    /// Trials with a wrong read-out, per input row.
    pub failures: Vec<u64>,
    pub error_rate: f64,
    pub stderr: f64,
}

impl NoisyEstimate {
    fn from_failures(failures: Vec<u64>, trials: u64) -> NoisyEstimate {
        let rows = failures.len() as f64;
        let total: u64 = failures.iter().sum();
        let t = trials as f64;
        let var: f64 = failures
            .iter()
            .map(|&k| {
                let p = k as f64 / t;
                p * (1.0 - p) / t
            })
            .sum();
        NoisyEstimate {
            trials,
            error_rate: total as f64 / (rows * t),
            stderr: var.sqrt() / rows,
            failures,
        }
    }

    pub fn success_frequency(&self, row: u64) -> f64 {
        1.0 - self.failures[row as usize] as f64 / self.trials as f64
    }
}

/// A circuit lowered for noisy evaluation against one function.
#[derive(Debug, Clone)]
pub struct NoisyTarget<'f> {
    f: &'f BooleanFunction,
    prim: PrimitiveCircuit,
    /// Qubit holding each input line.
    input_qubits: Vec<u8>,
    /// Qubit holding each output, first output first.
    output_qubits: Vec<u8>,
}

impl<'f> NoisyTarget<'f> {
    pub fn new(circuit: &Circuit, f: &'f BooleanFunction, coupling: &CouplingMap, placement: &Placement) -> Result<NoisyTarget<'f>> {
        let (n, m, l) = (f.inputs(), f.outputs(), circuit.lines());
        if l < n.max(m) {
            return Err(Error::WidthMismatch {
                expected: n.max(m),
                got: l,
            });
        }
        if n > MAX_INPUTS {
            return Err(Error::ResourceGuard(format!("noisy evaluation limited to {MAX_INPUTS} inputs")));
        }
        let prim = decompose(circuit, coupling, placement)?;
        Ok(NoisyTarget {
            f,
            prim,
            input_qubits: (1..=n as u8).map(|i| placement.qubit(i)).collect(),
            output_qubits: ((l - m + 1) as u8..=l as u8).map(|i| placement.qubit(i)).collect(),
        })
    }

    pub fn primitive(&self) -> &PrimitiveCircuit {
        &self.prim
    }

    fn initial_qubits(&self, row: u64) -> u64 {
        let line_bits = value_to_bits(row, self.f.inputs());
        self.input_qubits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &q)| acc | (((line_bits >> i) & 1) << (q - 1)))
    }

    fn read(&self, qubits: u64) -> u64 {
        // first output is the most significant bit
        self.output_qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((qubits >> (q - 1)) & 1))
    }

    fn noiseless_failures(&self, trials: u64) -> Vec<u64> {
        (0..self.f.rows())
            .map(|x| {
                let out = self.read(self.prim.run_bits(self.initial_qubits(x)));
                if out == self.f.value(x) {
                    0
                } else {
                    trials
                }
            })
            .collect()
    }

    /// Failing trials among `count` trials starting at block `block`.
    fn block_failures(&self, row: u64, block: u64, count: u64, noise: &NoiseModel, seed: u64) -> u64 {
        let (p1, p2, pm) = noise.probabilities();
        let mut rng = stream(seed, Purpose::Noise, row, block);
        let mut one = Bernoulli::new(p1);
        let mut two = Bernoulli::new(p2);
        let mut meas = Bernoulli::new(pm);
        let init = self.initial_qubits(row);
        let expected = self.f.value(row);
        let m = self.output_qubits.len();
        let mut lanes = [0u64; 64];
        let mut failed = 0;
        let mut done = 0;
        while done < count {
            let width = (count - done).min(64) as usize;
            let valid = low_mask(width);
            for (q, lane) in lanes.iter_mut().enumerate().take(self.prim.qubits) {
                *lane = if (init >> q) & 1 == 1 { u64::MAX } else { 0 };
            }
            for step in &self.prim.steps {
                apply_lanes(step, &mut lanes);
                let bern = if step.is_two_qubit() {
                    &mut two
                } else if step.is_one_qubit() {
                    &mut one
                } else {
                    continue;
                };
                let fault = bern.mask(&mut rng) & valid;
                if fault == 0 {
                    continue;
                }
                let mut qs = step.qubit_mask();
                while qs != 0 {
                    let q = qs.trailing_zeros() as usize;
                    qs &= qs - 1;
                    let old = lanes[q];
                    lanes[q] = (old & !fault) | (fault_bits(noise.channel, old, &mut rng) & fault);
                }
            }
            let mut wrong = 0;
            for (k, &q) in self.output_qubits.iter().enumerate() {
                let flips = meas.mask(&mut rng);
                let want = if (expected >> (m - 1 - k)) & 1 == 1 { u64::MAX } else { 0 };
                wrong |= lanes[q as usize - 1] ^ flips ^ want;
            }
            failed += (wrong & valid).count_ones() as u64;
            done += width as u64;
        }
        failed
    }

    fn check(&self, noise: &NoiseModel, trials: u64) -> Result<()> {
        noise.validate()?;
        if trials == 0 {
            return Err(Error::InvalidParams("at least one trial is required".into()));
        }
        let rows = self.f.rows();
        if rows.saturating_mul(trials) > MAX_SHOTS {
            return Err(Error::ResourceGuard(format!("2^n * T exceeds {MAX_SHOTS}")));
        }
        Ok(())
    }

    /// `T` trials per input.
    pub fn estimate(&self, noise: &NoiseModel, trials: u64, seed: u64) -> Result<NoisyEstimate> {
        self.check(noise, trials)?;
        if noise.is_noiseless() {
            return Ok(NoisyEstimate::from_failures(self.noiseless_failures(trials), trials));
        }
        self.simulate(noise, trials, seed)
    }

    /// Like [`estimate`](Self::estimate) but always runs the trial-by-trial
    /// simulation, even for a noiseless model.
    pub fn simulate(&self, noise: &NoiseModel, trials: u64, seed: u64) -> Result<NoisyEstimate> {
        self.check(noise, trials)?;
        let blocks = trials.div_ceil(TRIAL_BLOCK);
        let failures = (0..self.f.rows())
            .into_par_iter()
            .map(|x| {
                (0..blocks)
                    .map(|b| {
                        let count = (trials - b * TRIAL_BLOCK).min(TRIAL_BLOCK);
                        self.block_failures(x, b, count, noise, seed)
                    })
                    .sum()
            })
            .collect();
        Ok(NoisyEstimate::from_failures(failures, trials))
    }
}

fn apply_lanes(step: &Step, lanes: &mut [u64; 64]) {
    use crate::cost::PrimKind;
    match *step {
        Step::Gate {
            classical: false, ..
        } => {}
        Step::Gate {
            kind: PrimKind::X,
            qubits: [a, _],
            ..
        } => lanes[a as usize - 1] = !lanes[a as usize - 1],
        Step::Gate {
            kind: PrimKind::Cx,
            qubits: [c, t],
            ..
        } => lanes[t as usize - 1] ^= lanes[c as usize - 1],
        Step::Gate { .. } => {}
        Step::Toffoli {
            controls: [a, b],
            target,
        } => lanes[target as usize - 1] ^= lanes[a as usize - 1] & lanes[b as usize - 1],
    }
}

/// Decomposes `circuit` with the identity placement and estimates its noisy
/// error rate over every input.
pub fn noisy_error_rate(
    circuit: &Circuit,
    f: &BooleanFunction,
    noise: &NoiseModel,
    trials: u64,
    coupling: &CouplingMap,
    seed: u64,
) -> Result<NoisyEstimate> {
    NoisyTarget::new(circuit, f, coupling, &Placement::identity(circuit.lines()))?.estimate(noise, trials, seed)
}

/// One `(circuit, λ)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub circuit_id: String,
    pub qc: u64,
    pub cc: u64,
    pub lambda: f64,
    pub trials: u64,
    pub error_rate: f64,
    pub stderr: f64,
}

pub const SWEEP_HEADER: &str = "circuit_id,qc,cc,lambda,trials,error_rate,stderr";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.circuit_id, self.qc, self.cc, self.lambda, self.trials, self.error_rate, self.stderr
        )
    }
}

/// Estimates every circuit at every scale, in circuit-major order. Every
/// cell uses the same `seed`.
#[allow(clippy::too_many_arguments)]
pub fn noise_sweep(
    circuits: &[(String, Circuit)],
    f: &BooleanFunction,
    noise: &NoiseModel,
    scales: &[f64],
    trials: u64,
    coupling: &CouplingMap,
    costs: &CostTable,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if circuits.is_empty() || scales.is_empty() {
        return Err(Error::InvalidParams("a sweep needs circuits and scales".into()));
    }
    let mut rows = Vec::with_capacity(circuits.len() * scales.len());
    for (id, c) in circuits {
        let target = NoisyTarget::new(c, f, coupling, &Placement::identity(c.lines()))?;
        let qc = quantum_cost(c, costs);
        let cc = target.primitive().circuit_cost();
        for &lambda in scales {
            let e = target.estimate(&noise.scaled(lambda), trials, seed)?;
            rows.push(SweepRow {
                circuit_id: id.clone(),
                qc,
                cc,
                lambda,
                trials,
                error_rate: e.error_rate,
                stderr: e.stderr,
            });
        }
    }
    Ok(rows)
}

/// Where the cheaper of two circuits stops beating the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// Smallest scale at which the cheaper circuit has the lower error.
    pub cheap_wins_from: Option<f64>,
    /// Largest scale below that at which the expensive circuit is at least
    /// as accurate.
    pub expensive_wins_below: Option<f64>,
}

/// Locates the crossover between `cheap` and `expensive` rows, matched by λ.
/// The cheaper circuit must win on every scale from `cheap_wins_from` up.
pub fn crossover(cheap: &[SweepRow], expensive: &[SweepRow]) -> Crossover {
    let mut pairs: Vec<(f64, bool)> = cheap
        .iter()
        .filter_map(|a| {
            expensive
                .iter()
                .find(|b| b.lambda == a.lambda)
                .map(|b| (a.lambda, a.error_rate < b.error_rate))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut result = Crossover {
        cheap_wins_from: None,
        expensive_wins_below: None,
    };
    for &(lambda, cheap_wins) in pairs.iter().rev() {
        if cheap_wins && result.expensive_wins_below.is_none() {
            result.cheap_wins_from = Some(lambda);
        } else if !cheap_wins {
            result.expensive_wins_below = Some(lambda);
            break;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::metrics::exhaustive_report;
    use crate::oracle::builtin;

    fn not_only(q: f64) -> NoiseModel {
        NoiseModel {
            p1: q,
            p2: 0.0,
            p_meas: 0.0,
            scale: 1.0,
            channel: Channel::Depolarizing,
        }
    }

    #[test]
    fn bernoulli_masks_have_the_right_density() {
        let mut rng = stream(1, Purpose::Noise, 0, 0);
        for p in [0.0, 0.001, 0.05, 0.3, 0.9, 1.0] {
            let mut b = Bernoulli::new(p);
            let ones: u64 = (0..4000).map(|_| b.mask(&mut rng).count_ones() as u64).sum();
            let n = 4000.0 * 64.0;
            let sigma = (n * p * (1.0 - p)).sqrt().max(1e-9);
            assert!((ones as f64 - n * p).abs() <= 4.0 * sigma + 1e-9, "p={p} ones={ones}");
        }
    }

    #[test]
    fn noiseless_scale_matches_exhaustive_error() {
        let f = builtin("5mod5").unwrap();
        let empty = Circuit::empty(6).unwrap();
        let e = noisy_error_rate(&empty, &f, &NoiseModel::noiseless(), 1024, &CouplingMap::melbourne(), 0).unwrap();
        assert_eq!(e.error_rate, 0.21875);
        assert_eq!(e.stderr, 0.0);
        let c = Circuit::new(6, vec![Gate::toffoli(1, 2, 6), Gate::cnot(3, 6), Gate::fredkin(4, 5, 6)]).unwrap();
        let r = exhaustive_report(&c, &f).unwrap();
        let e = noisy_error_rate(&c, &f, &NoiseModel::noiseless(), 100, &CouplingMap::melbourne(), 0).unwrap();
        assert_eq!(e.error_rate, *r.err().numer() as f64 / *r.err().denom() as f64);
    }

    #[test]
    fn faulty_not_is_right_with_probability_one_minus_half_q() {
        let f = BooleanFunction::from_fn("not", 1, 1, |x| x ^ 1).unwrap();
        let c = Circuit::new(1, vec![Gate::not(1)]).unwrap();
        let map = CouplingMap::path(1).unwrap();
        let q = 0.3;
        let t = 100_000;
        let e = noisy_error_rate(&c, &f, &not_only(q), t, &map, 7).unwrap();
        let want = q / 2.0;
        let sigma = (want * (1.0 - want) / t as f64).sqrt();
        assert!((e.error_rate - want).abs() < 4.0 * sigma, "{} vs {want}", e.error_rate);
        // scalar path agrees statistically
        let prim = decompose(&c, &map, &Placement::identity(1)).unwrap();
        let mut rng = stream(9, Purpose::Noise, 0, 0);
        let wrong = (0..t)
            .filter(|&i| {
                let x = i % 2;
                let out = noisy_run_once(&prim, BitState::from_bits(x, 1).unwrap(), &not_only(q), &mut rng).unwrap();
                out.bits() == x
            })
            .count();
        assert!((wrong as f64 / t as f64 - want).abs() < 4.0 * sigma);
    }

    #[test]
    fn certain_readout_flip_inverts_every_answer() {
        let f = builtin("5mod5").unwrap();
        let empty = Circuit::empty(6).unwrap();
        let noise = NoiseModel {
            p1: 0.0,
            p2: 0.0,
            p_meas: 1.0,
            scale: 1.0,
            channel: Channel::Depolarizing,
        };
        let e = noisy_error_rate(&empty, &f, &noise, 64, &CouplingMap::melbourne(), 0).unwrap();
        assert_eq!(e.error_rate, 1.0 - 0.21875);
    }

    #[test]
    fn saturated_deep_circuit_approaches_one_half() {
        let f = builtin("2of5").unwrap();
        let gates = (0..20).map(|i| Gate::toffoli(1 + i % 5, 1 + (i + 1) % 5, 6)).collect();
        let c = Circuit::new(6, gates).unwrap();
        let e = noisy_error_rate(&c, &f, &NoiseModel::default().scaled(1000.0), 512, &CouplingMap::melbourne(), 3).unwrap();
        assert!((e.error_rate - 0.5).abs() < 4.0 * e.stderr.max(0.0035), "{}", e.error_rate);
    }

    #[test]
    fn same_seed_same_estimate_and_identical_primitives_share_columns() {
        let f = builtin("xor5").unwrap();
        let a = Circuit::new(5, (1..=4).map(|i| Gate::cnot(i, 5)).collect()).unwrap();
        let mut g = a.gates().to_vec();
        g.insert(0, Gate::identity());
        let b = Circuit::new(5, g).unwrap();
        let map = CouplingMap::melbourne();
        let rows = noise_sweep(
            &[("a".into(), a), ("b".into(), b)],
            &f,
            &NoiseModel::default(),
            &[0.0, 1.0, 5.0],
            300,
            &map,
            &CostTable::default(),
            11,
        )
        .unwrap();
        assert_eq!(rows.len(), 6);
        for k in 0..3 {
            assert_eq!(rows[k].error_rate, rows[k + 3].error_rate);
        }
        assert_eq!(rows[0].error_rate, 0.0);
        assert!(rows[2].error_rate > rows[1].error_rate);
    }

    #[test]
    fn padding_with_cancelling_pairs_does_not_help() {
        let f = builtin("xor5").unwrap();
        let base: Vec<Gate> = (1..=4).map(|i| Gate::cnot(i, 5)).collect();
        let mut padded = base.clone();
        for _ in 0..4 {
            padded.push(Gate::cnot(2, 3));
            padded.push(Gate::cnot(2, 3));
        }
        let map = CouplingMap::melbourne();
        let n = NoiseModel::default().scaled(3.0);
        let a = noisy_error_rate(&Circuit::new(5, base).unwrap(), &f, &n, 2048, &map, 1).unwrap();
        let b = noisy_error_rate(&Circuit::new(5, padded).unwrap(), &f, &n, 2048, &map, 1).unwrap();
        assert!(b.error_rate + 4.0 * (a.stderr + b.stderr) >= a.error_rate);
    }

    #[test]
    fn resource_guard_and_validation() {
        let f = builtin("xor5").unwrap();
        let c = Circuit::empty(5).unwrap();
        let map = CouplingMap::melbourne();
        assert!(matches!(
            noisy_error_rate(&c, &f, &NoiseModel::default(), MAX_SHOTS, &map, 0),
            Err(Error::ResourceGuard(_))
        ));
        assert!(noisy_error_rate(&c, &f, &NoiseModel::default().scaled(-1.0), 8, &map, 0).is_err());
        assert!(noisy_error_rate(&c, &f, &NoiseModel::default(), 0, &map, 0).is_err());
    }

    #[test]
    fn crossover_brackets() {
        let row = |id: &str, lambda: f64, e: f64| SweepRow {
            circuit_id: id.into(),
            qc: 0,
            cc: 0,
            lambda,
            trials: 1,
            error_rate: e,
            stderr: 0.0,
        };
        let cheap = [row("a", 0.01, 0.22), row("a", 0.1, 0.23), row("a", 1.0, 0.25)];
        let exp = [row("b", 0.01, 0.02), row("b", 0.1, 0.3), row("b", 1.0, 0.45)];
        let x = crossover(&cheap, &exp);
        assert_eq!(x.cheap_wins_from, Some(0.1));
        assert_eq!(x.expensive_wins_below, Some(0.01));
        let none = crossover(&exp, &cheap);
        assert_eq!(none.cheap_wins_from, None);
    }
}

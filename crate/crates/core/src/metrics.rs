//! Error statistics of a circuit against a target function.
//!
//! Exhaustive statistics are exact rationals over integer counts; only
//! sampled or noisy estimates use floating point.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::oracle::{BooleanFunction, MAX_INPUTS};
use crate::sim::Evaluator;

pub type Rational = Ratio<u64>;

/// Single-output confusion counts (positive = output 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn err(&self) -> Rational {
        Ratio::new(self.fp + self.fn_, self.total().max(1))
    }

    /// False-negative rate; `None` when there are no positives.
    pub fn fn_rate(&self) -> Option<Rational> {
        (self.positives() > 0).then(|| Ratio::new(self.fn_, self.positives()))
    }

    /// False-positive rate; `None` when there are no negatives.
    pub fn fp_rate(&self) -> Option<Rational> {
        (self.negatives() > 0).then(|| Ratio::new(self.fp, self.negatives()))
    }

    /// `2 tp / (2 tp + fp + fn)`; `None` when the denominator vanishes.
    pub fn f1(&self) -> Option<Rational> {
        let den = 2 * self.tp + self.fp + self.fn_;
        (den > 0).then(|| Ratio::new(2 * self.tp, den))
    }
}

/// Exact error statistics over every input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorReport {
    /// `2^n`.
    pub inputs: u64,
    /// Inputs with at least one wrong output bit.
    pub mismatches: u64,
    /// Wrong-input count per output bit, first output line first.
    pub bit_errors: Vec<u64>,
    /// Present for single-output functions.
    pub confusion: Option<ConfusionCounts>,
}

impl ErrorReport {
    pub fn err(&self) -> Rational {
        Ratio::new(self.mismatches, self.inputs)
    }

    pub fn fn_rate(&self) -> Option<Rational> {
        self.confusion.and_then(|c| c.fn_rate())
    }

    pub fn fp_rate(&self) -> Option<Rational> {
        self.confusion.and_then(|c| c.fp_rate())
    }

    pub fn f1(&self) -> Option<Rational> {
        self.confusion.and_then(|c| c.f1())
    }

    pub fn is_exact(&self) -> bool {
        self.mismatches == 0
    }

    pub fn to_json(&self) -> ErrorReportJson {
        let dec = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
        ErrorReportJson {
            inputs: self.inputs,
            mismatches: self.mismatches,
            tp: self.confusion.map(|c| c.tp),
            fp: self.confusion.map(|c| c.fp),
            fn_: self.confusion.map(|c| c.fn_),
            tn: self.confusion.map(|c| c.tn),
            bit_errors: self.bit_errors.clone(),
            err: dec(self.err()),
            fn_rate: self.fn_rate().map(dec),
            fp_rate: self.fp_rate().map(dec),
            f1: self.f1().map(dec),
        }
    }
}

/// Flat JSON rendering of an [`ErrorReport`]; counts are authoritative and
/// undefined rates are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReportJson {
    pub inputs: u64,
    pub mismatches: u64,
    pub tp: Option<u64>,
    pub fp: Option<u64>,
    #[serde(rename = "fn")]
    pub fn_: Option<u64>,
    pub tn: Option<u64>,
    pub bit_errors: Vec<u64>,
    pub err: f64,
    pub fn_rate: Option<f64>,
    pub fp_rate: Option<f64>,
    pub f1: Option<f64>,
}

fn evaluator<'f>(circuit: &Circuit, f: &'f BooleanFunction) -> Result<Evaluator<'f>> {
    if f.inputs() > MAX_INPUTS {
        return Err(Error::ResourceGuard(format!(
            "exhaustive evaluation limited to {MAX_INPUTS} inputs"
        )));
    }
    Evaluator::new(f, circuit.lines())
}

/// Evaluates `circuit` on every embedded input of `f`.
pub fn exhaustive_report(circuit: &Circuit, f: &BooleanFunction) -> Result<ErrorReport> {
    let ev = evaluator(circuit, f)?;
    Ok(report_with(&ev, circuit))
}

pub(crate) fn report_with(ev: &Evaluator<'_>, circuit: &Circuit) -> ErrorReport {
    let m = ev.function().outputs();
    let mut mismatches = 0u64;
    let mut bit_errors = vec![0u64; m];
    let mut cc = ConfusionCounts::default();
    ev.for_each_block(circuit, |_, outs, exp, valid| {
        let mut any = 0;
        for k in 0..m {
            let d = (outs[k] ^ exp[k]) & valid;
            bit_errors[k] += d.count_ones() as u64;
            any |= d;
        }
        mismatches += any.count_ones() as u64;
        if m == 1 {
            let (o, e) = (outs[0], exp[0]);
            cc.tp += (o & e & valid).count_ones() as u64;
            cc.fp += (o & !e & valid).count_ones() as u64;
            cc.fn_ += (!o & e & valid).count_ones() as u64;
            cc.tn += (!o & !e & valid).count_ones() as u64;
        }
    });
    ErrorReport {
        inputs: ev.function().rows(),
        mismatches,
        bit_errors,
        confusion: (m == 1).then_some(cc),
    }
}

/// Bit order used to assign exponential weights to output bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Endianness {
    /// The first output line is the most significant bit.
    #[default]
    Big,
    Little,
}

/// Uniform per-bit weights.
pub fn uniform_weights(m: usize) -> Vec<u64> {
    vec![1; m]
}

/// `2^i` weight for the output bit of significance `i`.
pub fn exponential_weights(m: usize, order: Endianness) -> Vec<u64> {
    (0..m)
        .map(|k| match order {
            Endianness::Big => 1u64 << (m - 1 - k),
            Endianness::Little => 1u64 << k,
        })
        .collect()
}

/// `(1/2^n) Σ_x Σ_i w_i [wrong bit i] / Σ_i w_i`, in `[0, 1]`.
pub fn multi_output_error(circuit: &Circuit, f: &BooleanFunction, weights: &[f64]) -> Result<f64> {
    if weights.len() != f.outputs() {
        return Err(Error::Weights(format!(
            "{} weights for {} outputs",
            weights.len(),
            f.outputs()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Weights("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Weights("weights sum to zero".into()));
    }
    let report = exhaustive_report(circuit, f)?;
    let weighted: f64 = report
        .bit_errors
        .iter()
        .zip(weights)
        .map(|(&e, &w)| e as f64 * w)
        .sum();
    Ok(weighted / (total * report.inputs as f64))
}

/// Number of sampled inputs (with multiplicity) on which any output is wrong.
pub fn sampled_mismatch_count(circuit: &Circuit, f: &BooleanFunction, rows: &[u64]) -> Result<u64> {
    let ev = evaluator(circuit, f)?;
    if let Some(&r) = rows.iter().find(|&&r| r >= f.rows()) {
        return Err(Error::WidthMismatch {
            expected: f.inputs(),
            got: (64 - r.leading_zeros()) as usize,
        });
    }
    let mut flags = Vec::with_capacity(rows.len());
    ev.mismatch_rows(circuit, rows, &mut flags);
    Ok(flags.iter().filter(|&&b| b).count() as u64)
}

/// Weighted form of [`sampled_mismatch_count`]: sums `weights[k]` over wrong
/// output bits.
pub fn sampled_weighted_count(
    circuit: &Circuit,
    f: &BooleanFunction,
    rows: &[u64],
    weights: &[u64],
) -> Result<u64> {
    if weights.len() != f.outputs() {
        return Err(Error::Weights(format!(
            "{} weights for {} outputs",
            weights.len(),
            f.outputs()
        )));
    }
    let ev = evaluator(circuit, f)?;
    let mut out = Vec::with_capacity(rows.len());
    ev.weighted_rows(circuit, rows, weights, &mut out);
    Ok(out.iter().sum())
}

/// Formats a rational to two decimals, rounding half away from zero.
pub fn round2(r: Rational) -> String {
    let scaled = (*r.numer() as u128 * 200 + *r.denom() as u128) / (2 * *r.denom() as u128);
    format!("{}.{:02}", scaled / 100, scaled % 100)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::oracle::builtin;

    #[test]
    fn sixsym_anchor() {
        let c = ConfusionCounts::new(43, 5, 7, 9);
        assert_eq!(c.total(), 64);
        assert_eq!(c.err(), Ratio::new(12, 64));
        assert_eq!(c.fn_rate(), Some(Ratio::new(7, 50)));
        assert_eq!(c.fp_rate(), Some(Ratio::new(5, 14)));
        assert_eq!(c.f1(), Some(Ratio::new(86, 98)));
        assert_eq!(round2(c.err()), "0.19");
        assert_eq!(round2(c.fp_rate().unwrap()), "0.36");
        assert_eq!(round2(c.f1().unwrap()), "0.88");
    }

    #[test]
    fn ninesym_anchor() {
        let c = ConfusionCounts::new(365, 20, 55, 72);
        assert_eq!(c.err(), Ratio::new(75, 512));
        assert_eq!(c.f1(), Some(Ratio::new(730, 805)));
        assert_eq!(round2(c.err()), "0.15");
        assert_eq!(round2(c.fn_rate().unwrap()), "0.13");
        assert_eq!(round2(c.fp_rate().unwrap()), "0.22");
        assert_eq!(round2(c.f1().unwrap()), "0.91");
    }

    #[test]
    fn empty_classes_are_undefined() {
        let c = ConfusionCounts::new(0, 1, 0, 3);
        assert_eq!(c.fn_rate(), None);
        assert_eq!(c.f1(), Some(Ratio::new(0, 1)));
        assert_eq!(ConfusionCounts::new(0, 0, 0, 4).f1(), None);
        assert_eq!(ConfusionCounts::new(4, 0, 0, 0).fp_rate(), None);
    }

    #[test]
    fn perfect_circuit_report() {
        let f = builtin("xor5").unwrap();
        let c = Circuit::new(
            5,
            (1..=4).map(|i| Gate::cnot(i, 5)).collect(),
        )
        .unwrap();
        let r = exhaustive_report(&c, &f).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.fn_rate(), Some(Ratio::new(0, 1)));
        assert_eq!(r.fp_rate(), Some(Ratio::new(0, 1)));
        assert_eq!(r.f1(), Some(Ratio::new(1, 1)));
        assert_eq!(multi_output_error(&c, &f, &[3.0]).unwrap(), 0.0);
    }

    #[test]
    fn constant_zero_against_xor5() {
        let f = builtin("xor5").unwrap();
        let c = Circuit::empty(6).unwrap();
        let all: Vec<u64> = (0..32).collect();
        assert_eq!(sampled_mismatch_count(&c, &f, &all).unwrap(), 16);
        let r = exhaustive_report(&c, &f).unwrap();
        assert_eq!(r.err(), Ratio::new(1, 2));
        assert_eq!(multi_output_error(&c, &f, &[7.0]).unwrap(), 0.5);
        let json = serde_json::to_value(r.to_json()).unwrap();
        assert_eq!(json["fn"], 16);
        assert_eq!(json["err"], 0.5);
    }

    #[test]
    fn nthprime3_uniform_error_of_constant_zero() {
        let f = builtin("nthprime3").unwrap();
        let c = Circuit::empty(8).unwrap();
        // 2,3,5,7,11,13,17,19 have 1+2+2+3+3+3+2+3 = 19 set bits
        let e = multi_output_error(&c, &f, &[1.0; 5]).unwrap();
        assert_eq!(e, 19.0 / 40.0);
        assert!(multi_output_error(&c, &f, &[1.0; 4]).is_err());
        assert!(multi_output_error(&c, &f, &[1.0, 1.0, -1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn wrong_everywhere_counts_every_sample() {
        let f = builtin("xor5").unwrap();
        let c = Circuit::new(5, vec![Gate::not(5)])
            .unwrap()
            .concat(&Circuit::new(5, (1..=4).map(|i| Gate::cnot(i, 5)).collect()).unwrap())
            .unwrap();
        let sample = [3, 3, 7, 0, 31, 12];
        assert_eq!(sampled_mismatch_count(&c, &f, &sample).unwrap(), 6);
    }

    #[test]
    fn exponential_weights_follow_endianness() {
        assert_eq!(exponential_weights(3, Endianness::Big), vec![4, 2, 1]);
        assert_eq!(exponential_weights(3, Endianness::Little), vec![1, 2, 4]);
    }
}

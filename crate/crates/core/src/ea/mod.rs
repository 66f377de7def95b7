//! Evolutionary synthesis of reversible circuits.

pub mod fitness;
pub mod sampler;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, MAX_LINES};
use crate::cost::{cost_report, quantum_cost, CostReport, CostTable, CouplingMap};
use crate::error::{Error, Result};
use crate::format;
use crate::metrics::{report_with, ErrorReport, ErrorReportJson};
use crate::oracle::{BooleanFunction, MAX_INPUTS};
use crate::restriction::Restriction;
use crate::rng::{stream, Purpose};
use crate::sim::Evaluator;

pub use fitness::{FailsSet, FitnessMode};
pub use sampler::GateSampler;

use fitness::{estimate_exhaustive, estimate_fitness, Estimate, FailsBuilder, Scratch};

/// Search parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EAParams {
    /// Gates per circuit.
    pub d: usize,
    /// Total lines.
    pub l: usize,
    /// Survivors per generation.
    pub s: usize,
    /// Offspring per survivor, the survivor itself included.
    pub f: usize,
    /// Generations.
    pub g: usize,
    /// Batch size.
    pub b: usize,
    /// Share of the batch drawn uniformly.
    pub ds: f64,
    pub master_seed: u64,
}

impl EAParams {
    pub fn population(&self) -> usize {
        self.s * self.f
    }

    pub fn validate(&self, f: &BooleanFunction) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        let need = f.inputs().max(f.outputs());
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.l < need || self.l > MAX_LINES {
            return bad(format!("l = {} must lie in [{need}, {MAX_LINES}]", self.l));
        }
        if self.s == 0 {
            return bad("S must be at least 1".into());
        }
        if self.f < 2 {
            return bad("F must be at least 2".into());
        }
        if self.g == 0 {
            return bad("G must be at least 1".into());
        }
        if self.b == 0 {
            return bad("b must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.ds) {
            return bad(format!("ds = {} must lie in [0, 1]", self.ds));
        }
        if self.g >= 1 << 24 || self.population() >= 1 << 32 {
            return bad("G or S*F too large".into());
        }
        if f.inputs() > MAX_INPUTS {
            return Err(Error::ResourceGuard(format!(
                "final selection is exhaustive and limited to {MAX_INPUTS} inputs"
            )));
        }
        Ok(())
    }
}

/// How each generation's batch is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchMode {
    #[default]
    Sampled,
    /// Every input once; `b` and `ds` are ignored.
    Exhaustive,
}

/// Settings beyond the core parameters.
#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    pub restriction: Restriction,
    pub costs: CostTable,
    pub coupling: CouplingMap,
    pub fitness: FitnessMode,
    pub batch: BatchMode,
    /// FAILS capacity as a multiple of `b`.
    pub fails_factor: usize,
    /// Stop after this much wall-clock time and return the best so far.
    pub time_budget: Option<Duration>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            restriction: Restriction::Unrestricted,
            costs: CostTable::default(),
            coupling: CouplingMap::melbourne(),
            fitness: FitnessMode::AnyBit,
            batch: BatchMode::Sampled,
            fails_factor: 64,
            time_budget: None,
        }
    }
}

/// One member after STEP 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluatedCircuit {
    pub circuit: Circuit,
    pub fitness: u64,
    pub qc: u64,
    pub index: usize,
}

/// Search state between generations.
#[derive(Debug, Clone)]
pub struct Population {
    pub generation: usize,
    pub members: Vec<Circuit>,
    pub fails: FailsSet,
}

/// Outcome of one generation's STEPs 1 and 2.
#[derive(Debug, Clone)]
pub struct Ranked {
    /// Best `S` members in rank order.
    pub survivors: Vec<EvaluatedCircuit>,
    /// FAILS for the next generation.
    pub fails: FailsSet,
}

/// Drives the search for one target function.
pub struct Synthesizer<'f> {
    ev: Evaluator<'f>,
    params: EAParams,
    opts: SynthesisOptions,
    sampler: GateSampler,
}

impl<'f> Synthesizer<'f> {
    pub fn new(f: &'f BooleanFunction, params: EAParams, opts: SynthesisOptions) -> Result<Synthesizer<'f>> {
        params.validate(f)?;
        opts.costs.validate()?;
        if let FitnessMode::Weighted(w) = &opts.fitness {
            if w.len() != f.outputs() {
                return Err(Error::Weights(format!(
                    "{} weights for {} outputs",
                    w.len(),
                    f.outputs()
                )));
            }
        }
        if opts.fails_factor == 0 {
            return Err(Error::InvalidParams("FAILS capacity factor must be positive".into()));
        }
        let sampler = GateSampler::new(params.l, &opts.restriction)?;
        let ev = Evaluator::new(f, params.l)?;
        Ok(Synthesizer {
            ev,
            params,
            opts,
            sampler,
        })
    }

    pub fn params(&self) -> &EAParams {
        &self.params
    }

    pub fn sampler(&self) -> &GateSampler {
        &self.sampler
    }

    /// Fresh random population of `S * F` circuits.
    pub fn initial(&self) -> Population {
        let seed = self.params.master_seed;
        let members = (0..self.params.population())
            .into_par_iter()
            .map(|i| {
                self.sampler
                    .random_circuit(self.params.d, &mut stream(seed, Purpose::Init, 0, i as u64))
            })
            .collect();
        Population {
            generation: 0,
            members,
            fails: FailsSet::empty(self.fails_capacity()),
        }
    }

    fn fails_capacity(&self) -> usize {
        self.params.b * self.opts.fails_factor
    }

    /// STEP 1 (evaluation and FAILS update) and STEP 2 (truncation).
    pub fn rank(&self, pop: &Population) -> Ranked {
        debug_assert!(pop.members.iter().all(|c| self.opts.restriction.admits_circuit(c)));
        let p = &self.params;
        let gen = pop.generation as u64;
        let estimates: Vec<Estimate> = pop
            .members
            .par_iter()
            .enumerate()
            .map_init(Scratch::default, |scratch, (i, c)| match self.opts.batch {
                BatchMode::Sampled => {
                    let mut rng = stream(p.master_seed, Purpose::Evaluate, gen, i as u64);
                    estimate_fitness(c, &self.ev, &pop.fails, p.b, p.ds, &self.opts.fitness, &mut rng, scratch)
                }
                BatchMode::Exhaustive => estimate_exhaustive(c, &self.ev, &self.opts.fitness, scratch),
            })
            .collect();
        let mut builder = FailsBuilder::new(
            self.fails_capacity(),
            stream(p.master_seed, Purpose::Fails, gen, 0),
        );
        for e in &estimates {
            builder.extend(&e.failed);
        }
        let mut scored: Vec<EvaluatedCircuit> = pop
            .members
            .iter()
            .zip(&estimates)
            .enumerate()
            .map(|(index, (c, e))| EvaluatedCircuit {
                circuit: c.clone(),
                fitness: e.errors,
                qc: quantum_cost(c, &self.opts.costs),
                index,
            })
            .collect();
        scored.sort_by_key(|e| (e.fitness, e.qc, e.index));
        scored.truncate(p.s);
        Ranked {
            survivors: scored,
            fails: builder.finish(),
        }
    }

    /// STEP 3: survivors verbatim, each followed by `F - 1` mutants.
    pub fn breed(&self, ranked: &Ranked, generation: usize) -> Population {
        let p = &self.params;
        let gen = generation as u64;
        let members = ranked
            .survivors
            .par_iter()
            .enumerate()
            .flat_map_iter(|(rank, parent)| {
                let parent = &parent.circuit;
                std::iter::once(parent.clone()).chain((1..p.f).map(move |j| {
                    let mut rng = stream(p.master_seed, Purpose::Mutate, gen, (rank * p.f + j) as u64);
                    self.sampler.mutate(parent, &mut rng)
                }))
            })
            .collect();
        Population {
            generation: generation + 1,
            members,
            fails: ranked.fails.clone(),
        }
    }

    /// One full generation: rank then breed.
    pub fn evolve_generation(&self, pop: &Population) -> (Ranked, Population) {
        let ranked = self.rank(pop);
        let next = self.breed(&ranked, pop.generation);
        (ranked, next)
    }

    /// Exact error used for final selection: mismatching inputs, or total
    /// weighted error in weighted mode.
    fn exact_score(&self, c: &Circuit, scratch: &mut Scratch) -> u64 {
        match &self.opts.fitness {
            FitnessMode::AnyBit => self.ev.mismatches(c),
            mode => estimate_exhaustive(c, &self.ev, mode, scratch).errors,
        }
    }

    pub fn run(&self) -> SynthesisResult {
        let start = Instant::now();
        let mut pop = self.initial();
        let mut history = Vec::with_capacity(self.params.g);
        let (ranked, aborted) = loop {
            let ranked = self.rank(&pop);
            history.push(ranked.survivors[0].fitness);
            let last = pop.generation + 1 == self.params.g;
            let over = self.opts.time_budget.is_some_and(|t| start.elapsed() >= t);
            if last || over {
                break (ranked, over && !last);
            }
            pop = self.breed(&ranked, pop.generation);
        };
        let mut scratch = Scratch::default();
        let best = ranked
            .survivors
            .iter()
            .min_by_key(|e| (self.exact_score(&e.circuit, &mut scratch), e.qc, e.index))
            .expect("at least one survivor");
        let report = report_with(&self.ev, &best.circuit);
        SynthesisResult {
            function: self.ev.function().name().to_owned(),
            circuit: best.circuit.clone(),
            report,
            costs: cost_report(&best.circuit, &self.opts.costs, &self.opts.coupling),
            history,
            params: self.params.clone(),
            restriction: self.opts.restriction.to_string(),
            aborted,
        }
    }
}

/// Runs the full search.
pub fn synthesize(f: &BooleanFunction, params: EAParams, opts: SynthesisOptions) -> Result<SynthesisResult> {
    Ok(Synthesizer::new(f, params, opts)?.run())
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub function: String,
    pub circuit: Circuit,
    pub report: ErrorReport,
    pub costs: CostReport,
    /// Best sampled fitness of each generation.
    pub history: Vec<u64>,
    pub params: EAParams,
    pub restriction: String,
    /// The time budget ran out before `G` generations.
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResultJson {
    pub function: String,
    pub circuit: String,
    pub report: ErrorReportJson,
    pub costs: CostReport,
    pub history: Vec<u64>,
    pub params: EAParams,
    pub restriction: String,
    pub aborted: bool,
}

impl SynthesisResult {
    pub fn to_json(&self) -> SynthesisResultJson {
        SynthesisResultJson {
            function: self.function.clone(),
            circuit: format::serialize(&self.circuit),
            report: self.report.to_json(),
            costs: self.costs.clone(),
            history: self.history.clone(),
            params: self.params.clone(),
            restriction: self.restriction.clone(),
            aborted: self.aborted,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind};
    use crate::oracle::builtin;

    fn params(d: usize, l: usize, s: usize, f: usize, g: usize, b: usize, seed: u64) -> EAParams {
        EAParams {
            d,
            l,
            s,
            f,
            g,
            b,
            ds: 0.5,
            master_seed: seed,
        }
    }

    fn not1() -> BooleanFunction {
        BooleanFunction::from_fn("not", 1, 1, |x| x ^ 1).unwrap()
    }

    #[test]
    fn not_on_one_input() {
        let f = not1();
        for seed in 0..10 {
            let r = synthesize(&f, params(1, 1, 2, 2, 5, 2, seed), SynthesisOptions::default()).unwrap();
            assert_eq!(r.circuit.gates(), &[Gate::new(GateKind::Not, [1, 0, 0])]);
            assert!(r.report.is_exact());
            assert_eq!(r.history.len(), 5);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let f = builtin("xor5").unwrap();
        let ok = params(4, 5, 2, 2, 1, 4, 0);
        assert!(ok.validate(&f).is_ok());
        for p in [
            EAParams { d: 0, ..ok.clone() },
            EAParams { l: 4, ..ok.clone() },
            EAParams { s: 0, ..ok.clone() },
            EAParams { f: 1, ..ok.clone() },
            EAParams { g: 0, ..ok.clone() },
            EAParams { b: 0, ..ok.clone() },
            EAParams { ds: 1.5, ..ok.clone() },
        ] {
            assert!(matches!(p.validate(&f), Err(Error::InvalidParams(_))), "{p:?}");
        }
    }

    #[test]
    fn same_seed_same_result() {
        let f = builtin("4mod5").unwrap();
        let p = params(5, 6, 10, 10, 30, 16, 42);
        let a = synthesize(&f, p.clone(), SynthesisOptions::default()).unwrap();
        let b = synthesize(&f, p, SynthesisOptions::default()).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn generation_shape_and_elites() {
        let f = builtin("xor5").unwrap();
        let s = Synthesizer::new(&f, params(4, 5, 7, 5, 3, 8, 3), SynthesisOptions::default()).unwrap();
        let pop = s.initial();
        assert_eq!(pop.members.len(), 35);
        let (ranked, next) = s.evolve_generation(&pop);
        assert_eq!(next.members.len(), 35);
        assert_eq!(ranked.survivors.len(), 7);
        for (k, e) in ranked.survivors.iter().enumerate() {
            assert_eq!(next.members[k * 5], e.circuit);
        }
        assert!(ranked.fails.len() <= 8 * 64);
        let keys: Vec<_> = ranked.survivors.iter().map(|e| (e.fitness, e.qc, e.index)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exact_circuit_persists() {
        let f = builtin("xor5").unwrap();
        let s = Synthesizer::new(&f, params(4, 5, 3, 4, 10, 8, 9), SynthesisOptions::default()).unwrap();
        let exact = Circuit::new(5, (1..=4).map(|i| Gate::cnot(i, 5)).collect()).unwrap();
        let mut pop = s.initial();
        pop.members[11] = exact.clone();
        for _ in 0..10 {
            let (_, next) = s.evolve_generation(&pop);
            assert!(next.members.iter().any(|c| s.ev.mismatches(c) == 0));
            pop = next;
        }
    }

    #[test]
    fn best_fitness_non_increasing_with_full_batches() {
        let f = builtin("2of5").unwrap();
        let opts = SynthesisOptions {
            batch: BatchMode::Exhaustive,
            ..SynthesisOptions::default()
        };
        for seed in 0..3 {
            let r = synthesize(&f, params(8, 6, 5, 6, 40, 32, seed), opts.clone()).unwrap();
            assert!(r.history.windows(2).all(|w| w[1] <= w[0]), "{:?}", r.history);
            assert_eq!(r.report.mismatches, *r.history.last().unwrap());
        }
    }

    #[test]
    fn fails_boosts_a_rare_input() {
        // single positive row; circuits that miss it feed FAILS
        let f = BooleanFunction::from_fn("rare", 6, 1, |x| (x == 37) as u64).unwrap();
        let s = Synthesizer::new(&f, params(3, 7, 10, 10, 3, 16, 5), SynthesisOptions::default()).unwrap();
        let pop = s.initial();
        let ranked = s.rank(&pop);
        assert!(ranked.fails.multiplicity(37) > 0);
        let share = ranked.fails.multiplicity(37) as f64 / ranked.fails.len() as f64;
        assert!(share > 1.0 / 64.0);
        // generation 2 batches draw half from FAILS
        let next = s.breed(&ranked, 0);
        let mut hits = 0;
        let mut rows = Vec::new();
        for i in 0..next.members.len() {
            let mut rng = stream(5, Purpose::Evaluate, 1, i as u64);
            fitness::draw_batch(64, 16, 0.5, &next.fails, &mut rng, &mut rows);
            hits += rows.iter().filter(|&&r| r == 37).count();
        }
        let uniform = (next.members.len() * 16) as f64 / 64.0;
        assert!(hits as f64 > uniform, "{hits} vs {uniform}");
    }

    #[test]
    fn restriction_holds_in_result() {
        let f = builtin("xor5").unwrap();
        let opts = SynthesisOptions {
            restriction: Restriction::nearest_neighbor(5),
            ..SynthesisOptions::default()
        };
        let r = synthesize(&f, params(6, 5, 5, 5, 20, 16, 1), opts.clone()).unwrap();
        assert!(opts.restriction.admits_circuit(&r.circuit));
    }

    #[test]
    fn weighted_mode_runs() {
        let f = builtin("nthprime3").unwrap();
        let opts = SynthesisOptions {
            fitness: FitnessMode::Weighted(vec![16, 8, 4, 2, 1]),
            ..SynthesisOptions::default()
        };
        let r = synthesize(&f, params(6, 5, 5, 5, 10, 16, 1), opts).unwrap();
        assert_eq!(r.history.len(), 10);
        let bad = SynthesisOptions {
            fitness: FitnessMode::Weighted(vec![1, 2]),
            ..SynthesisOptions::default()
        };
        assert!(matches!(
            synthesize(&f, params(6, 5, 5, 5, 10, 16, 1), bad),
            Err(Error::Weights(_))
        ));
    }

    #[test]
    fn zero_budget_aborts_with_a_result() {
        let f = builtin("xor5").unwrap();
        let opts = SynthesisOptions {
            time_budget: Some(Duration::ZERO),
            ..SynthesisOptions::default()
        };
        let r = synthesize(&f, params(4, 5, 5, 5, 50, 16, 1), opts).unwrap();
        assert!(r.aborted);
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let f = builtin("xor5").unwrap();
        let r = synthesize(&f, params(4, 5, 5, 5, 5, 16, 1), SynthesisOptions::default()).unwrap();
        let text = r.to_json_string();
        let back: SynthesisResultJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r.to_json());
        assert_eq!(format::parse(&back.circuit).unwrap(), r.circuit);
    }
}

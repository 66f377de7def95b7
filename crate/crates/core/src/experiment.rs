//! Experiment configuration and the batch commands behind the CLI.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{remove_unused_gates, Circuit, GateKind};
use crate::cost::{cost_report, quantum_cost, CostReport, CostTable, CouplingMap, Placement};
use crate::ea::{synthesize, EAParams, FitnessMode, SynthesisOptions, SynthesisResult};
use crate::error::{Error, Result};
use crate::format;
use crate::metrics::{exhaustive_report, exponential_weights, Endianness, ErrorReportJson};
use crate::noise::{self, crossover, noise_sweep, Crossover, NoiseModel, NoisyTarget, SweepRow, DEFAULT_TRIALS};
use crate::oracle::{builtin, load_truth_table, BooleanFunction, BUILTINS};
use crate::restriction::Restriction;
use crate::sim::Evaluator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub d: usize,
    /// Defaults to `max(n, m)`.
    pub l: Option<usize>,
    pub s: usize,
    pub f: usize,
    pub g: usize,
    pub b: usize,
    #[serde(default = "half")]
    pub ds: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionConfig {
    /// `"path"`, `"melbourne"`, or a coupling-map file; lines are nodes.
    pub adjacent: Option<String>,
    pub kinds: Option<Vec<String>>,
    /// Allowed written lines per gate keyword.
    #[serde(default)]
    pub targets: BTreeMap<String, Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Evaluate sweep-gates circuits under noise.
    pub enabled: bool,
    pub trials: u64,
    #[serde(flatten)]
    pub model: NoiseModel,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            enabled: false,
            trials: DEFAULT_TRIALS,
            model: NoiseModel::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub gates: Vec<usize>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitnessConfig {
    /// `"anybit"` (default), `"exponential"`, or `"weights"`.
    pub mode: Option<String>,
    pub endianness: Endianness,
    pub weights: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in name or truth-table path.
    pub function: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "sixteen")]
    pub runs: usize,
    pub params: ParamsConfig,
    #[serde(default)]
    pub restriction: RestrictionConfig,
    #[serde(default)]
    pub costs: Option<CostTable>,
    /// Coupling-map file; the built-in ladder when absent.
    #[serde(default)]
    pub coupling: Option<String>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub fitness: FitnessConfig,
    #[serde(default)]
    pub time_budget_secs: Option<f64>,
    #[serde(default)]
    pub exclude_constant: bool,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn sixteen() -> usize {
    16
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg = ExperimentConfig::parse(&text, json)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str, json: bool) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = if json {
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| Error::InvalidParams(format!("config: {e}")))?
        };
        if cfg.runs == 0 {
            return Err(Error::InvalidParams("runs must be at least 1".into()));
        }
        cfg.noise.model.validate()?;
        Ok(cfg)
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn function(&self) -> Result<BooleanFunction> {
        resolve_function(&self.function, &self.base_dir)
    }

    pub fn costs(&self) -> Result<CostTable> {
        let t = self.costs.unwrap_or_default();
        t.validate()?;
        Ok(t)
    }

    pub fn coupling(&self) -> Result<CouplingMap> {
        match &self.coupling {
            None => Ok(CouplingMap::melbourne()),
            Some(p) => load_coupling(&self.resolve(p)),
        }
    }

    pub fn ea_params(&self, f: &BooleanFunction, d: usize, seed: u64) -> EAParams {
        let p = &self.params;
        EAParams {
            d,
            l: p.l.unwrap_or(f.inputs().max(f.outputs())),
            s: p.s,
            f: p.f,
            g: p.g,
            b: p.b,
            ds: p.ds,
            master_seed: seed,
        }
    }

    pub fn restriction(&self, lines: usize) -> Result<Restriction> {
        let rc = &self.restriction;
        let mut r = Restriction::Unrestricted;
        if let Some(adj) = &rc.adjacent {
            let graph = match adj.as_str() {
                "path" => CouplingMap::path(lines)?,
                "melbourne" => CouplingMap::melbourne(),
                file => load_coupling(&self.resolve(file))?,
            };
            r = r.and(Restriction::AdjacentLinesOnly(graph));
        }
        if let Some(kinds) = &rc.kinds {
            r = r.and(Restriction::allowed_kinds(
                kinds.iter().map(|k| keyword(k)).collect::<Result<Vec<_>>>()?,
            ));
        }
        for (k, targets) in &rc.targets {
            if let Some(&bad) = targets.iter().find(|&&t| t == 0 || t as usize > lines) {
                return Err(Error::LineOutOfRange {
                    index: bad as usize,
                    lines,
                });
            }
            r = r.and(Restriction::target_lines(keyword(k)?, targets.iter().copied()));
        }
        Ok(r)
    }

    pub fn fitness_mode(&self, f: &BooleanFunction) -> Result<FitnessMode> {
        let fc = &self.fitness;
        match fc.mode.as_deref().unwrap_or("anybit") {
            "anybit" => Ok(FitnessMode::AnyBit),
            "exponential" => Ok(FitnessMode::Weighted(exponential_weights(f.outputs(), fc.endianness))),
            "weights" => {
                let w = fc
                    .weights
                    .clone()
                    .ok_or_else(|| Error::Weights("mode `weights` needs a `weights` list".into()))?;
                Ok(FitnessMode::Weighted(w))
            }
            other => Err(Error::InvalidParams(format!("unknown fitness mode `{other}`"))),
        }
    }

    pub fn options(&self, f: &BooleanFunction, lines: usize) -> Result<SynthesisOptions> {
        let time_budget = match self.time_budget_secs {
            Some(s) if !(s >= 0.0 && s.is_finite()) => {
                return Err(Error::InvalidParams(format!("time budget {s} must be non-negative")))
            }
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(SynthesisOptions {
            restriction: self.restriction(lines)?,
            costs: self.costs()?,
            coupling: self.coupling()?,
            fitness: self.fitness_mode(f)?,
            time_budget,
            ..SynthesisOptions::default()
        })
    }
}

fn keyword(k: &str) -> Result<GateKind> {
    GateKind::from_keyword(k).ok_or_else(|| Error::InvalidParams(format!("unknown gate kind `{k}`")))
}

pub fn load_coupling(path: &Path) -> Result<CouplingMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
    CouplingMap::parse(name, &text)
}

/// A built-in name, or else a truth-table file relative to `base`.
pub fn resolve_function(spec: &str, base: &Path) -> Result<BooleanFunction> {
    match builtin(spec) {
        Ok(f) => Ok(f),
        Err(unknown) => {
            let path = if Path::new(spec).is_absolute() {
                PathBuf::from(spec)
            } else {
                base.join(spec)
            };
            if !path.is_file() {
                return Err(unknown);
            }
            let text = fs::read_to_string(&path)?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
            load_truth_table(name, &text)
        }
    }
}

pub fn builtin_list() -> String {
    BUILTINS.join(", ")
}

pub fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_real = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("real"));
    if is_real {
        format::from_real(&text)
    } else {
        format::parse(&text)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Files written by [`cmd_synth`].
pub const SYNTH_CIRCUIT: &str = "synth.circuit";
pub const SYNTH_JSON: &str = "synth.json";

/// Runs one synthesis and writes the circuit and its JSON report.
pub fn cmd_synth(cfg: &ExperimentConfig, out: &Path) -> Result<SynthesisResult> {
    let f = cfg.function()?;
    let params = cfg.ea_params(&f, cfg.params.d, cfg.seed);
    let opts = cfg.options(&f, params.l)?;
    let r = synthesize(&f, params, opts)?;
    write_file(&out.join(SYNTH_CIRCUIT), &format::serialize(&r.circuit))?;
    write_file(&out.join(SYNTH_JSON), &r.to_json_string())?;
    Ok(r)
}

/// One synthesized circuit of a gate-count sweep, after pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGatesRow {
    pub d: usize,
    pub run: usize,
    pub seed: u64,
    pub err: f64,
    pub qc: u64,
    pub cc: Option<u64>,
    pub constant: bool,
    pub noisy: Option<(f64, f64)>,
}

pub const SWEEP_GATES_HEADER: &str = "d,run,seed,err,qc,cc,constant,noisy_err,noisy_stderr";
pub const CURVE_HEADER: &str = "metric,qc,count,median,min,max";
pub const SWEEP_GATES_CSV: &str = "sweep_gates.csv";
pub const CURVE_CSV: &str = "curve.csv";

impl SweepGatesRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.d,
            self.run,
            self.seed,
            self.err,
            self.qc,
            opt(self.cc.map(|c| c.to_string())),
            self.constant,
            opt(self.noisy.map(|n| n.0.to_string())),
            opt(self.noisy.map(|n| n.1.to_string())),
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<SweepGatesRow> {
        let bad = || Error::Parse {
            line: 0,
            message: format!("malformed sweep row `{line}`"),
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        let noisy = match (opt_num(cols[7])?, opt_num(cols[8])?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(bad()),
        };
        Ok(SweepGatesRow {
            d: cols[0].parse().map_err(|_| bad())?,
            run: cols[1].parse().map_err(|_| bad())?,
            seed: cols[2].parse().map_err(|_| bad())?,
            err: num(cols[3])?,
            qc: cols[4].parse().map_err(|_| bad())?,
            cc: if cols[5].is_empty() {
                None
            } else {
                Some(cols[5].parse().map_err(|_| bad())?)
            },
            constant: cols[6].parse().map_err(|_| bad())?,
            noisy,
        })
    }
}

/// Median, minimum and maximum of one metric over circuits with equal qc.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub metric: &'static str,
    pub qc: u64,
    pub count: usize,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl CurvePoint {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.metric, self.qc, self.count, self.median, self.min, self.max
        )
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Buckets rows by qc: `err` points first, then `noisy_err` points when
/// noisy values exist.
pub fn curves(rows: &[SweepGatesRow], exclude_constant: bool) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    let metrics: [(&'static str, fn(&SweepGatesRow) -> Option<f64>); 2] =
        [("err", |r| Some(r.err)), ("noisy_err", |r| r.noisy.map(|n| n.0))];
    for (metric, value) in metrics {
        let mut buckets: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for r in rows.iter().filter(|r| !(exclude_constant && r.constant)) {
            if let Some(v) = value(r) {
                buckets.entry(r.qc).or_default().push(v);
            }
        }
        for (qc, mut vals) in buckets {
            vals.sort_by(f64::total_cmp);
            out.push(CurvePoint {
                metric,
                qc,
                count: vals.len(),
                median: median(&vals),
                min: vals[0],
                max: vals[vals.len() - 1],
            });
        }
    }
    out
}

/// Recomputes the curve file's contents from raw sweep CSV text.
pub fn curves_csv_from_raw(raw: &str, exclude_constant: bool) -> Result<String> {
    let mut lines = raw.lines();
    if lines.next() != Some(SWEEP_GATES_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected sweep header".into(),
        });
    }
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(SweepGatesRow::parse_csv_line)
        .collect::<Result<Vec<_>>>()?;
    Ok(render_curves(&curves(&rows, exclude_constant)))
}

fn render_curves(points: &[CurvePoint]) -> String {
    let mut s = format!("{CURVE_HEADER}\n");
    for p in points {
        let _ = writeln!(s, "{}", p.csv_line());
    }
    s
}

fn sweep_row(cfg: &ExperimentConfig, f: &BooleanFunction, d: usize, run: usize) -> Result<SweepGatesRow> {
    let seed = cfg.seed.wrapping_add(run as u64);
    let params = cfg.ea_params(f, d, seed);
    let opts = cfg.options(f, params.l)?;
    let coupling = opts.coupling.clone();
    let costs = opts.costs;
    let r = synthesize(f, params, opts)?;
    let pruned = remove_unused_gates(&r.circuit, f.outputs())?;
    let ev = Evaluator::new(f, pruned.lines())?;
    let report = exhaustive_report(&pruned, f)?;
    let err = *report.err().numer() as f64 / *report.err().denom() as f64;
    let target = NoisyTarget::new(&pruned, f, &coupling, &Placement::identity(pruned.lines())).ok();
    let noisy = match (&target, cfg.noise.enabled) {
        (Some(t), true) => {
            let e = t.estimate(&cfg.noise.model, cfg.noise.trials, seed)?;
            Some((e.error_rate, e.stderr))
        }
        (None, true) => {
            return Err(Error::Coupling(format!(
                "{}-line circuits do not fit the coupling map",
                pruned.lines()
            )))
        }
        _ => None,
    };
    Ok(SweepGatesRow {
        d,
        run,
        seed,
        err,
        qc: quantum_cost(&pruned, &costs),
        cc: target.map(|t| t.primitive().circuit_cost()),
        constant: ev.is_constant(&pruned),
        noisy,
    })
}

/// `R` runs per gate count. The raw CSV is flushed after each gate count.
pub fn cmd_sweep_gates(cfg: &ExperimentConfig, out: &Path, exclude_constant: bool) -> Result<Vec<CurvePoint>> {
    if cfg.sweep.gates.is_empty() {
        return Err(Error::InvalidParams("sweep.gates must list at least one gate count".into()));
    }
    let f = cfg.function()?;
    // fail fast on configuration errors before any long run
    cfg.ea_params(&f, cfg.sweep.gates[0], cfg.seed).validate(&f)?;
    cfg.options(&f, cfg.ea_params(&f, 1, 0).l)?;
    fs::create_dir_all(out)?;
    let raw_path = out.join(SWEEP_GATES_CSV);
    let mut raw = fs::File::create(&raw_path).map_err(|e| Error::Io(format!("{}: {e}", raw_path.display())))?;
    writeln!(raw, "{SWEEP_GATES_HEADER}")?;
    let mut all = Vec::new();
    for &d in &cfg.sweep.gates {
        let rows = (0..cfg.runs)
            .into_par_iter()
            .map(|run| sweep_row(cfg, &f, d, run))
            .collect::<Result<Vec<_>>>()?;
        for r in &rows {
            writeln!(raw, "{}", r.csv_line())?;
        }
        raw.flush()?;
        all.extend(rows);
    }
    let points = curves(&all, exclude_constant || cfg.exclude_constant);
    write_file(&out.join(CURVE_CSV), &render_curves(&points))?;
    Ok(points)
}

pub const SWEEP_NOISE_CSV: &str = "sweep_noise.csv";
pub const CROSSOVER_JSON: &str = "crossover.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub cheap: String,
    pub expensive: String,
    #[serde(flatten)]
    pub crossover: Crossover,
}

/// Noise sweep over the configured λ list; with two or more circuits the
/// crossover between the lowest- and highest-qc circuit is reported too.
pub fn cmd_sweep_noise(
    cfg: &ExperimentConfig,
    circuits: &[(String, Circuit)],
    out: &Path,
) -> Result<(Vec<SweepRow>, Option<CrossoverReport>)> {
    let f = cfg.function()?;
    let lambdas = if cfg.sweep.lambdas.is_empty() {
        vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0]
    } else {
        cfg.sweep.lambdas.clone()
    };
    let costs = cfg.costs()?;
    let rows = noise_sweep(
        circuits,
        &f,
        &cfg.noise.model,
        &lambdas,
        cfg.noise.trials,
        &cfg.coupling()?,
        &costs,
        cfg.seed,
    )?;
    let mut csv = format!("{}\n", noise::SWEEP_HEADER);
    for r in &rows {
        let _ = writeln!(csv, "{}", r.csv_line());
    }
    write_file(&out.join(SWEEP_NOISE_CSV), &csv)?;
    let report = if circuits.len() >= 2 {
        let by_qc = |pick_max: bool| {
            let it = circuits.iter().map(|(id, c)| (quantum_cost(c, &costs), id));
            if pick_max {
                it.max_by_key(|&(q, _)| q).map(|(_, id)| id.clone())
            } else {
                it.min_by_key(|&(q, _)| q).map(|(_, id)| id.clone())
            }
        };
        let (cheap, expensive) = (by_qc(false).unwrap(), by_qc(true).unwrap());
        let pick = |id: &str| rows.iter().filter(|r| r.circuit_id == id).cloned().collect::<Vec<_>>();
        let rep = CrossoverReport {
            crossover: crossover(&pick(&cheap), &pick(&expensive)),
            cheap,
            expensive,
        };
        write_file(
            &out.join(CROSSOVER_JSON),
            &(serde_json::to_string_pretty(&rep).expect("serializable") + "\n"),
        )?;
        Some(rep)
    } else {
        None
    };
    Ok((rows, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub function: String,
    pub report: ErrorReportJson,
    pub costs: CostReport,
}

/// Exhaustive report and costs of `circuit` against `f`.
pub fn cmd_eval(circuit: &Circuit, f: &BooleanFunction, costs: &CostTable, coupling: &CouplingMap) -> Result<EvalReport> {
    let need = f.inputs().max(f.outputs());
    if circuit.lines() < need {
        return Err(Error::WidthMismatch {
            expected: need,
            got: circuit.lines(),
        });
    }
    costs.validate()?;
    Ok(EvalReport {
        function: f.name().to_owned(),
        report: exhaustive_report(circuit, f)?.to_json(),
        costs: cost_report(circuit, costs, coupling),
    })
}

pub fn cmd_cost(circuit: &Circuit, costs: &CostTable, coupling: &CouplingMap) -> Result<CostReport> {
    costs.validate()?;
    Ok(cost_report(circuit, costs, coupling))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    const SMALL: &str = r#"
function = "xor5"
seed = 3
runs = 3

[params]
d = 4
s = 5
f = 5
g = 15
b = 16

[sweep]
gates = [2, 4]
"#;

    #[test]
    fn toml_and_json_encodings_agree() {
        let a = ExperimentConfig::parse(SMALL, false).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b = ExperimentConfig::parse(&json, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.params.ds, 0.5);
        assert_eq!(a.noise.trials, 1024);
    }

    #[test]
    fn unknown_keys_and_zero_runs_are_rejected() {
        assert!(ExperimentConfig::parse(&SMALL.replace("runs = 3", "runs = 0"), false).is_err());
        assert!(ExperimentConfig::parse(&format!("{SMALL}\nbogus = 1\n"), false).is_err());
    }

    #[test]
    fn restriction_spec() {
        let text = format!(
            "{SMALL}\n[restriction]\nadjacent = \"path\"\nkinds = [\"cnot\", \"not\"]\n[restriction.targets]\ncnot = [1, 2, 3]\n"
        );
        let cfg = ExperimentConfig::parse(&text, false).unwrap();
        let r = cfg.restriction(5).unwrap();
        assert!(r.admits(&Gate::cnot(2, 3)));
        assert!(!r.admits(&Gate::cnot(4, 5)));
        assert!(!r.admits(&Gate::toffoli(1, 2, 3)));
        let bad = text.replace("cnot = [1, 2, 3]", "cnot = [9]");
        assert!(ExperimentConfig::parse(&bad, false).unwrap().restriction(5).is_err());
    }

    #[test]
    fn unknown_function_lists_builtins() {
        let err = resolve_function("nosuch", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("2of5"), "{err}");
    }

    #[test]
    fn curve_statistics() {
        let row = |qc, err, constant| SweepGatesRow {
            d: 1,
            run: 0,
            seed: 0,
            err,
            qc,
            cc: None,
            constant,
            noisy: None,
        };
        let rows = [row(3, 0.5, false), row(3, 0.1, false), row(3, 0.2, true), row(4, 0.3, false)];
        let c = curves(&rows, false);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].count, c[0].median, c[0].min, c[0].max), (3, 0.2, 0.1, 0.5));
        assert_eq!((c[1].median, c[1].min, c[1].max), (0.3, 0.3, 0.3));
        let c = curves(&rows, true);
        assert_eq!((c[0].count, c[0].median), (2, (0.1 + 0.5) / 2.0));
    }

    #[test]
    fn sweep_gates_writes_every_run_once_and_curves_replay() {
        let cfg = ExperimentConfig::parse(SMALL, false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        cmd_sweep_gates(&cfg, dir.path(), false).unwrap();
        let raw = fs::read_to_string(dir.path().join(SWEEP_GATES_CSV)).unwrap();
        let keys: Vec<(String, String)> = raw
            .lines()
            .skip(1)
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                (c[0].to_owned(), c[1].to_owned())
            })
            .collect();
        let want: Vec<(String, String)> = [2, 4]
            .iter()
            .flat_map(|d| (0..3).map(move |r| (d.to_string(), r.to_string())))
            .collect();
        assert_eq!(keys, want);
        let curve = fs::read_to_string(dir.path().join(CURVE_CSV)).unwrap();
        assert_eq!(curves_csv_from_raw(&raw, false).unwrap(), curve);
    }

    #[test]
    fn eval_of_empty_circuit_against_xor5() {
        let f = builtin("xor5").unwrap();
        let r = cmd_eval(&Circuit::empty(6).unwrap(), &f, &CostTable::default(), &CouplingMap::melbourne()).unwrap();
        assert_eq!(r.report.err, 0.5);
        assert!(matches!(
            cmd_eval(&Circuit::empty(4).unwrap(), &f, &CostTable::default(), &CouplingMap::melbourne()),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn sweep_noise_reports_a_crossover_pair() {
        let cfg = ExperimentConfig::parse(&SMALL.replace("xor5", "5mod5"), false).unwrap();
        let cheap = Circuit::new(6, vec![Gate::toffoli(1, 3, 6)]).unwrap();
        let dear = Circuit::new(6, (0..8).map(|i| Gate::fredkin(1 + i % 5, 6, 1 + (i + 1) % 5)).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (rows, rep) = cmd_sweep_noise(&cfg, &[("a".into(), cheap), ("b".into(), dear)], dir.path()).unwrap();
        assert_eq!(rows.len(), 12);
        let rep = rep.unwrap();
        assert_eq!((rep.cheap.as_str(), rep.expensive.as_str()), ("a", "b"));
        assert!(dir.path().join(CROSSOVER_JSON).exists());
    }
}

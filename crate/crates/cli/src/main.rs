use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use revsynth::cost::{CostTable, CouplingMap};
use revsynth::experiment::{
    self, cmd_cost, cmd_eval, cmd_sweep_gates, cmd_sweep_noise, cmd_synth, load_circuit, resolve_function,
    ExperimentConfig,
};
use revsynth::{format, Circuit, Error};

#[derive(Parser)]
#[command(name = "revsynth", version, about = "Evolutionary synthesis of approximate reversible circuits")]
struct Cli {
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one synthesis; writes synth.circuit and synth.json.
    Synth {
        /// Overrides the configured target function.
        #[arg(long)]
        function: Option<String>,
    },
    /// Exhaustive error report and costs of a circuit, as JSON on stdout.
    Eval {
        circuit: PathBuf,
        /// Built-in name or truth-table file.
        #[arg(long)]
        function: String,
    },
    /// Quantum cost and circuit cost of a circuit, as JSON on stdout.
    Cost { circuit: PathBuf },
    /// Runs per gate count; writes sweep_gates.csv and curve.csv.
    SweepGates {
        /// Leave constant-output circuits out of the curves.
        #[arg(long)]
        exclude_constant: bool,
    },
    /// Noisy error rates over the configured scales; writes sweep_noise.csv
    /// and, for two or more circuits, crossover.json.
    SweepNoise {
        #[arg(required = true)]
        circuits: Vec<PathBuf>,
    },
    /// Converts a circuit to RevLib `.real` on stdout.
    ExportReal { circuit: PathBuf },
}

enum Failure {
    /// Bad usage or configuration.
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceGuard(_) | Error::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("this command needs --config <path>".into()))?;
    let mut cfg = ExperimentConfig::load(path).map_err(usage)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Cost table and coupling map from the optional config.
fn hardware(cli: &Cli) -> Result<(CostTable, CouplingMap, PathBuf), Failure> {
    match &cli.config {
        Some(_) => {
            let cfg = config(cli)?;
            Ok((cfg.costs().map_err(usage)?, cfg.coupling().map_err(usage)?, cfg.base_dir.clone()))
        }
        None => Ok((CostTable::default(), CouplingMap::melbourne(), PathBuf::from("."))),
    }
}

fn circuit(path: &Path) -> Result<Circuit, Failure> {
    load_circuit(path).map_err(usage)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: serde::Serialize>(v: &T) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Synth { function } => {
            let mut cfg = config(&cli)?;
            if let Some(f) = function {
                cfg.function = f.clone();
            }
            cfg.function().map_err(usage)?;
            let r = cmd_synth(&cfg, &cli.out)?;
            eprintln!(
                "err {} qc {} -> {}",
                r.report.to_json().err,
                r.costs.qc,
                cli.out.join(experiment::SYNTH_JSON).display()
            );
        }
        Command::Eval { circuit: path, function } => {
            let (costs, coupling, base) = hardware(&cli)?;
            let f = resolve_function(function, &base).map_err(usage)?;
            let c = circuit(path)?;
            print_json(&cmd_eval(&c, &f, &costs, &coupling)?);
        }
        Command::Cost { circuit: path } => {
            let (costs, coupling, _) = hardware(&cli)?;
            print_json(&cmd_cost(&circuit(path)?, &costs, &coupling)?);
        }
        Command::SweepGates { exclude_constant } => {
            let cfg = config(&cli)?;
            cfg.function().map_err(usage)?;
            let points = cmd_sweep_gates(&cfg, &cli.out, *exclude_constant)?;
            eprintln!("{} curve points -> {}", points.len(), cli.out.display());
        }
        Command::SweepNoise { circuits } => {
            let cfg = config(&cli)?;
            cfg.function().map_err(usage)?;
            let mut named = Vec::new();
            for p in circuits {
                let id = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("circuit")
                    .to_owned();
                named.push((id, circuit(p)?));
            }
            let (rows, cross) = cmd_sweep_noise(&cfg, &named, &cli.out)?;
            eprintln!("{} rows -> {}", rows.len(), cli.out.display());
            if let Some(c) = cross {
                print_json(&c);
            }
        }
        Command::ExportReal { circuit: path } => {
            emit(&format::to_real(&circuit(path)?));
        }
    }
    Ok(())
}

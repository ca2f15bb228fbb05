//! Command-line runner for the fisus library: reproduces the susceptibility
//! and curvature experiments as deterministic, seeded CSV outputs.

mod commands;
mod config;
mod csvout;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use crate::config::{env_pairs, parse_pairs, RunConfig};

const USAGE: &str = "\
fisus: transverse-field Ising susceptibility and curvature experiments

USAGE:
  fisus <COMMAND> [FLAGS]

COMMANDS:
  reduce          print the translation-orbit basis, reduced blocks, and Pauli form
  vqe             optimize the ansatz at every grid point and report energy errors
  sweep           estimate energy, d2E/dr2, and susceptibility across the grid
  mitigate        extrapolation study over plan lengths and both folding methods
  overlap-bench   compare overlap-circuit methods under increasing noise
  oracle          write the exact reference curves

FLAGS:
  --config PATH   flat key=value config file
  --jobs N        worker threads; never changes the output bytes
  --seed N        override the master seed
  --out DIR       override the output directory
  --print-config  print the resolved configuration and exit
  -h, --help      show this help

CONFIG KEYS (defaults):
  l (4)                   even number of sites, 2..=12; circuit commands need 4 or 6
  r_start (0.5)           first coupling value
  r_stop (1.4)            last coupling value
  r_step (0.1)            grid spacing
  estimator (sampled)     exact | sampled | noisy | mitigated
  shots (8192)            shots per expectation estimate
  trials (20, or 100 for mitigated runs and `mitigate`)
  p1 (0.0002)             depolarizing strength after one-qubit gates
  p2 (0.008)              depolarizing strength after wider gates
  scale_factors (1;3)     noise-scale plan for estimator=mitigated
  folding (cnot)          cnot | unitary
  seed (1)                master seed
  out_dir (out)           output directory

Environment overrides use the FISUS_ prefix, e.g. FISUS_SHOTS=1024.
Precedence: defaults < config file < environment < flags.
Every run writes resolved_config.txt next to its CSV files; rerunning with
that file reproduces the output byte for byte.
Exit codes: 0 ok, 2 bad configuration, 3 finished with flagged or failed cells.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Reduce,
    Vqe,
    Sweep,
    Mitigate,
    OverlapBench,
    Oracle,
}

impl Command {
    fn parse(text: &str) -> Option<Self> {
        match text {
            "reduce" => Some(Command::Reduce),
            "vqe" => Some(Command::Vqe),
            "sweep" => Some(Command::Sweep),
            "mitigate" => Some(Command::Mitigate),
            "overlap-bench" => Some(Command::OverlapBench),
            "oracle" => Some(Command::Oracle),
            _ => None,
        }
    }

    fn uses_ansatz(self) -> bool {
        matches!(
            self,
            Command::Vqe | Command::Sweep | Command::Mitigate | Command::OverlapBench
        )
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Cli {
    command: Command,
    config_path: Option<String>,
    jobs: Option<usize>,
    seed: Option<u64>,
    out: Option<String>,
    print_config: bool,
}

fn parse_cli(args: &[String]) -> Result<Option<Cli>, String> {
    let mut command = None;
    let mut config_path = None;
    let mut jobs = None;
    let mut seed = None;
    let mut out = None;
    let mut print_config = false;

    let mut i = 0;
    while i < args.len() {
        let arg = args[i].as_str();
        match arg {
            "--help" | "-h" => return Ok(None),
            "--print-config" => print_config = true,
            "--config" | "--jobs" | "--seed" | "--out" => {
                i += 1;
                let value = args
                    .get(i)
                    .ok_or_else(|| format!("missing value for {arg}"))?;
                match arg {
                    "--config" => config_path = Some(value.clone()),
                    "--jobs" => {
                        let parsed: usize = value
                            .parse()
                            .map_err(|_| format!("bad value for --jobs: `{value}`"))?;
                        if parsed == 0 {
                            return Err("--jobs must be at least 1".to_string());
                        }
                        jobs = Some(parsed);
                    }
                    "--seed" => {
                        seed = Some(
                            value
                                .parse()
                                .map_err(|_| format!("bad value for --seed: `{value}`"))?,
                        );
                    }
                    "--out" => out = Some(value.clone()),
                    _ => unreachable!(),
                }
            }
            text if command.is_none() && !text.starts_with('-') => {
                command =
                    Some(Command::parse(text).ok_or_else(|| format!("unknown command `{text}`"))?);
            }
            other => return Err(format!("unexpected argument `{other}`")),
        }
        i += 1;
    }

    let command = command.ok_or_else(|| "missing command".to_string())?;
    Ok(Some(Cli {
        command,
        config_path,
        jobs,
        seed,
        out,
        print_config,
    }))
}

enum Failure {
    Config(String),
    Run(String),
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let file_layer = match &cli.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {path}: {e}")))?;
            parse_pairs(&text).map_err(|m| Failure::Config(format!("{path}: {m}")))?
        }
        None => BTreeMap::new(),
    };
    let env_layer = env_pairs().map_err(Failure::Config)?;
    let mut flag_layer = BTreeMap::new();
    if let Some(seed) = cli.seed {
        flag_layer.insert("seed".to_string(), seed.to_string());
    }
    if let Some(out) = &cli.out {
        flag_layer.insert("out_dir".to_string(), out.clone());
    }

    let config = RunConfig::resolve(
        &[&file_layer, &env_layer, &flag_layer],
        cli.command == Command::Mitigate,
    )
    .map_err(Failure::Config)?;

    if cli.print_config {
        print!("{}", config.canonical());
        return Ok(true);
    }
    if cli.command.uses_ansatz() && config.l != 4 && config.l != 6 {
        return Err(Failure::Config(format!(
            "this command supports l=4 or l=6, got l={}",
            config.l
        )));
    }

    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Run(e.to_string()))?;
    }

    let out = Path::new(&config.out_dir);
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Run(format!("cannot create {}: {e}", config.out_dir)))?;
    std::fs::write(out.join("resolved_config.txt"), config.canonical())
        .map_err(|e| Failure::Run(e.to_string()))?;

    let outcome = match cli.command {
        Command::Reduce => commands::cmd_reduce(&config, out),
        Command::Vqe => commands::cmd_vqe(&config, out),
        Command::Sweep => commands::cmd_sweep(&config, out),
        Command::Mitigate => commands::cmd_mitigate(&config, out),
        Command::OverlapBench => commands::cmd_overlap_bench(&config, out),
        Command::Oracle => commands::cmd_oracle(&config, out),
    };
    outcome.map_err(Failure::Run)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_cli(&args) {
        Ok(Some(cli)) => cli,
        Ok(None) => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        Err(message) => {
            eprintln!("error: {message}\n\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("finished with flagged or failed cells");
            ExitCode::from(3)
        }
        Err(Failure::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Run(message)) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

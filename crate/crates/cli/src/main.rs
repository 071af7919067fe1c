use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use sle_lab::{catalog, configure_workers, execute, persist, CliError, ExitCode, ExperimentConfig, RunSpec};

#[derive(Parser)]
#[command(name = "sle-lab", version, about = "Configurational SLE laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write record.json, CSV artifacts and the config copy.
    Run {
        #[arg(long)]
        experiment: Option<String>,
        /// TOML configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Enumeration budget for exact lattice sums.
        #[arg(long)]
        budget: Option<usize>,
        /// Inline parameter, `key=value` in TOML syntax. Repeatable.
        #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// List the experiment catalog.
    List {
        #[arg(long)]
        json: bool,
    },
}

fn parse_param(raw: &str) -> Result<(String, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--param {raw:?} is not KEY=VALUE")))?;
    let table: toml::Table = toml::from_str(&format!("v = {value}"))
        .or_else(|_| toml::from_str(&format!("v = {:?}", value)))
        .map_err(|e: toml::de::Error| CliError::Config(format!("--param {key}: {}", e.message())))?;
    Ok((key.trim().to_string(), table["v"].clone()))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::List { json } => {
            let cat = catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&cat).map_err(|e| CliError::Io(e.to_string()))?);
            } else {
                for e in cat {
                    let tag = if e.acceptance { " [acceptance]" } else { "" };
                    println!("{}{tag}\n  {}\n  checks: {}", e.name, e.summary, e.anchor);
                    for p in e.params {
                        println!("    {} : {} = {}", p.name, p.kind, p.default);
                    }
                }
            }
            Ok(ExitCode::Ok)
        }
        Command::Run {
            experiment,
            config,
            seed,
            replicas,
            out,
            budget,
            params,
        } => {
            let (mut cfg, base) = match &config {
                Some(path) => (
                    ExperimentConfig::load(path)?,
                    path.parent().map(PathBuf::from).unwrap_or_default(),
                ),
                None => (ExperimentConfig::default(), PathBuf::from(".")),
            };
            cfg.experiment = experiment.or(cfg.experiment);
            cfg.seed = seed.or(cfg.seed);
            cfg.replicas = replicas.or(cfg.replicas);
            cfg.out = out.or(cfg.out);
            cfg.budget = budget.or(cfg.budget);
            for raw in &params {
                let (k, v) = parse_param(raw)?;
                cfg.params.insert(k, v);
            }
            let spec = RunSpec::resolve(cfg, base)?;
            configure_workers()?;
            let output = execute(&spec)?;
            let dir = spec.out.clone().unwrap_or_else(|| spec.default_out());
            persist(&spec, &output, &dir)?;
            let status = match output.record.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "done",
            };
            println!("{status} {} -> {}", spec.experiment, dir.display());
            for (name, q) in &output.record.values {
                match q.std_error {
                    Some(se) => println!("  {name} = {} +- {se}", q.value),
                    None => println!("  {name} = {}", q.value),
                }
            }
            Ok(output.exit_code())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sle-lab: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}

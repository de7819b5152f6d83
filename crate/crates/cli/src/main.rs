use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cfweave_cli::instance::{generate, parse_params, read_instance_file, write_instance};
use cfweave_cli::run::family_bounds;
use cfweave_cli::scenario::StrategySpec;
use cfweave_cli::{run_scenario, CliError, Result, Scenario};

#[derive(Parser)]
#[command(name = "cfweave", version, about = "Certify weaving bounds of c-fusion frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write a JSON report.
    Run {
        scenario: PathBuf,
        /// Report path; defaults to the scenario's `output`, then `<scenario>.report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exhaustive enumeration budget.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write an instance file from a named generator.
    Gen {
        name: String,
        /// Generator parameters as key=value.
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print member and universal bounds of an instance or scenario file.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(path: &Path, out: Option<PathBuf>, budget: Option<u64>, seed: Option<u64>) -> Result<i32> {
    let mut scenario = Scenario::read(path)?;
    if let Some(b) = budget {
        scenario.strategy.budget = b;
    }
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let report = run_scenario(&scenario, &base_dir(path))?;
    let out = out
        .or_else(|| scenario.output.as_ref().map(|o| base_dir(path).join(o)))
        .unwrap_or_else(|| path.with_extension("report.json"));
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::input(format!("cannot serialize report: {e}")))?;
    write(&out, &(json + "\n"))?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    println!("report written to {}", out.display());
    Ok(report.exit_code())
}

fn bounds(path: &Path, budget: Option<u64>) -> Result<i32> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let is_scenario = toml::from_str::<toml::Table>(&text).is_ok_and(|t| t.contains_key("checks"))
        || path.extension().is_some_and(|e| e == "json");
    let (instance, seed, mut strategy, rank_tol) = if is_scenario {
        let s = Scenario::read(path)?;
        (s.instance, s.seed, s.strategy, s.tolerances.rank_tol)
    } else {
        let defaults = cfweave::certify::CertifyConfig::default();
        (read_instance_file(path)?, 0, StrategySpec::default(), defaults.rank_tol)
    };
    if let Some(b) = budget {
        strategy.budget = b;
    }
    let fam = instance.load(&base_dir(path), seed, rank_tol)?.family(rank_tol)?;
    let summary = family_bounds(&fam, &strategy.search(seed))?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::input(format!("cannot serialize bounds: {e}")))?;
    println!("{json}");
    Ok(0)
}

fn gen(name: &str, params: &[String], out: &Path) -> Result<i32> {
    let spec = generate(name, &parse_params(params)?, 0)?;
    write(out, &write_instance(&spec)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            budget,
            seed,
        } => run(&scenario, out, budget, seed),
        Command::Gen { name, params, out } => gen(&name, &params, &out),
        Command::Bounds { file, budget } => bounds(&file, budget),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

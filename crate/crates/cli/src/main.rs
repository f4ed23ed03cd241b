use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relhyp_cli::{
    error_report, limits_from_env, parse_spec, run_experiment, CliError, Command, ExperimentConfig,
};
use relhyp_core::RationalBoundaryPoint;

/// Finite-depth experiments on boundaries of free groups relative to
/// malnormal subgroup collections.
///
/// Exit status: 0 success, 2 a hypothesis check failed, 3 a resource cap was
/// hit, 1 any other error. Caps come from RELHYP_MAX_BALL_VERTICES,
/// RELHYP_MAX_QUADRUPLES and RELHYP_MAX_COSETS.
#[derive(Parser)]
#[command(name = "relhyp", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Four-point δ of a Cayley ball or an adjacency-list graph.
    Delta(Common),
    /// Stallings core graphs of the subgroups.
    Fold(Common),
    /// Exact almost-malnormality decision with witness.
    Malnormal(Common),
    /// Coset-intersection diameters D_emp(R, N).
    Bci(Common),
    /// Depth-n cylinder partition of the boundary quotient.
    Quotient(Common),
    /// Refinement map between two depths with perfectness and USC checks.
    Refine(Common),
    /// Collapsing check for g_i = s·t^i.
    Collapse(Common),
    /// Conical limit point certificate.
    Conical(Common),
    /// Bounded parabolic point certificate.
    Parabolic(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment document (TOML).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
    /// Finer depth for `refine`.
    #[arg(long)]
    deeper: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    /// Comma-separated ball radii for a `bci` sweep.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<usize>>,
    #[arg(long = "R")]
    r: Option<usize>,
    #[arg(long)]
    imax: Option<usize>,
    #[arg(long)]
    ball_cap: Option<u64>,
    /// Rational boundary point `u(v)` for `conical`.
    #[arg(long)]
    point: Option<RationalBoundaryPoint>,
    /// Adjacency-list graph for `delta`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Graphviz sidecar path.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// CSV sidecar path for sweeps.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Delta(c) => (Command::Delta, c),
            Sub::Fold(c) => (Command::Fold, c),
            Sub::Malnormal(c) => (Command::Malnormal, c),
            Sub::Bci(c) => (Command::Bci, c),
            Sub::Quotient(c) => (Command::Quotient, c),
            Sub::Refine(c) => (Command::Refine, c),
            Sub::Collapse(c) => (Command::Collapse, c),
            Sub::Conical(c) => (Command::Conical, c),
            Sub::Parabolic(c) => (Command::Parabolic, c),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(command: Command, args: Common) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_spec(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.command = Some(command);
    let p = &mut config.params;
    macro_rules! set {
        ($($flag:ident => $slot:expr),*) => {
            $(if let Some(v) = args.$flag { $slot = Some(v); })*
        };
    }
    set!(depth => p.depth, deeper => p.deeper, radius => p.radius, radii => p.radii, r => p.r,
         imax => p.imax, ball_cap => p.ball_cap, point => p.point, graph => p.graph,
         out => config.output.out, dot => config.output.dot, csv => config.output.csv);
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn emit(config: &ExperimentConfig, json: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(json).expect("reports serialize") + "\n";
    match &config.output.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    let mut config = ExperimentConfig {
        command: Some(command),
        ..ExperimentConfig::default()
    };
    let outcome = load(command, args).and_then(|c| {
        config = c;
        let limits = limits_from_env()?;
        let run = run_experiment(&config, &limits)?;
        if let (Some(path), Some(text)) = (&config.output.dot, &run.dot) {
            write(path, text)?;
        }
        if let (Some(path), Some(text)) = (&config.output.csv, &run.csv) {
            write(path, text)?;
        }
        let json = serde_json::to_value(&run.report).expect("reports serialize");
        emit(&config, &json)?;
        Ok(run.report.hypothesis_failure)
    });
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error [{}]: {err}", err.code());
            let _ = emit(&config, &error_report(command, &config, &err));
            ExitCode::from(err.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netdecide::harness::output::{summarize, write_chain_sweep, write_classify_bench, write_traces};
use netdecide::harness::{run_chain_sweep, run_classify_bench, run_scenario, ScenarioConfig, ScenarioKind};
use netdecide::{Error, Result};

#[derive(Parser)]
#[command(name = "netdecide", version, about = "Diffusion adaptation with distributed model agreement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static network with two observed models.
    Simulate(RunArgs),
    /// Mean-field and exact decision-chain sweeps.
    AnalyzeChain(RunArgs),
    /// Controlled benchmark of the neighbor classifier.
    ClassifyBench(RunArgs),
    /// Mobile agents choosing between two targets.
    Fish(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON scenario file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: fig5, fig6, fig8, fig9, fig14, chain, classify.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, default_preset: &str, kind: ScenarioKind) -> Result<(ScenarioConfig, PathBuf)> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ScenarioConfig::load(path).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
                other => other,
            })?,
            (None, Some(name)) => ScenarioConfig::preset(name)?,
            (None, None) => ScenarioConfig::preset(default_preset)?,
        };
        if cfg.kind != kind {
            return Err(Error::Config(format!(
                "this command runs {kind:?} scenarios, the configuration describes {:?}",
                cfg.kind
            )));
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        if let Some(i) = self.iterations {
            cfg.iterations = i;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.validate()?;
        let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("runs"));
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> Result<()> {
    let written = match cli.command {
        Command::Simulate(a) => {
            let (cfg, out) = a.resolve("fig5", ScenarioKind::StaticTwoModel)?;
            let traces = run_scenario(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summarize(&traces))?);
            write_traces(&out, &traces)?
        }
        Command::Fish(a) => {
            let (cfg, out) = a.resolve("fig14", ScenarioKind::Fish)?;
            let traces = run_scenario(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summarize(&traces))?);
            write_traces(&out, &traces)?
        }
        Command::AnalyzeChain(a) => {
            let (cfg, out) = a.resolve("chain", ScenarioKind::ChainSweep)?;
            let sweep = run_chain_sweep(&cfg)?;
            for (n, ok) in &sweep.monotone {
                println!("N = {n}: rho(Q) strictly decreasing in K: {ok}");
            }
            write_chain_sweep(&out, &cfg, &sweep)?
        }
        Command::ClassifyBench(a) => {
            let (cfg, out) = a.resolve("classify", ScenarioKind::ClassifyBench)?;
            let bench = run_classify_bench(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&bench)?);
            write_classify_bench(&out, &cfg, &bench)?
        }
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

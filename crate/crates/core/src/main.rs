use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qmirror::harness::{explain, load_config, run_experiment, ExperimentKind, OutputFormat};

#[derive(Parser, Debug)]
#[command(name = "qmirror", version, about = "Quantum-mirror two-photon experiment simulator")]
struct Cli {
    /// Experiment kind (phasematch, twm, mirror, diffract, ghost-image, ghost-diffract, direct-qm).
    #[arg(required_unless_present = "explain")]
    kind: Option<ExperimentKind>,

    /// Experiment configuration file (TOML).
    #[arg(long, required_unless_present = "explain")]
    config: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the output format.
    #[arg(long)]
    format: Option<OutputFormat>,

    /// Override the number of Monte Carlo trials.
    #[arg(long)]
    trials: Option<u64>,

    /// Print the equations a kind exercises and exit.
    #[arg(long, value_name = "KIND", conflicts_with_all = ["config", "kind"])]
    explain: Option<ExperimentKind>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(kind) = cli.explain {
        print!("{}", explain(kind));
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let kind = cli.kind.expect("required by clap");
    let mut cfg = load_config(cli.config.as_ref().expect("required by clap"))?;
    if cfg.kind != kind {
        return Err(format!("configuration is for kind {}, not {kind}", cfg.kind).into());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = cli.out {
        let cwd = std::env::current_dir()?;
        cfg.output.dir = cwd.join(out);
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(trials) = cli.trials {
        if let Some(mc) = cfg.monte_carlo.as_mut() {
            mc.trials = trials;
        }
    }
    cfg.validate()?;
    let report = run_experiment(&cfg)?;
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {} = {} ({} {})", c.name, c.value, c.comparison, c.threshold);
    }
    for f in &report.files {
        println!("wrote {}", f);
    }
    Ok(report.all_passed())
}

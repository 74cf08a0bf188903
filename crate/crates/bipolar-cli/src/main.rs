use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bipolar_core::config::{apply_overrides, RunConfig};
use bipolar_core::error::Error;
use bipolar_core::output::write_outputs;
use bipolar_core::presets;
use bipolar_core::runner::{evaluate_asserts, execute, validate};

const EXIT_VALIDATION: u8 = 2;
const EXIT_INSTABILITY: u8 = 3;
const EXIT_ASSERT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "bipolar",
    version,
    about = "Propagate the counter-propagating decomposition psi = psi_+ + psi_- of a 1D wavepacket through scattering potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run and write snapshot and summary files
    Run(RunArgs),
    /// Report admissibility, edge-clearance and stability findings for a config
    Validate(ConfigArgs),
    /// List the built-in benchmark presets
    ListPresets,
}

#[derive(Args)]
struct ConfigArgs {
    /// Built-in preset name (see list-presets)
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Path to a TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. --set time.dt=0.05 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for config.toml, summary.json and snapshot CSVs
    #[arg(long)]
    output: Option<PathBuf>,
    /// Evaluate the config's result assertions; any failure exits with 4
    #[arg(long, default_value_t = false)]
    assert: bool,
    /// Force the cross-validation oracle on or off
    #[arg(long, value_parser = ["on", "off"])]
    oracle: Option<String>,
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, Error> {
    let base = match (&args.preset, &args.config) {
        (Some(name), None) => presets::preset(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown preset `{name}`; available: {}",
                presets::preset_names().join(", ")
            ))
        })?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_toml(&text)?
        }
        _ => {
            return Err(Error::Config(
                "exactly one of --preset or --config is required".into(),
            ))
        }
    };
    apply_overrides(&base, &args.set)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Unstable { .. }
        | Error::OracleEdgeContamination { .. }
        | Error::SpliceMismatch { .. } => EXIT_INSTABILITY,
        Error::Io(_) => 1,
        _ => EXIT_VALIDATION,
    }
}

fn cmd_run(args: &RunArgs) -> Result<u8, Error> {
    let mut config = load_config(&args.config)?;
    if let Some(flag) = &args.oracle {
        config.oracle.enabled = flag == "on";
    }

    let started = Instant::now();
    let artifacts = execute(&config)?;
    eprintln!(
        "run finished: {} steps in {:.2} s",
        artifacts.summary.schedule.steps,
        started.elapsed().as_secs_f64()
    );

    let outcomes = evaluate_asserts(&artifacts);
    if let Some(dir) = &args.output {
        write_outputs(&artifacts, Some(&outcomes), dir)?;
        eprintln!("outputs written to {}", dir.display());
    }

    let s = &artifacts.summary;
    println!("mode: {} ({} surface(s))", s.mode, s.n_surfaces);
    for i in 0..s.reflection.len() {
        println!(
            "surface {}: R = {:.6}  T = {:.6}",
            i + 1,
            s.reflection[i],
            s.transmission[i]
        );
    }
    println!(
        "combined probability: initial {:.6}, min {:.6} at t = {}, final {:.6}",
        s.combined_probability_initial,
        s.combined_probability_min,
        s.combined_probability_min_time,
        s.combined_probability_final
    );
    println!(
        "conditions: 1 {}  2 {}  3 {} ({} node events)",
        verdict(s.conditions.condition1.pass),
        verdict(s.conditions.condition2.pass),
        verdict(s.conditions.condition3.pass),
        s.conditions.condition3.node_events.len()
    );
    if let (Some(stage), Some(peak)) = (s.stage_transition_time, s.peak_coincidence_time) {
        println!("stage transition at t = {stage} (peak coincidence at t = {peak})");
    }
    if let Some(diff) = s.oracle_max_abs_diff {
        println!("oracle max |psi_+ + psi_- - psi_oracle| = {diff:.3e}");
    }

    let mut failed = false;
    for outcome in &outcomes {
        println!(
            "assert {}: {} ({})",
            outcome.name,
            verdict(outcome.pass),
            outcome.detail
        );
        failed |= !outcome.pass;
    }
    if args.assert && failed {
        return Ok(EXIT_ASSERT);
    }
    Ok(0)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_validate(args: &ConfigArgs) -> Result<u8, Error> {
    let config = load_config(args)?;
    let findings = validate(&config)?;
    if findings.is_empty() {
        println!("no findings");
    }
    for f in &findings {
        println!("{:?}: {} ({})", f.severity, f.message, f.code);
    }
    Ok(0)
}

fn cmd_list_presets() -> u8 {
    for (name, description) in presets::PRESETS {
        println!("{name:<22} {description}");
    }
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Validate(args) => cmd_validate(args),
        Command::ListPresets => Ok(cmd_list_presets()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

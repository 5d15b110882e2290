mod args;
mod commands;
mod failure;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use commands::Run;
use failure::{CliError, Kind};
use manifest::{manifest_path_for, RunManifest};

const THREADS_VAR: &str = "RESONATORSIM_THREADS";

/// Cap the rayon pool from the environment. Returns the cap, if any.
fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot size thread pool: {e}")))?;
    Ok(Some(threads))
}

struct Invocation {
    name: &'static str,
    flags: serde_json::Value,
    config: Option<PathBuf>,
    manifest: PathBuf,
}

fn describe(command: &Command) -> Invocation {
    fn flags(args: &impl Serialize) -> serde_json::Value {
        serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
    }
    let (name, flags, config, out): (_, _, _, &Path) = match command {
        Command::Evolve(a) => ("evolve", flags(a), a.system.config.clone(), &a.out),
        Command::Crossings(a) => ("crossings", flags(a), None, &a.out),
        Command::Fidelity(a) => ("fidelity", flags(a), a.system.config.clone(), &a.out),
        Command::OptimizeG1(a) => ("optimize-g1", flags(a), a.system.config.clone(), &a.out),
        Command::GmSweep(a) => ("gm-sweep", flags(a), a.system.config.clone(), &a.out),
        Command::Werner(a) => ("werner", flags(a), a.system.config.clone(), &a.out),
        Command::SwVerify(a) => ("sw-verify", flags(a), a.system.config.clone(), &a.out),
        Command::Scenario(a) => {
            return Invocation {
                name: "scenario",
                flags: flags(a),
                config: None,
                manifest: a.out_dir.join("manifest.json"),
            }
        }
    };
    Invocation { name, flags, config, manifest: manifest_path_for(out) }
}

fn dispatch(command: &Command, run: &mut Run) -> Result<(), CliError> {
    match command {
        Command::Evolve(a) => commands::evolve(a, run),
        Command::Crossings(a) => commands::crossings(a, run),
        Command::Fidelity(a) => commands::fidelity(a, run),
        Command::OptimizeG1(a) => commands::optimize(a, run),
        Command::GmSweep(a) => commands::gm_sweep(a, run),
        Command::Werner(a) => commands::werner(a, run),
        Command::SwVerify(a) => commands::sw_verify(a, run),
        Command::Scenario(a) => commands::scenario_all(a, run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let message = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", CliError::new(Kind::Usage, message));
            eprintln!("hint: run 'resonatorsim --help' for usage");
            return ExitCode::from(Kind::Usage.exit_code());
        }
    };
    let threads = match configure_threads() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.kind.exit_code());
        }
    };

    let invocation = describe(&cli.command);
    let mut run = Run::default();
    let outcome = dispatch(&cli.command, &mut run);
    let status = match &outcome {
        Ok(()) => 0,
        Err(e) => e.kind.exit_code(),
    };
    if let Err(e) = &outcome {
        eprintln!("{e}");
    }

    let manifest = RunManifest {
        command: invocation.name.to_string(),
        argv: std::env::args().skip(1).collect(),
        flags: invocation.flags,
        config: invocation.config,
        outputs: run.outputs,
        exit_status: status,
        version: resonatorsim::VERSION,
        threads,
    };
    let manifest_dir_exists = invocation.manifest.parent().is_none_or(|d| d.as_os_str().is_empty() || d.exists());
    if manifest_dir_exists {
        if let Err(e) = manifest.write(&invocation.manifest) {
            eprintln!("{}", CliError::new(Kind::Io, format!("writing '{}': {e}", invocation.manifest.display())));
            return ExitCode::from(status.max(1));
        }
    }
    ExitCode::from(status)
}

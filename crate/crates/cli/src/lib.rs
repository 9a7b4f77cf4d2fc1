//! `autores`: figure presets, stability sweeps, Lyapunov checks, capture maps
//! and the oscillator/slow-flow cross-check, all writing CSV or JSON plus a
//! replayable [`RunManifest`].

pub mod args;
pub mod capture;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod presets;
pub mod runs;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

use commands::{Ran, Session};
use output::{write_json, OutputSet, SCHEMA_VERSION};

/// What a finished run produced.
#[derive(Debug)]
pub struct Finished {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub stdout: String,
}

fn merged_args(raw: Vec<String>) -> CliResult<Vec<String>> {
    let Some(path) = manifest::config_path(&raw[1..]) else {
        return Ok(raw);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let config: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{path}: {e}")))?;
    manifest::merge_config(&raw, &config)
}

/// Parses `args` (program name first), runs the command and writes its manifest.
pub fn run<I, T>(args: I) -> CliResult<Finished>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let mut raw: Vec<String> = args.into_iter().map(Into::into).collect();
    if raw.is_empty() {
        raw.push("autores".into());
    }
    let merged = merged_args(raw)?;
    let cli = Cli::try_parse_from(&merged)?;
    if let Command::Replay(r) = &cli.command {
        return replay(&cli, &r.manifest);
    }
    let recorded = manifest::strip_session_flags(&merged[1..]);
    match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::BadInput(format!("cannot start {n} workers: {e}")))?
            .install(|| execute(&cli, recorded)),
        None => execute(&cli, recorded),
    }
}

fn replay(cli: &Cli, path: &std::path::Path) -> CliResult<Finished> {
    let m = RunManifest::load(path)?;
    let mut args = vec!["autores".to_string()];
    args.extend(m.argv.iter().cloned());
    if args.iter().any(|a| a == "replay") {
        return Err(CliError::BadInput("a manifest cannot record a replay".into()));
    }
    args.push(format!("--out-dir={}", cli.out_dir.display()));
    if let Some(n) = cli.workers {
        args.push(format!("--workers={n}"));
    }
    run(args)
}

fn execute(cli: &Cli, argv: Vec<String>) -> CliResult<Finished> {
    let session = Session {
        seed: cli.seed,
        tol: cli.tol,
    };
    let stem = match &cli.command {
        Command::Preset(p) => p.name.as_str(),
        other => other.name(),
    };
    let mut out = OutputSet::new(&cli.out_dir, stem)?;
    let ran: Ran = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &session, &mut out)?,
        Command::Asymptotics(a) => commands::asymptotics(a, &mut out)?,
        Command::Classify(a) => commands::classify_cmd(a, &mut out)?,
        Command::Lyapunov(a) => commands::lyapunov(a, &session, &mut out)?,
        Command::Basin(a) => commands::basin(a, &session, &mut out)?,
        Command::Crosscheck(a) => commands::crosscheck(a, &session, &mut out)?,
        Command::Preset(a) => commands::preset(a, &session, &mut out)?,
        Command::Replay(_) => unreachable!("replay is resolved before execution"),
    };
    let manifest_path = out.dir().join(format!("{}.manifest.json", out.stem()));
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        argv,
        params: ran.params,
        seed: ran.seed.unwrap_or(session.seed),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        outputs: out.into_files(),
    };
    write_json(&manifest_path, &manifest)?;
    Ok(Finished {
        manifest,
        manifest_path,
        stdout: ran.stdout,
    })
}

/// Runs the tool as the binary does and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    match run(args) {
        Ok(done) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(done.stdout.as_bytes());
            let _ = writeln!(stdout, "manifest: {}", done.manifest_path.display());
            0
        }
        Err(CliError::Usage(e)) if !e.use_stderr() => {
            let _ = e.print();
            0
        }
        Err(err) => {
            let report = err.report();
            if let CliError::Usage(e) = &err {
                let _ = e.print();
            }
            let json = serde_json::to_string(&report).unwrap_or_else(|_| "{}".into());
            let _ = writeln!(std::io::stderr(), "{json}");
            report.exit_code
        }
    }
}

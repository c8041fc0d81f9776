//! `vdbcode`: batch workflows over VDB code tables.
//!
//! Every subcommand that produces files records a run manifest next to its
//! first output (or at `--manifest`); `vdbcode replay` re-runs a manifest and
//! checks the outputs are byte-identical.

mod commands;
mod manifest;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use vdb_core::channel::UPSETS_FORMAT;
use vdb_core::codegen::{CONSTRAINT_FORMAT, TABLE_FORMAT};
use vdb_core::setgen::SETS_FORMAT;
use vdb_core::VdbError;

use commands::{
    BoundsArgs, DistortArgs, EncodeArgs, IngestArgs, SetsArgs, SimulateArgs, VerifyArgs,
};
use manifest::{sha256_file, RunManifest};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: vdb-sets-v1, vdb-constraint-v1, vdb-table-v1, vdb-upsets-v1)"
);

pub fn formats() -> Value {
    json!({
        "sets": SETS_FORMAT,
        "constraint": CONSTRAINT_FORMAT,
        "table": TABLE_FORMAT,
        "upsets": UPSETS_FORMAT,
    })
}

#[derive(Parser, Debug)]
#[command(name = "vdbcode", version = VERSION, about = "Value-deviation-bounded code tables")]
struct Cli {
    /// Write the run manifest here instead of next to the first output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Do not write a run manifest.
    #[arg(long, global = true)]
    no_manifest: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the placement sets S_m.
    Sets(SetsArgs),
    /// Exact pair counts next to both closed-form bounds.
    Bounds(BoundsArgs),
    /// Solve a constraint file for a code table.
    Encode(EncodeArgs),
    /// Per-distortion margins of a table against a constraint.
    Verify(VerifyArgs),
    /// Monte Carlo distortion distribution of a table.
    Simulate(SimulateArgs),
    /// Distortion distribution under forced-value upsets.
    Distort(DistortArgs),
    /// Histogram one column of a CSV trace into a value PMF.
    Ingest(IngestArgs),
    /// Re-run a manifest and compare its outputs byte for byte.
    Replay { manifest: PathBuf },
}

/// Why a command did not produce a passing result.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files.
    Usage(String),
    /// Two computations that must agree did not.
    Mismatch(String),
}

impl Failure {
    pub fn io(path: &Path, e: io::Error) -> Self {
        Failure::Usage(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Mismatch(m) => write!(f, "mismatch: {m}"),
        }
    }
}

impl From<VdbError> for Failure {
    fn from(e: VdbError) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// What a subcommand did, for the manifest.
pub struct Run {
    pub params: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub pass: bool,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("VDBCODE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "VDBCODE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn dispatch(command: &Command) -> Result<(&'static str, Run), Failure> {
    Ok(match command {
        Command::Sets(a) => ("sets", commands::sets(a)?),
        Command::Bounds(a) => ("bounds", commands::bounds(a)?),
        Command::Encode(a) => ("encode", commands::encode(a)?),
        Command::Verify(a) => ("verify", commands::verify(a)?),
        Command::Simulate(a) => ("simulate", commands::simulate(a)?),
        Command::Distort(a) => ("distort", commands::distort(a)?),
        Command::Ingest(a) => ("ingest", commands::ingest(a)?),
        Command::Replay { .. } => unreachable!("replay is handled before dispatch"),
    })
}

fn digests(paths: &[PathBuf]) -> Result<Vec<(PathBuf, String)>, Failure> {
    paths
        .iter()
        .map(|p| Ok((p.clone(), sha256_file(p)?)))
        .collect()
}

fn run(cli: &Cli, argv: Vec<String>) -> Result<u8, Failure> {
    let (subcommand, run) = dispatch(&cli.command)?;
    let exit_code = if run.pass { 0 } else { 1 };
    if cli.no_manifest {
        return Ok(exit_code);
    }
    let manifest = RunManifest {
        subcommand: subcommand.to_string(),
        argv,
        cwd: std::env::current_dir()
            .map_err(|e| Failure::Usage(format!("working directory: {e}")))?,
        params: run.params,
        seed: run.seed,
        inputs: digests(&run.inputs)?,
        outputs: digests(&run.outputs)?,
        exit_code,
    };
    let target = cli.manifest.clone().or_else(|| {
        run.outputs.first().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match target {
        Some(path) => {
            std::fs::write(&path, manifest.to_json()).map_err(|e| Failure::io(&path, e))?
        }
        None => eprint!("{}", manifest.to_json()),
    }
    Ok(exit_code)
}

fn replay(path: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let recorded = RunManifest::parse(&text)?;
    std::env::set_current_dir(&recorded.cwd).map_err(|e| Failure::io(&recorded.cwd, e))?;
    for (input, digest) in &recorded.inputs {
        if &sha256_file(input)? != digest {
            return Err(Failure::Mismatch(format!(
                "input {} changed since the run",
                input.display()
            )));
        }
    }
    let cli = Cli::try_parse_from(&recorded.argv)
        .map_err(|e| Failure::Usage(format!("manifest argv does not parse: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(Failure::Usage(
            "a manifest cannot replay another replay".into(),
        ));
    }
    let (_, run) = dispatch(&cli.command)?;
    let exit_code = if run.pass { 0 } else { 1 };
    if exit_code != recorded.exit_code {
        return Err(Failure::Mismatch(format!(
            "exit code {exit_code}, manifest recorded {}",
            recorded.exit_code
        )));
    }
    for (output, digest) in &recorded.outputs {
        if &sha256_file(output)? != digest {
            return Err(Failure::Mismatch(format!(
                "output {} differs",
                output.display()
            )));
        }
    }
    println!("replay: {} outputs identical", recorded.outputs.len());
    Ok(0)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Replay { manifest } => replay(manifest),
        _ => run(&cli, argv),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
